//! Forward-mode scalars carrying a value and its derivative with respect to
//! the single time input.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A first-order dual number; arithmetic applies the chain rule exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    /// A constant: no dependence on the time input.
    pub fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    /// The time input itself (or any seed direction).
    pub fn variable(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub fn tanh(self) -> Self {
        let y = self.value.tanh();
        Self { value: y, deriv: (1.0 - y * y) * self.deriv }
    }

    pub fn square(self) -> Self {
        Self { value: self.value * self.value, deriv: 2.0 * self.value * self.deriv }
    }

    pub fn scale(self, c: f64) -> Self {
        Self { value: c * self.value, deriv: c * self.deriv }
    }

    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual { value: self.value + rhs.value, deriv: self.deriv + rhs.deriv }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual { value: self.value - rhs.value, deriv: self.deriv - rhs.deriv }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value * rhs.value,
            deriv: self.value * rhs.deriv + self.deriv * rhs.value,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let value = self.value / rhs.value;
        Dual { value, deriv: (self.deriv - value * rhs.deriv) / rhs.value }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { value: -self.value, deriv: -self.deriv }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual { value: self.value + rhs, deriv: self.deriv }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual { value: self.value - rhs, deriv: self.deriv }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        self.scale(rhs)
    }
}

/// Run a dual-valued computation at time `t` and return each output as a
/// `(value, time-derivative)` pair.
pub fn forward_with_time_derivative<F>(f: F, t: f64) -> Vec<(f64, f64)>
where
    F: FnOnce(Dual) -> Vec<Dual>,
{
    f(Dual::variable(t, 1.0)).into_iter().map(|d| (d.value, d.deriv)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_of_time() {
        let out = forward_with_time_derivative(|t| vec![t.square()], 3.0);
        assert_eq!(out, vec![(9.0, 6.0)]);
    }

    #[test]
    fn tanh_at_zero() {
        let out = forward_with_time_derivative(|t| vec![t.tanh()], 0.0);
        assert_eq!(out, vec![(0.0, 1.0)]);
    }

    #[test]
    fn tanh_chain_rule_is_exact() {
        let a = Dual::variable(0.7, 1.3);
        let y = a.tanh();
        let t = a.value.tanh();
        assert_eq!(y.deriv, (1.0 - t * t) * a.deriv);
    }

    #[test]
    fn division_matches_quotient_rule() {
        let a = Dual::variable(2.0, 0.5);
        let b = Dual::variable(4.0, -1.0);
        let q = a / b;
        assert!((q.value - 0.5).abs() < 1e-15);
        // (a'b - ab')/b^2 = (0.5*4 - 2*(-1))/16 = 0.25
        assert!((q.deriv - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_layer_network_matches_finite_difference() {
        // A tiny fixed-weight 1-3-1 tanh network evaluated as duals.
        let net = |t: Dual| {
            let w1 = [0.4, -0.9, 1.7];
            let b1 = [0.1, 0.0, -0.3];
            let w2 = [0.8, 0.5, -1.1];
            let mut acc = Dual::constant(0.2);
            for j in 0..3 {
                acc = acc + (t * w1[j] + b1[j]).tanh() * w2[j];
            }
            vec![acc]
        };
        let t0 = 0.37;
        let (_, deriv) = forward_with_time_derivative(net, t0)[0];
        let h = 1e-5;
        let fp = net(Dual::constant(t0 + h))[0].value;
        let fm = net(Dual::constant(t0 - h))[0].value;
        let fd = (fp - fm) / (2.0 * h);
        assert!(
            ((deriv - fd) / fd).abs() < 1e-6,
            "dual {deriv} vs finite difference {fd}"
        );
    }
}
