//! The coefficient field: fractions of integer polynomials in `(b, e, g)`,
//! kept reduced with a canonical denominator sign.

use std::fmt;

use num::rational::BigRational;
use num::Zero;

use super::intpoly::{gcd, IntPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coef {
    num: IntPoly,
    den: IntPoly,
}

impl Coef {
    pub fn zero() -> Self {
        Self { num: IntPoly::zero(), den: IntPoly::one() }
    }

    pub fn one() -> Self {
        Self { num: IntPoly::one(), den: IntPoly::one() }
    }

    pub fn from_int(c: i64) -> Self {
        Self { num: IntPoly::constant(c), den: IntPoly::one() }
    }

    pub fn from_poly(p: IntPoly) -> Self {
        Self { num: p, den: IntPoly::one() }
    }

    pub fn new(num: IntPoly, den: IntPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self { num, den }.reduced()
    }

    fn reduced(self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let g = gcd(&self.num, &self.den);
        let mut num = self.num.div_exact(&g).expect("gcd divides");
        let mut den = self.den.div_exact(&g).expect("gcd divides");
        let canonical = den.sign_normalized();
        if canonical != den {
            num = num.neg();
            den = canonical;
        }
        Self { num, den }
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// `Some(n)` when the coefficient is the integer `n`.
    pub fn as_integer(&self) -> Option<num::BigInt> {
        if !self.den.is_one() {
            return None;
        }
        self.num.as_constant()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .reduced()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }.reduced()
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero coefficient");
        Self { num: self.num.mul(&other.den), den: self.den.mul(&other.num) }.reduced()
    }

    pub fn inv(&self) -> Self {
        Self::one().div(self)
    }

    /// Exact evaluation; `None` when the denominator vanishes at the point.
    pub fn eval(&self, vals: &[BigRational; 3]) -> Option<BigRational> {
        let d = self.den.eval(vals);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(vals) / d)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
