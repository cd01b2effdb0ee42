//! Polynomials over the 16 prolongation variables with lex term order, and
//! the textual form used for basis comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed};

use super::coef::Coef;
use super::intpoly::{gcd, IntPoly};

pub const N_VARS: usize = 16;

/// Ring variable order, most significant first.
pub const VAR_NAMES: [&str; N_VARS] = [
    "d3I", "d3E", "d3S", "d2I", "d2E", "d2S", "d1I", "d1E", "d1S", "I", "E", "S", "d3Y", "d2Y",
    "d1Y", "Y",
];

pub mod vars {
    pub const D3I: usize = 0;
    pub const D3E: usize = 1;
    pub const D3S: usize = 2;
    pub const D2I: usize = 3;
    pub const D2E: usize = 4;
    pub const D2S: usize = 5;
    pub const D1I: usize = 6;
    pub const D1E: usize = 7;
    pub const D1S: usize = 8;
    pub const I: usize = 9;
    pub const E: usize = 10;
    pub const S: usize = 11;
    pub const D3Y: usize = 12;
    pub const D2Y: usize = 13;
    pub const D1Y: usize = 14;
    pub const Y: usize = 15;
}

pub fn var_index(name: &str) -> Option<usize> {
    VAR_NAMES.iter().position(|&n| n == name)
}

/// Exponent vector; the derived array `Ord` is exactly lex with the first
/// ring variable most significant.
pub type Exp = [u16; N_VARS];

pub fn exp_one() -> Exp {
    [0; N_VARS]
}

pub fn exp_var(idx: usize) -> Exp {
    let mut e = exp_one();
    e[idx] = 1;
    e
}

pub fn exp_mul(a: &Exp, b: &Exp) -> Exp {
    let mut out = *a;
    for k in 0..N_VARS {
        out[k] += b[k];
    }
    out
}

pub fn exp_divides(a: &Exp, b: &Exp) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn exp_div(b: &Exp, a: &Exp) -> Exp {
    let mut out = *b;
    for k in 0..N_VARS {
        debug_assert!(out[k] >= a[k]);
        out[k] -= a[k];
    }
    out
}

pub fn exp_lcm(a: &Exp, b: &Exp) -> Exp {
    let mut out = *a;
    for k in 0..N_VARS {
        out[k] = out[k].max(b[k]);
    }
    out
}

/// Sparse polynomial; the map's last entry is the leading term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exp, Coef>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(idx: usize) -> Self {
        Self::term(exp_var(idx), Coef::one())
    }

    pub fn term(e: Exp, c: Coef) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn constant(c: Coef) -> Self {
        Self::term(exp_one(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Coef)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Exp, &Coef)> {
        self.terms.iter().next_back()
    }

    pub fn leading_exp(&self) -> Option<&Exp> {
        self.leading().map(|(e, _)| e)
    }

    fn insert_term(terms: &mut BTreeMap<Exp, Coef>, e: Exp, c: Coef) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            Self::insert_term(&mut terms, *e, c.clone());
        }
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                Self::insert_term(&mut terms, exp_mul(ea, eb), ca.mul(cb));
            }
        }
        Self { terms }
    }

    /// Multiply by a single term `c * x^e`.
    pub fn mul_term(&self, e: &Exp, c: &Coef) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(te, tc)| (exp_mul(te, e), tc.mul(c))).collect() }
    }

    pub fn scale(&self, c: &Coef) -> Self {
        self.mul_term(&exp_one(), c)
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some((_, lc)) => {
                if lc.is_one() {
                    self.clone()
                } else {
                    self.scale(&lc.inv())
                }
            }
        }
    }

    /// Ring variables that occur with positive degree.
    pub fn support_vars(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for e in self.terms.keys() {
            for k in 0..N_VARS {
                if e[k] > 0 {
                    s.insert(k);
                }
            }
        }
        s
    }

    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }
}

/// Remainder of multivariate division of `p` by `basis` (first divisible
/// leading term wins; deterministic).
pub fn normal_form(p: &Poly, basis: &[Poly]) -> Poly {
    let mut work = p.clone();
    let mut rem = Poly::zero();
    'outer: while let Some((lead_e, lead_c)) = work.leading().map(|(e, c)| (*e, c.clone())) {
        for g in basis {
            if g.is_zero() {
                continue;
            }
            let (ge, gc) = g.leading().expect("nonzero divisor");
            if exp_divides(ge, &lead_e) {
                let q = exp_div(&lead_e, ge);
                let factor = lead_c.div(gc);
                work = work.sub(&g.mul_term(&q, &factor));
                continue 'outer;
            }
        }
        // No divisor fits: move the leading term to the remainder.
        rem = rem.add(&Poly::term(lead_e, lead_c.clone()));
        work = work.sub(&Poly::term(lead_e, lead_c));
    }
    rem
}

/// Clear denominators and content so the polynomial has coprime integer
/// polynomial coefficients with a positive leading sign; the printable
/// normal form.
pub fn integral_primitive(p: &Poly) -> Vec<(Exp, IntPoly)> {
    if p.is_zero() {
        return Vec::new();
    }
    let mut den_lcm = IntPoly::one();
    for (_, c) in p.terms() {
        let g = gcd(&den_lcm, c.den());
        den_lcm = den_lcm.mul(&c.den().div_exact(&g).expect("gcd divides"));
    }
    let mut cleared: Vec<(Exp, IntPoly)> = p
        .terms()
        .map(|(e, c)| {
            let scale = den_lcm.div_exact(c.den()).expect("lcm clears every denominator");
            (*e, c.num().mul(&scale))
        })
        .collect();
    let mut content = IntPoly::zero();
    for (_, ip) in &cleared {
        content = gcd(&content, ip);
        if content.is_one() {
            break;
        }
    }
    for (_, ip) in cleared.iter_mut() {
        *ip = ip.div_exact(&content).expect("content divides");
    }
    // Positive leading sign, judged at the leading monomial.
    let flip = cleared
        .last()
        .map(|(_, ip)| ip.leading_coef().map(|c| c.is_negative()).unwrap_or(false))
        .unwrap_or(false);
    if flip {
        for (_, ip) in cleared.iter_mut() {
            *ip = ip.neg();
        }
    }
    cleared
}

fn monomial_string(e: &Exp) -> String {
    let mut parts = Vec::new();
    for k in 0..N_VARS {
        if e[k] > 0 {
            if e[k] == 1 {
                parts.push(VAR_NAMES[k].to_string());
            } else {
                parts.push(format!("{}^{}", VAR_NAMES[k], e[k]));
            }
        }
    }
    parts.join("*")
}

/// Render in Singular's output convention: integral primitive
/// form, terms in descending lex order, parameter coefficients
/// parenthesized — e.g. `(e)*E-d1Y+(-g)*Y`.
pub fn singular_string(p: &Poly) -> String {
    let cleared = integral_primitive(p);
    if cleared.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (e, c) in cleared.iter().rev() {
        let mon = monomial_string(e);
        let is_const_mon = mon.is_empty();
        match c.as_constant() {
            Some(n) if !is_const_mon => {
                // Integer coefficient: fold the sign into the separator.
                if n.is_negative() {
                    out.push('-');
                } else if !out.is_empty() {
                    out.push('+');
                }
                let mag = n.abs();
                if mag.is_one() {
                    out.push_str(&mon);
                } else {
                    out.push_str(&format!("{mag}*{mon}"));
                }
            }
            _ => {
                if !out.is_empty() {
                    out.push('+');
                }
                if is_const_mon {
                    out.push_str(&format!("({c})"));
                } else {
                    out.push_str(&format!("({c})*{mon}"));
                }
            }
        }
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            let mon = monomial_string(e);
            if mon.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{mon}")?;
            } else {
                write!(f, "({c})*{mon}")?;
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::vars::*;
    use super::*;

    fn c(n: i64) -> Coef {
        Coef::from_int(n)
    }

    fn param(idx: usize) -> Coef {
        Coef::from_poly(IntPoly::var(idx))
    }

    #[test]
    fn lex_order_leading_terms() {
        // I > E > S > d3Y ... > Y in the fixed variable order.
        let p = Poly::var(Y).add(&Poly::var(I)).add(&Poly::var(E));
        assert_eq!(p.leading_exp().unwrap(), &exp_var(I));
        // A monomial with S beats anything in Y variables alone.
        let sy = Poly::term(exp_mul(&exp_var(S), &exp_var(Y)), c(1));
        let q = sy.add(&Poly::var(D2Y));
        assert_eq!(q.leading_exp().unwrap(), &exp_mul(&exp_var(S), &exp_var(Y)));
    }

    #[test]
    fn self_reduction_is_zero() {
        let g = Poly::var(E).scale(&param(1)).sub(&Poly::var(D1Y)).add(&Poly::var(Y));
        assert!(normal_form(&g, &[g.clone()]).is_zero());
    }

    #[test]
    fn power_reduction_in_a_toy_subring() {
        // x^2 reduced by {x} vanishes; embed the toy ring as x = I, y = E.
        let x = Poly::var(I);
        let x2 = x.mul(&x);
        assert!(normal_form(&x2, &[x]).is_zero());
    }

    #[test]
    fn hand_division_example() {
        // x^2 y + y by {x y - 1} with lex x > y gives x + y.
        let (x, y) = (I, E);
        let xy = Poly::term(exp_mul(&exp_var(x), &exp_var(y)), c(1));
        let g = xy.sub(&Poly::constant(c(1)));
        let p = Poly::term(exp_mul(&exp_mul(&exp_var(x), &exp_var(x)), &exp_var(y)), c(1))
            .add(&Poly::var(y));
        let r = normal_form(&p, &[g]);
        let want = Poly::var(x).add(&Poly::var(y));
        assert_eq!(r, want);
    }

    #[test]
    fn monic_normalizes_leading_coefficient() {
        let p = Poly::var(E).scale(&param(1)).sub(&Poly::var(Y).scale(&param(2)));
        let m = p.monic();
        assert!(m.leading().unwrap().1.is_one());
        // e * monic(p) == p
        assert_eq!(m.scale(&param(1)), p);
    }

    #[test]
    fn singular_rendering_matches_convention() {
        // e*E - d1Y - g*Y prints as (e)*E-d1Y+(-g)*Y.
        let p = Poly::var(E)
            .scale(&param(1))
            .sub(&Poly::var(D1Y))
            .sub(&Poly::var(Y).scale(&param(2)));
        assert_eq!(singular_string(&p), "(e)*E-d1Y+(-g)*Y");
        // The monic form prints identically once denominators are cleared.
        assert_eq!(singular_string(&p.monic()), "(e)*E-d1Y+(-g)*Y");
    }

    #[test]
    fn singular_rendering_integer_coefficients() {
        // Monomial factors print in ring order: d1I precedes d1S.
        let p = Poly::term(exp_mul(&exp_var(D1S), &exp_var(D1I)), c(2)).sub(&Poly::var(Y));
        assert_eq!(singular_string(&p), "2*d1I*d1S-Y");
        let q = Poly::var(Y).scale(&c(-3));
        assert_eq!(singular_string(&q), "Y");
    }

    #[test]
    fn support_and_degrees() {
        let p = Poly::var(E).scale(&param(1)).sub(&Poly::var(D1Y)).sub(&Poly::var(Y));
        let sup = p.support_vars();
        assert!(sup.contains(&E) && sup.contains(&D1Y) && sup.contains(&Y));
        assert_eq!(sup.len(), 3);
        assert_eq!(p.degree_in(E), 1);
        assert_eq!(p.degree_in(S), 0);
    }
}
