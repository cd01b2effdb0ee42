//! Multivariate integer-coefficient polynomials in the three rate
//! parameters `(b, e, g)`, with exact GCDs via primitive pseudo-remainder
//! sequences. These form the numerators and denominators of the
//! coefficient field.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub const N_PARAMS: usize = 3;
pub const PARAM_NAMES: [&str; N_PARAMS] = ["b", "e", "g"];

/// Exponents of `(b, e, g)`; array order gives lex with `b` most
/// significant.
pub type PExp = [u16; N_PARAMS];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    terms: BTreeMap<PExp, BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::from_big(BigInt::from(c))
    }

    pub fn from_big(c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert([0; N_PARAMS], c);
        }
        Self { terms }
    }

    pub fn var(idx: usize) -> Self {
        assert!(idx < N_PARAMS);
        let mut e = [0u16; N_PARAMS];
        e[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, BigInt::one());
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// `Some(c)` when the polynomial is the constant `c` (zero included).
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                (*e == [0; N_PARAMS]).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn insert_term(terms: &mut BTreeMap<PExp, BigInt>, e: PExp, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
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
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = *ea;
                for k in 0..N_PARAMS {
                    e[k] += eb[k];
                }
                Self::insert_term(&mut terms, e, ca * cb);
            }
        }
        Self { terms }
    }

    pub fn mul_big(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect() }
    }

    /// Leading coefficient under lex on `(b, e, g)`.
    pub fn leading_coef(&self) -> Option<&BigInt> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }

    /// Flip signs so the leading coefficient is positive.
    pub fn sign_normalized(&self) -> Self {
        match self.leading_coef() {
            Some(c) if c.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    /// GCD of the integer coefficients (non-negative).
    pub fn int_content(&self) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.terms.values() {
            acc = acc.gcd(c);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    pub fn div_exact_big(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let (q, r) = c.div_rem(d);
                    assert!(r.is_zero(), "inexact integer division in polynomial");
                    (*e, q)
                })
                .collect(),
        }
    }

    /// Exact multivariate division; `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = BTreeMap::new();
        let (dlead_e, dlead_c) = d.terms.iter().next_back().map(|(e, c)| (*e, c.clone())).unwrap();
        while !rem.is_zero() {
            let (rlead_e, rlead_c) = rem.terms.iter().next_back().map(|(e, c)| (*e, c.clone())).unwrap();
            let mut qe = [0u16; N_PARAMS];
            for k in 0..N_PARAMS {
                if rlead_e[k] < dlead_e[k] {
                    return None;
                }
                qe[k] = rlead_e[k] - dlead_e[k];
            }
            let (qc, r) = rlead_c.div_rem(&dlead_c);
            if !r.is_zero() {
                return None;
            }
            let mut qterm = BTreeMap::new();
            qterm.insert(qe, qc.clone());
            let qpoly = Self { terms: qterm };
            rem = rem.sub(&qpoly.mul(d));
            Self::insert_term(&mut quo, qe, qc);
        }
        Some(Self { terms: quo })
    }

    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Coefficient of `v^k`, a polynomial in the remaining parameters.
    fn coef_of_power(&self, v: usize, k: u16) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[v] == k {
                let mut r = *e;
                r[v] = 0;
                terms.insert(r, c.clone());
            }
        }
        Self { terms }
    }

    fn mul_var_pow(&self, v: usize, k: u16) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut r = *e;
                    r[v] += k;
                    (r, c.clone())
                })
                .collect(),
        }
    }

    /// Content as a polynomial in the variables below `v` (GCD of the
    /// `v`-coefficients).
    fn content_in(&self, v: usize) -> Self {
        let mut acc = Self::zero();
        for k in 0..=self.degree_in(v) {
            let c = self.coef_of_power(v, k);
            if !c.is_zero() {
                acc = gcd(&acc, &c);
                if acc.is_one() {
                    break;
                }
            }
        }
        acc
    }

    pub fn eval(&self, vals: &[BigRational; N_PARAMS]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = BigRational::from(c.clone());
            for k in 0..N_PARAMS {
                for _ in 0..e[k] {
                    term *= &vals[k];
                }
            }
            acc += term;
        }
        acc
    }
}

/// Pseudo-remainder of `a` by `b` in the main variable `v`.
fn prem(a: &IntPoly, b: &IntPoly, v: usize) -> IntPoly {
    let db = b.degree_in(v);
    let lc_b = b.coef_of_power(v, db);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lc_r = r.coef_of_power(v, dr);
        r = r.mul(&lc_b).sub(&lc_r.mul_var_pow(v, dr - db).mul(b));
    }
    r
}

/// Exact multivariate GCD via a primitive pseudo-remainder sequence,
/// sign-normalized to a positive leading coefficient.
pub fn gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_zero() {
        return b.sign_normalized();
    }
    if b.is_zero() {
        return a.sign_normalized();
    }
    if let (Some(ca), Some(cb)) = (a.as_constant(), b.as_constant()) {
        return IntPoly::from_big(ca.gcd(&cb));
    }
    // Use the most significant parameter present in either operand.
    let v = (0..N_PARAMS)
        .find(|&k| a.degree_in(k) > 0 || b.degree_in(k) > 0)
        .expect("non-constant operands have a main variable");

    let cont_a = a.content_in(v);
    let cont_b = b.content_in(v);
    let cont = gcd(&cont_a, &cont_b);
    let mut p = a.div_exact(&cont_a).expect("content divides");
    let mut q = b.div_exact(&cont_b).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = prem(&p, &q, v);
        let r = if r.is_zero() {
            r
        } else {
            let c = r.content_in(v);
            r.div_exact(&c).expect("content divides")
        };
        p = q;
        q = r;
    }
    cont.mul(&p).sign_normalized()
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            let is_const_mon = *e == [0; N_PARAMS];
            let mut wrote_factor = false;
            if !mag.is_one() || is_const_mon {
                write!(f, "{mag}")?;
                wrote_factor = true;
            }
            for k in 0..N_PARAMS {
                if e[k] > 0 {
                    if wrote_factor {
                        write!(f, "*")?;
                    }
                    write!(f, "{}", PARAM_NAMES[k])?;
                    if e[k] > 1 {
                        write!(f, "^{}", e[k])?;
                    }
                    wrote_factor = true;
                }
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> IntPoly {
        IntPoly::var(0)
    }
    fn e() -> IntPoly {
        IntPoly::var(1)
    }
    fn g() -> IntPoly {
        IntPoly::var(2)
    }

    #[test]
    fn arithmetic_basics() {
        let p = b().add(&e());
        let q = b().sub(&e());
        let prod = p.mul(&q); // b^2 - e^2
        let want = b().mul(&b()).sub(&e().mul(&e()));
        assert_eq!(prod, want);
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn display_matches_convention() {
        let p = e().add(&g());
        assert_eq!(p.to_string(), "e+g");
        let q = g().neg();
        assert_eq!(q.to_string(), "-g");
        let r = b().mul(&e()).mul_big(&BigInt::from(2));
        assert_eq!(r.to_string(), "2*b*e");
        let s = e().mul(&e()).sub(&IntPoly::constant(3));
        assert_eq!(s.to_string(), "e^2-3");
    }

    #[test]
    fn exact_division() {
        let p = b().add(&e());
        let q = b().sub(&g());
        let prod = p.mul(&q);
        assert_eq!(prod.div_exact(&p).unwrap(), q);
        assert_eq!(prod.div_exact(&q).unwrap(), p);
        assert!(p.div_exact(&q).is_none());
    }

    #[test]
    fn gcd_of_products() {
        let p = b().add(&e());
        let q = b().sub(&g());
        let r = e().add(&g());
        let x = p.mul(&q);
        let y = p.mul(&r);
        assert_eq!(gcd(&x, &y), p);
        // Coprime case.
        assert!(gcd(&q, &r).is_one());
        // Integer content folds in.
        let two_p = p.mul_big(&BigInt::from(2));
        let four_p = p.mul_big(&BigInt::from(4));
        assert_eq!(gcd(&two_p, &four_p), two_p);
    }

    #[test]
    fn gcd_sign_is_canonical() {
        let p = b().add(&e());
        let np = p.neg();
        assert_eq!(gcd(&np, &np), p);
    }

    #[test]
    fn eval_exact() {
        use num::FromPrimitive;
        let p = b().mul(&e()).add(&g()); // b*e + g
        let vals = [
            BigRational::from_f64(0.5).unwrap(),
            BigRational::from_f64(0.25).unwrap(),
            BigRational::from_f64(2.0).unwrap(),
        ];
        let got = p.eval(&vals);
        assert_eq!(got, BigRational::from_f64(2.125).unwrap());
    }
}
