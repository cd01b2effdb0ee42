//! Buchberger's algorithm over the rational-function coefficient field, the
//! derivative-prolonged SEIR ideal, and the recovery-polynomial checks.

use std::collections::{BTreeSet, HashSet};

use num::rational::BigRational;
use num::{BigInt, Zero};
use thiserror::Error;

use crate::rng::SplitMix64;

use super::coef::Coef;
use super::intpoly::IntPoly;
use super::poly::{
    exp_divides, exp_div, exp_lcm, exp_mul, exp_var, normal_form, vars, Exp, Poly, N_VARS,
};

/// Cap on S-pair reductions; the fixed ideal needs only a handful, the cap
/// guards pathological edits.
pub const DEFAULT_SPAIR_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum GbError {
    #[error("Groebner computation capped after {0} S-pair reductions")]
    Capped(usize),
    #[error("ideal generators must be nonzero")]
    ZeroGenerator,
}

/// Generators of a polynomial ideal.
#[derive(Debug, Clone)]
pub struct Ideal {
    pub gens: Vec<Poly>,
}

impl Ideal {
    pub fn new(gens: Vec<Poly>) -> Result<Self, GbError> {
        if gens.iter().any(Poly::is_zero) {
            return Err(GbError::ZeroGenerator);
        }
        Ok(Self { gens })
    }
}

fn param(idx: usize) -> Coef {
    Coef::from_poly(IntPoly::var(idx))
}

fn mono2(a: usize, b: usize) -> Exp {
    exp_mul(&exp_var(a), &exp_var(b))
}

/// The 13 generators: the three SEIR dynamic equations prolonged to third
/// order plus the four output identifications `d^k Y = d^k I`.
pub fn build_seir_ideal() -> Ideal {
    use vars::*;
    let (b, e, g) = (param(0), param(1), param(2));
    let two_b = b.add(&b);

    let t = |v: usize| Poly::var(v);
    let prod = |x: usize, y: usize, c: &Coef| Poly::term(mono2(x, y), c.clone());

    let gens = vec![
        // d1S + b S I
        t(D1S).add(&prod(S, I, &b)),
        // d2S + b I d1S + b S d1I
        t(D2S).add(&prod(I, D1S, &b)).add(&prod(S, D1I, &b)),
        // d3S + b I d2S + 2 b d1S d1I + b S d2I
        t(D3S)
            .add(&prod(I, D2S, &b))
            .add(&prod(D1S, D1I, &two_b))
            .add(&prod(S, D2I, &b)),
        // d1E + e E - b S I
        t(D1E).add(&t(E).scale(&e)).sub(&prod(S, I, &b)),
        // d2E + e d1E - b I d1S - b S d1I
        t(D2E)
            .add(&t(D1E).scale(&e))
            .sub(&prod(I, D1S, &b))
            .sub(&prod(S, D1I, &b)),
        // d3E + e d2E - b I d2S - 2 b d1S d1I - b S d2I
        t(D3E)
            .add(&t(D2E).scale(&e))
            .sub(&prod(I, D2S, &b))
            .sub(&prod(D1S, D1I, &two_b))
            .sub(&prod(S, D2I, &b)),
        // d1I - e E + g I
        t(D1I).sub(&t(E).scale(&e)).add(&t(I).scale(&g)),
        // d2I - e d1E + g d1I
        t(D2I).sub(&t(D1E).scale(&e)).add(&t(D1I).scale(&g)),
        // d3I - e d2E + g d2I
        t(D3I).sub(&t(D2E).scale(&e)).add(&t(D2I).scale(&g)),
        // output identifications
        t(Y).sub(&t(I)),
        t(D1Y).sub(&t(D1I)),
        t(D2Y).sub(&t(D2I)),
        t(D3Y).sub(&t(D3I)),
    ];
    Ideal::new(gens).expect("generators are nonzero")
}

fn s_poly(f: &Poly, g: &Poly) -> Poly {
    let (fe, fc) = f.leading().expect("nonzero");
    let (ge, gc) = g.leading().expect("nonzero");
    let lcm = exp_lcm(fe, ge);
    let left = f.mul_term(&exp_div(&lcm, fe), &fc.inv());
    let right = g.mul_term(&exp_div(&lcm, ge), &gc.inv());
    left.sub(&right)
}

fn coprime(a: &Exp, b: &Exp) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

type Pair = (Exp, usize, usize);

fn make_pair(basis: &[Poly], i: usize, j: usize) -> Pair {
    let lcm = exp_lcm(
        basis[i].leading_exp().expect("nonzero"),
        basis[j].leading_exp().expect("nonzero"),
    );
    (lcm, i, j)
}

/// Reduced Groebner basis under the ring's lex order.
///
/// Normal-strategy pair selection (smallest lcm first) with the coprimality
/// and chain criteria; every S-polynomial reduction counts against the
/// budget.
pub fn buchberger(ideal: &Ideal, budget: usize) -> Result<Vec<Poly>, GbError> {
    let mut basis: Vec<Poly> = ideal.gens.iter().filter(|g| !g.is_zero()).map(Poly::monic).collect();
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut pairs: BTreeSet<Pair> = BTreeSet::new();
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pairs.insert(make_pair(&basis, i, j));
        }
    }
    let mut reductions = 0usize;
    while let Some(pair) = pairs.iter().next().cloned() {
        pairs.remove(&pair);
        let (lcm, i, j) = pair;
        done.insert((i, j));

        let (li, lj) = (
            basis[i].leading_exp().expect("nonzero"),
            basis[j].leading_exp().expect("nonzero"),
        );
        if coprime(li, lj) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && exp_divides(basis[k].leading_exp().expect("nonzero"), &lcm)
                && done.contains(&(i.min(k), i.max(k)))
                && done.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }

        reductions += 1;
        if reductions > budget {
            return Err(GbError::Capped(budget));
        }
        let rem = normal_form(&s_poly(&basis[i], &basis[j]), &basis);
        if rem.is_zero() {
            continue;
        }
        let rem = rem.monic();
        let new_idx = basis.len();
        basis.push(rem);
        for k in 0..new_idx {
            pairs.insert(make_pair(&basis, k, new_idx));
        }
    }

    // Inter-reduce to the unique reduced basis.
    loop {
        let mut changed = false;
        for i in 0..basis.len() {
            if basis[i].is_zero() {
                continue;
            }
            let others: Vec<Poly> =
                basis.iter().enumerate().filter(|(k, p)| *k != i && !p.is_zero()).map(|(_, p)| p.clone()).collect();
            let h = normal_form(&basis[i], &others);
            if h != basis[i] {
                basis[i] = h;
                changed = true;
            }
        }
        basis.retain(|p| !p.is_zero());
        if !changed {
            break;
        }
    }
    for p in basis.iter_mut() {
        *p = p.monic();
    }
    basis.sort_by(|a, b| a.leading_exp().cmp(&b.leading_exp()));
    basis.dedup();
    Ok(basis)
}

/// Outcome of an observability query for one state variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Observability {
    /// The variable is an output coordinate; nothing to recover.
    Observed,
    /// A basis element linear in the variable over the output variables.
    Recoverable(Poly),
    NotFound,
}

const OUTPUT_VARS: [usize; 4] = [vars::D3Y, vars::D2Y, vars::D1Y, vars::Y];

/// Search a Groebner basis for a recovery polynomial: support inside
/// `{var} U outputs`, degree exactly one in `var`.
pub fn check_observable(var: usize, basis: &[Poly]) -> Observability {
    if OUTPUT_VARS.contains(&var) {
        return Observability::Observed;
    }
    for p in basis {
        let sup = p.support_vars();
        let ok_support =
            sup.iter().all(|v| *v == var || OUTPUT_VARS.contains(v)) && sup.contains(&var);
        if ok_support && p.degree_in(var) == 1 {
            return Observability::Recoverable(p.clone());
        }
    }
    Observability::NotFound
}

/// The closed-form recovery relation for `E`: `e E - d1Y - g Y`.
pub fn e_recovery_polynomial() -> Poly {
    use vars::*;
    Poly::var(E)
        .scale(&param(1))
        .sub(&Poly::var(D1Y))
        .sub(&Poly::var(Y).scale(&param(2)))
}

/// The denominator-cleared recovery relation for `S`:
/// `b e S Y - d2Y - (e + g) d1Y - e g Y`.
pub fn s_recovery_polynomial() -> Poly {
    use vars::*;
    let (b, e, g) = (param(0), param(1), param(2));
    Poly::term(mono2(S, Y), b.mul(&e))
        .sub(&Poly::var(D2Y))
        .sub(&Poly::var(D1Y).scale(&e.add(&g)))
        .sub(&Poly::var(Y).scale(&e.mul(&g)))
}

/// One exact rational point on the prolonged SEIR variety.
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub params: [BigRational; 3],
    pub vars: [BigRational; N_VARS],
}

fn rat(rng: &mut SplitMix64, lo: i64, hi: i64) -> BigRational {
    let span = (hi - lo + 1) as u64;
    let num = lo + (rng.next_u64() % span) as i64;
    let den = 1 + (rng.next_u64() % 9) as i64;
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Draw `(S, E, I, b, e, g)` at random and derive every prolonged
/// derivative from the model equations, exactly.
pub fn consistent_sample(rng: &mut SplitMix64) -> SamplePoint {
    use vars::*;
    let b = rat(rng, 1, 9);
    let e = rat(rng, 1, 9);
    let g = rat(rng, 1, 9);
    let s = rat(rng, -9, 9);
    let ev = rat(rng, -9, 9);
    let i = rat(rng, -9, 9);

    let d1s = -(&b * &s * &i);
    let d1e = &b * &s * &i - &e * &ev;
    let d1i = &e * &ev - &g * &i;
    let d2s = -(&b * (&d1s * &i + &s * &d1i));
    let d2e = &b * (&d1s * &i + &s * &d1i) - &e * &d1e;
    let d2i = &e * &d1e - &g * &d1i;
    let second_sum = &d2s * &i + BigRational::from(BigInt::from(2)) * &d1s * &d1i + &s * &d2i;
    let d3s = -(&b * &second_sum);
    let d3e = &b * &second_sum - &e * &d2e;
    let d3i = &e * &d2e - &g * &d2i;

    let mut vars_out: [BigRational; N_VARS] = std::array::from_fn(|_| BigRational::zero());
    vars_out[D3I] = d3i.clone();
    vars_out[D3E] = d3e;
    vars_out[D3S] = d3s;
    vars_out[D2I] = d2i.clone();
    vars_out[D2E] = d2e;
    vars_out[D2S] = d2s;
    vars_out[D1I] = d1i.clone();
    vars_out[D1E] = d1e;
    vars_out[D1S] = d1s;
    vars_out[I] = i;
    vars_out[E] = ev;
    vars_out[S] = s;
    vars_out[D3Y] = d3i;
    vars_out[D2Y] = d2i;
    vars_out[D1Y] = d1i;
    SamplePoint { params: [b, e, g], vars: { vars_out[Y] = vars_out[I].clone(); vars_out } }
}

/// Exact evaluation; `None` when a coefficient denominator vanishes at the
/// sample.
pub fn eval_exact(p: &Poly, pt: &SamplePoint) -> Option<BigRational> {
    let mut acc = BigRational::zero();
    for (e, c) in p.terms() {
        let cv = c.eval(&pt.params)?;
        let mut term = cv;
        for k in 0..N_VARS {
            for _ in 0..e[k] {
                term *= &pt.vars[k];
            }
        }
        acc += term;
    }
    Some(acc)
}

/// True iff `p` evaluates to exactly zero on `n` consistent samples.
/// Samples where a coefficient denominator vanishes are redrawn.
pub fn vanishes_on_consistent_samples(p: &Poly, n: usize, seed: u64) -> bool {
    let mut rng = SplitMix64::new(seed);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < n {
        attempts += 1;
        if attempts > 20 * n + 100 {
            return false;
        }
        let pt = consistent_sample(&mut rng);
        match eval_exact(p, &pt) {
            None => continue,
            Some(v) => {
                if !v.is_zero() {
                    return false;
                }
                checked += 1;
            }
        }
    }
    true
}
