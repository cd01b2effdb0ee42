//! Symbolic verification that the unobserved compartments are algebraically
//! recoverable from the observed output.
//!
//! The prolonged model equations (derivatives up to order `N - 1 = 3`,
//! treated as independent variables) generate an ideal over the field of
//! rational functions in `(b, e, g)`. A lex Groebner basis eliminates the
//! state variables; recovery polynomials for `E` and `S` — the relations
//! behind the pseudo-data formulas — then sit in the basis, where
//! [`check_observable`] finds them. All arithmetic is exact.

pub mod coef;
pub mod groebner;
pub mod intpoly;
pub mod poly;

pub use coef::Coef;
pub use groebner::{
    buchberger, build_seir_ideal, check_observable, consistent_sample, e_recovery_polynomial,
    eval_exact, s_recovery_polynomial, vanishes_on_consistent_samples, GbError, Ideal,
    Observability, SamplePoint, DEFAULT_SPAIR_BUDGET,
};
pub use intpoly::IntPoly;
pub use poly::{singular_string, normal_form, var_index, vars, Poly, N_VARS, VAR_NAMES};
