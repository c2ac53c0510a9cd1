//! Exact symbolic expressions over the rationals.
//!
//! An [`Expr`] is a canonical quotient of two sums of monomials in the jet
//! coordinates, group parameters and coefficient-function derivatives, with
//! exponents in quarter steps. Radicals are taken on the branch `u > 0`,
//! `f4 > 0`, so `(f4*u)^(1/4)` splits into `f4^(1/4)*u^(1/4)`.

mod atom;
mod equal;
mod monomial;
mod poly;
mod quotient;
mod tree;

pub use atom::{Atom, Coord};
pub use equal::{equal, equal_with, random_env, Equality};
pub use monomial::{Monomial, Quarters};
pub use poly::{Poly, MAX_TERMS, Q};
pub use quotient::{check_acyclic_bindings, AtomDerivatives, Expr, StandardDerivatives, SubstCache};
pub use tree::{canonicalize, ExprTree};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("zero divisor")]
    ZeroDivisor,
    #[error("unsupported radical")]
    UnsupportedRadical,
    #[error("cyclic binding: {0}")]
    CyclicBinding(String),
    #[error("missing binding for {0}")]
    MissingBinding(String),
    #[error("singular evaluation")]
    SingularEvaluation,
    #[error("non-real radical")]
    NonRealRadical,
}

/// Shorthand for `n/d` as an exact rational.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}
