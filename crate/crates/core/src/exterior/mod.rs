//! Differential forms on the chart `(x, u, p, q, r, s, a1..a10)`.
//!
//! Forms of degree 0, 1 and 2 are first-class. Degree 3 appears only inside
//! [`closure_defect`], which differentiates a 2-form to test that it is closed.

mod coframe;
mod form;

pub use coframe::{Coframe, FrameCoefficients};
pub use form::{covectors, Blade, Form, TangentVector};

use thiserror::Error;

use crate::expr::{Atom, AtomDerivatives, ExprError};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("degree overflow: a degree-{0} form is not supported here")]
    DegreeOverflow(usize),
    #[error("blade does not match the form degree or uses a non-covector")]
    MalformedBlade,
    #[error("degenerate coframe")]
    DegenerateCoframe,
    #[error("not a coframe: {0}")]
    NotACoframe(String),
    #[error("d{0} is not a free parameter differential here")]
    UnexpectedDifferential(Atom),
    #[error("parameter-parameter term d{0}^d{1} cannot be expressed in the coframe")]
    ParameterPair(Atom, Atom),
    #[error("expected {degree} tangent vectors, got {given}")]
    VectorCount { degree: usize, given: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `d` of a 2-form, as a (3-form) coordinate expression; empty when the form is closed.
pub fn closure_defect(f: &Form, rules: &dyn AtomDerivatives) -> Form {
    assert_eq!(f.degree(), 2, "closure_defect expects a 2-form");
    f.d_unchecked(rules)
}
