//! The equivalence method itself: base and lifted coframes, structure
//! equations, the normalization schedule, invariants and the comparison
//! against transcribed reference formulas.
//!
//! A run is driven by a [`Model`]. The generic model keeps `f0..f4` as free
//! functions of `x`; a concrete model plugs in an operator's coefficients but
//! keeps `f4` as an atom so that every radical stays a monomial.

mod frames;
mod invariants;
mod model;
mod normalize;
mod pipeline;
pub mod reference;
mod schedule;
mod structure;

pub use frames::{base_coframe, lifted_coframe, GroupElement};
pub use invariants::{jet_env, Invariant, InvariantSet};
pub use model::Model;
pub use normalize::solve_normalization;
pub use pipeline::{generic_pipeline, run_pipeline, PipelineResult, StageRecord};
pub use schedule::{invariant_slots, schedule, Normalization, NormalizationStage};
pub use structure::{row_form, structure_equations, Row, Slot, StructureEquations};

use thiserror::Error;

use crate::expr::ExprError;
use crate::exterior::ExteriorError;
use crate::jet::{JetError, Mode, OperatorSpec};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CartanError {
    #[error("nonlinear normalization: {0}")]
    NonlinearNormalization(String),
    #[error("normalization schedule failed: {0}")]
    ScheduleFailed(String),
    #[error("degenerate group element: {0}")]
    DegenerateGroup(String),
    #[error("reference fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Invariants of a concrete operator.
pub fn derived_invariants(op: &OperatorSpec, mode: Mode) -> Result<InvariantSet, CartanError> {
    Ok(run_pipeline(&Model::concrete(op, mode))?.invariants)
}
