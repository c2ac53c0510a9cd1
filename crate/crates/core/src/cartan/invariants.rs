use std::collections::BTreeMap;

use super::Slot;
use crate::expr::{Atom, Expr};
use crate::jet::{CoefficientSource, JetError, JetPoint, Mode, CACHED_ORDERS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    pub name: &'static str,
    pub slot: Slot,
    pub expr: Expr,
}

/// The invariants read off the final structure equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSet {
    pub mode: Mode,
    pub entries: Vec<Invariant>,
}

impl InvariantSet {
    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.expr)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Invariant> {
        self.entries.iter()
    }

    /// True when no entry mentions a group parameter.
    pub fn parameter_free(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !e.expr.atoms().iter().any(|a| a.is_param()))
    }

    /// Values at a jet point, with coefficient values supplied by `src` at `jp.x`.
    pub fn evaluate(
        &self,
        src: &dyn CoefficientSource,
        jp: &JetPoint,
    ) -> Result<Vec<f64>, JetError> {
        let env = jet_env(src, jp)?;
        self.entries
            .iter()
            .map(|e| Ok(e.expr.eval_map(&env)?))
            .collect()
    }
}

/// Chart values of `jp` together with every `f_i^(k)` from `src` at `jp.x`.
pub fn jet_env(src: &dyn CoefficientSource, jp: &JetPoint) -> Result<BTreeMap<Atom, f64>, JetError> {
    let mut env = src.coefficient_env(jp.x, CACHED_ORDERS)?;
    env.extend(jp.env());
    Ok(env)
}
