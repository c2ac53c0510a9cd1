//! Linear fourth-order operators, fiber-preserving point transformations and
//! their prolongation to the fourth jet.

mod operator;
pub mod sample;
mod transform;

pub use operator::{
    base_invariant_expr, base_invariant_value, grid, CoefficientSource, OperatorSpec,
    CACHED_ORDERS,
};
pub use transform::{transform_operator, Transformation, TransformedOperator};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{Atom, ExprError};
use crate::parse::ParseError;

/// Which equivalence rule relates two operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// `Dbar[phi u] = D[u]`
    Direct,
    /// `Dbar[phi u] = phi D[u]`
    Gauge,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Direct, Mode::Gauge];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Gauge => "gauge",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = JetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Mode::Direct),
            "gauge" => Ok(Mode::Gauge),
            other => Err(JetError::Domain(format!("unknown mode `{other}`"))),
        }
    }
}

/// A point `(x, u, p, q, r, s)` of the fourth jet space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl JetPoint {
    pub fn new(x: f64, u: f64, p: f64, q: f64, r: f64, s: f64) -> Self {
        JetPoint { x, u, p, q, r, s }
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        match *v {
            [x, u, p, q, r, s] => Some(JetPoint::new(x, u, p, q, r, s)),
            _ => None,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.x, self.u, self.p, self.q, self.r, self.s]
    }

    /// `[u, p, q, r, s]`, i.e. `u^(i)` for `i = 0..=4`.
    pub fn derivatives(&self) -> [f64; 5] {
        [self.u, self.p, self.q, self.r, self.s]
    }

    pub fn env(&self) -> BTreeMap<Atom, f64> {
        [Atom::X, Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S]
            .into_iter()
            .zip(self.as_array())
            .collect()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum JetError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("coefficients must depend on x only: {0}")]
    NotInX(String),
    #[error("inverse not available; use composed representation")]
    InverseUnavailable,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("both".parse::<Mode>().is_err());
    }

    #[test]
    fn jet_point_slices() {
        let jp = JetPoint::from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(jp.derivatives(), [2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(jp.env()[&Atom::R], 5.0);
        assert!(JetPoint::from_slice(&[1.0]).is_none());
    }
}
