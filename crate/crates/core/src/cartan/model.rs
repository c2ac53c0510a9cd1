use std::collections::BTreeMap;

use crate::expr::{q, Atom, AtomDerivatives, Expr, StandardDerivatives};
use crate::jet::{Mode, OperatorSpec};

/// How `d/dx` acts on coefficient atoms inside a pipeline run.
#[derive(Clone, Debug)]
enum Rules {
    Standard,
    /// Only `f4` survives as an atom; `f4_derivatives[k]` is `f4^(k+1)` in `x`.
    Concrete { f4_derivatives: Vec<Expr> },
}

impl AtomDerivatives for Rules {
    fn derivative(&self, a: Atom, v: Atom) -> Option<Expr> {
        match self {
            Rules::Standard => StandardDerivatives.derivative(a, v),
            Rules::Concrete { f4_derivatives } => match (a, v) {
                (Atom::Coef { index: 4, order }, Atom::X) => {
                    Some(f4_derivatives.get(order as usize)?.clone())
                }
                _ => None,
            },
        }
    }
}

/// The operator a pipeline runs on: fully symbolic, or a concrete operator
/// whose leading coefficient is kept as the atom `f4` so that radicals stay
/// monomial.
#[derive(Clone, Debug)]
pub struct Model {
    mode: Mode,
    operator: Option<OperatorSpec>,
    rules: Rules,
}

impl Model {
    /// Free coefficient functions `f0..f4`.
    pub fn generic(mode: Mode) -> Self {
        Model {
            mode,
            operator: None,
            rules: Rules::Standard,
        }
    }

    pub fn concrete(op: &OperatorSpec, mode: Mode) -> Self {
        let f4_derivatives = (1..12).map(|k| op.derivative(4, k)).collect();
        Model {
            mode,
            operator: Some(op.clone()),
            rules: Rules::Concrete { f4_derivatives },
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn operator(&self) -> Option<&OperatorSpec> {
        self.operator.as_ref()
    }

    pub fn is_generic(&self) -> bool {
        self.operator.is_none()
    }

    pub fn rules(&self) -> &dyn AtomDerivatives {
        &self.rules
    }

    /// `f_i` as it enters the pipeline.
    pub fn coefficient(&self, i: usize) -> Expr {
        match &self.operator {
            Some(op) if i < 4 => op.coefficient(i).clone(),
            _ => Expr::atom(Atom::coef(i as u8, 0)),
        }
    }

    /// The base invariant `D[u]` (direct) or `D[u]/u` (gauge) as a function on the jet space.
    pub fn invariant_function(&self) -> Expr {
        let jets = [Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];
        let term = |i: usize| self.coefficient(i) * Expr::atom(jets[i]);
        match self.mode {
            Mode::Direct => (0..5).map(term).sum(),
            Mode::Gauge => {
                let top: Expr = (1..5).map(term).sum();
                top.div(&Expr::atom(Atom::U)).expect("u is a nonzero atom") + self.coefficient(0)
            }
        }
    }

    /// The concrete value of `f4`, when it can replace the atom everywhere.
    ///
    /// That needs `f4^(1/4)` to be representable: a monomial with a rational
    /// fourth root of its coefficient.
    pub fn f4_substitution(&self) -> Option<BTreeMap<Atom, Expr>> {
        let f4 = self.operator.as_ref()?.coefficient(4);
        f4.pow(&q(1, 4)).ok()?;
        Some(BTreeMap::from([(Atom::coef(4, 0), f4.clone())]))
    }

    /// Replaces the `f4` atom by its concrete value when possible.
    pub fn finalize(&self, e: &Expr) -> Expr {
        match self.f4_substitution() {
            Some(b) => e.substitute(&b).unwrap_or_else(|_| e.clone()),
            None => e.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concrete_rules_differentiate_f4() {
        let op = OperatorSpec::from_strs(["0", "0", "0", "x", "x^2 + 1"]).unwrap();
        let m = Model::concrete(&op, Mode::Direct);
        let f4 = Expr::atom(Atom::coef(4, 0));
        assert_eq!(f4.diff_with(Atom::X, m.rules()), Expr::int(2) * Expr::atom(Atom::X));
        assert!(m.f4_substitution().is_none());
        let i = m.invariant_function();
        assert!(i.contains_atom(Atom::coef(4, 0)));
        assert!(!i.contains_atom(Atom::coef(3, 0)));
    }

    #[test]
    fn monomial_f4_is_substituted() {
        let op = OperatorSpec::from_strs(["0", "0", "0", "0", "16*x^4"]).unwrap();
        let m = Model::concrete(&op, Mode::Gauge);
        let e = Expr::atom(Atom::coef(4, 0)).pow(&q(1, 4)).unwrap();
        assert_eq!(m.finalize(&e), Expr::int(2) * Expr::atom(Atom::X));
    }
}
