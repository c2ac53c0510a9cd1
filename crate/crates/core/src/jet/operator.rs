use std::collections::BTreeMap;

use super::{JetError, JetPoint, Mode};
use crate::expr::{Atom, Expr};
use crate::parse::{parse_operator_file, OperatorFile};

/// Highest coefficient derivative kept precomputed.
pub const CACHED_ORDERS: usize = 6;

/// `Σ f_i(x) D^i` with `i = 0..=4`; coefficients are expressions in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub name: Option<String>,
    /// `derivatives[i][k] = f_i^(k)`.
    derivatives: Vec<Vec<Expr>>,
}

/// Anything that can report `f_i^(k)` numerically at a source point `x`.
///
/// For an operator given in its own variable this is ordinary
/// differentiation. For a transformed operator kept in the source variable it
/// is differentiation with respect to the target variable.
pub trait CoefficientSource {
    fn coefficient_value(&self, i: usize, k: usize, x: f64) -> Result<f64, JetError>;

    /// Bindings for every coefficient atom `f_i^(k)`, `k < orders`, at `x`.
    fn coefficient_env(&self, x: f64, orders: usize) -> Result<BTreeMap<Atom, f64>, JetError> {
        let mut env = BTreeMap::new();
        for i in 0..5 {
            for k in 0..orders {
                env.insert(
                    Atom::coef(i as u8, k as u8),
                    self.coefficient_value(i, k, x)?,
                );
            }
        }
        Ok(env)
    }
}

pub(crate) fn eval_at_x(e: &Expr, x: f64) -> Result<f64, JetError> {
    Ok(e.eval(&|a| if a == Atom::X { Some(x) } else { None })?)
}

impl OperatorSpec {
    pub fn new(coefficients: [Expr; 5]) -> Result<Self, JetError> {
        for (i, c) in coefficients.iter().enumerate() {
            if let Some(a) = c.atoms().into_iter().find(|a| *a != Atom::X) {
                return Err(JetError::NotInX(format!("f{i} mentions {a}")));
            }
        }
        if coefficients[4].is_zero() {
            return Err(JetError::Domain("f4 must be nonzero".into()));
        }
        let derivatives = coefficients
            .into_iter()
            .map(|c| {
                let mut v = vec![c];
                for k in 1..CACHED_ORDERS {
                    let next = v[k - 1].diff(Atom::X);
                    v.push(next);
                }
                v
            })
            .collect();
        Ok(OperatorSpec {
            name: None,
            derivatives,
        })
    }

    pub fn from_file(f: OperatorFile) -> Result<Self, JetError> {
        let mut op = OperatorSpec::new(f.coefficients)?;
        op.name = f.name;
        Ok(op)
    }

    pub fn parse(text: &str) -> Result<Self, JetError> {
        OperatorSpec::from_file(parse_operator_file(text)?)
    }

    /// Builds from the coefficient strings `[f0, f1, f2, f3, f4]`.
    pub fn from_strs(coefficients: [&str; 5]) -> Result<Self, JetError> {
        let vars = crate::parse::VarSet::only_x();
        let mut out: [Expr; 5] = Default::default();
        for (slot, s) in out.iter_mut().zip(coefficients) {
            *slot = crate::parse::parse_expr(s, &vars)?;
        }
        OperatorSpec::new(out)
    }

    /// The operator `D^4`.
    pub fn d4() -> Self {
        OperatorSpec::from_strs(["0", "0", "0", "0", "1"]).expect("valid")
    }

    pub fn coefficient(&self, i: usize) -> &Expr {
        &self.derivatives[i][0]
    }

    pub fn coefficients(&self) -> [Expr; 5] {
        std::array::from_fn(|i| self.derivatives[i][0].clone())
    }

    /// `f_i^(k)` as an expression in `x`.
    pub fn derivative(&self, i: usize, k: usize) -> Expr {
        if k < self.derivatives[i].len() {
            return self.derivatives[i][k].clone();
        }
        let mut e = self.derivatives[i].last().expect("nonempty").clone();
        for _ in self.derivatives[i].len() - 1..k {
            e = e.diff(Atom::X);
        }
        e
    }

    /// Checks `f4 > 0` on a uniform 101-point grid over `[a, b]`.
    pub fn check_domain(&self, interval: (f64, f64)) -> Result<(), JetError> {
        for x in grid(interval) {
            let v = eval_at_x(self.coefficient(4), x)?;
            if v <= 0.0 {
                return Err(JetError::Domain(format!(
                    "f4 must be positive on [{}, {}]; f4({x}) = {v}",
                    interval.0, interval.1
                )));
            }
        }
        Ok(())
    }

    /// `Σ f_i(x0) u^(i)(x0)` for a polynomial `u` in `x`.
    pub fn apply(&self, u: &Expr, x0: f64) -> Result<f64, JetError> {
        let mut total = 0.0;
        let mut du = u.clone();
        for i in 0..5 {
            total += eval_at_x(self.coefficient(i), x0)? * eval_at_x(&du, x0)?;
            du = du.diff(Atom::X);
        }
        Ok(total)
    }

    /// Value of the base invariant at a jet point.
    pub fn invariant_i(&self, jp: &JetPoint, mode: Mode) -> Result<f64, JetError> {
        base_invariant_value(self, jp, mode)
    }
}

impl CoefficientSource for OperatorSpec {
    fn coefficient_value(&self, i: usize, k: usize, x: f64) -> Result<f64, JetError> {
        if k < self.derivatives[i].len() {
            return eval_at_x(&self.derivatives[i][k], x);
        }
        eval_at_x(&self.derivative(i, k), x)
    }
}

/// Uniform 101-point grid over `[a, b]`.
pub fn grid(interval: (f64, f64)) -> impl Iterator<Item = f64> {
    let (a, b) = interval;
    (0..=100).map(move |k| a + (b - a) * k as f64 / 100.0)
}

/// `D[u]` (direct) or `D[u]/u` (gauge) from any coefficient source.
pub fn base_invariant_value(
    src: &dyn CoefficientSource,
    jp: &JetPoint,
    mode: Mode,
) -> Result<f64, JetError> {
    let derivs = jp.derivatives();
    let mut sum = 0.0;
    for (i, d) in derivs.iter().enumerate() {
        sum += src.coefficient_value(i, 0, jp.x)? * d;
    }
    match mode {
        Mode::Direct => Ok(sum),
        Mode::Gauge => {
            if jp.u == 0.0 {
                return Err(JetError::Domain("u must be nonzero in gauge mode".into()));
            }
            Ok(sum / jp.u)
        }
    }
}

/// The base invariant as a symbolic function on the jet space with generic coefficients.
pub fn base_invariant_expr(mode: Mode) -> Expr {
    let jets = [Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];
    match mode {
        Mode::Direct => (0..5)
            .map(|i| Expr::atom(Atom::coef(i as u8, 0)) * Expr::atom(jets[i]))
            .sum(),
        Mode::Gauge => {
            let top: Expr = (1..5)
                .map(|i| Expr::atom(Atom::coef(i as u8, 0)) * Expr::atom(jets[i]))
                .sum();
            top.div(&Expr::atom(Atom::U)).expect("u is nonzero") + Expr::atom(Atom::coef(0, 0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expr, VarSet};

    fn poly(s: &str) -> Expr {
        parse_expr(s, &VarSet::only_x()).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(OperatorSpec::d4().apply(&poly("x^4"), 0.7).unwrap(), 24.0);
        let id = OperatorSpec::from_strs(["1", "0", "0", "0", "1"]).unwrap();
        assert_eq!(id.apply(&poly("x^2"), 3.0).unwrap(), 9.0);
    }

    #[test]
    fn base_invariant_examples() {
        let op = OperatorSpec::from_strs(["3", "0", "0", "0", "1"]).unwrap();
        let jp = JetPoint::new(0.0, 2.0, 0.0, 0.0, 0.0, 4.0);
        assert_eq!(op.invariant_i(&jp, Mode::Gauge).unwrap(), 5.0);
        let jp = JetPoint::new(0.0, 0.0, 0.0, 0.0, 0.0, 7.0);
        assert_eq!(OperatorSpec::d4().invariant_i(&jp, Mode::Direct).unwrap(), 7.0);
        assert!(op.invariant_i(&jp, Mode::Gauge).is_err());
    }

    #[test]
    fn symbolic_invariant_agrees_with_numeric() {
        let op = OperatorSpec::from_strs(["x", "2", "x^2", "-1", "x^2 + 1"]).unwrap();
        let jp = JetPoint::new(1.3, 0.7, -0.2, 1.1, 0.4, -1.5);
        for mode in [Mode::Direct, Mode::Gauge] {
            let mut env = op.coefficient_env(jp.x, 1).unwrap();
            env.extend(jp.env());
            let sym = base_invariant_expr(mode).eval_map(&env).unwrap();
            let num = op.invariant_i(&jp, mode).unwrap();
            assert!((sym - num).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_check() {
        let op = OperatorSpec::from_strs(["0", "0", "0", "0", "x - 1.5"]).unwrap();
        assert!(op.check_domain((1.0, 2.0)).is_err());
        assert!(op.check_domain((1.6, 2.0)).is_ok());
    }

    #[test]
    fn rejects_other_variables() {
        let u = Expr::atom(Atom::U);
        let r = OperatorSpec::new([Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero(), u]);
        assert!(matches!(r, Err(JetError::NotInX(_))));
    }
}
