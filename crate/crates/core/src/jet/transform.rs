use std::collections::BTreeMap;

use super::operator::{eval_at_x, grid, CoefficientSource, OperatorSpec};
use super::{JetError, JetPoint, Mode};
use crate::expr::{Atom, Expr, SubstCache};
use crate::parse::{parse_transformation_file, TransformationFile};

const ORDERS: usize = 6;

/// Fiber-preserving map `xbar = xi(x)`, `ubar = phi(x) u`, with cached
/// derivatives and symbolic prolongation formulas.
#[derive(Clone, Debug)]
pub struct Transformation {
    xi: Vec<Expr>,
    phi: Vec<Expr>,
    /// `ubar, pbar, qbar, rbar, sbar` as functions of `(x, u, p, q, r, s)`.
    prolongation: [Expr; 5],
}

fn derivatives(e: Expr) -> Vec<Expr> {
    let mut v = vec![e];
    for k in 1..ORDERS {
        let next = v[k - 1].diff(Atom::X);
        v.push(next);
    }
    v
}

/// Total derivative truncated at the fourth jet: `d/dx + p d/du + q d/dp + r d/dq + s d/dr`.
fn total_derivative(g: &Expr) -> Expr {
    let chain = [
        (Atom::U, Atom::P),
        (Atom::P, Atom::Q),
        (Atom::Q, Atom::R),
        (Atom::R, Atom::S),
    ];
    let mut out = g.diff(Atom::X);
    for (v, next) in chain {
        if g.contains_atom(v) {
            out = out + g.diff(v) * Expr::atom(next);
        }
    }
    out
}

impl Transformation {
    pub fn new(xi: Expr, phi: Expr) -> Result<Self, JetError> {
        for (name, e) in [("xi", &xi), ("phi", &phi)] {
            if let Some(a) = e.atoms().into_iter().find(|a| *a != Atom::X) {
                return Err(JetError::NotInX(format!("{name} mentions {a}")));
            }
        }
        if phi.is_zero() {
            return Err(JetError::Domain("phi must be nonzero".into()));
        }
        let xi = derivatives(xi);
        if xi[1].is_zero() {
            return Err(JetError::Domain("xi' must be nonzero".into()));
        }
        let phi = derivatives(phi);
        // pro_k = N_k / xi'^b_k; D(N / xi'^b) / xi' = (D N xi' - b N xi'') / xi'^(b+2).
        let mut n = &phi[0] * Expr::atom(Atom::U);
        let mut b = 0i64;
        let mut pro: Vec<Expr> = vec![n.clone()];
        for _ in 1..5 {
            n = &total_derivative(&n) * &xi[1] - &(&n * &xi[2]) * Expr::int(b);
            b += 2;
            pro.push(n.div(&xi[1].pow_int(b)?)?);
        }
        Ok(Transformation {
            xi,
            phi,
            prolongation: pro.try_into().expect("five entries"),
        })
    }

    pub fn from_file(f: TransformationFile) -> Result<Self, JetError> {
        Transformation::new(f.xi, f.phi)
    }

    pub fn parse(text: &str) -> Result<Self, JetError> {
        Transformation::from_file(parse_transformation_file(text)?)
    }

    pub fn from_strs(xi: &str, phi: &str) -> Result<Self, JetError> {
        let vars = crate::parse::VarSet::only_x();
        Transformation::new(
            crate::parse::parse_expr(xi, &vars)?,
            crate::parse::parse_expr(phi, &vars)?,
        )
    }

    pub fn identity() -> Self {
        Transformation::new(Expr::atom(Atom::X), Expr::one()).expect("valid")
    }

    pub fn xi(&self) -> &Expr {
        &self.xi[0]
    }

    pub fn phi(&self) -> &Expr {
        &self.phi[0]
    }

    /// `xi^(k)` for `k < 6`.
    pub fn xi_derivative(&self, k: usize) -> &Expr {
        &self.xi[k]
    }

    /// `phi^(k)` for `k < 6`.
    pub fn phi_derivative(&self, k: usize) -> &Expr {
        &self.phi[k]
    }

    pub fn prolongation_formulas(&self) -> &[Expr; 5] {
        &self.prolongation
    }

    pub fn is_affine(&self) -> bool {
        self.xi[2].is_zero()
    }

    /// Checks `xi' != 0` and `phi != 0` on the 101-point grid.
    pub fn check_domain(&self, interval: (f64, f64)) -> Result<(), JetError> {
        for x in grid(interval) {
            if eval_at_x(&self.xi[1], x)?.abs() < 1e-12 {
                return Err(JetError::Domain(format!("xi' vanishes at x = {x}")));
            }
            if eval_at_x(&self.phi[0], x)?.abs() < 1e-12 {
                return Err(JetError::Domain(format!("phi vanishes at x = {x}")));
            }
        }
        Ok(())
    }

    /// `(sign of xi', sign of phi)` on the interval, assuming neither vanishes.
    pub fn orientation(&self, interval: (f64, f64)) -> Result<(f64, f64), JetError> {
        let mid = 0.5 * (interval.0 + interval.1);
        Ok((
            eval_at_x(&self.xi[1], mid)?.signum(),
            eval_at_x(&self.phi[0], mid)?.signum(),
        ))
    }

    /// Image of a jet point under the prolonged map.
    pub fn prolong(&self, jp: &JetPoint) -> Result<JetPoint, JetError> {
        let env = jp.env();
        let get = |e: &Expr| -> Result<f64, JetError> { Ok(e.eval_map(&env)?) };
        let p = &self.prolongation;
        Ok(JetPoint::new(
            get(&self.xi[0])?,
            get(&p[0])?,
            get(&p[1])?,
            get(&p[2])?,
            get(&p[3])?,
            get(&p[4])?,
        ))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Transformation) -> Result<Transformation, JetError> {
        let mut b = BTreeMap::new();
        b.insert(Atom::X, first.xi[0].clone());
        let mut cache = SubstCache::new();
        let xi = self.xi[0].substitute_cached(&b, &mut cache)?;
        let phi = self.phi[0].substitute_cached(&b, &mut cache)? * &first.phi[0];
        Transformation::new(xi, phi)
    }

    /// Coefficients of the transformed operator under the direct or gauge rule.
    pub fn transform_operator(&self, op: &OperatorSpec, mode: Mode) -> Result<TransformedOperator, JetError> {
        transform_operator(op, self, mode)
    }
}

/// A transformed operator whose coefficients are kept as functions of the
/// source variable, alongside the map `xi`.
#[derive(Clone, Debug)]
pub struct TransformedOperator {
    /// `derivatives[m][k]`: `k`-th derivative of `fbar_m` with respect to `xbar`,
    /// written in the source variable.
    derivatives: Vec<Vec<Expr>>,
    xi: Expr,
    affine: bool,
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `D^j = Σ_m B[j][m] Dbar^m` with `D = xi' Dbar`.
fn chain_matrix(t: &Transformation) -> Vec<Vec<Expr>> {
    let mut b = vec![vec![Expr::zero(); 5]; 5];
    b[0][0] = Expr::one();
    for j in 0..4 {
        for m in 0..5 {
            let mut v = b[j][m].diff(Atom::X);
            if m > 0 {
                v = v + &b[j][m - 1] * &t.xi[1];
            }
            b[j + 1][m] = v;
        }
    }
    b
}

pub fn transform_operator(
    op: &OperatorSpec,
    t: &Transformation,
    mode: Mode,
) -> Result<TransformedOperator, JetError> {
    let b = chain_matrix(t);
    let phi = &t.phi[0];
    let dphi = phi.diff(Atom::X);
    // (1/phi)^(k) = P_k / phi^(k+1), with numerators kept free of division.
    let mut inv_phi_num = vec![Expr::one()];
    for k in 0..4 {
        let p: &Expr = &inv_phi_num[k];
        let next = &p.diff(Atom::X) * phi - &(p * &dphi) * Expr::int(k as i64 + 1);
        inv_phi_num.push(next);
    }
    let phi_pow: Vec<Expr> = (0..=5).scan(Expr::one(), |acc, _| {
        let out = acc.clone();
        *acc = &*acc * phi;
        Some(out)
    }).collect();
    // D[u] with u = ubar/phi: D^i u = Σ_j C(i,j) (1/phi)^(i-j) D^j ubar.
    // Numerators of fbar_m over phi^5.
    let mut numer = vec![Expr::zero(); 5];
    for i in 0..5 {
        let fi = op.coefficient(i);
        if fi.is_zero() {
            continue;
        }
        for j in 0..=i {
            let k = i - j;
            let w = fi * &inv_phi_num[k] * &phi_pow[4 - k] * Expr::int(binomial(i, j));
            if w.is_zero() {
                continue;
            }
            for m in 0..=j {
                if !b[j][m].is_zero() {
                    numer[m] = &numer[m] + &(&w * &b[j][m]);
                }
            }
        }
    }
    let phi_exp: i64 = if mode == Mode::Gauge { 4 } else { 5 };
    let (dxi, ddxi) = (&t.xi[1], &t.xi[2]);
    let mut derivatives = Vec::with_capacity(5);
    for n in numer {
        // d/dxbar [N phi^-a xi'^-b] = (N' phi xi' - a N phi' xi' - b N phi xi'') / (phi^(a+1) xi'^(b+2)).
        let (mut n, mut a, mut bexp) = (n, phi_exp, 0i64);
        let mut v = Vec::with_capacity(ORDERS);
        for k in 0..ORDERS {
            let den = &phi.pow_int(a)? * &dxi.pow_int(bexp)?;
            v.push(n.div(&den)?);
            if k + 1 == ORDERS {
                break;
            }
            n = &(&n.diff(Atom::X) * phi) * dxi
                - &(&(&n * &dphi) * dxi) * Expr::int(a)
                - &(&(&n * phi) * ddxi) * Expr::int(bexp);
            a += 1;
            bexp += 2;
        }
        derivatives.push(v);
    }
    Ok(TransformedOperator {
        derivatives,
        xi: t.xi[0].clone(),
        affine: t.is_affine(),
    })
}

impl TransformedOperator {
    /// `fbar_m` as a function of the source variable.
    pub fn coefficient(&self, m: usize) -> &Expr {
        &self.derivatives[m][0]
    }

    pub fn xi(&self) -> &Expr {
        &self.xi
    }

    /// Rewrites the coefficients in the target variable when `xi` is affine.
    pub fn explicit(&self) -> Result<OperatorSpec, JetError> {
        if !self.affine {
            return Err(JetError::InverseUnavailable);
        }
        let c1 = self.xi.diff(Atom::X);
        let c0 = eval_free(&self.xi)?;
        let mut b = BTreeMap::new();
        b.insert(Atom::X, (Expr::atom(Atom::X) - c0).div(&c1)?);
        let mut cache = SubstCache::new();
        let coeffs: Vec<Expr> = (0..5)
            .map(|m| self.derivatives[m][0].substitute_cached(&b, &mut cache))
            .collect::<Result<_, _>>()?;
        OperatorSpec::new(coeffs.try_into().expect("five coefficients"))
    }
}

/// Value of a polynomial in `x` at `x = 0`, kept exact.
fn eval_free(e: &Expr) -> Result<Expr, JetError> {
    let mut z = BTreeMap::new();
    z.insert(Atom::X, Expr::zero());
    Ok(e.substitute(&z)?)
}

impl CoefficientSource for TransformedOperator {
    fn coefficient_value(&self, i: usize, k: usize, x: f64) -> Result<f64, JetError> {
        let e = self
            .derivatives
            .get(i)
            .and_then(|v| v.get(k))
            .ok_or_else(|| JetError::Domain(format!("derivative order {k} not cached")))?;
        eval_at_x(e, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::operator::base_invariant_value;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn prolongation_examples() {
        let jp = JetPoint::new(0.3, 1.5, 0.2, -0.7, 1.1, 2.0);
        assert_eq!(Transformation::identity().prolong(&jp).unwrap(), jp);

        let scale = Transformation::from_strs("2*x", "1").unwrap();
        let out = scale.prolong(&jp).unwrap();
        let expected = JetPoint::new(0.6, 1.5, 0.1, -0.7 / 4.0, 1.1 / 8.0, 2.0 / 16.0);
        assert_eq!(out, expected);

        let lin = Transformation::from_strs("x", "x").unwrap();
        let jp = JetPoint::new(1.0, 0.5, 0.25, -1.0, 2.0, 3.0);
        let out = lin.prolong(&jp).unwrap();
        let want = [0.5, 0.5 + 0.25, 2.0 * 0.25 - 1.0, -3.0 + 2.0, 4.0 * 2.0 + 3.0];
        for (a, b) in out.derivatives().iter().zip(want) {
            assert!(close(*a, b, 1e-14));
        }
    }

    #[test]
    fn constant_phi_rules() {
        let t = Transformation::from_strs("x", "2").unwrap();
        let d = t.transform_operator(&OperatorSpec::d4(), Mode::Direct).unwrap();
        assert_eq!(d.explicit().unwrap().coefficient(4), &Expr::frac(1, 2));
        let g = t.transform_operator(&OperatorSpec::d4(), Mode::Gauge).unwrap();
        assert_eq!(g.explicit().unwrap(), OperatorSpec::d4());
    }

    #[test]
    fn scaling_gives_sixteen() {
        let t = Transformation::from_strs("2*x", "1").unwrap();
        let d = t.transform_operator(&OperatorSpec::d4(), Mode::Direct).unwrap();
        let e = d.explicit().unwrap();
        assert_eq!(e.coefficient(4), &Expr::int(16));
    }

    #[test]
    fn non_affine_has_no_explicit_form() {
        let t = Transformation::from_strs("x^2", "1").unwrap();
        let d = t.transform_operator(&OperatorSpec::d4(), Mode::Direct).unwrap();
        let err = d.explicit().unwrap_err();
        assert_eq!(err.to_string(), "inverse not available; use composed representation");
    }

    #[test]
    fn base_invariant_is_preserved() {
        let op = OperatorSpec::from_strs(["x", "1/2", "x^2 - 1", "3", "x^2 + 1"]).unwrap();
        let t = Transformation::from_strs("x + x^2/5 + 1/3", "1 + x/2").unwrap();
        let jp = JetPoint::new(1.4, 0.8, -0.3, 1.2, 0.5, -1.1);
        let bar = t.prolong(&jp).unwrap();
        for mode in [Mode::Direct, Mode::Gauge] {
            let tr = t.transform_operator(&op, mode).unwrap();
            let a = base_invariant_value(&op, &jp, mode).unwrap();
            // coefficients of the composed form are evaluated at the source x
            let b = base_invariant_value(&tr, &JetPoint { x: jp.x, ..bar }, mode).unwrap();
            assert!(close(a, b, 1e-12), "{mode:?}: {a} vs {b}");
        }
    }

    #[test]
    fn nonzero_checks() {
        assert!(Transformation::from_strs("x", "0").is_err());
        assert!(Transformation::from_strs("3", "1").is_err());
        let t = Transformation::from_strs("x", "x - 1.5").unwrap();
        assert!(t.check_domain((1.0, 2.0)).is_err());
    }
}
