use std::collections::BTreeMap;

use rand::Rng;

use super::{rel_close, rel_deviation, Check, Config};
use crate::cartan::reference::{self, derived_value, Expectation, Target};
use crate::cartan::{derived_invariants, generic_pipeline, run_pipeline, Model, PipelineResult};
use crate::expr::{Atom, Expr, SubstCache};
use crate::exterior::{Form, TangentVector};
use crate::jet::{
    base_invariant_value, sample, CoefficientSource, JetError, JetPoint, Mode, OperatorSpec, Transformation,
};

const CHART: [Atom; 6] = [Atom::X, Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];

fn at_x(e: &Expr, x: f64) -> Result<f64, JetError> {
    Ok(e.eval(&|a| (a == Atom::X).then_some(x))?)
}

/// `(x0, u, u', u'', u''', u'''')` for a function of `x`.
pub fn jet_of(u: &Expr, x0: f64) -> Result<JetPoint, JetError> {
    let mut v = [x0; 6];
    let mut d = u.clone();
    for slot in v.iter_mut().skip(1) {
        *slot = at_x(&d, x0)?;
        d = d.diff(Atom::X);
    }
    Ok(JetPoint::from_slice(&v).expect("six entries"))
}

/// Transformed point with `x` replaced by the source `x`, which is where
/// composed coefficient sources expect to be evaluated.
fn source_chart(jp: &JetPoint, bar: &JetPoint) -> JetPoint {
    JetPoint { x: jp.x, ..*bar }
}

fn transformation(rng: &mut impl Rng, cfg: &Config, trial: usize) -> Transformation {
    sample::transformation(rng, cfg.interval, trial.is_multiple_of(2))
}

pub fn prolongation_functorial(cfg: &Config) -> Check {
    let mut c = Check::new("prolongation_functorial");
    let mut rng = cfg.rng("prolongation_functorial");
    for trial in 0..40 {
        // Affine pairs compose exactly; curved pairs lose digits through xi' in the fourth jet.
        let (affine, tol) = if trial % 2 == 0 { (true, 1e-10) } else { (false, 1e-7) };
        let t1 = sample::transformation(&mut rng, cfg.interval, affine);
        // The second map must be admissible on the image of the first.
        let image = (at_x(t1.xi(), cfg.interval.0), at_x(t1.xi(), cfg.interval.1));
        let (Ok(lo), Ok(hi)) = image else {
            c.record(false, || format!("xi1 = {} undefined on the interval", t1.xi()));
            continue;
        };
        let t2 = sample::transformation(&mut rng, (lo, hi), affine);
        let jp = sample::jet_point(&mut rng, cfg.interval);
        let r = (|| -> Result<([f64; 6], [f64; 6]), JetError> {
            let once = t2.after(&t1)?.prolong(&jp)?;
            let twice = t2.prolong(&t1.prolong(&jp)?)?;
            Ok((once.as_array(), twice.as_array()))
        })();
        match r {
            Ok((a, b)) => c.record(a.iter().zip(&b).all(|(x, y)| rel_close(*x, *y, tol)), || {
                format!("xi1 = {}, xi2 = {}: {a:?} vs {b:?}", t1.xi(), t2.xi())
            }),
            Err(e) => c.record(false, || format!("xi1 = {}, xi2 = {}: {e}", t1.xi(), t2.xi())),
        }
    }
    c
}

pub fn contact_preserved(cfg: &Config) -> Check {
    let mut c = Check::new("contact_preserved");
    let mut rng = cfg.rng("contact_preserved");
    let total: [(Atom, Expr); 5] = [
        (Atom::X, Expr::one()),
        (Atom::U, Expr::atom(Atom::P)),
        (Atom::P, Expr::atom(Atom::Q)),
        (Atom::Q, Expr::atom(Atom::R)),
        (Atom::R, Expr::atom(Atom::S)),
    ];
    for trial in 0..10 {
        let t = transformation(&mut rng, cfg, trial);
        let pro = t.prolongation_formulas();
        let d = |e: &Expr| Form::scalar(e.clone()).d();
        for k in 0..4 {
            let r = (|| -> Result<bool, crate::exterior::ExteriorError> {
                let form = d(&pro[k])?.sub(&d(t.xi())?.scale(&pro[k + 1]));
                let contracted: Expr = total
                    .iter()
                    .map(|(a, v)| form.coefficient(&[*a]) * v)
                    .sum();
                Ok(contracted.is_zero() && form.coefficient(&[Atom::S]).is_zero())
            })();
            c.attempt(r, || format!("contact form {k} under xi = {}, phi = {}", t.xi(), t.phi()));
        }
    }
    c
}

/// `Dbar[ubar]` at `xi(x0)`: through the explicit operator when `xi` is
/// affine, through the prolonged jet otherwise.
fn transformed_action(
    op: &OperatorSpec,
    t: &Transformation,
    mode: Mode,
    u: &Expr,
    x0: f64,
) -> Result<f64, JetError> {
    let top = t.transform_operator(op, mode)?;
    if t.is_affine() {
        let explicit = top.explicit()?;
        let c1 = t.xi_derivative(1).clone();
        let c0 = t.xi() - &(&c1 * &Expr::atom(Atom::X));
        let back = (Expr::atom(Atom::X) - c0).div(&c1)?;
        let bindings = BTreeMap::from([(Atom::X, back)]);
        let ubar = (t.phi() * u).substitute_cached(&bindings, &mut SubstCache::new())?;
        explicit.apply(&ubar, at_x(t.xi(), x0)?)
    } else {
        let bar = t.prolong(&jet_of(u, x0)?)?;
        let d = bar.derivatives();
        (0..5).try_fold(0.0, |acc, m| Ok(acc + top.coefficient_value(m, 0, x0)? * d[m]))
    }
}

pub fn operator_identity(cfg: &Config) -> Check {
    let mut c = Check::new("operator_identity");
    for mode in Mode::ALL {
        let mut rng = cfg.rng(&format!("operator_identity.{mode}"));
        for trial in 0..50 {
            let op = sample::operator(&mut rng, cfg.interval);
            let t = transformation(&mut rng, cfg, trial);
            let u = sample::test_function(&mut rng);
            let x0 = rng.gen_range(cfg.interval.0..=cfg.interval.1);
            let r = (|| -> Result<(f64, f64), JetError> {
                let lhs = transformed_action(&op, &t, mode, &u, x0)?;
                let mut rhs = op.apply(&u, x0)?;
                if mode == Mode::Gauge {
                    rhs *= at_x(t.phi(), x0)?;
                }
                Ok((lhs, rhs))
            })();
            match r {
                Ok((l, rr)) => c.record(rel_close(l, rr, 1e-9), || {
                    format!("{mode}: {l} vs {rr} for u = {u}, xi = {}, phi = {}", t.xi(), t.phi())
                }),
                Err(e) => c.record(false, || format!("{mode}: {e}")),
            }
        }
    }
    c
}

pub fn base_invariant_preserved(cfg: &Config) -> Check {
    let mut c = Check::new("base_invariant_preserved");
    for mode in Mode::ALL {
        let mut rng = cfg.rng(&format!("base_invariant.{mode}"));
        for trial in 0..20 {
            let op = sample::operator(&mut rng, cfg.interval);
            let t = transformation(&mut rng, cfg, trial);
            let jp = sample::jet_point(&mut rng, cfg.interval);
            let r = (|| -> Result<bool, JetError> {
                let top = t.transform_operator(&op, mode)?;
                let bar = source_chart(&jp, &t.prolong(&jp)?);
                Ok(rel_close(
                    base_invariant_value(&top, &bar, mode)?,
                    base_invariant_value(&op, &jp, mode)?,
                    1e-9,
                ))
            })();
            c.attempt(r, || format!("{mode}: xi = {}, phi = {}", t.xi(), t.phi()));
        }
    }
    c
}

fn generic(c: &mut Check, mode: Mode) -> Option<&'static PipelineResult> {
    match generic_pipeline(mode) {
        Ok(r) => Some(r),
        Err(e) => {
            c.record(false, || format!("{mode} pipeline: {e}"));
            None
        }
    }
}

pub fn free_torsion(_: &Config) -> Check {
    let mut c = Check::new("free_torsion");
    for mode in Mode::ALL {
        let (Some(result), Ok(rows)) = (generic(&mut c, mode), reference::fixture(mode)) else {
            continue;
        };
        for row in rows.iter().filter(|r| matches!(r.target, Target::Free(_))) {
            let r = derived_value(result, &row.target).map(|d| d == row.paper);
            c.attempt(r, || format!("{mode} {}", row.key));
        }
    }
    c
}

fn check_targets(c: &mut Check, label: &str, result: &PipelineResult) {
    for record in &result.stages {
        let steps = &record.stage.steps;
        let ok = record.achieved.len() == steps.len()
            && steps
                .iter()
                .zip(&record.achieved)
                .all(|(s, (slot, v))| *slot == s.slot && *v == Expr::rational(s.target.clone()));
        c.record(ok, || format!("{label} stage {}: {:?}", record.stage.index, record.achieved));
    }
    c.record(result.equations.residual_is_empty(), || format!("{label}: residual left"));
}

pub fn normalization_targets(cfg: &Config) -> Check {
    let mut c = Check::new("normalization_targets");
    for mode in Mode::ALL {
        if let Some(r) = generic(&mut c, mode) {
            check_targets(&mut c, &format!("{mode} generic"), r);
        }
        let mut rng = cfg.rng(&format!("normalization.{mode}"));
        for k in 0..2 {
            let op = sample::operator(&mut rng, cfg.interval);
            match run_pipeline(&Model::concrete(&op, mode)) {
                Ok(r) => check_targets(&mut c, &format!("{mode} operator {k}"), &r),
                Err(e) => c.record(false, || format!("{mode} operator {k}: {e}")),
            }
        }
    }
    c
}

pub fn constants_rigid(cfg: &Config) -> Check {
    let mut c = Check::new("constants_rigid");
    for mode in Mode::ALL {
        let Some(g) = generic(&mut c, mode) else { continue };
        let expected = g.constant_slots();
        let mut rng = cfg.rng(&format!("constants_rigid.{mode}"));
        for k in 0..5 {
            let op = sample::operator(&mut rng, cfg.interval);
            let r = run_pipeline(&Model::concrete(&op, mode)).map(|r| r.constant_slots() == expected);
            c.attempt(r, || format!("{mode} operator {k}: {:?}", op.coefficients()));
        }
    }
    c
}

pub fn parameter_free(cfg: &Config) -> Check {
    let mut c = Check::new("parameter_free");
    for mode in Mode::ALL {
        if let Some(g) = generic(&mut c, mode) {
            c.record(g.invariants.parameter_free(), || format!("{mode} generic"));
        }
        let mut rng = cfg.rng(&format!("parameter_free.{mode}"));
        let op = sample::operator(&mut rng, cfg.interval);
        let r = derived_invariants(&op, mode).map(|s| s.parameter_free());
        c.attempt(r, || format!("{mode} concrete"));
    }
    c
}

pub fn invariance(cfg: &Config) -> Check {
    let mut c = Check::new("invariance");
    for mode in Mode::ALL {
        let Some(g) = generic(&mut c, mode) else { continue };
        let mut rng = cfg.rng(&format!("invariance.{mode}"));
        for trial in 0..20 {
            let op = sample::operator(&mut rng, cfg.interval);
            let t = transformation(&mut rng, cfg, trial);
            let jp = sample::jet_point(&mut rng, cfg.interval);
            let r = (|| -> Result<Vec<(f64, f64)>, JetError> {
                let top = t.transform_operator(&op, mode)?;
                let bar = source_chart(&jp, &t.prolong(&jp)?);
                let before = g.invariants.evaluate(&op, &jp)?;
                let after = g.invariants.evaluate(&top, &bar)?;
                Ok(before.into_iter().zip(after).collect())
            })();
            match r {
                Err(e) => c.record(false, || format!("{mode}: {e}")),
                Ok(pairs) => {
                    for (inv, (a, b)) in g.invariants.iter().zip(pairs) {
                        c.record(rel_close(a, b, 1e-8), || {
                            format!("{mode} {}: {a} vs {b} under xi = {}, phi = {}", inv.name, t.xi(), t.phi())
                        });
                    }
                }
            }
        }
    }
    c
}

fn jacobian(t: &Transformation) -> Vec<Vec<Expr>> {
    std::iter::once(t.xi())
        .chain(t.prolongation_formulas().iter())
        .map(|f| CHART.iter().map(|&v| f.diff(v)).collect())
        .collect()
}

fn push_forward(j: &[Vec<Expr>], env: &BTreeMap<Atom, f64>, v: &TangentVector) -> Result<TangentVector, JetError> {
    let mut out = TangentVector::new();
    for (row, &target) in j.iter().zip(CHART.iter()) {
        let mut s = 0.0;
        for (e, src) in row.iter().zip(CHART.iter()) {
            if !e.is_zero() {
                s += e.eval_map(env)? * v.get(src).copied().unwrap_or(0.0);
            }
        }
        out.insert(target, s);
    }
    Ok(out)
}

/// Largest relative gap between `θ(v)` and `θ̄(Φ_* v)` over the coframe.
pub fn equivariance_gap(
    result: &PipelineResult,
    op: &OperatorSpec,
    t: &Transformation,
    jp: &JetPoint,
    v: &TangentVector,
) -> Result<f64, JetError> {
    let mode = result.mode();
    let top = t.transform_operator(op, mode)?;
    let bar = source_chart(jp, &t.prolong(jp)?);
    let env = crate::cartan::jet_env(op, jp)?;
    let env_bar = crate::cartan::jet_env(&top, &bar)?;
    let w = push_forward(&jacobian(t), &jp.env(), v)?;
    let mut worst: f64 = 0.0;
    for theta in &result.coframe {
        let a = theta.eval(&env, &[v]).map_err(|e| JetError::Domain(e.to_string()))?;
        let b = theta.eval(&env_bar, &[&w]).map_err(|e| JetError::Domain(e.to_string()))?;
        worst = worst.max(rel_deviation(a, b));
    }
    Ok(worst)
}

pub fn coframe_equivariance(cfg: &Config) -> Check {
    let mut c = Check::new("coframe_equivariance");
    for mode in Mode::ALL {
        let Some(g) = generic(&mut c, mode) else { continue };
        let mut rng = cfg.rng(&format!("equivariance.{mode}"));
        for trial in 0..10 {
            let op = sample::operator(&mut rng, cfg.interval);
            let t = transformation(&mut rng, cfg, trial);
            for _ in 0..2 {
                let jp = sample::jet_point(&mut rng, cfg.interval);
                let v: TangentVector = CHART.iter().map(|&a| (a, rng.gen_range(-1.0..1.0))).collect();
                let r = equivariance_gap(g, &op, &t, &jp, &v).map(|gap| gap <= 1e-8);
                c.attempt(r, || format!("{mode}: xi = {}, phi = {}", t.xi(), t.phi()));
            }
        }
    }
    c
}

pub fn bianchi(_: &Config) -> Check {
    let mut c = Check::new("bianchi");
    for mode in Mode::ALL {
        if let Some(g) = generic(&mut c, mode) {
            let r = g.bianchi_defects().map(|d| d.is_empty());
            c.attempt(r, || format!("{mode}"));
        }
    }
    c
}

/// `e` with `(u, p, q, r, s)` scaled by `lambda`.
pub fn scale_jets(e: &Expr) -> Result<Expr, crate::expr::ExprError> {
    let lambda = Expr::atom(Atom::LAMBDA);
    let bindings: BTreeMap<Atom, Expr> = CHART[1..]
        .iter()
        .map(|&a| (a, &lambda * &Expr::atom(a)))
        .collect();
    e.substitute_cached(&bindings, &mut SubstCache::new())
}

pub fn gauge_homogeneity(_: &Config) -> Check {
    let mut c = Check::new("gauge_homogeneity");
    if let Some(g) = generic(&mut c, Mode::Gauge) {
        for inv in g.invariants.iter() {
            c.attempt(scale_jets(&inv.expr).map(|s| s == inv.expr), || inv.name.to_string());
        }
    }
    c
}

pub fn concrete_matches_generic(cfg: &Config) -> Check {
    let mut c = Check::new("concrete_matches_generic");
    for mode in Mode::ALL {
        let Some(g) = generic(&mut c, mode) else { continue };
        let mut rng = cfg.rng(&format!("concrete.{mode}"));
        for _ in 0..3 {
            let op = sample::operator(&mut rng, cfg.interval);
            let concrete = match derived_invariants(&op, mode) {
                Ok(s) => s,
                Err(e) => {
                    c.record(false, || format!("{mode}: {e}"));
                    continue;
                }
            };
            for _ in 0..5 {
                let jp = sample::jet_point(&mut rng, cfg.interval);
                let r = (|| -> Result<bool, JetError> {
                    let a = concrete.evaluate(&op, &jp)?;
                    let b = g.invariants.evaluate(&op, &jp)?;
                    Ok(a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| rel_close(*x, *y, 1e-9)))
                })();
                c.attempt(r, || format!("{mode}: {:?}", op.coefficients()));
            }
        }
    }
    c
}

pub fn verify_paper(_: &Config) -> Check {
    let mut c = Check::new("verify_paper");
    for mode in Mode::ALL {
        match reference::compare_with_paper(mode) {
            Err(e) => c.record(false, || format!("{mode}: {e}")),
            Ok(report) => {
                for row in &report.rows {
                    let close = row.expect != Expectation::Equal || row.deviation.is_none_or(|d| d <= 1e-10);
                    c.record(row.as_expected() && close, || {
                        format!("{mode} {}: {} (expected {})", row.key, row.verdict, row.expect)
                    });
                }
            }
        }
    }
    c
}
