use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::report::{num, sci, Report};
use super::{Command, Options, Outcome, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use crate::cartan::reference::{compare_with_paper, Expectation};
use crate::cartan::{generic_pipeline, run_pipeline, CartanError, InvariantSet, Model, PipelineResult};
use crate::expr::{Atom, Expr};
use crate::jet::{
    base_invariant_value, grid, sample, CoefficientSource, JetError, JetPoint, Mode, OperatorSpec, Transformation,
};
use crate::parse::{format_expr, ParseError};
use crate::verify::{self, jet_of, rel_close, rel_deviation, Config};

/// Relative tolerance of every check-equiv comparison.
pub const EQUIV_TOLERANCE: f64 = 1e-8;

/// Why a command stopped early.
enum Failure {
    /// Exit 2.
    Input(String),
    /// Exit 1.
    Engine(String),
}

impl From<CartanError> for Failure {
    fn from(e: CartanError) -> Self {
        match e {
            CartanError::Jet(j) => Failure::Input(j.to_string()),
            other => Failure::Engine(other.to_string()),
        }
    }
}

type CmdResult = Result<(i32, Report), Failure>;

pub(super) fn dispatch(command: Command, opts: &Options) -> Outcome {
    let result = match command {
        Command::Derive => derive(opts),
        Command::Invariants => invariants(opts),
        Command::CheckEquiv => check_equiv(opts),
        Command::VerifyPaper => verify_paper(opts),
        Command::Selftest => selftest(opts),
    };
    match result {
        Ok((code, report)) => Outcome {
            code,
            stdout: report.into_string(),
            stderr: String::new(),
        },
        Err(Failure::Input(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Engine(msg)) => Outcome {
            code: EXIT_FAILED,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn require_mode(opts: &Options) -> Result<Mode, Failure> {
    opts.mode
        .ok_or_else(|| Failure::Input("--mode direct|gauge is required".into()))
}

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    value
        .as_ref()
        .ok_or_else(|| Failure::Input(format!("--{flag} is required")))
}

/// `path:line:column: message` followed by the offending line and a caret.
pub fn render_parse_error(path: &Path, text: &str, err: &ParseError) -> String {
    let span = &err.span;
    let mut out = format!("{}: {err}", path.display());
    if let Some(line) = text.lines().nth(span.line.saturating_sub(1)) {
        let col = span.column.saturating_sub(1);
        let width = (span.end.saturating_sub(span.begin)).max(1);
        let width = width.min(line.len().saturating_sub(col).max(1));
        let _ = write!(out, "\n  | {line}\n  | {}{}", " ".repeat(col), "^".repeat(width));
    }
    out
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn input_error(path: &Path, text: &str, e: JetError) -> Failure {
    match e {
        JetError::Parse(pe) => Failure::Input(render_parse_error(path, text, &pe)),
        other => Failure::Input(format!("{}: {other}", path.display())),
    }
}

fn load_operator(path: &Path) -> Result<OperatorSpec, Failure> {
    let text = read(path)?;
    OperatorSpec::parse(&text).map_err(|e| input_error(path, &text, e))
}

fn load_transformation(path: &Path) -> Result<Transformation, Failure> {
    let text = read(path)?;
    Transformation::parse(&text).map_err(|e| input_error(path, &text, e))
}

fn domain(op: &OperatorSpec, interval: (f64, f64), path: &Path) -> Result<(), Failure> {
    op.check_domain(interval)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn at(e: &Expr, x: f64) -> Result<f64, JetError> {
    Ok(e.eval(&|a| (a == Atom::X).then_some(x))?)
}

fn write_operator(report: &mut Report, mode: Mode, op: Option<&OperatorSpec>) {
    match op {
        None => {
            report.text("operator: generic, f0..f4 free functions of x");
            report.kv(format!("{mode}.operator"), "generic");
        }
        Some(op) => {
            let terms: Vec<String> = (0..5)
                .map(|i| format!("f{i} = {}", format_expr(op.coefficient(i))))
                .collect();
            report.text(format!("operator: {}", terms.join(", ")));
            for i in 0..5 {
                report.kv(format!("{mode}.operator.f{i}"), format_expr(op.coefficient(i)));
            }
        }
    }
}

fn write_derivation(report: &mut Report, result: &PipelineResult) {
    let mode = result.mode();
    report.text("group parameters:");
    for (i, v) in result.group.bindings() {
        report.text(format!("  a{i} = {}", format_expr(v)));
        report.kv(format!("{mode}.a.{i}"), format_expr(v));
    }
    report.text("structure equations:");
    for line in result.equations.to_string().lines() {
        report.text(format!("  {line}"));
    }
    for (i, row) in result.equations.rows() {
        report.kv(format!("{mode}.dtheta.{i}.terms"), row.torsion.len());
        for (&(j, k), c) in &row.torsion {
            report.kv(format!("{mode}.dtheta.{i}.coeff.{j}_{k}"), format_expr(c));
        }
    }
    report.text("invariants:");
    if mode == Mode::Gauge {
        let base = result.model.finalize(&result.model.invariant_function());
        report.text(format!("  I = {}    (dI = θ6)", format_expr(&base)));
        report.kv(format!("{mode}.invariant.I"), format_expr(&base));
    }
    for inv in result.invariants.iter() {
        let (i, j, k) = inv.slot;
        report.text(format!("  {} = {}    (slot {i};{j},{k})", inv.name, format_expr(&inv.expr)));
        report.kv(format!("{mode}.invariant.{}", inv.name), format_expr(&inv.expr));
    }
}

fn derive(opts: &Options) -> CmdResult {
    let mode = require_mode(opts)?;
    let op = match &opts.op {
        Some(path) => {
            let op = load_operator(path)?;
            domain(&op, opts.interval, path)?;
            Some(op)
        }
        None => None,
    };
    let owned;
    let result: &PipelineResult = match &op {
        Some(op) => {
            owned = run_pipeline(&Model::concrete(op, mode))?;
            &owned
        }
        None => generic_pipeline(mode)?,
    };
    let mut report = Report::new(opts.format);
    report.text(format!("mode: {mode}"));
    report.kv(format!("{mode}.mode"), mode);
    write_operator(&mut report, mode, op.as_ref());
    write_derivation(&mut report, result);
    Ok((EXIT_OK, report))
}

fn invariants(opts: &Options) -> CmdResult {
    let mode = require_mode(opts)?;
    let path = require(&opts.op, "op")?;
    let jp = *require(&opts.point, "point")?;
    let op = load_operator(path)?;
    if jp.u <= 0.0 {
        return Err(Failure::Input(format!("u must be positive at the jet point, got u = {}", jp.u)));
    }
    let f4 = op
        .coefficient_value(4, 0, jp.x)
        .map_err(|e| Failure::Input(e.to_string()))?;
    if f4 <= 0.0 {
        return Err(Failure::Input(format!("f4 must be positive at the jet point, got f4({}) = {f4}", jp.x)));
    }
    let result = run_pipeline(&Model::concrete(&op, mode))?;
    let values = invariant_values(&result.invariants, &op, &jp).map_err(|e| Failure::Input(e.to_string()))?;
    let mut report = Report::new(opts.format);
    let point = jp.as_array().map(num).join(",");
    report.text(format!("mode: {mode}"));
    report.text(format!("point: (x, u, p, q, r, s) = ({point})"));
    report.kv(format!("{mode}.point"), &point);
    let mut rows: Vec<(&str, Expr)> = result.invariants.iter().map(|inv| (inv.name, inv.expr.clone())).collect();
    if mode == Mode::Gauge {
        rows.insert(0, ("I", result.model.finalize(&result.model.invariant_function())));
    }
    for ((name, expr), v) in rows.iter().zip(values) {
        report.text(format!("{name} = {}", format_expr(expr)));
        report.text(format!("  value {}", num(v)));
        report.kv(format!("{mode}.invariant.{name}.expr"), format_expr(expr));
        report.kv(format!("{mode}.invariant.{name}.value"), num(v));
    }
    Ok((EXIT_OK, report))
}

/// Values of the structure invariants, preceded in gauge mode by the base
/// invariant `I = D[u]/u + f0`, whose differential is `θ⁶`.
fn invariant_values(set: &InvariantSet, src: &dyn CoefficientSource, jp: &JetPoint) -> Result<Vec<f64>, JetError> {
    let mut values = set.evaluate(src, jp)?;
    if set.mode == Mode::Gauge {
        values.insert(0, base_invariant_value(src, jp, Mode::Gauge)?);
    }
    Ok(values)
}

/// Range of `xi` over the interval, after checking `xi' > 0` and `phi > 0` there.
fn admissible_image(t: &Transformation, interval: (f64, f64)) -> Result<(f64, f64), JetError> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in grid(interval) {
        let d = at(t.xi_derivative(1), x)?;
        let phi = at(t.phi(), x)?;
        if !(d > 0.0) || !(phi > 0.0) {
            return Err(JetError::Domain(format!(
                "the map needs xi' > 0 and phi > 0 on [{}, {}]; at x = {x}: xi' = {d}, phi = {phi}",
                interval.0, interval.1
            )));
        }
        let v = at(t.xi(), x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `B[ubar]` at `xi(x0)` from the prolonged jet of `u` at `x0`.
fn target_action(b: &OperatorSpec, t: &Transformation, u: &Expr, x0: f64) -> Result<f64, JetError> {
    let bar = t.prolong(&jet_of(u, x0)?)?;
    let d = bar.derivatives();
    (0..5).try_fold(0.0, |acc, m| Ok(acc + b.coefficient_value(m, 0, bar.x)? * d[m]))
}

#[derive(Default)]
struct Deviation {
    worst: f64,
    failed: bool,
}

impl Deviation {
    fn add(&mut self, a: f64, b: f64) {
        if !rel_close(a, b, EQUIV_TOLERANCE) {
            self.failed = true;
        }
        let d = rel_deviation(a, b);
        self.worst = if d.is_nan() { f64::INFINITY } else { self.worst.max(d) };
    }
}

fn check_equiv(opts: &Options) -> CmdResult {
    let mode = require_mode(opts)?;
    let path_a = require(&opts.op, "op")?;
    let path_b = require(&opts.op2, "op2")?;
    let path_t = require(&opts.map, "map")?;
    let a = load_operator(path_a)?;
    let b = load_operator(path_b)?;
    let t = load_transformation(path_t)?;
    if opts.samples == 0 {
        return Err(Failure::Input("--samples must be positive".into()));
    }
    domain(&a, opts.interval, path_a)?;
    let image = admissible_image(&t, opts.interval)
        .map_err(|e| Failure::Input(format!("{}: {e}", path_t.display())))?;
    domain(&b, image, path_b)?;

    let cfg = Config {
        seed: opts.seed,
        interval: opts.interval,
    };
    let engine = |e: JetError| Failure::Engine(e.to_string());

    let mut operator = Deviation::default();
    let mut rng = cfg.rng("check-equiv.operator");
    for _ in 0..opts.samples {
        let u = sample::test_function(&mut rng);
        let x0 = rng.gen_range(opts.interval.0..=opts.interval.1);
        let lhs = target_action(&b, &t, &u, x0).map_err(engine)?;
        let mut rhs = a.apply(&u, x0).map_err(engine)?;
        if mode == Mode::Gauge {
            rhs *= at(t.phi(), x0).map_err(engine)?;
        }
        operator.add(lhs, rhs);
    }

    let set = &generic_pipeline(mode)?.invariants;
    let mut names: Vec<&str> = set.iter().map(|inv| inv.name).collect();
    if mode == Mode::Gauge {
        names.insert(0, "I");
    }
    let mut per_invariant: Vec<Deviation> = names.iter().map(|_| Deviation::default()).collect();
    let mut rng = cfg.rng("check-equiv.invariants");
    for _ in 0..opts.samples {
        let jp: JetPoint = sample::jet_point(&mut rng, opts.interval);
        let bar = t.prolong(&jp).map_err(engine)?;
        let before = invariant_values(set, &a, &jp).map_err(engine)?;
        let after = invariant_values(set, &b, &bar).map_err(engine)?;
        for ((dev, x), y) in per_invariant.iter_mut().zip(before).zip(after) {
            dev.add(y, x);
        }
    }

    let equivalent = !operator.failed && per_invariant.iter().all(|d| !d.failed);
    let mut report = Report::new(opts.format);
    report.text(format!("mode: {mode}"));
    report.text(format!(
        "operator identity: {} probes, max relative deviation {}",
        opts.samples,
        sci(operator.worst)
    ));
    report.kv(format!("{mode}.check.samples"), opts.samples);
    report.kv(format!("{mode}.check.operator.max_deviation"), sci(operator.worst));
    report.kv(format!("{mode}.check.operator.ok"), !operator.failed);
    report.text(format!("invariant matching: {} jet points", opts.samples));
    for (name, dev) in names.iter().zip(&per_invariant) {
        let status = if dev.failed { "FAIL" } else { "ok" };
        report.text(format!("  {status} {name}: max relative deviation {}", sci(dev.worst)));
        report.kv(format!("{mode}.check.invariant.{name}.max_deviation"), sci(dev.worst));
        report.kv(format!("{mode}.check.invariant.{name}.ok"), !dev.failed);
    }
    report.text(format!(
        "verdict: {} (tolerance {})",
        if equivalent { "equivalent under the given map" } else { "not equivalent under the given map" },
        sci(EQUIV_TOLERANCE)
    ));
    report.kv(format!("{mode}.check.equivalent"), equivalent);
    Ok((if equivalent { EXIT_OK } else { EXIT_FAILED }, report))
}

fn verify_paper(opts: &Options) -> CmdResult {
    let mode = require_mode(opts)?;
    let report_rows = compare_with_paper(mode)?;
    let mut report = Report::new(opts.format);
    let width = report_rows.rows.iter().map(|r| r.key.len()).max().unwrap_or(0);
    report.text(format!("mode: {mode}"));
    report.text(format!("{:width$}  {:8}  {:24}  deviation", "row", "expected", "verdict"));
    for row in &report_rows.rows {
        let dev = row.deviation.map(sci).unwrap_or_else(|| "-".into());
        let flag = if row.as_expected() { "" } else { "  UNEXPECTED" };
        report.text(format!(
            "{:width$}  {:8}  {:24}  {dev}{flag}",
            row.key,
            row.expect.to_string(),
            row.verdict.to_string()
        ));
        if row.expect == Expectation::Typo || !row.as_expected() {
            report.text(format!("{:width$}    derived:     {}", "", row.derived));
            report.text(format!("{:width$}    transcribed: {}", "", row.paper));
            if !row.note.is_empty() {
                report.text(format!("{:width$}    note: {}", "", row.note));
            }
        }
        let key = format!("{mode}.paper.{}", row.key);
        report.kv(format!("{key}.expected"), row.expect);
        report.kv(format!("{key}.verdict"), row.verdict);
        report.kv(format!("{key}.as_expected"), row.as_expected());
        if let Some(d) = row.deviation {
            report.kv(format!("{key}.deviation"), sci(d));
        }
    }
    let unexpected = report_rows.unexpected().count();
    let typos = report_rows.rows.iter().filter(|r| r.expect == Expectation::Typo).count();
    report.text(format!(
        "summary: {} rows, {} annotated as suspected typos, {} mismatches, {unexpected} unexpected",
        report_rows.rows.len(),
        typos,
        report_rows.mismatches()
    ));
    report.kv(format!("{mode}.paper.rows"), report_rows.rows.len());
    report.kv(format!("{mode}.paper.typos"), typos);
    report.kv(format!("{mode}.paper.mismatches"), report_rows.mismatches());
    report.kv(format!("{mode}.paper.unexpected"), unexpected);
    Ok((if unexpected == 0 { EXIT_OK } else { EXIT_FAILED }, report))
}

fn selftest(opts: &Options) -> CmdResult {
    let cfg = Config {
        seed: opts.seed,
        interval: opts.interval,
    };
    let mut report = Report::new(opts.format);
    report.text(format!(
        "selftest: seed {}, interval {}:{}",
        cfg.seed,
        num(cfg.interval.0),
        num(cfg.interval.1)
    ));
    report.kv("selftest.seed", cfg.seed);
    let mut all_ok = true;
    let (mut passed, mut total) = (0, 0);
    for suite in verify::suites() {
        let r = verify::run_suite(suite, &cfg);
        report.text(format!("[{}] {}/{} checks passed", r.name, r.passed(), r.checks.len()));
        for c in &r.checks {
            for line in c.to_string().lines() {
                report.text(format!("  {line}"));
            }
            report.kv(format!("selftest.{}.{}", r.name, c.name), format!("{}/{}", c.passed, c.total));
        }
        report.kv(format!("selftest.{}.ok", r.name), r.ok());
        all_ok &= r.ok();
        passed += r.passed();
        total += r.checks.len();
    }
    report.text(format!("result: {passed}/{total} checks passed"));
    report.kv("selftest.ok", all_ok);
    report.kv("selftest.checks", format!("{passed}/{total}"));
    Ok((if all_ok { EXIT_OK } else { EXIT_FAILED }, report))
}
