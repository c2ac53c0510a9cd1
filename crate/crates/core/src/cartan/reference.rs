//! Transcribed reference formulas and their comparison with a derivation.
//!
//! Fixtures live in `fixtures/reference/{direct,gauge}.ref`, one row per
//! formula: `key | equal|typo | expression | note`. The expectation column
//! records whether the transcription is believed to agree with the derived
//! value; a report row is *as expected* when the verdict matches it.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{generic_pipeline, CartanError, PipelineResult, Slot};
use crate::expr::{equal, random_env, Atom, Coord, Equality, Expr};
use crate::jet::Mode;
use crate::parse::{parse_expr, VarSet};

const DIRECT: &str = include_str!("../../fixtures/reference/direct.ref");
const GAUGE: &str = include_str!("../../fixtures/reference/gauge.ref");

/// Numeric samples behind the deviation column.
pub const DEVIATION_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Equal,
    Typo,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expectation::Equal => "equal",
            Expectation::Typo => "typo",
        })
    }
}

/// What a fixture key refers to in a [`PipelineResult`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Omega6(Coord),
    Free(Slot),
    Stage(usize, Slot),
    StagePattern(usize, usize),
    Binding(u8),
    Final(Slot),
    FinalPattern(usize),
    Invariant(String),
    Theta(usize, Coord),
}

/// Set of `(j, k)` slots of one row.
pub type Pattern = BTreeSet<(usize, usize)>;

#[derive(Clone, Debug, PartialEq)]
pub enum Transcription {
    Expr(Expr),
    Pattern(Pattern),
}

impl fmt::Display for Transcription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transcription::Expr(e) => write!(f, "{e}"),
            Transcription::Pattern(p) => f.write_str(&pattern_string(p)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReferenceRow {
    pub key: String,
    pub target: Target,
    pub expect: Expectation,
    pub paper: Transcription,
    pub note: String,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Expr(Equality),
    Pattern(bool),
}

impl Verdict {
    pub fn holds(self) -> bool {
        match self {
            Verdict::Expr(e) => e.holds(),
            Verdict::Pattern(b) => b,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Expr(e) => write!(f, "{e}"),
            Verdict::Pattern(true) => f.write_str("same pattern"),
            Verdict::Pattern(false) => f.write_str("different pattern"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub key: String,
    pub expect: Expectation,
    pub verdict: Verdict,
    pub derived: Transcription,
    pub paper: Transcription,
    /// Largest relative deviation over the numeric samples; `None` for patterns.
    pub deviation: Option<f64>,
    pub note: String,
}

impl ComparisonRow {
    pub fn as_expected(&self) -> bool {
        self.verdict.holds() == (self.expect == Expectation::Equal)
    }
}

#[derive(Clone, Debug)]
pub struct PaperComparisonReport {
    pub mode: Mode,
    pub rows: Vec<ComparisonRow>,
}

impl PaperComparisonReport {
    pub fn unexpected(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| !r.as_expected())
    }

    pub fn all_as_expected(&self) -> bool {
        self.unexpected().next().is_none()
    }

    /// Rows whose verdict is a mismatch, expected or not.
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.verdict.holds()).count()
    }
}

fn pattern_string(p: &Pattern) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter().map(|(j, k)| format!("{j}_{k}")).collect::<Vec<_>>().join(" ")
}

fn coord(name: &str) -> Option<Coord> {
    Coord::ALL.into_iter().find(|c| c.name() == name)
}

fn index(s: &str, max: usize) -> Option<usize> {
    s.parse().ok().filter(|i| (1..=max).contains(i))
}

fn pair(s: &str) -> Option<(usize, usize)> {
    let (j, k) = s.split_once('_')?;
    let (j, k) = (index(j, 6)?, index(k, 6)?);
    (j < k).then_some((j, k))
}

fn parse_target(key: &str) -> Option<Target> {
    let parts: Vec<&str> = key.split('.').collect();
    let slot = |i: &str, jk: &str| Some((index(i, 6)?, pair(jk)?));
    match parts.as_slice() {
        ["omega6", c] => coord(c).map(Target::Omega6),
        ["free", i, jk] => slot(i, jk).map(|(i, (j, k))| Target::Free((i, j, k))),
        ["final", i, "pattern"] => index(i, 6).map(Target::FinalPattern),
        ["final", i, jk] => slot(i, jk).map(|(i, (j, k))| Target::Final((i, j, k))),
        ["invariant", name] => Some(Target::Invariant(name.to_string())),
        ["theta", i, c] => Some(Target::Theta(index(i, 6)?, coord(c)?)),
        [stage, i, rest] if stage.starts_with("stage") => {
            let n: usize = stage["stage".len()..].parse().ok().filter(|n| *n >= 1)?;
            if *rest == "pattern" {
                Some(Target::StagePattern(n, index(i, 6)?))
            } else {
                slot(i, rest).map(|(i, (j, k))| Target::Stage(n, (i, j, k)))
            }
        }
        [a] if a.starts_with('a') => {
            let n: u8 = a[1..].parse().ok().filter(|n| (1..=10).contains(n))?;
            Some(Target::Binding(n))
        }
        _ => None,
    }
}

fn parse_pattern(s: &str) -> Option<Pattern> {
    if s == "-" {
        return Some(Pattern::new());
    }
    s.split_whitespace().map(pair).collect()
}

/// Parses fixture text into rows.
pub fn parse_fixture(text: &str) -> Result<Vec<ReferenceRow>, CartanError> {
    let vars = VarSet::all();
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |why: String| CartanError::Fixture(format!("line {line}: {why}"));
        let cols: Vec<&str> = trimmed.splitn(4, '|').map(str::trim).collect();
        if cols.len() < 3 {
            return Err(err("expected `key | expect | expression | note`".into()));
        }
        let key = cols[0];
        let target = parse_target(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        let expect = match cols[1] {
            "equal" => Expectation::Equal,
            "typo" => Expectation::Typo,
            other => return Err(err(format!("expectation must be equal or typo, got `{other}`"))),
        };
        let paper = if key.ends_with(".pattern") {
            Transcription::Pattern(
                parse_pattern(cols[2]).ok_or_else(|| err(format!("bad pattern `{}`", cols[2])))?,
            )
        } else {
            Transcription::Expr(parse_expr(cols[2], &vars).map_err(|e| err(e.to_string()))?)
        };
        if rows.iter().any(|r: &ReferenceRow| r.key == key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        rows.push(ReferenceRow {
            key: key.to_string(),
            target,
            expect,
            paper,
            note: cols.get(3).copied().unwrap_or("").to_string(),
            line,
        });
    }
    Ok(rows)
}

/// The bundled fixture for a mode.
pub fn fixture(mode: Mode) -> Result<Vec<ReferenceRow>, CartanError> {
    parse_fixture(match mode {
        Mode::Direct => DIRECT,
        Mode::Gauge => GAUGE,
    })
}

fn stage_equations(
    result: &PipelineResult,
    n: usize,
) -> Result<&super::StructureEquations, CartanError> {
    result
        .stages
        .get(n - 1)
        .map(|s| &s.equations)
        .ok_or_else(|| CartanError::Fixture(format!("{} mode has no stage {n}", result.mode())))
}

fn row_pattern(eqs: &super::StructureEquations, i: usize) -> Pattern {
    eqs.row(i)
        .torsion
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(jk, _)| *jk)
        .collect()
}

/// The derived counterpart of a fixture target.
pub fn derived_value(result: &PipelineResult, target: &Target) -> Result<Transcription, CartanError> {
    let blade = |c: Coord| [Atom::Chart(c)];
    Ok(match target {
        Target::Omega6(c) => Transcription::Expr(result.base[5].coefficient(&blade(*c))),
        Target::Free(slot) => Transcription::Expr(result.free_torsion().torsion(*slot)),
        Target::Stage(n, slot) => Transcription::Expr(stage_equations(result, *n)?.torsion(*slot)),
        Target::StagePattern(n, i) => Transcription::Pattern(row_pattern(stage_equations(result, *n)?, *i)),
        Target::Binding(p) => Transcription::Expr(result.binding(*p)),
        Target::Final(slot) => Transcription::Expr(result.equations.torsion(*slot)),
        Target::FinalPattern(i) => Transcription::Pattern(row_pattern(&result.equations, *i)),
        Target::Invariant(name) => Transcription::Expr(
            result
                .invariants
                .get(name)
                .cloned()
                .ok_or_else(|| CartanError::Fixture(format!("no invariant named {name}")))?,
        ),
        Target::Theta(i, c) => Transcription::Expr(result.coframe[i - 1].coefficient(&blade(*c))),
    })
}

/// Largest `|a - b| / max(|a|, |b|)` over positive-branch samples.
pub fn max_relative_deviation(a: &Expr, b: &Expr, samples: usize, seed: u64) -> Option<f64> {
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<f64> = None;
    let mut used = 0;
    for _ in 0..samples * 20 {
        if used == samples {
            break;
        }
        let env = random_env(&atoms, &mut rng);
        let (Ok(x), Ok(y)) = (a.eval_map(&env), b.eval_map(&env)) else {
            continue;
        };
        used += 1;
        let scale = x.abs().max(y.abs());
        let d = if scale == 0.0 { 0.0 } else { (x - y).abs() / scale };
        worst = Some(worst.map_or(d, |w: f64| w.max(d)));
    }
    worst
}

/// Compares a derivation against fixture rows.
pub fn compare(result: &PipelineResult, rows: &[ReferenceRow]) -> Result<PaperComparisonReport, CartanError> {
    let mut out = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let derived = derived_value(result, &row.target)?;
        let (verdict, deviation) = match (&derived, &row.paper) {
            (Transcription::Expr(d), Transcription::Expr(p)) => (
                Verdict::Expr(equal(d, p)),
                max_relative_deviation(d, p, DEVIATION_SAMPLES, n as u64),
            ),
            (Transcription::Pattern(d), Transcription::Pattern(p)) => (Verdict::Pattern(d == p), None),
            _ => {
                return Err(CartanError::Fixture(format!(
                    "line {}: `{}` mixes a pattern with an expression",
                    row.line, row.key
                )))
            }
        };
        out.push(ComparisonRow {
            key: row.key.clone(),
            expect: row.expect,
            verdict,
            derived,
            paper: row.paper.clone(),
            deviation,
            note: row.note.clone(),
        });
    }
    Ok(PaperComparisonReport {
        mode: result.mode(),
        rows: out,
    })
}

/// Compares the generic derivation of `mode` with the bundled fixture.
pub fn compare_with_paper(mode: Mode) -> Result<PaperComparisonReport, CartanError> {
    compare(generic_pipeline(mode)?, &fixture(mode)?)
}

#[cfg(all(test, not(feature = "mutant-wedge")))]
mod tests {
    use super::*;

    #[test]
    fn keys_parse() {
        assert_eq!(parse_target("final.4.1_4"), Some(Target::Final((4, 1, 4))));
        assert_eq!(parse_target("stage3.5.pattern"), Some(Target::StagePattern(3, 5)));
        assert_eq!(parse_target("a10"), Some(Target::Binding(10)));
        assert_eq!(parse_target("theta.4.q"), Some(Target::Theta(4, Coord::Q)));
        for bad in ["a11", "final.7.1_2", "final.4.4_1", "omega6.z", "stage0.1.1_2"] {
            assert_eq!(parse_target(bad), None, "{bad}");
        }
    }

    #[test]
    fn malformed_rows_are_rejected() {
        for text in ["final.1.1_2 | maybe | 1", "nope | equal | 1", "a1 | equal | (", "a1 | equal"] {
            assert!(parse_fixture(text).is_err(), "{text}");
        }
        let dup = "a1 | equal | 1\na1 | typo | 2";
        assert!(parse_fixture(dup).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn bundled_fixtures_match_their_annotations() {
        for mode in Mode::ALL {
            let report = compare_with_paper(mode).unwrap();
            let bad: Vec<String> = report
                .unexpected()
                .map(|r| format!("{}: {} (derived {}, paper {})", r.key, r.verdict, r.derived, r.paper))
                .collect();
            assert!(bad.is_empty(), "{mode}: {bad:#?}");
            for row in report.rows.iter().filter(|r| r.expect == Expectation::Equal) {
                assert!(row.deviation.is_none_or(|d| d <= 1e-10), "{}", row.key);
            }
        }
    }

    #[test]
    fn gauge_omega6_du_slot_mismatches() {
        let report = compare_with_paper(Mode::Gauge).unwrap();
        let row = report.rows.iter().find(|r| r.key == "omega6.u").unwrap();
        assert!(!row.verdict.holds());
        assert!(row.as_expected());
    }
}
