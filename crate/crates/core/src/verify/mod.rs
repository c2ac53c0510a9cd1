//! Seeded property suites shared by `selftest` and the acceptance tests.
//!
//! Every check draws from its own [`ChaCha8Rng`] derived from the run seed
//! and a per-check salt, so reports are byte-identical for equal seeds and
//! no check's sample stream depends on another's.

pub mod gen;
mod algebra;
mod geometry;

use std::fmt;
use std::panic::{self, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use algebra::*;
pub use geometry::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub interval: (f64, f64),
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            interval: (1.0, 2.0),
        }
    }
}

impl Config {
    /// RNG for one check.
    pub fn rng(&self, salt: &str) -> ChaCha8Rng {
        let h = salt
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}

/// Outcome of one property check: how many trials passed, and why others failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

/// Failure messages kept per check.
const MAX_FAILURES: usize = 5;

impl Check {
    pub fn new(name: &'static str) -> Self {
        Check {
            name,
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }

    /// Counts one trial.
    pub fn record(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < MAX_FAILURES {
            self.failures.push(why());
        }
    }

    /// Counts one trial from a fallible computation.
    pub fn attempt<E: fmt::Display>(&mut self, r: Result<bool, E>, why: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.record(ok, why),
            Err(e) => self.record(false, || format!("{}: {e}", why())),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.ok() { "ok" } else { "FAIL" };
        write!(f, "{status} {} {}/{}", self.name, self.passed, self.total)?;
        for why in &self.failures {
            write!(f, "\n    {why}")?;
        }
        Ok(())
    }
}

pub type CheckFn = fn(&Config) -> Check;

/// Runs a check, turning a panic into a failed trial.
pub fn run_check(name: &'static str, f: CheckFn, cfg: &Config) -> Check {
    panic::catch_unwind(AssertUnwindSafe(|| f(cfg))).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        let mut c = Check::new(name);
        c.record(false, || format!("panicked: {msg}"));
        c
    })
}

pub struct Suite {
    pub name: &'static str,
    pub checks: &'static [(&'static str, CheckFn)],
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.ok()).count()
    }
}

/// The module property suites, in dependency order.
pub fn suites() -> &'static [Suite] {
    &[
        Suite {
            name: "expr",
            checks: &[
                ("canonicalize_idempotent", expr_idempotence),
                ("ring_axioms", ring_axioms),
                ("diff_matches_finite_difference", diff_finite_difference),
                ("diff_commutes", diff_commutes),
            ],
        },
        Suite {
            name: "parser",
            checks: &[
                ("round_trip", parser_round_trip),
                ("error_spans", parser_error_spans),
            ],
        },
        Suite {
            name: "exterior",
            checks: &[
                ("dd_base_coframes", dd_base_coframes),
                ("dd_random_one_forms", dd_random_one_forms),
                ("leibniz", leibniz),
                ("antisymmetry", antisymmetry),
                ("wedge_evaluation", wedge_evaluation),
            ],
        },
        Suite {
            name: "jet",
            checks: &[
                ("prolongation_functorial", prolongation_functorial),
                ("contact_preserved", contact_preserved),
                ("operator_identity", operator_identity),
                ("base_invariant_preserved", base_invariant_preserved),
            ],
        },
        Suite {
            name: "cartan",
            checks: &[
                ("free_torsion", free_torsion),
                ("normalization_targets", normalization_targets),
                ("constants_rigid", constants_rigid),
                ("parameter_free", parameter_free),
                ("invariance", invariance),
                ("coframe_equivariance", coframe_equivariance),
                ("bianchi", bianchi),
                ("gauge_homogeneity", gauge_homogeneity),
                ("concrete_matches_generic", concrete_matches_generic),
            ],
        },
        Suite {
            name: "reference",
            checks: &[("verify_paper", verify_paper)],
        },
    ]
}

pub fn run_suite(suite: &Suite, cfg: &Config) -> SuiteReport {
    SuiteReport {
        name: suite.name,
        checks: suite.checks.iter().map(|&(name, f)| run_check(name, f, cfg)).collect(),
    }
}

pub fn run_all(cfg: &Config) -> Vec<SuiteReport> {
    suites().iter().map(|s| run_suite(s, cfg)).collect()
}

/// `|a - b| <= tol * max(|a|, |b|)`, falling back to an absolute test when
/// both values are below `1e-9`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    let scale = a.abs().max(b.abs());
    let diff = (a - b).abs();
    if scale < 1e-9 {
        diff <= tol
    } else {
        diff <= tol * scale
    }
}

/// Relative deviation in the sense of [`rel_close`].
pub fn rel_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-9 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}
