use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atom::Atom;
use super::quotient::Expr;

/// Outcome of the tiered equality test, strongest evidence first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equality {
    Syntactic,
    CrossMultiplied,
    Probabilistic,
    NotEqual,
}

impl Equality {
    pub fn holds(self) -> bool {
        self != Equality::NotEqual
    }
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equality::Syntactic => "syntactically equal",
            Equality::CrossMultiplied => "equal after cross-multiplication",
            Equality::Probabilistic => "probabilistically equal",
            Equality::NotEqual => "not equal",
        })
    }
}

/// Positive-branch sample point: every atom drawn uniformly from `[0.5, 2]`.
pub fn random_env(atoms: &BTreeSet<Atom>, rng: &mut impl Rng) -> BTreeMap<Atom, f64> {
    atoms.iter().map(|&a| (a, rng.gen_range(0.5..2.0))).collect()
}

pub fn equal(a: &Expr, b: &Expr) -> Equality {
    equal_with(a, b, 50, 1e-10, 0x5eed)
}

pub fn equal_with(a: &Expr, b: &Expr, samples: usize, tol: f64, seed: u64) -> Equality {
    if a == b {
        return Equality::Syntactic;
    }
    let cross = a
        .numerator()
        .mul(b.denominator())
        .sub(&b.numerator().mul(a.denominator()));
    if cross.is_zero() {
        return Equality::CrossMultiplied;
    }
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = 0;
    let mut attempts = 0;
    while used < samples {
        attempts += 1;
        if attempts > samples * 20 {
            return Equality::NotEqual;
        }
        let env = random_env(&atoms, &mut rng);
        let (Ok(x), Ok(y)) = (a.eval_map(&env), b.eval_map(&env)) else {
            continue;
        };
        let scale = x.abs().max(y.abs());
        if (x - y).abs() > tol * scale {
            return Equality::NotEqual;
        }
        used += 1;
    }
    Equality::Probabilistic
}
