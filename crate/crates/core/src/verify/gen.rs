//! Seeded random expressions and forms for the property suites.

use rand::Rng;

use crate::expr::{canonicalize, q, Atom, Expr, ExprTree};
use crate::exterior::Form;

/// Atoms random trees draw from.
pub const TREE_ATOMS: [Atom; 8] = [
    Atom::X,
    Atom::U,
    Atom::P,
    Atom::Q,
    Atom::Param(1),
    Atom::Coef { index: 4, order: 0 },
    Atom::Coef { index: 3, order: 1 },
    Atom::LAMBDA,
];

fn leaf(rng: &mut impl Rng) -> ExprTree {
    if rng.gen_bool(0.65) {
        ExprTree::Atom(TREE_ATOMS[rng.gen_range(0..TREE_ATOMS.len())])
    } else {
        ExprTree::Num(q(rng.gen_range(-6..=6), rng.gen_range(1..=3)))
    }
}

/// Random syntax tree of at most `depth` operator levels.
pub fn tree(rng: &mut impl Rng, depth: u32) -> ExprTree {
    tree_with(rng, depth, true)
}

fn tree_with(rng: &mut impl Rng, depth: u32, rational: bool) -> ExprTree {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let sub = |rng: &mut _| tree_with(rng, depth - 1, rational);
    match rng.gen_range(0..if rational { 7 } else { 5 }) {
        0 | 1 => ExprTree::add(sub(rng), sub(rng)),
        2 => ExprTree::sub(sub(rng), sub(rng)),
        3 | 4 => ExprTree::mul(sub(rng), sub(rng)),
        5 => ExprTree::div(sub(rng), sub(rng)),
        _ => {
            if rng.gen_bool(0.5) {
                let a = ExprTree::Atom(TREE_ATOMS[rng.gen_range(0..TREE_ATOMS.len())]);
                ExprTree::pow(a, ExprTree::Num(q(rng.gen_range(-8..=8), 4)))
            } else {
                ExprTree::pow(sub(rng), ExprTree::num(rng.gen_range(0..=2)))
            }
        }
    }
}

/// Canonical expression from a random tree; retries trees that divide by zero.
pub fn expr(rng: &mut impl Rng, depth: u32) -> Expr {
    loop {
        if let Ok(e) = canonicalize(&tree(rng, depth)) {
            if e.term_count() <= 200 {
                return e;
            }
        }
    }
}

/// Expression whose denominator is a monomial, i.e. a Laurent polynomial with
/// radicals. Canonical forms are unique on this fragment.
pub fn laurent(rng: &mut impl Rng, depth: u32) -> Expr {
    loop {
        let e = expr(rng, depth);
        if e.denominator().is_one() {
            return e;
        }
    }
}

/// Polynomial expression built from sums and products only.
pub fn polynomial(rng: &mut impl Rng, depth: u32) -> Expr {
    loop {
        if let Ok(e) = canonicalize(&tree_with(rng, depth, false)) {
            if e.term_count() <= 200 {
                return e;
            }
        }
    }
}

/// Random 1-form on the chart with up to four terms.
pub fn one_form(rng: &mut impl Rng, depth: u32) -> Form {
    one_form_with(rng, depth, expr)
}

/// Random 1-form with Laurent coefficients.
pub fn laurent_one_form(rng: &mut impl Rng, depth: u32) -> Form {
    one_form_with(rng, depth, laurent)
}

fn one_form_with<R: Rng>(rng: &mut R, depth: u32, coeff: fn(&mut R, u32) -> Expr) -> Form {
    let chart = [Atom::X, Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];
    let n = rng.gen_range(1..=4);
    Form::one_form((0..n).map(|_| (chart[rng.gen_range(0..chart.len())], coeff(rng, depth))))
}
