use std::collections::BTreeMap;

use cartan_forge::expr::{canonicalize, equal, q, Atom, Equality, Expr, ExprTree};
use cartan_forge::parse::{parse_expr, VarSet};
use cartan_forge::verify::gen;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn env(e: &[&Expr], seed: u64) -> BTreeMap<Atom, f64> {
    let mut atoms = std::collections::BTreeSet::new();
    for x in e {
        atoms.extend(x.atoms());
    }
    cartan_forge::expr::random_env(&atoms, &mut rng(seed))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)
}

fn e(s: &str) -> Expr {
    parse_expr(s, &VarSet::all()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_a_fixed_point(seed in any::<u64>()) {
        let t = gen::tree(&mut rng(seed), 4);
        if let Ok(once) = canonicalize(&t) {
            let text = once.to_string();
            prop_assert_eq!(parse_expr(&text, &VarSet::all()).unwrap(), once);
        }
    }

    #[test]
    fn addition_and_multiplication_commute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gen::laurent(&mut r, 3);
        let b = gen::laurent(&mut r, 3);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn multiplication_distributes_on_laurent_fragment(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gen::laurent(&mut r, 2);
        let b = gen::laurent(&mut r, 2);
        let c = gen::laurent(&mut r, 2);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn subtracting_itself_gives_zero(seed in any::<u64>()) {
        let a = gen::expr(&mut rng(seed), 3);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gen::expr(&mut r, 3);
        let b = gen::expr(&mut r, 3);
        let point = env(&[&a, &b], seed ^ 1);
        if let (Ok(x), Ok(y), Ok(s), Ok(p)) = (
            a.eval_map(&point),
            b.eval_map(&point),
            (&a + &b).eval_map(&point),
            (&a * &b).eval_map(&point),
        ) {
            prop_assert!(close(s, x + y), "{s} vs {}", x + y);
            prop_assert!(close(p, x * y), "{p} vs {}", x * y);
        }
    }

    #[test]
    fn product_rule(seed in any::<u64>(), v in 0usize..4) {
        let mut r = rng(seed);
        let a = gen::laurent(&mut r, 2);
        let b = gen::laurent(&mut r, 2);
        let atom = [Atom::X, Atom::U, Atom::P, Atom::param(1)][v];
        let lhs = (&a * &b).diff(atom);
        let rhs = &(&a.diff(atom) * &b) + &(&a * &b.diff(atom));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_derivatives_commute(seed in any::<u64>()) {
        let a = gen::expr(&mut rng(seed), 3);
        prop_assert_eq!(equal(&a.diff(Atom::U).diff(Atom::P), &a.diff(Atom::P).diff(Atom::U)).holds(), true);
    }

    #[test]
    fn renaming_an_atom_and_back_changes_nothing(seed in any::<u64>()) {
        let a = gen::expr(&mut rng(seed), 3);
        let there = BTreeMap::from([(Atom::U, Expr::atom(Atom::param(9)))]);
        let back = BTreeMap::from([(Atom::param(9), Expr::atom(Atom::U))]);
        let renamed = a.substitute(&there).unwrap();
        prop_assert!(!renamed.contains_atom(Atom::U));
        prop_assert_eq!(renamed.substitute(&back).unwrap(), a);
    }

    #[test]
    fn rational_arithmetic_is_exact(n1 in -50i64..50, d1 in 1i64..20, n2 in -50i64..50, d2 in 1i64..20) {
        let a = Expr::frac(n1, d1);
        let b = Expr::frac(n2, d2);
        prop_assert_eq!((&a + &b).as_rational(), Some(q(n1, d1) + q(n2, d2)));
        prop_assert_eq!((&a * &b).as_rational(), Some(q(n1, d1) * q(n2, d2)));
    }

    #[test]
    fn quarter_powers_add(a in -8i32..8, b in -8i32..8) {
        let x = Expr::atom_pow(Atom::U, a) * Expr::atom_pow(Atom::U, b);
        prop_assert_eq!(x, Expr::atom_pow(Atom::U, a + b));
    }
}

#[test]
fn radicals_merge_on_the_positive_branch() {
    assert_eq!(e("(f4*u)^(1/4) * (f4*u)^(1/4)"), e("f4^(1/2)*u^(1/2)"));
    assert!(e("u*p - p*u").is_zero());
}

#[test]
fn quotient_keeps_numerator_and_denominator() {
    let t = canonicalize(&ExprTree::div(
        ExprTree::add(ExprTree::Atom(Atom::param(2)), ExprTree::mul(ExprTree::Atom(Atom::param(3)), ExprTree::Atom(Atom::P))),
        ExprTree::mul(
            ExprTree::mul(ExprTree::Atom(Atom::param(1)), ExprTree::Atom(Atom::param(3))),
            ExprTree::Atom(Atom::U),
        ),
    ))
    .unwrap();
    assert_eq!(t, e("(a2 + a3*p)/(a1*a3*u)"));
}

#[test]
fn zero_divisor_and_bad_radical_are_errors() {
    let x = || ExprTree::Atom(Atom::X);
    assert!(canonicalize(&ExprTree::div(ExprTree::num(1), ExprTree::sub(x(), x()))).is_err());
    assert!(canonicalize(&ExprTree::pow(x(), ExprTree::div(ExprTree::num(1), ExprTree::num(3)))).is_err());
}

#[test]
fn derivative_examples() {
    assert_eq!(e("f4*s").diff(Atom::X), e("f4'*s"));
    assert_eq!(e("u^(1/4)").diff(Atom::U), e("(1/4)*u^(-3/4)"));
    assert_eq!(e("f4*s + f3*r + f2*q + f1*p + f0*u").diff(Atom::S), e("f4"));
    assert!(e("f3''").diff(Atom::U).is_zero());
}

#[test]
fn substitution_examples() {
    let normalize = BTreeMap::from([
        (Atom::param(1), e("(f4*u)^(-1/4)")),
        (Atom::param(3), e("(f4*u)^(1/4)/u")),
    ]);
    assert!(e("1/(a1*a3*u)").substitute(&normalize).unwrap().is_one());
    let b = BTreeMap::from([
        (Atom::param(6), e("f4^(1/2)*u^(-1/2)")),
        (Atom::param(1), e("(f4*u)^(-1/4)")),
        (Atom::param(10), e("f4^(3/4)*u^(-1/4)")),
    ]);
    assert!(e("a6/(a1*a10)").substitute(&b).unwrap().is_one());
    let cyclic = BTreeMap::from([(Atom::param(2), e("a3")), (Atom::param(3), e("a2"))]);
    assert!(e("a2").substitute(&cyclic).is_err());
}

#[test]
fn evaluation_examples() {
    let a1 = e("(f4*u)^(-1/4)");
    let point = BTreeMap::from([(Atom::coef(4, 0), 16.0), (Atom::U, 1.0)]);
    assert_eq!(a1.eval_map(&point).unwrap(), 0.5);
    assert_eq!(Expr::zero().eval_map(&BTreeMap::new()).unwrap(), 0.0);
    assert!(e("u").eval_map(&BTreeMap::new()).is_err());
    assert!(e("1/x").eval_map(&BTreeMap::from([(Atom::X, 1e-14)])).is_err());
}

#[test]
fn equality_tiers() {
    assert_eq!(equal(&e("u^(1/2)*u^(1/2)"), &e("u")), Equality::Syntactic);
    assert_eq!(equal(&e("x"), &e("x + 1")), Equality::NotEqual);
}
