#![cfg(not(feature = "mutant-wedge"))]

use std::collections::BTreeMap;

use cartan_forge::expr::{Atom, Expr, StandardDerivatives};
use cartan_forge::exterior::{closure_defect, Form, TangentVector};
use cartan_forge::verify::gen;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHART: [Atom; 6] = [Atom::X, Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vector(r: &mut impl Rng) -> TangentVector {
    CHART.iter().map(|&a| (a, r.gen_range(-1.0..1.0))).collect()
}

fn point(forms: &[&Form], r: &mut impl Rng) -> BTreeMap<Atom, f64> {
    let mut atoms = std::collections::BTreeSet::new();
    for f in forms {
        for (_, c) in f.terms() {
            atoms.extend(c.atoms());
        }
    }
    cartan_forge::expr::random_env(&atoms, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_of_d_of_a_function_vanishes(seed in any::<u64>()) {
        let f = Form::scalar(gen::expr(&mut rng(seed), 3));
        prop_assert!(f.d().unwrap().d().unwrap().is_zero());
    }

    #[test]
    fn d_of_d_of_a_one_form_vanishes(seed in any::<u64>()) {
        let a = gen::laurent_one_form(&mut rng(seed), 2);
        let da = a.d().unwrap();
        prop_assert!(closure_defect(&da, &StandardDerivatives).is_zero());
    }

    #[test]
    fn wedge_of_one_forms_is_antisymmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gen::one_form(&mut r, 2);
        let b = gen::one_form(&mut r, 2);
        prop_assert!(a.wedge(&b).unwrap().add(&b.wedge(&a).unwrap()).is_zero());
        prop_assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn d_satisfies_the_leibniz_rule(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = Form::scalar(gen::laurent(&mut r, 2));
        let a = gen::laurent_one_form(&mut r, 2);
        let lhs = f.wedge(&a).unwrap().d().unwrap();
        let rhs = f.d().unwrap().wedge(&a).unwrap().add(&f.wedge(&a.d().unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_evaluates_as_a_determinant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gen::one_form(&mut r, 2);
        let b = gen::one_form(&mut r, 2);
        let ab = a.wedge(&b).unwrap();
        let env = point(&[&a, &b], &mut r);
        let (v, w) = (vector(&mut r), vector(&mut r));
        let value = |f: &Form, vs: &[&TangentVector]| f.eval(&env, vs);
        if let (Ok(av), Ok(aw), Ok(bv), Ok(bw), Ok(abvw)) =
            (value(&a, &[&v]), value(&a, &[&w]), value(&b, &[&v]), value(&b, &[&w]), value(&ab, &[&v, &w]))
        {
            let det = av * bw - aw * bv;
            prop_assert!((abvw - det).abs() <= 1e-8 * det.abs().max(1.0), "{abvw} vs {det}");
        }
    }

    #[test]
    fn scaling_commutes_with_wedge(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gen::laurent(&mut r, 2);
        let a = gen::laurent_one_form(&mut r, 2);
        let b = gen::laurent_one_form(&mut r, 2);
        prop_assert_eq!(a.scale(&g).wedge(&b).unwrap(), a.wedge(&b).unwrap().scale(&g));
    }
}

#[test]
fn contact_forms() {
    let c = Form::one_form([(Atom::U, Expr::one()), (Atom::X, -Expr::atom(Atom::P))]);
    let dc = c.d().unwrap();
    assert_eq!(dc.len(), 1);
    assert!(dc.coefficient(&[Atom::X, Atom::P]).is_one());
    assert_eq!(dc.coefficient(&[Atom::P, Atom::X]), -Expr::one());
}

#[test]
fn degree_overflow_is_an_error() {
    let a = Form::dv(Atom::X).wedge(&Form::dv(Atom::U)).unwrap();
    assert!(a.wedge(&Form::dv(Atom::P)).is_err());
}
