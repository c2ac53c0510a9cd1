use std::collections::BTreeMap;

use rand::Rng;

use super::{gen, rel_close, Check, Config};
use crate::cartan::{base_coframe, Model};
use crate::expr::{canonicalize, random_env, Atom, Expr, ExprTree, Poly, StandardDerivatives};
use crate::exterior::{closure_defect, Form, TangentVector};
use crate::jet::Mode;
use crate::parse::{format_expr, parse_expr, parse_operator_file, parse_transformation_file, VarSet};

const CHART: [Atom; 6] = [Atom::X, Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S];

fn poly_tree(p: &Poly) -> ExprTree {
    let mut out: Option<ExprTree> = None;
    for (m, c) in p.terms() {
        let mut t = ExprTree::Num(c.clone());
        for &(a, e) in m.factors() {
            let pow = ExprTree::pow(ExprTree::Atom(a), ExprTree::Num(crate::expr::q(e as i64, 4)));
            t = ExprTree::mul(t, pow);
        }
        out = Some(match out {
            None => t,
            Some(acc) => ExprTree::add(acc, t),
        });
    }
    out.unwrap_or_else(|| ExprTree::num(0))
}

/// Syntax tree that canonicalizes back to `e`.
pub fn to_tree(e: &Expr) -> ExprTree {
    ExprTree::div(poly_tree(e.numerator()), poly_tree(e.denominator()))
}

pub fn expr_idempotence(cfg: &Config) -> Check {
    let mut c = Check::new("canonicalize_idempotent");
    let mut rng = cfg.rng("expr_idempotence");
    for _ in 0..500 {
        let e = gen::expr(&mut rng, 4);
        c.attempt(canonicalize(&to_tree(&e)).map(|back| back == e), || format!("{e}"));
    }
    c
}

pub fn ring_axioms(cfg: &Config) -> Check {
    let mut c = Check::new("ring_axioms");
    let mut rng = cfg.rng("ring_axioms");
    for _ in 0..200 {
        let [a, b, d] = [0; 3].map(|_| gen::expr(&mut rng, 2));
        let lhs = &a * &(&b + &d);
        let rhs = &(&a * &b) + &(&a * &d);
        let mut atoms = lhs.atoms();
        atoms.extend(rhs.atoms());
        let env = random_env(&atoms, &mut rng);
        let (Ok(x), Ok(y)) = (lhs.eval_map(&env), rhs.eval_map(&env)) else {
            continue;
        };
        c.record(lhs == rhs && rel_close(x, y, 1e-12), || {
            format!("({a})*(({b}) + ({d})): {x} vs {y}")
        });
    }
    c
}

pub fn diff_finite_difference(cfg: &Config) -> Check {
    let mut c = Check::new("diff_matches_finite_difference");
    let mut rng = cfg.rng("diff_fd");
    let h = 1e-5;
    let mut trials = 0;
    while trials < 200 {
        let e = gen::expr(&mut rng, 3);
        let mut env = random_env(&e.atoms(), &mut rng);
        // Coefficient functions follow x to first order along the stencil.
        let slopes: Vec<(Atom, Atom)> = env
            .keys()
            .filter_map(|&a| match a {
                Atom::Coef { index, order } => Some((a, Atom::coef(index, order + 1))),
                _ => None,
            })
            .collect();
        for &(_, next) in &slopes {
            env.entry(next).or_insert_with(|| rng.gen_range(0.5..=2.0));
        }
        // Keep away from poles, where a central difference is meaningless.
        let den = Expr::from_poly(e.denominator().clone());
        match den.eval_map(&env) {
            Ok(d) if d.abs() > 0.2 => {}
            _ => continue,
        }
        trials += 1;
        for v in CHART {
            let at = |shift: f64| {
                let mut moved = env.clone();
                *moved.entry(v).or_insert(0.0) += shift;
                if v == Atom::X {
                    for &(a, next) in &slopes {
                        let slope = env[&next];
                        *moved.get_mut(&a).expect("bound") += shift * slope;
                    }
                }
                e.eval_map(&moved)
            };
            let fd = match (at(h), at(-h)) {
                (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                _ => continue,
            };
            let exact = e.diff(v).eval_map(&env);
            c.attempt(exact.map(|d| rel_close(d, fd, 1e-6) || (d - fd).abs() < 1e-7), || {
                format!("d/d{v} of {e}: finite difference {fd}")
            });
        }
    }
    c
}

pub fn diff_commutes(cfg: &Config) -> Check {
    let mut c = Check::new("diff_commutes");
    let mut rng = cfg.rng("diff_commutes");
    for _ in 0..40 {
        let e = gen::expr(&mut rng, 3);
        for (i, &v) in CHART.iter().enumerate() {
            for &w in &CHART[i + 1..] {
                let vw = e.diff(v).diff(w);
                let wv = e.diff(w).diff(v);
                c.record(vw == wv, || format!("d{v} d{w} of {e}"));
            }
        }
    }
    c
}

pub fn parser_round_trip(cfg: &Config) -> Check {
    let mut c = Check::new("round_trip");
    let mut rng = cfg.rng("parser_round_trip");
    let vars = VarSet::all();
    for _ in 0..200 {
        let e = gen::expr(&mut rng, 4);
        let text = format_expr(&e);
        c.attempt(parse_expr(&text, &vars).map(|back| back == e && format_expr(&back) == text), || {
            text.clone()
        });
    }
    c
}

/// Malformed inputs and the byte offset their reported span must start at.
const BAD_EXPRESSIONS: &[(&str, usize)] = &[
    ("x +", 3),
    ("2*(x + 1", 8),
    ("x^y", 2),
    ("foo + x", 0),
    ("u^(1/3)", 0),
    ("1/(x - x)", 0),
    ("x ** 2", 3),
    ("3 $ x", 2),
];

pub fn parser_error_spans(_: &Config) -> Check {
    let mut c = Check::new("error_spans");
    let vars = VarSet::jet();
    for &(text, begin) in BAD_EXPRESSIONS {
        match parse_expr(text, &vars) {
            Ok(e) => c.record(false, || format!("`{text}` parsed as {e}")),
            Err(err) => c.record(err.span.begin == begin && err.span.end <= text.len(), || {
                format!("`{text}`: {err}, expected span at byte {begin}")
            }),
        }
    }
    let files: &[(&str, bool, usize)] = &[
        ("f4 = 1\nf5 = x\n", true, 2),
        ("f4 = 1\nf3 = u\n", true, 2),
        ("f4 = 1\nf4 = 2\n", true, 2),
        ("f3 = x\n", true, 1),
        ("xi = 2*x\nphi = \n", false, 2),
        ("xi = 2*x\n", false, 1),
        ("xi = x\nphi = 1\nzeta = 3\n", false, 3),
    ];
    for &(text, operator, line) in files {
        let err = if operator {
            parse_operator_file(text).err()
        } else {
            parse_transformation_file(text).err()
        };
        match err {
            None => c.record(false, || format!("{text:?} was accepted")),
            Some(err) => c.record(err.span.line == line, || format!("{text:?}: {err}, expected line {line}")),
        }
    }
    c
}

pub fn dd_base_coframes(_: &Config) -> Check {
    let mut c = Check::new("dd_base_coframes");
    for mode in Mode::ALL {
        let model = Model::generic(mode);
        match base_coframe(&model) {
            Err(e) => c.record(false, || format!("{mode}: {e}")),
            Ok(forms) => {
                for (i, w) in forms.iter().enumerate() {
                    let r = w.d_with(model.rules()).map(|dw| closure_defect(&dw, model.rules()).is_zero());
                    c.attempt(r, || format!("{mode} omega{}", i + 1));
                }
            }
        }
    }
    c
}

pub fn dd_random_one_forms(cfg: &Config) -> Check {
    let mut c = Check::new("dd_random_one_forms");
    let mut rng = cfg.rng("dd_random");
    for _ in 0..100 {
        let w = gen::one_form(&mut rng, 3);
        let r = w.d().map(|dw| closure_defect(&dw, &StandardDerivatives).is_zero());
        c.attempt(r, || format!("{w:?}"));
    }
    c
}

pub fn leibniz(cfg: &Config) -> Check {
    let mut c = Check::new("leibniz");
    let mut rng = cfg.rng("leibniz");
    let rules = &StandardDerivatives;
    for _ in 0..50 {
        let g = gen::laurent(&mut rng, 2);
        let h = gen::laurent(&mut rng, 2);
        let a = gen::laurent_one_form(&mut rng, 2);
        let b = gen::laurent_one_form(&mut rng, 2);
        let scalar = |e: &Expr| Form::scalar(e.clone());
        let r = (|| -> Result<bool, crate::exterior::ExteriorError> {
            let dg = scalar(&g).d()?;
            let dh = scalar(&h).d()?;
            let product = scalar(&(&g * &h)).d()? == dh.scale(&g).add(&dg.scale(&h));
            let scaled = a.scale(&g).d()? == dg.wedge(&a)?.add(&a.d()?.scale(&g));
            let lhs = closure_defect(&a.wedge(&b)?, rules);
            let rhs = a.d()?.wedge_unchecked(&b).sub(&a.wedge_unchecked(&b.d()?));
            Ok(product && scaled && lhs == rhs)
        })();
        c.attempt(r, || format!("g = {g}, h = {h}"));
    }
    c
}

pub fn antisymmetry(cfg: &Config) -> Check {
    let mut c = Check::new("antisymmetry");
    let mut rng = cfg.rng("antisymmetry");
    for _ in 0..100 {
        let a = gen::one_form(&mut rng, 2);
        let b = gen::one_form(&mut rng, 2);
        let r = (|| -> Result<bool, crate::exterior::ExteriorError> {
            Ok(a.wedge(&b)? == b.wedge(&a)?.neg() && a.wedge(&a)?.is_zero())
        })();
        c.attempt(r, || format!("{a:?} ^ {b:?}"));
    }
    c
}

fn random_vector(rng: &mut impl Rng) -> TangentVector {
    CHART.iter().map(|&a| (a, rng.gen_range(-1.0..1.0))).collect()
}

pub fn wedge_evaluation(cfg: &Config) -> Check {
    let mut c = Check::new("wedge_evaluation");
    let mut rng = cfg.rng("wedge_evaluation");
    for _ in 0..100 {
        let a = gen::one_form(&mut rng, 2);
        let b = gen::one_form(&mut rng, 2);
        let mut atoms = std::collections::BTreeSet::new();
        for f in [&a, &b] {
            for (_, e) in f.terms() {
                atoms.extend(e.atoms());
            }
        }
        let point: BTreeMap<Atom, f64> = random_env(&atoms, &mut rng);
        let v = random_vector(&mut rng);
        let w = random_vector(&mut rng);
        let r = (|| -> Result<(f64, f64), crate::exterior::ExteriorError> {
            let lhs = a.wedge(&b)?.eval(&point, &[&v, &w])?;
            let rhs = a.eval(&point, &[&v])? * b.eval(&point, &[&w])?
                - a.eval(&point, &[&w])? * b.eval(&point, &[&v])?;
            Ok((lhs, rhs))
        })();
        match r {
            Ok((x, y)) => c.record(rel_close(x, y, 1e-9), || format!("{x} vs {y}")),
            Err(e) => c.record(false, || e.to_string()),
        }
    }
    c
}
