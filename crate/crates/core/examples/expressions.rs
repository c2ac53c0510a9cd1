//! Canonical expressions: building, differentiating, substituting, evaluating.
//!
//! cargo run --example expressions

use std::collections::BTreeMap;

use cartan_forge::expr::{equal, Atom, Expr};
use cartan_forge::parse::{parse_expr, VarSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars = VarSet::all();

    let root = parse_expr("(f4*u)^(1/4) * (f4*u)^(1/4)", &vars)?;
    println!("(f4 u)^(1/4) (f4 u)^(1/4) = {root}");

    let torsion = parse_expr("(a2 + a3*p) / (a1*a3*u)", &vars)?;
    println!("torsion coefficient        = {torsion}");

    let i = parse_expr("f4*s + f3*r + f2*q + f1*p + f0*u", &vars)?;
    println!("d/ds  of {i} = {}", i.diff(Atom::S));
    println!("d/dx  of {i} = {}", i.diff(Atom::X));

    let mut bindings = BTreeMap::new();
    bindings.insert(Atom::param(1), parse_expr("(f4*u)^(-1/4)", &vars)?);
    bindings.insert(Atom::param(3), parse_expr("(f4*u)^(1/4)/u", &vars)?);
    let t = parse_expr("1/(a1*a3*u)", &vars)?;
    println!("1/(a1 a3 u) after normalization = {}", t.substitute(&bindings)?);

    let a1 = parse_expr("(f4*u)^(-1/4)", &vars)?;
    let env = BTreeMap::from([(Atom::coef(4, 0), 16.0), (Atom::U, 1.0)]);
    println!("a1 at f4 = 16, u = 1 -> {}", a1.eval_map(&env)?);

    let lhs = parse_expr("u^(1/2) * u^(1/2)", &vars)?;
    println!("u^(1/2) u^(1/2) vs u: {}", equal(&lhs, &Expr::atom(Atom::U)));

    let tangled = parse_expr("(x^2 - 1)/(x - 1) - x", &vars)?;
    println!("(x^2 - 1)/(x - 1) - x = {tangled}");
    Ok(())
}
