//! Wedge products, exterior derivatives and coframe expansion.
//!
//! cargo run --example exterior_forms

use cartan_forge::expr::{Atom, Coord, Expr};
use cartan_forge::exterior::{Coframe, Form};
use cartan_forge::parse::{parse_expr, VarSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars = VarSet::all();
    let e = |s: &str| parse_expr(s, &vars);

    // contact forms du - p dx and dp - q dx
    let c0 = Form::one_form([(Atom::U, Expr::one()), (Atom::X, e("-p")?)]);
    let c1 = Form::one_form([(Atom::P, Expr::one()), (Atom::X, e("-q")?)]);
    println!("d(du - p dx):");
    print_terms(&c0.d()?);
    println!("(du - p dx) ^ (dp - q dx):");
    print_terms(&c0.wedge(&c1)?);

    let omega = Form::one_form([(Atom::X, e("x^2*u")?), (Atom::S, e("f4/u")?)]);
    let d_omega = omega.d()?;
    println!("\nd(x^2 u dx + f4/u ds):");
    print_terms(&d_omega);
    let f = Form::scalar(e("x^2*u*f4 + p/u")?);
    println!("d(d f) is zero: {}", f.d()?.d()?.is_zero());

    let alpha = Form::one_form([(Atom::U, e("x")?)]);
    let ab = alpha.wedge(&c1)?;
    let ba = c1.wedge(&alpha)?;
    println!("\nalpha ^ beta + beta ^ alpha is zero: {}", ab.add(&ba).is_zero());

    // express d(theta) in a coframe
    let frame = Coframe::new(vec![
        Form::dv(Atom::X),
        c0.clone(),
        c1.clone(),
        Form::one_form([(Atom::Q, Expr::one()), (Atom::X, e("-r")?)]),
        Form::one_form([(Atom::R, Expr::one()), (Atom::X, e("-s")?)]),
        Form::dv(Atom::S),
    ])?;
    println!("\ncoframe determinant = {}", frame.determinant());
    let components: Vec<String> = frame.chart_in_frame(Coord::P).iter().map(|c| c.to_string()).collect();
    println!("dp in the frame: [{}]", components.join(", "));
    Ok(())
}

fn print_terms(f: &Form) {
    for (blade, c) in f.terms() {
        let names: Vec<String> = blade.iter().map(|a| format!("d{a}")).collect();
        println!("  ({c}) {}", names.join("^"));
    }
}
