//! Parsing, printing and error spans for expressions and input files.
//!
//! cargo run --example parse_roundtrip

use cartan_forge::jet::{OperatorSpec, Transformation};
use cartan_forge::parse::{format_expr, parse_expr, parse_operator_file, VarSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars = VarSet::all();
    for text in ["a6/(a1*a10)", "-(f4*s + f3*r)/u^2", "x^(3/4)*f4'' - 2/3", "(a2 + a3*p)/(a1*a3*u)"] {
        let e = parse_expr(text, &vars)?;
        let printed = format_expr(&e);
        let again = parse_expr(&printed, &vars)?;
        println!("{text:<28} -> {printed:<32} round trip {}", if again == e { "exact" } else { "BROKEN" });
    }

    let op = OperatorSpec::parse("name = Euler\nf4 = x^4\nf2 = 3*x^2\nf0 = 1\n")?;
    println!("\noperator f4 = {}, f2 = {}, f0 = {}", op.coefficient(4), op.coefficient(2), op.coefficient(0));
    let map = Transformation::parse("xi = 2*x + 1\nphi = x^2 + 1\n")?;
    println!("map xi = {}, phi = {}", map.xi(), map.phi());

    println!();
    for bad in ["f3 = 2*x +\n", "f4 = 1\nf2 = u\n", "f4 = x^(1/3)\n", "f9 = 1\n"] {
        match parse_operator_file(bad) {
            Ok(_) => println!("{bad:?} parsed"),
            Err(e) => {
                let line = bad.lines().nth(e.span.line - 1).unwrap_or("");
                println!("{e}\n  | {line}\n  | {}^", " ".repeat(e.span.column - 1));
            }
        }
    }
    Ok(())
}
