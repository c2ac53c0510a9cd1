use std::fmt::{self, Write};

use num_traits::{One, Signed};

use crate::expr::{Expr, Monomial, Poly, Q};

fn write_rational(out: &mut String, c: &Q) {
    if c.is_integer() {
        write!(out, "{}", c.numer()).unwrap();
    } else {
        write!(out, "{}/{}", c.numer(), c.denom()).unwrap();
    }
}

fn write_monomial(out: &mut String, m: &Monomial) {
    for (i, &(a, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        write!(out, "{a}").unwrap();
        if e == 4 {
            continue;
        }
        if e % 4 == 0 {
            let k = e / 4;
            if k > 0 {
                write!(out, "^{k}").unwrap();
            } else {
                write!(out, "^({k})").unwrap();
            }
        } else {
            let g = num_integer::gcd(e, 4);
            write!(out, "^({}/{})", e / g, 4 / g).unwrap();
        }
    }
}

fn write_poly(out: &mut String, p: &Poly) {
    if p.is_zero() {
        out.push('0');
        return;
    }
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let mag = c.abs();
        if i == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if m.is_one() {
            write_rational(out, &mag);
        } else {
            if !mag.is_one() {
                write_rational(out, &mag);
                out.push('*');
            }
            write_monomial(out, m);
        }
    }
}

/// Deterministic text form; terms appear in descending monomial order.
///
/// The output parses back to the identical canonical expression.
pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    if e.denominator().is_one() {
        write_poly(&mut out, e.numerator());
    } else {
        out.push('(');
        write_poly(&mut out, e.numerator());
        out.push_str(")/(");
        write_poly(&mut out, e.denominator());
        out.push(')');
    }
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_expr(self))
    }
}
