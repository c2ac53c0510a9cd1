use std::collections::BTreeMap;

use super::CartanError;
use crate::expr::{Atom, Expr, Poly, Quarters, Q};

/// Solves `t = target` for `param`, where `t = A·param + B`, `t = A/param + B`,
/// or `t = A·param^n` with `|n| <= 4` and `A` a monomial (positive branch).
pub fn solve_normalization(t: &Expr, param: Atom, target: &Q) -> Result<Expr, CartanError> {
    let nonlinear = |why: &str| CartanError::NonlinearNormalization(format!("{param} in {t}: {why}"));
    if t.denominator().contains_atom(param) {
        return Err(nonlinear("parameter in a non-monomial denominator"));
    }
    let mut by_power: BTreeMap<Quarters, Poly> = BTreeMap::new();
    for (m, c) in t.numerator().terms() {
        by_power
            .entry(m.exponent(param))
            .or_default()
            .add_term(m.without(param), c.clone());
    }
    let den = Expr::from_poly(t.denominator().clone());
    let part = |p: Poly| Expr::from_poly(p).div(&den);
    let b = match by_power.remove(&0) {
        Some(p) => part(p)?,
        None => Expr::zero(),
    };
    if by_power.len() != 1 {
        return Err(nonlinear("not a single power of the parameter"));
    }
    let (e, a) = by_power.into_iter().next().expect("one entry");
    if e % 4 != 0 {
        return Err(nonlinear("fractional power"));
    }
    let a = part(a)?;
    let rhs = Expr::rational(target.clone()) - b.clone();
    match e / 4 {
        1 => Ok(rhs.div(&a)?),
        -1 => a.div(&rhs).map_err(|_| nonlinear("target is unreachable")),
        n if b.is_zero() && n.abs() <= 4 => {
            let ratio = rhs.div(&a).map_err(|_| nonlinear("target is unreachable"))?;
            if ratio.is_zero() {
                return Err(nonlinear("target is unreachable"));
            }
            ratio
                .pow(&Q::new(1.into(), n.into()))
                .map_err(|_| nonlinear("root is not a monomial"))
        }
        _ => Err(nonlinear("power with an additive remainder")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::q;
    use crate::parse::{parse_expr, VarSet};

    fn e(s: &str) -> Expr {
        parse_expr(s, &VarSet::all()).unwrap()
    }

    #[test]
    fn reciprocal_after_substitution() {
        let t = e("1/(a1*a3*u)");
        let a1 = BTreeMap::from([(Atom::param(1), e("(f4*u)^(-1/4)"))]);
        let t = t.substitute(&a1).unwrap();
        let a3 = solve_normalization(&t, Atom::param(3), &q(1, 1)).unwrap();
        assert_eq!(a3, e("(f4*u)^(1/4)/u"));
    }

    #[test]
    fn linear_with_remainder() {
        let t = e("-(a2 + a3*p)/(a1*a3*u)");
        let a2 = solve_normalization(&t, Atom::param(2), &q(0, 1)).unwrap();
        assert_eq!(a2, e("-a3*p"));
    }

    #[test]
    fn gauge_a4_example() {
        let t = e("-(a4*f4^(1/2)*u + f4*q)/(f4^(1/2)*u)");
        let a4 = solve_normalization(&t, Atom::param(4), &q(0, 1)).unwrap();
        assert_eq!(a4, e("-f4^(1/2)*q/u"));
    }

    #[test]
    fn fourth_power() {
        let t = e("1/(a1^4*u*f4)");
        let a1 = solve_normalization(&t, Atom::param(1), &q(1, 1)).unwrap();
        assert_eq!(a1, e("(f4*u)^(-1/4)"));
    }

    #[test]
    fn rejects_nonlinear() {
        for s in ["a5^2 + a5", "1/(a5 + 1)", "a5^2 + 1", "a5^(1/2)"] {
            let err = solve_normalization(&e(s), Atom::param(5), &q(0, 1)).unwrap_err();
            assert!(err.to_string().starts_with("nonlinear normalization"), "{s}: {err}");
        }
    }
}
