use super::atom::Atom;
use super::poly::Q;
use super::quotient::Expr;
use super::ExprError;

/// Uncanonicalized expression syntax, as produced by the parser.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprTree {
    Num(Q),
    Atom(Atom),
    Neg(Box<ExprTree>),
    Add(Box<ExprTree>, Box<ExprTree>),
    Sub(Box<ExprTree>, Box<ExprTree>),
    Mul(Box<ExprTree>, Box<ExprTree>),
    Div(Box<ExprTree>, Box<ExprTree>),
    Pow(Box<ExprTree>, Box<ExprTree>),
}

impl ExprTree {
    pub fn num(n: i64) -> Self {
        ExprTree::Num(Q::from_integer(n.into()))
    }

    pub fn add(a: ExprTree, b: ExprTree) -> Self {
        ExprTree::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: ExprTree, b: ExprTree) -> Self {
        ExprTree::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ExprTree, b: ExprTree) -> Self {
        ExprTree::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: ExprTree, b: ExprTree) -> Self {
        ExprTree::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: ExprTree, b: ExprTree) -> Self {
        ExprTree::Pow(Box::new(a), Box::new(b))
    }

    pub fn neg(a: ExprTree) -> Self {
        ExprTree::Neg(Box::new(a))
    }
}

/// Reduces a tree to canonical form. Exponents must reduce to rationals.
pub fn canonicalize(t: &ExprTree) -> Result<Expr, ExprError> {
    Ok(match t {
        ExprTree::Num(c) => Expr::rational(c.clone()),
        ExprTree::Atom(a) => Expr::atom(*a),
        ExprTree::Neg(a) => -canonicalize(a)?,
        ExprTree::Add(a, b) => canonicalize(a)? + canonicalize(b)?,
        ExprTree::Sub(a, b) => canonicalize(a)? - canonicalize(b)?,
        ExprTree::Mul(a, b) => canonicalize(a)? * canonicalize(b)?,
        ExprTree::Div(a, b) => canonicalize(a)?.div(&canonicalize(b)?)?,
        ExprTree::Pow(a, b) => {
            let e = canonicalize(b)?
                .as_rational()
                .ok_or(ExprError::UnsupportedRadical)?;
            canonicalize(a)?.pow(&e)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::q;

    #[test]
    fn torsion_quotient_from_tree() {
        let at = |a| ExprTree::Atom(a);
        let (a1, a2, a3) = (Atom::param(1), Atom::param(2), Atom::param(3));
        let t = ExprTree::div(
            ExprTree::add(at(a2), ExprTree::mul(at(a3), at(Atom::P))),
            ExprTree::mul(ExprTree::mul(at(a1), at(a3)), at(Atom::U)),
        );
        let e = canonicalize(&t).unwrap();
        let back = e * (Expr::atom(a1) * Expr::atom(a3) * Expr::atom(Atom::U));
        assert_eq!(back, Expr::atom(a2) + Expr::atom(a3) * Expr::atom(Atom::P));
    }

    #[test]
    fn idempotent_on_canonical_input() {
        let t = ExprTree::pow(
            ExprTree::mul(ExprTree::Atom(Atom::coef(4, 0)), ExprTree::Atom(Atom::U)),
            ExprTree::Num(q(-1, 4)),
        );
        let e = canonicalize(&t).unwrap();
        let again = canonicalize(&ExprTree::mul(ExprTree::num(1), ExprTree::Num(q(1, 1))))
            .unwrap()
            * &e;
        assert_eq!(again, e);
    }

    #[test]
    fn errors_surface() {
        let z = ExprTree::div(ExprTree::num(1), ExprTree::sub(ExprTree::Atom(Atom::X), ExprTree::Atom(Atom::X)));
        assert_eq!(canonicalize(&z), Err(ExprError::ZeroDivisor));
        let r = ExprTree::pow(ExprTree::Atom(Atom::U), ExprTree::Num(q(1, 3)));
        assert_eq!(canonicalize(&r), Err(ExprError::UnsupportedRadical));
    }
}
