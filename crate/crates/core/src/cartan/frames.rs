use std::collections::BTreeMap;

use super::{CartanError, Model};
use crate::expr::{Atom, Expr};
use crate::exterior::Form;

/// `ω¹..ω⁶`: `dx`, the contact forms and `dI`.
pub fn base_coframe(model: &Model) -> Result<Vec<Form>, CartanError> {
    let e = Expr::atom;
    let inv_u = Expr::one().div(&e(Atom::U))?;
    let contact = |v: Atom, next: Atom| {
        Form::one_form([(v, Expr::one()), (Atom::X, -e(next))])
    };
    let omega6 = Form::scalar(model.invariant_function()).d_with(model.rules())?;
    Ok(vec![
        Form::dv(Atom::X),
        Form::one_form([(Atom::U, inv_u.clone()), (Atom::X, -(e(Atom::P) * &inv_u))]),
        contact(Atom::P, Atom::Q),
        contact(Atom::Q, Atom::R),
        contact(Atom::R, Atom::S),
        omega6,
    ])
}

/// Structure-group element: each `a_i` is either free (its own atom) or bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupElement {
    values: BTreeMap<u8, Expr>,
}

/// Lower-triangular pattern of the structure group: row `i` lists
/// `(column, parameter)` with `0` meaning the constant entry `1`.
const PATTERN: [&[(usize, u8)]; 6] = [
    &[(0, 1)],
    &[(1, 0)],
    &[(1, 2), (2, 3)],
    &[(1, 4), (2, 5), (3, 6)],
    &[(1, 7), (2, 8), (3, 9), (4, 10)],
    &[(5, 0)],
];

impl GroupElement {
    /// Every parameter free.
    pub fn free() -> Self {
        GroupElement::default()
    }

    /// `a1 = a3 = a6 = a10 = 1`, all others `0`.
    pub fn identity() -> Self {
        let mut g = GroupElement::free();
        for i in 1..=10 {
            let v = if [1, 3, 6, 10].contains(&i) { 1 } else { 0 };
            g.values.insert(i, Expr::int(v));
        }
        g
    }

    pub fn bind(&mut self, i: u8, value: Expr) {
        assert!((1..=10).contains(&i), "group parameter index {i} out of range");
        self.values.insert(i, value);
    }

    pub fn is_bound(&self, i: u8) -> bool {
        self.values.contains_key(&i)
    }

    /// `a_i` as an expression: its binding or the free atom.
    pub fn get(&self, i: u8) -> Expr {
        self.values
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Expr::atom(Atom::param(i)))
    }

    pub fn free_params(&self) -> Vec<Atom> {
        (1..=10)
            .filter(|i| !self.is_bound(*i))
            .map(Atom::param)
            .collect()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (u8, &Expr)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    /// Rejects bindings that make `a1 a3 a6 a10` vanish identically.
    pub fn check_nondegenerate(&self) -> Result<(), CartanError> {
        for i in [1, 3, 6, 10] {
            if self.get(i).is_zero() {
                return Err(CartanError::DegenerateGroup(format!("a{i} is bound to 0")));
            }
        }
        Ok(())
    }
}

/// `θ = G·ω`.
pub fn lifted_coframe(base: &[Form], g: &GroupElement) -> Result<Vec<Form>, CartanError> {
    g.check_nondegenerate()?;
    Ok(PATTERN
        .iter()
        .map(|row| {
            row.iter().fold(Form::zero(1), |acc, &(col, param)| {
                if param == 0 {
                    acc.add(&base[col])
                } else {
                    acc.add(&base[col].scale(&g.get(param)))
                }
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Mode;

    #[test]
    fn omega6_direct_slots() {
        let base = base_coframe(&Model::generic(Mode::Direct)).unwrap();
        let w6 = &base[5];
        assert_eq!(w6.coefficient(&[Atom::S]), Expr::atom(Atom::coef(4, 0)));
        let dx = w6.coefficient(&[Atom::X]);
        let expected: Expr = [Atom::U, Atom::P, Atom::Q, Atom::R, Atom::S]
            .into_iter()
            .enumerate()
            .map(|(i, a)| Expr::atom(Atom::coef(i as u8, 1)) * Expr::atom(a))
            .sum();
        assert_eq!(dx, expected);
    }

    #[test]
    fn omega6_gauge_du_slot() {
        let base = base_coframe(&Model::generic(Mode::Gauge)).unwrap();
        let top: Expr = [Atom::P, Atom::Q, Atom::R, Atom::S]
            .into_iter()
            .enumerate()
            .map(|(i, a)| Expr::atom(Atom::coef(i as u8 + 1, 0)) * Expr::atom(a))
            .sum();
        let u2 = Expr::atom_pow(Atom::U, 8);
        assert_eq!(base[5].coefficient(&[Atom::U]), -top.div(&u2).unwrap());
    }

    #[test]
    fn identity_lift_is_base() {
        let base = base_coframe(&Model::generic(Mode::Direct)).unwrap();
        let thetas = lifted_coframe(&base, &GroupElement::identity()).unwrap();
        assert_eq!(thetas, base);
    }

    #[test]
    fn lifted_rows() {
        let base = base_coframe(&Model::generic(Mode::Direct)).unwrap();
        let thetas = lifted_coframe(&base, &GroupElement::free()).unwrap();
        let a = |i| Expr::atom(Atom::param(i));
        let theta3 = base[1].scale(&a(2)).add(&base[2].scale(&a(3)));
        assert_eq!(thetas[2], theta3);
        let theta5 = base[1]
            .scale(&a(7))
            .add(&base[2].scale(&a(8)))
            .add(&base[3].scale(&a(9)))
            .add(&base[4].scale(&a(10)));
        assert_eq!(thetas[4], theta5);
    }

    #[test]
    fn degenerate_binding_rejected() {
        let base = base_coframe(&Model::generic(Mode::Direct)).unwrap();
        let mut g = GroupElement::free();
        g.bind(6, Expr::zero());
        assert!(matches!(
            lifted_coframe(&base, &g),
            Err(CartanError::DegenerateGroup(_))
        ));
    }
}
