use std::collections::BTreeMap;

use super::form::Form;
use super::ExteriorError;
use crate::expr::{Atom, Coord, Expr};

/// Six 1-forms on the jet chart together with their coefficient matrix over
/// `(dx, du, dp, dq, dr, ds)` and its inverse.
#[derive(Clone, Debug)]
pub struct Coframe {
    forms: Vec<Form>,
    matrix: Vec<Vec<Expr>>,
    /// `inverse[a][j]`: coefficient of `θ^(j+1)` in the chart differential `d(chart a)`.
    inverse: Vec<Vec<Expr>>,
    determinant: Expr,
}

/// A form rewritten in a coframe basis. Indices are zero-based (`0` is `θ¹`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrameCoefficients {
    /// Degree 1: `f = Σ c_j θ^j`.
    pub linear: BTreeMap<usize, Expr>,
    /// Degree 2: `Σ T_jk θ^j∧θ^k`, keyed by `(j, k)` with `j < k`.
    pub torsion: BTreeMap<(usize, usize), Expr>,
    /// Degree 2: `Σ M_pj da_p∧θ^j`, keyed by `(param, j)`.
    pub residual: BTreeMap<(Atom, usize), Expr>,
    /// Degree 1: coefficients on free parameter differentials `da_p`.
    pub param_linear: BTreeMap<Atom, Expr>,
}

fn chart_index(a: Atom) -> Option<usize> {
    match a {
        Atom::Chart(c) => Some(c.index()),
        _ => None,
    }
}

fn insert_sum<K: Ord>(map: &mut BTreeMap<K, Expr>, k: K, v: Expr) {
    if v.is_zero() {
        return;
    }
    let entry = map.remove(&k);
    let s = match entry {
        Some(old) => old + v,
        None => v,
    };
    if !s.is_zero() {
        map.insert(k, s);
    }
}

impl Coframe {
    /// Takes six 1-forms with chart-only differentials.
    pub fn new(forms: Vec<Form>) -> Result<Self, ExteriorError> {
        if forms.len() != 6 {
            return Err(ExteriorError::NotACoframe(format!(
                "expected 6 one-forms, got {}",
                forms.len()
            )));
        }
        let mut matrix = vec![vec![Expr::zero(); 6]; 6];
        for (i, f) in forms.iter().enumerate() {
            if f.degree() != 1 {
                return Err(ExteriorError::NotACoframe(format!(
                    "element {} has degree {}",
                    i + 1,
                    f.degree()
                )));
            }
            for (b, c) in f.terms() {
                let col = chart_index(b[0]).ok_or_else(|| {
                    ExteriorError::NotACoframe(format!(
                        "element {} involves d{}",
                        i + 1,
                        b[0]
                    ))
                })?;
                matrix[i][col] = c.clone();
            }
        }
        let (inverse_rows, determinant) = invert(&matrix)?;
        // inverse_rows = M^{-1}; d(chart a) = Σ_j (M^{-1})[a][j] θ^j.
        Ok(Coframe {
            forms,
            matrix,
            inverse: inverse_rows,
            determinant,
        })
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &Form {
        &self.forms[i]
    }

    pub fn matrix(&self) -> &[Vec<Expr>] {
        &self.matrix
    }

    pub fn determinant(&self) -> &Expr {
        &self.determinant
    }

    /// `d(chart coordinate)` expressed in the coframe.
    pub fn chart_in_frame(&self, c: Coord) -> &[Expr] {
        &self.inverse[c.index()]
    }

    /// Re-expresses a 1- or 2-form in the coframe basis. Parameter
    /// differentials are allowed only for atoms in `free_params`.
    pub fn to_basis(
        &self,
        f: &Form,
        free_params: &[Atom],
    ) -> Result<FrameCoefficients, ExteriorError> {
        let mut out = FrameCoefficients::default();
        let check_param = |a: Atom| -> Result<(), ExteriorError> {
            if free_params.contains(&a) {
                Ok(())
            } else {
                Err(ExteriorError::UnexpectedDifferential(a))
            }
        };
        match f.degree() {
            1 => {
                for (b, c) in f.terms() {
                    match chart_index(b[0]) {
                        Some(a) => {
                            for (j, n) in self.inverse[a].iter().enumerate() {
                                if !n.is_zero() {
                                    insert_sum(&mut out.linear, j, c * n);
                                }
                            }
                        }
                        None => {
                            check_param(b[0])?;
                            insert_sum(&mut out.param_linear, b[0], c.clone());
                        }
                    }
                }
            }
            2 => {
                let mut minors: BTreeMap<(usize, usize), Vec<((usize, usize), Expr)>> =
                    BTreeMap::new();
                for (b, c) in f.terms() {
                    match (chart_index(b[0]), chart_index(b[1])) {
                        (Some(v), Some(w)) => {
                            let m = minors.entry((v, w)).or_insert_with(|| self.minors(v, w));
                            for ((j, k), val) in m.iter() {
                                insert_sum(&mut out.torsion, (*j, *k), c * val);
                            }
                        }
                        (Some(v), None) => {
                            // c dv∧da = -c da∧dv
                            check_param(b[1])?;
                            for (j, n) in self.inverse[v].iter().enumerate() {
                                if !n.is_zero() {
                                    insert_sum(&mut out.residual, (b[1], j), -(c * n));
                                }
                            }
                        }
                        _ => return Err(ExteriorError::ParameterPair(b[0], b[1])),
                    }
                }
            }
            d => return Err(ExteriorError::DegreeOverflow(d)),
        }
        Ok(out)
    }

    /// Nonzero `θ^j∧θ^k` components of `dv∧dw`.
    fn minors(&self, v: usize, w: usize) -> Vec<((usize, usize), Expr)> {
        let (rv, rw) = (&self.inverse[v], &self.inverse[w]);
        let mut out = Vec::new();
        for j in 0..6 {
            for k in j + 1..6 {
                let a = &rv[j] * &rw[k];
                let b = &rv[k] * &rw[j];
                let m = a - b;
                if !m.is_zero() {
                    out.push(((j, k), m));
                }
            }
        }
        out
    }

    /// Rebuilds `Σ c_jk θ^j∧θ^k` as a coordinate 2-form.
    pub fn assemble_two_form(&self, torsion: &BTreeMap<(usize, usize), Expr>) -> Form {
        let mut out = Form::zero(2);
        for ((j, k), c) in torsion {
            let w = self.forms[*j].wedge_unchecked(&self.forms[*k]);
            out = out.add(&w.scale(c));
        }
        out
    }

    /// Rebuilds `Σ c_j θ^j` as a coordinate 1-form.
    pub fn assemble_one_form(&self, coeffs: &BTreeMap<usize, Expr>) -> Form {
        let mut out = Form::zero(1);
        for (j, c) in coeffs {
            out = out.add(&self.forms[*j].scale(c));
        }
        out
    }
}

/// Gauss-Jordan inverse choosing the sparsest nonzero pivot; returns the
/// inverse and the determinant.
fn invert(m: &[Vec<Expr>]) -> Result<(Vec<Vec<Expr>>, Expr), ExteriorError> {
    let n = m.len();
    let mut a: Vec<Vec<Expr>> = m.to_vec();
    let mut inv: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
        .collect();
    let mut det = Expr::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| (a[r][col].term_count(), r))
            .ok_or(ExteriorError::DegenerateCoframe)?;
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * &p;
        let pinv = p.recip()?;
        for j in 0..n {
            if !a[col][j].is_zero() {
                a[col][j] = &a[col][j] * &pinv;
            }
            if !inv[col][j].is_zero() {
                inv[col][j] = &inv[col][j] * &pinv;
            }
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                if !a[col][j].is_zero() {
                    a[r][j] = &a[r][j] - &(&factor * &a[col][j]);
                }
                if !inv[col][j].is_zero() {
                    inv[r][j] = &inv[r][j] - &(&factor * &inv[col][j]);
                }
            }
        }
    }
    Ok((inv, det))
}

#[cfg(all(test, not(feature = "mutant-wedge")))]
mod tests {
    use super::*;
    use crate::expr::Atom;

    fn e(a: Atom) -> Expr {
        Expr::atom(a)
    }

    fn base() -> Coframe {
        let u = e(Atom::U);
        let inv_u = Expr::one().div(&u).unwrap();
        let f4 = e(Atom::coef(4, 0));
        let i = &f4 * e(Atom::S) + e(Atom::coef(0, 0)) * &u;
        Coframe::new(vec![
            Form::dv(Atom::X),
            Form::one_form([(Atom::U, inv_u.clone()), (Atom::X, -(e(Atom::P) * &inv_u))]),
            Form::one_form([(Atom::P, Expr::one()), (Atom::X, -e(Atom::Q))]),
            Form::one_form([(Atom::Q, Expr::one()), (Atom::X, -e(Atom::R))]),
            Form::one_form([(Atom::R, Expr::one()), (Atom::X, -e(Atom::S))]),
            Form::scalar(i).d().unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn du_in_base_coframe() {
        let cf = base();
        let c = cf.to_basis(&Form::dv(Atom::U), &[]).unwrap();
        assert_eq!(c.linear.get(&0), Some(&e(Atom::P)));
        assert_eq!(c.linear.get(&1), Some(&e(Atom::U)));
        assert_eq!(c.linear.len(), 2);
    }

    #[test]
    fn d_omega2_torsion() {
        let cf = base();
        let d = cf.form(1).d().unwrap();
        let c = cf.to_basis(&d, &[]).unwrap();
        let inv_u = Expr::one().div(&e(Atom::U)).unwrap();
        assert_eq!(c.torsion.get(&(0, 1)), Some(&-(e(Atom::P) * &inv_u)));
        assert_eq!(c.torsion.get(&(0, 2)), Some(&inv_u));
        assert_eq!(c.torsion.len(), 2);
        assert!(c.residual.is_empty());
    }

    #[test]
    fn maurer_cartan_residual() {
        let cf = base();
        let a3 = Atom::param(3);
        let alpha = Form::dv(a3).scale(&Expr::one().div(&e(a3)).unwrap());
        let f = alpha.wedge(cf.form(2)).unwrap();
        let c = cf.to_basis(&f, &[a3]).unwrap();
        assert_eq!(c.residual.get(&(a3, 2)), Some(&Expr::one().div(&e(a3)).unwrap()));
        assert!(c.torsion.is_empty());
        assert!(matches!(
            cf.to_basis(&f, &[]),
            Err(ExteriorError::UnexpectedDifferential(_))
        ));
    }

    #[test]
    fn degenerate_matrix_detected() {
        let forms = vec![Form::dv(Atom::X); 6];
        assert!(matches!(Coframe::new(forms), Err(ExteriorError::DegenerateCoframe)));
    }

    #[test]
    fn determinant_of_base() {
        let cf = base();
        let expected = e(Atom::coef(4, 0)).div(&e(Atom::U)).unwrap();
        assert_eq!(cf.determinant(), &expected);
    }
}
