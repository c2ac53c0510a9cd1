use std::collections::BTreeMap;
use std::fmt;

use super::CartanError;
use crate::expr::{Atom, AtomDerivatives, Expr};
use crate::exterior::{Coframe, Form};

/// `(i, j, k)`: the `θʲ∧θᵏ` coefficient of `dθⁱ`, one-based, `j < k`.
pub type Slot = (usize, usize, usize);

/// One `dθⁱ` in the coframe basis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Row {
    /// `(j, k)`, `j < k`, one-based.
    pub torsion: BTreeMap<(usize, usize), Expr>,
    /// `(a_p, j)`: coefficient of `da_p∧θʲ`, one-based.
    pub residual: BTreeMap<(Atom, usize), Expr>,
}

/// `dθ¹..dθ⁶` split into torsion and parameter residuals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureEquations {
    rows: Vec<Row>,
}

impl StructureEquations {
    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &Row)> {
        self.rows.iter().enumerate().map(|(i, r)| (i + 1, r))
    }

    /// Torsion coefficient at a slot; zero when absent.
    pub fn torsion(&self, slot: Slot) -> Expr {
        let (i, j, k) = slot;
        self.rows[i - 1]
            .torsion
            .get(&(j, k))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// Every nonzero torsion slot in order.
    pub fn slots(&self) -> impl Iterator<Item = (Slot, &Expr)> {
        self.rows()
            .flat_map(|(i, r)| r.torsion.iter().map(move |(&(j, k), c)| ((i, j, k), c)))
    }

    pub fn residual_is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.residual.is_empty())
    }

    /// Whether some `da_p∧θᵐ` residual of row `i` uses column `j` or `k`,
    /// so that a parameter shift could absorb the slot.
    pub fn absorbable(&self, slot: Slot) -> bool {
        let (i, j, k) = slot;
        self.rows[i - 1]
            .residual
            .keys()
            .any(|&(_, m)| m == j || m == k)
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> StructureEquations {
        let rows = self
            .rows
            .iter()
            .map(|r| Row {
                torsion: r
                    .torsion
                    .iter()
                    .map(|(k, v)| (*k, f(v)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect(),
                residual: r
                    .residual
                    .iter()
                    .map(|(k, v)| (*k, f(v)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect(),
            })
            .collect();
        StructureEquations { rows }
    }
}

impl fmt::Display for StructureEquations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows() {
            write!(f, "dθ{i} =")?;
            if row.torsion.is_empty() && row.residual.is_empty() {
                write!(f, " 0")?;
            }
            let mut first = true;
            for ((p, j), c) in &row.residual {
                write!(f, "{} ({c}) d{p}∧θ{j}", if first { "" } else { " +" })?;
                first = false;
            }
            for ((j, k), c) in &row.torsion {
                write!(f, "{} ({c}) θ{j}∧θ{k}", if first { "" } else { " +" })?;
                first = false;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Computes `dθⁱ` and rewrites it in `{θʲ∧θᵏ, da_p∧θʲ}`.
pub fn structure_equations(
    thetas: &[Form],
    free_params: &[Atom],
    rules: &dyn AtomDerivatives,
) -> Result<(StructureEquations, Coframe), CartanError> {
    let frame = Coframe::new(thetas.to_vec())?;
    let mut rows = Vec::with_capacity(6);
    for theta in thetas {
        let d = theta.d_with(rules)?;
        let c = frame.to_basis(&d, free_params)?;
        rows.push(Row {
            torsion: c
                .torsion
                .into_iter()
                .map(|((j, k), v)| ((j + 1, k + 1), v))
                .collect(),
            residual: c
                .residual
                .into_iter()
                .map(|((p, j), v)| ((p, j + 1), v))
                .collect(),
        });
    }
    Ok((StructureEquations { rows }, frame))
}

/// `Σ T_jk θʲ∧θᵏ` for row `i` as a coordinate 2-form.
pub fn row_form(frame: &Coframe, eqs: &StructureEquations, i: usize) -> Form {
    let torsion = eqs
        .row(i)
        .torsion
        .iter()
        .map(|(&(j, k), c)| ((j - 1, k - 1), c.clone()))
        .collect();
    frame.assemble_two_form(&torsion)
}
