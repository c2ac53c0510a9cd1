use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::frames::{base_coframe, lifted_coframe, GroupElement};
use super::invariants::{Invariant, InvariantSet};
use super::normalize::solve_normalization;
use super::schedule::{invariant_slots, schedule, NormalizationStage};
use super::structure::{structure_equations, Slot, StructureEquations};
use super::{CartanError, Model};
use crate::expr::{Atom, Expr, Q};
use crate::exterior::{Coframe, Form};
use crate::jet::Mode;

/// One executed loop: the equations it was solved against and what it bound.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: NormalizationStage,
    /// Structure equations with this stage's parameters still free.
    pub equations: StructureEquations,
    /// Resolved bindings in solve order.
    pub bindings: Vec<(u8, Expr)>,
    /// Scheduled slots as recomputed after substitution.
    pub achieved: Vec<(Slot, Expr)>,
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub model: Model,
    pub base: Vec<Form>,
    pub stages: Vec<StageRecord>,
    pub group: GroupElement,
    /// Final invariant coframe `θ¹..θ⁶`.
    pub coframe: Vec<Form>,
    pub equations: StructureEquations,
    pub invariants: InvariantSet,
}

fn slot_name((i, j, k): Slot) -> String {
    format!("({i};{j},{k})")
}

fn solve_stage(
    stage: &NormalizationStage,
    eqs: &StructureEquations,
    group: &GroupElement,
) -> Result<Vec<(u8, Expr)>, CartanError> {
    let mut solved: BTreeMap<Atom, Expr> = BTreeMap::new();
    let mut order = Vec::new();
    for step in &stage.steps {
        if eqs.absorbable(step.slot) {
            return Err(CartanError::ScheduleFailed(format!(
                "stage {}: slot {} can be absorbed; residual of row {} is {:?}",
                stage.index,
                slot_name(step.slot),
                step.slot.0,
                eqs.row(step.slot.0).residual.keys().collect::<Vec<_>>()
            )));
        }
        let param = Atom::param(step.param);
        let t = eqs.torsion(step.slot).substitute(&solved)?;
        let v = solve_normalization(&t, param, &step.target)?;
        let single = BTreeMap::from([(param, v.clone())]);
        for val in solved.values_mut() {
            *val = val.substitute(&single)?;
        }
        solved.insert(param, v);
        order.push(step.param);
    }
    let free = group.free_params();
    let mut out = Vec::new();
    for p in order {
        let v = solved.remove(&Atom::param(p)).expect("solved");
        if let Some(a) = v.atoms().into_iter().find(|a| free.contains(a)) {
            return Err(CartanError::ScheduleFailed(format!(
                "stage {}: a{p} = {v} still depends on {a}",
                stage.index
            )));
        }
        out.push((p, v));
    }
    Ok(out)
}

fn check_targets(record: &mut StageRecord, eqs: &StructureEquations) -> Result<(), CartanError> {
    for step in &record.stage.steps {
        let actual = eqs.torsion(step.slot);
        if actual != Expr::rational(step.target.clone()) {
            return Err(CartanError::ScheduleFailed(format!(
                "stage {}: slot {} is {actual}, expected {}",
                record.stage.index,
                slot_name(step.slot),
                step.target
            )));
        }
        record.achieved.push((step.slot, actual));
    }
    Ok(())
}

/// Runs every normalization stage of the model's mode.
pub fn run_pipeline(model: &Model) -> Result<PipelineResult, CartanError> {
    let rules = model.rules();
    let base = base_coframe(model)?;
    let mut group = GroupElement::free();
    let mut stages: Vec<StageRecord> = Vec::new();
    for stage in schedule(model.mode()) {
        let thetas = lifted_coframe(&base, &group)?;
        let (eqs, _) = structure_equations(&thetas, &group.free_params(), rules)?;
        if let Some(prev) = stages.last_mut() {
            check_targets(prev, &eqs)?;
        }
        let bindings = solve_stage(&stage, &eqs, &group)?;
        for (p, v) in &bindings {
            group.bind(*p, v.clone());
        }
        stages.push(StageRecord {
            stage,
            equations: eqs,
            bindings,
            achieved: Vec::new(),
        });
    }
    let coframe = lifted_coframe(&base, &group)?;
    let (equations, _) = structure_equations(&coframe, &[], rules)?;
    if let Some(prev) = stages.last_mut() {
        check_targets(prev, &equations)?;
    }
    if !equations.residual_is_empty() {
        return Err(CartanError::ScheduleFailed("residual left after the last stage".into()));
    }
    let slots = invariant_slots(model.mode());
    for (slot, c) in equations.slots() {
        if c.as_rational().is_none() && !slots.iter().any(|(_, s)| *s == slot) {
            return Err(CartanError::ScheduleFailed(format!(
                "slot {} is neither constant nor an invariant: {c}",
                slot_name(slot)
            )));
        }
    }
    let invariants = InvariantSet {
        mode: model.mode(),
        entries: slots
            .iter()
            .map(|&(name, slot)| Invariant {
                name,
                slot,
                expr: equations.torsion(slot),
            })
            .collect(),
    };
    let result = PipelineResult {
        model: model.clone(),
        base,
        stages,
        group,
        coframe,
        equations,
        invariants,
    };
    Ok(match model.f4_substitution() {
        Some(_) => result.finalized(),
        None => result,
    })
}

static GENERIC: [OnceLock<Result<PipelineResult, CartanError>>; 2] = [OnceLock::new(), OnceLock::new()];

/// The pipeline on free coefficient functions, computed once per mode.
pub fn generic_pipeline(mode: Mode) -> Result<&'static PipelineResult, CartanError> {
    let slot = &GENERIC[mode as usize];
    slot.get_or_init(|| run_pipeline(&Model::generic(mode)))
        .as_ref()
        .map_err(Clone::clone)
}

/// Sign of sorting three distinct indices, with the sorted triple.
fn sort3(mut t: [usize; 3]) -> Option<(i64, [usize; 3])> {
    let mut sign = 1;
    for i in 0..3 {
        for j in 0..2 - i {
            if t[j] == t[j + 1] {
                return None;
            }
            if t[j] > t[j + 1] {
                t.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    Some((sign, t))
}

impl PipelineResult {
    pub fn mode(&self) -> Mode {
        self.model.mode()
    }

    /// Structure equations with every parameter free.
    pub fn free_torsion(&self) -> &StructureEquations {
        &self.stages[0].equations
    }

    /// Final value of `a_i`.
    pub fn binding(&self, i: u8) -> Expr {
        self.group.get(i)
    }

    /// Constant slots of the final equations.
    pub fn constant_slots(&self) -> BTreeMap<Slot, Q> {
        self.equations
            .slots()
            .filter_map(|(s, c)| c.as_rational().map(|q| (s, q)))
            .collect()
    }

    pub fn frame(&self) -> Result<Coframe, CartanError> {
        Ok(Coframe::new(self.coframe.clone())?)
    }

    /// `d` of each `Σ T_jk θʲ∧θᵏ`, reduced in the coframe basis; entries are
    /// the nonzero `θᵃ∧θᵇ∧θᶜ` coefficients, keyed by `(row, (a, b, c))`.
    pub fn bianchi_defects(&self) -> Result<BTreeMap<(usize, [usize; 3]), Expr>, CartanError> {
        let frame = self.frame()?;
        let rules = self.model.rules();
        let mut out = BTreeMap::new();
        for (i, row) in self.equations.rows() {
            let mut acc: BTreeMap<[usize; 3], Expr> = BTreeMap::new();
            let mut add = |t: [usize; 3], c: Expr| {
                if let Some((sign, key)) = sort3(t) {
                    let e = acc.entry(key).or_insert_with(Expr::zero);
                    *e = &*e + &c.signed(sign);
                }
            };
            for (&(j, k), coeff) in &row.torsion {
                if coeff.as_rational().is_none() {
                    let d = Form::scalar(coeff.clone()).d_with(rules)?;
                    for (m, c) in frame.to_basis(&d, &[])?.linear {
                        add([m + 1, j, k], c);
                    }
                }
                for (&(a, b), t) in &self.equations.row(j).torsion {
                    add([a, b, k], coeff * t);
                }
                for (&(a, b), t) in &self.equations.row(k).torsion {
                    add([j, a, b], -(coeff * t));
                }
            }
            for (key, c) in acc {
                if !c.is_zero() {
                    out.insert((i, key), c);
                }
            }
        }
        Ok(out)
    }

    fn finalized(self) -> PipelineResult {
        let m = &self.model;
        let f = |e: &Expr| m.finalize(e);
        let ff = |forms: &[Form]| -> Vec<Form> {
            forms
                .iter()
                .map(|w| w.map_coefficients(|c| Ok(m.finalize(c))).expect("substitution"))
                .collect()
        };
        let mut group = GroupElement::free();
        for (p, v) in self.group.bindings() {
            group.bind(p, f(v));
        }
        PipelineResult {
            base: ff(&self.base),
            stages: self
                .stages
                .iter()
                .map(|s| StageRecord {
                    stage: s.stage.clone(),
                    equations: s.equations.map(f),
                    bindings: s.bindings.iter().map(|(p, v)| (*p, f(v))).collect(),
                    achieved: s.achieved.clone(),
                })
                .collect(),
            group,
            coframe: ff(&self.coframe),
            equations: self.equations.map(f),
            invariants: InvariantSet {
                mode: self.invariants.mode,
                entries: self
                    .invariants
                    .entries
                    .iter()
                    .map(|e| Invariant {
                        expr: f(&e.expr),
                        ..e.clone()
                    })
                    .collect(),
            },
            model: self.model.clone(),
        }
    }
}
