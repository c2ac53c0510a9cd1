use super::Slot;
use crate::expr::{q, Q};
use crate::jet::Mode;

/// Set the torsion coefficient at `slot` to `target` by solving for `a_param`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub slot: Slot,
    pub param: u8,
    pub target: Q,
}

/// One loop of the method: normalizations solved in order against the same
/// structure equations, then substituted together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationStage {
    pub index: usize,
    pub steps: Vec<Normalization>,
}

impl NormalizationStage {
    pub fn params(&self) -> impl Iterator<Item = u8> + '_ {
        self.steps.iter().map(|s| s.param)
    }
}

fn n(slot: Slot, param: u8, target: i64) -> Normalization {
    Normalization {
        slot,
        param,
        target: q(target, 1),
    }
}

fn stages(groups: Vec<Vec<Normalization>>) -> Vec<NormalizationStage> {
    groups
        .into_iter()
        .enumerate()
        .map(|(i, steps)| NormalizationStage { index: i + 1, steps })
        .collect()
}

/// The normalization schedule for a mode.
pub fn schedule(mode: Mode) -> Vec<NormalizationStage> {
    let first = vec![
        n((2, 1, 3), 3, 1),
        n((2, 1, 2), 2, 0),
        n((3, 1, 4), 6, 1),
        n((4, 1, 5), 10, 1),
        n((5, 1, 6), 1, 1),
    ];
    match mode {
        Mode::Direct => stages(vec![
            first,
            vec![n((3, 1, 3), 5, 0), n((5, 1, 5), 9, 0)],
            vec![n((3, 1, 2), 4, 0)],
            vec![n((4, 1, 3), 8, 0), n((4, 1, 2), 7, 0)],
        ]),
        Mode::Gauge => stages(vec![
            first,
            vec![n((3, 1, 3), 5, 0), n((5, 1, 5), 9, 0), n((3, 1, 2), 4, 0)],
            vec![n((4, 1, 3), 8, 0), n((4, 1, 2), 7, 0)],
        ]),
    }
}

/// Names and slots of the invariants read off the final structure equations.
pub fn invariant_slots(mode: Mode) -> &'static [(&'static str, Slot)] {
    match mode {
        Mode::Direct => &[
            ("I", (5, 1, 2)),
            ("I1", (4, 1, 4)),
            ("I2", (5, 1, 3)),
            ("I3", (5, 1, 4)),
        ],
        Mode::Gauge => &[
            ("I1", (4, 1, 3)),
            ("I2", (4, 1, 4)),
            ("I3", (5, 1, 3)),
            ("I4", (5, 1, 4)),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_parameter_normalized_once() {
        for mode in Mode::ALL {
            let mut seen: Vec<u8> = schedule(mode).iter().flat_map(|s| s.params().collect::<Vec<_>>()).collect();
            seen.sort();
            assert_eq!(seen, (1..=10).collect::<Vec<u8>>());
        }
    }
}
