use serde::{Deserialize, Serialize};

use super::sweep::{BranchTag, EigenBranchSet};
use crate::model::BasisState;
use crate::scalar::Real;

/// Thresholds for branch classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyPolicy {
    /// A branch is dark when its energy never moves by more than this
    /// fraction of the largest drive on the grid.
    pub dark_tolerance: f64,
    /// Trailing fraction of the grid on which the probed admixture must
    /// fall strictly for a chameleon candidate.
    pub decreasing_window: f64,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        Self {
            dark_tolerance: 1e-6,
            decreasing_window: 0.25,
        }
    }
}

pub(crate) fn shift_tag<T: Real>(set: &EigenBranchSet<T>, branch: usize, policy: &ClassifyPolicy) -> BranchTag {
    let energies = &set.branches[branch].energies;
    // a shift needs two drive values; fall back to coupling structure
    if energies.len() < 2 {
        return if set.blocks[set.branches[branch].block].singleton {
            BranchTag::Dark
        } else {
            BranchTag::Bright
        };
    }
    let e0 = energies[0];
    let max_shift = energies.iter().fold(T::zero(), |m, &e| m.max((e - e0).abs()));
    let omega_max = set.omega_grid.iter().fold(T::zero(), |m, &w| m.max(w));
    if max_shift <= T::lit(policy.dark_tolerance) * omega_max {
        BranchTag::Dark
    } else {
        BranchTag::Bright
    }
}

/// First grid index of the first point of the trailing window.
fn window_start(n: usize, fraction: f64) -> usize {
    if n == 0 {
        return 0;
    }
    (((n - 1) as f64) * (1.0 - fraction)).floor() as usize
}

/// Grid index where the probed admixture peaks, if the peak is an interior
/// turnover followed by a strictly falling trailing window.
pub fn admixture_turnover<T: Real>(
    set: &EigenBranchSet<T>,
    branch: usize,
    probe: &BasisState,
    policy: &ClassifyPolicy,
) -> Option<usize> {
    let adm = set.admixture(branch, probe);
    let n = adm.len();
    let start = window_start(n, policy.decreasing_window);
    if n < 3 || n - start < 2 {
        return None;
    }
    let (peak, &peak_value) = adm
        .iter()
        .enumerate()
        .fold((0, &adm[0]), |best, (i, v)| if *v > *best.1 { (i, v) } else { best });
    if peak_value <= T::zero() || peak == 0 || peak >= start {
        return None;
    }
    adm[start..]
        .windows(2)
        .all(|w| w[1] < w[0])
        .then_some(peak)
}

/// Dark if the energy never shifts, chameleon candidate if the probed
/// admixture turns over and then falls, bright otherwise.
pub fn classify<T: Real>(
    set: &EigenBranchSet<T>,
    branch: usize,
    probe: &BasisState,
    policy: &ClassifyPolicy,
) -> BranchTag {
    match shift_tag(set, branch, policy) {
        BranchTag::Dark => BranchTag::Dark,
        _ if admixture_turnover(set, branch, probe, policy).is_some() => {
            BranchTag::ChameleonCandidate
        }
        _ => BranchTag::Bright,
    }
}

impl<T: Real> EigenBranchSet<T> {
    pub fn classify_with_probe(&mut self, probe: &BasisState, policy: &ClassifyPolicy) {
        self.classifications = (0..self.branches.len())
            .map(|b| classify(self, b, probe, policy))
            .collect();
    }
}
