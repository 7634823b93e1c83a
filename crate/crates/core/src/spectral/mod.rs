//! Eigen-decomposition, drive sweeps with branch tracking, classification
//! and the analytic reference models.

mod classify;
mod eigh;
mod reference;
mod sweep;

pub use classify::{admixture_turnover, classify, ClassifyPolicy};
pub use eigh::{eigh_symmetric, Eigen};
pub use reference::{
    morris_shore_for_spec, morris_shore_reference, two_level_extrapolation, two_level_reference,
    ExtrapolationLine, PairBranch,
};
pub use sweep::{sweep, sweep_layout, BlockInfo, Branch, BranchTag, EigenBranchSet};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Inclusive grid `start, start + step, ..., <= stop` (with a small
/// tolerance so the end point survives rounding).
pub fn linear_grid<T: Real>(start: T, stop: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!(
            "grid needs finite bounds and a positive step, got {start}:{stop}:{step}"
        )));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    Ok((0..=n).map(|k| start + step * T::lit(k as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_401_points() {
        let g = linear_grid(0.0, 800.0, 2.0).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(*g.last().unwrap(), 800.0);
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
        assert!(linear_grid(1.0, 0.0, 1.0).unwrap().is_empty());
    }
}
