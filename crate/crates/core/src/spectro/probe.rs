use serde::{Deserialize, Serialize};

use crate::angmom::HalfInt;
use crate::error::{Error, Result};
use crate::model::{BasisState, Manifold, SystemSpec};
use crate::scalar::Real;

/// Weak probe from a ground state into the lower manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Probe polarization: -1, 0 or +1.
    pub q: i32,
    pub ground_mj: HalfInt,
    #[serde(rename = "ground_mI")]
    pub ground_mi: HalfInt,
    /// Gaussian sigma of a single homogeneous line (MHz).
    pub linewidth_mhz: f64,
}

impl ProbeSpec {
    /// `5S_{1/2}, m_j = 1/2, m_I = 3/2` probed with polarization `q`.
    pub fn rb87_stretched_ground(q: i32, linewidth_mhz: f64) -> Self {
        Self {
            q,
            ground_mj: HalfInt::HALF,
            ground_mi: HalfInt::from_twice(3),
            linewidth_mhz,
        }
    }

    /// The lower-manifold state the probe couples to: `m_j + q`, same `m_I`.
    pub fn probed_lower_state(&self) -> BasisState {
        BasisState::lower(self.ground_mj + HalfInt::from_int(self.q), self.ground_mi)
    }

    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        if !(-1..=1).contains(&self.q) {
            return Err(Error::Config(format!("probe q must be -1, 0 or +1, got {}", self.q)));
        }
        if !(self.linewidth_mhz > 0.0) || !self.linewidth_mhz.is_finite() {
            return Err(Error::Config(format!(
                "probe linewidth must be positive, got {}",
                self.linewidth_mhz
            )));
        }
        let s = self.probed_lower_state();
        if !spec.lower.j.admits(s.m_j) || !spec.lower.i.admits(s.m_i) {
            return Err(Error::Config(format!(
                "probe reaches {s}, which is not a state of the lower manifold"
            )));
        }
        Ok(())
    }
}

/// Spectroscopic weight of a dressed state: probed-state population times
/// total population of the upper manifold.
pub fn signal_weight<T: Real>(eigenvector: &[T], labels: &[BasisState], probed: &BasisState) -> T {
    let mut probe_amp = T::zero();
    let mut upper = T::zero();
    for (&c, s) in eigenvector.iter().zip(labels) {
        if s == probed {
            probe_amp = c;
        }
        if s.manifold == Manifold::Upper {
            upper = upper + c * c;
        }
    }
    probe_amp * probe_amp * upper
}
