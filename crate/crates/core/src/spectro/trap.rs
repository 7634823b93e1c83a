//! Drive-strength distribution seen by a thermal cloud in a crossed
//! Gaussian-beam dipole trap, one arm of which is the coupling laser.
//!
//! Positions are drawn from the harmonic approximation of the trap and
//! re-weighted to the Boltzmann density of the full Gaussian potential,
//! so every sample carries an importance weight.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::eigh_symmetric;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Proposal widths are this factor times the harmonic thermal widths.
const PROPOSAL_INFLATION: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    /// 1/e² intensity radius at the focus (µm).
    pub waist_um: f64,
    pub wavelength_um: f64,
    /// Peak trap depth in temperature units (µK).
    pub depth_uk: f64,
}

impl BeamSpec {
    fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.waist_um * self.waist_um / self.wavelength_um
    }

    /// Intensity relative to the focus at `r`, for a beam along unit `axis`.
    fn relative_intensity(&self, axis: [f64; 3], r: [f64; 3]) -> f64 {
        let z = axis[0] * r[0] + axis[1] * r[1] + axis[2] * r[2];
        let rho2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] - z * z;
        let zr = self.rayleigh_range();
        let w2 = self.waist_um * self.waist_um * (1.0 + (z / zr).powi(2));
        (self.waist_um * self.waist_um / w2) * (-2.0 * rho2 / w2).exp()
    }

    fn validate(&self, name: &str) -> Result<()> {
        for (what, v) in [
            ("waist_um", self.waist_um),
            ("wavelength_um", self.wavelength_um),
            ("depth_uk", self.depth_uk),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name}.{what} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Crossed dipole trap. The coupling beam runs along `x`; the second beam
/// crosses it in the `x-y` plane at `crossing_angle_deg`.
///
/// The shipped defaults are placeholders that produce visible asymmetric
/// broadening; they do not describe a real apparatus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub coupling_beam: BeamSpec,
    pub crossing_beam: BeamSpec,
    pub crossing_angle_deg: f64,
    pub temperature_uk: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            coupling_beam: BeamSpec {
                waist_um: 40.0,
                wavelength_um: 1.03,
                depth_uk: 150.0,
            },
            crossing_beam: BeamSpec {
                waist_um: 40.0,
                wavelength_um: 1.03,
                depth_uk: 150.0,
            },
            crossing_angle_deg: 45.0,
            temperature_uk: 30.0,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        self.coupling_beam.validate("coupling_beam")?;
        self.crossing_beam.validate("crossing_beam")?;
        if !(self.temperature_uk > 0.0) || !self.temperature_uk.is_finite() {
            return Err(Error::Config(format!(
                "temperature_uk must be positive, got {}",
                self.temperature_uk
            )));
        }
        if !self.crossing_angle_deg.is_finite() || (self.crossing_angle_deg % 180.0) == 0.0 {
            return Err(Error::Config(
                "crossing_angle_deg must give non-parallel beams".into(),
            ));
        }
        Ok(())
    }

    fn axes(&self) -> ([f64; 3], [f64; 3]) {
        let a = self.crossing_angle_deg.to_radians();
        ([1.0, 0.0, 0.0], [a.cos(), a.sin(), 0.0])
    }

    /// Potential energy in µK (negative inside the trap).
    fn potential(&self, r: [f64; 3]) -> f64 {
        let (a1, a2) = self.axes();
        -self.coupling_beam.depth_uk * self.coupling_beam.relative_intensity(a1, r)
            - self.crossing_beam.depth_uk * self.crossing_beam.relative_intensity(a2, r)
    }

    /// Curvature of the potential at the trap centre (µK/µm²).
    fn hessian(&self) -> Matrix<f64> {
        let (a1, a2) = self.axes();
        let mut k = Matrix::zeros(3, 3);
        for (beam, axis) in [(&self.coupling_beam, a1), (&self.crossing_beam, a2)] {
            let radial = 4.0 * beam.depth_uk / (beam.waist_um * beam.waist_um);
            let zr = beam.rayleigh_range();
            let axial = 2.0 * beam.depth_uk / (zr * zr);
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    k[(i, j)] += radial * (delta - axis[i] * axis[j]) + axial * axis[i] * axis[j];
                }
            }
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaModel {
    Homogeneous,
    TrapSampled,
}

/// Weighted samples of the local drive as a fraction of the peak drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaDistribution {
    /// `(Ω / Ω_peak, weight)`, weights summing to one.
    pub samples: Vec<(f64, f64)>,
    pub model: OmegaModel,
    pub seed: Option<u64>,
}

impl OmegaDistribution {
    pub fn homogeneous() -> Self {
        Self {
            samples: vec![(1.0, 1.0)],
            model: OmegaModel::Homogeneous,
            seed: None,
        }
    }

    /// Weighted mean of `Ω / Ω_peak`.
    pub fn mean_fraction(&self) -> f64 {
        self.samples.iter().map(|(f, w)| f * w).sum()
    }
}

/// Monte-Carlo sample of the drive distribution over the thermal cloud.
///
/// The local drive scales as the square root of the coupling-beam
/// intensity and equals the peak drive at the focus.
pub fn trap_omega_distribution(trap: &TrapConfig, n_samples: usize, seed: u64) -> Result<OmegaDistribution> {
    trap.validate()?;
    if n_samples == 0 {
        return Err(Error::Config("need at least one trap sample".into()));
    }
    let kt = trap.temperature_uk;
    let eig = eigh_symmetric(&trap.hessian())?;
    if eig.values.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Config("trap has no confinement along some axis".into()));
    }
    let widths: Vec<f64> = eig
        .values
        .iter()
        .map(|&k| PROPOSAL_INFLATION * (kt / k).sqrt())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (axis, _) = trap.axes();
    let u0 = trap.potential([0.0; 3]);
    let mut fractions = Vec::with_capacity(n_samples);
    let mut log_weights = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let z: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let mut r = [0.0; 3];
        for (c, (&zc, &w)) in z.iter().zip(&widths).enumerate() {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += eig.vectors[(i, c)] * w * zc;
            }
        }
        let log_proposal = -0.5 * z.iter().map(|x| x * x).sum::<f64>();
        let log_density = -(trap.potential(r) - u0) / kt;
        log_weights.push(log_density - log_proposal);
        fractions.push(trap.coupling_beam.relative_intensity(axis, r).sqrt());
    }
    let max_lw = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = log_weights.iter().map(|lw| (lw - max_lw).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(OmegaDistribution {
        samples: fractions
            .into_iter()
            .zip(raw)
            .map(|(f, w)| (f, w / total))
            .collect(),
        model: OmegaModel::TrapSampled,
        seed: Some(seed),
    })
}
