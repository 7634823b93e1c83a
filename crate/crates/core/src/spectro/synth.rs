use rayon::prelude::*;
use serde::Serialize;

use super::probe::{signal_weight, ProbeSpec};
use super::trap::OmegaDistribution;
use crate::blocks::decompose;
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, BasisState, SystemSpec};
use crate::scalar::Real;
use crate::spectral::eigh_symmetric;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum<T> {
    pub detuning: Vec<T>,
    pub signal: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(detuning: Vec<T>, signal: Vec<T>) -> Result<Self> {
        if detuning.len() != signal.len() {
            return Err(Error::Precondition(format!(
                "spectrum has {} detunings but {} signal values",
                detuning.len(),
                signal.len()
            )));
        }
        if signal.iter().any(|&s| !(s >= T::zero()) || !s.is_finite()) {
            return Err(Error::Precondition("spectrum signal must be finite and >= 0".into()));
        }
        Ok(Self { detuning, signal })
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }
}

/// Energy and spectroscopic weight of one dressed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedLine<T> {
    pub energy: T,
    pub weight: T,
}

/// Dressed states of the block holding `probed` at drive `omega`, with
/// their signal weights. States in other blocks have zero weight.
pub fn dressed_lines<T: Real>(spec: &SystemSpec, probed: &BasisState, omega: T) -> Result<Vec<DressedLine<T>>> {
    let h = build_hamiltonian(spec, omega)?;
    let p = h
        .index_of(probed)
        .ok_or_else(|| Error::Config(format!("probed state {probed} is not in the basis")))?;
    let d = decompose(&h, spec.polarization_q)?;
    let indices = match d.block_of(p) {
        Some(b) => d.blocks[b].indices.clone(),
        None => vec![p],
    };
    let labels: Vec<BasisState> = indices.iter().map(|&i| h.labels()[i]).collect();
    let eig = eigh_symmetric(&h.entries().principal(&indices))?;
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &energy)| DressedLine {
            energy,
            weight: signal_weight(&eig.vector(k), &labels, probed),
        })
        .collect())
}

fn unit_gaussian<T: Real>(x: T, sigma: T) -> T {
    let norm = T::one() / (sigma * (T::lit(2.0) * T::PI()).sqrt());
    norm * (-(x * x) / (T::lit(2.0) * sigma * sigma)).exp()
}

/// Probe spectrum averaged over the drive distribution: every dressed state
/// contributes a unit-area Gaussian of width `probe.linewidth_mhz`, scaled by
/// its signal weight and the sample weight.
///
/// Samples are evaluated in parallel. With `deterministic` the per-sample
/// contributions are summed in sample order, giving bit-identical output.
pub fn synthesize_spectrum<T: Real>(
    spec: &SystemSpec,
    probe: &ProbeSpec,
    dist: &OmegaDistribution,
    peak_omega: T,
    detuning_grid: &[T],
    deterministic: bool,
) -> Result<Spectrum<T>> {
    spec.validate()?;
    probe.validate(spec)?;
    if !(peak_omega >= T::zero()) || !peak_omega.is_finite() {
        return Err(Error::Config(format!("peak omega must be >= 0, got {peak_omega}")));
    }
    if dist.samples.iter().any(|&(f, w)| !(f >= 0.0) || !(w >= 0.0)) {
        return Err(Error::Config("drive distribution needs non-negative samples".into()));
    }
    let sigma = T::lit(probe.linewidth_mhz);
    let probed = probe.probed_lower_state();

    let contribution = |&(fraction, weight): &(f64, f64)| -> Result<Vec<T>> {
        let lines = dressed_lines(spec, &probed, peak_omega * T::lit(fraction))?;
        let w = T::lit(weight);
        Ok(detuning_grid
            .iter()
            .map(|&x| {
                w * lines
                    .iter()
                    .map(|l| l.weight * unit_gaussian(x - l.energy, sigma))
                    .sum::<T>()
            })
            .collect())
    };
    let zero = || vec![T::zero(); detuning_grid.len()];
    let add = |mut acc: Vec<T>, v: Vec<T>| {
        acc.iter_mut().zip(v).for_each(|(a, b)| *a = *a + b);
        acc
    };

    let signal = if deterministic {
        let parts: Vec<Vec<T>> = dist.samples.par_iter().map(contribution).collect::<Result<_>>()?;
        parts.into_iter().fold(zero(), add)
    } else {
        dist.samples
            .par_iter()
            .map(contribution)
            .try_reduce(zero, |a, b| Ok(add(a, b)))?
    };
    Spectrum::new(detuning_grid.to_vec(), signal)
}
