//! Analytic reference models: the driven two-level system, the
//! Morris-Shore decomposition of degenerate manifolds, and the
//! weak-drive two-level extrapolation of each hyperfine level.

use serde::Serialize;

use super::eigh::eigh_symmetric;
use super::sweep::BlockInfo;
use crate::angmom::{coupled_state, product_basis, HalfInt};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::model::{build_basis, build_hamiltonian, coupling_block, Manifold, SystemSpec};
use crate::scalar::Real;

/// Eigenvalues `(δ ∓ sqrt(δ² + Ω²)) / 2` of `[[0, Ω/2], [Ω/2, δ]]`.
pub fn two_level_reference<T: Real>(omega: T, delta: T) -> (T, T) {
    let root = (delta * delta + omega * omega).sqrt();
    let half = T::lit(0.5);
    ((delta - root) * half, (delta + root) * half)
}

/// Spectrum of two degenerate manifolds (lower at 0, upper at `delta`)
/// joined by `coupling` (`upper × lower`, entries already `Ω/2`).
///
/// Each singular value `s` of the coupling gives a pair
/// `(δ ± sqrt(δ² + 4 s²)) / 2`; the remaining lower states stay at 0 and
/// the remaining upper states at `δ`. Returned ascending.
pub fn morris_shore_reference<T: Real>(coupling: &Matrix<T>, delta: T) -> Result<Vec<T>> {
    let (n_up, n_low) = (coupling.rows(), coupling.cols());
    let gram = coupling.transpose().matmul(coupling);
    let sq = eigh_symmetric(&gram)?.values;
    let s_max = sq.iter().fold(T::zero(), |m, &x| m.max(x)).max(T::zero()).sqrt();
    let cut = T::lit(1e-12) * s_max;
    let singular: Vec<T> = sq
        .into_iter()
        .map(|x| x.max(T::zero()).sqrt())
        .filter(|&s| s > cut && s > T::zero())
        .collect();
    let rank = singular.len();
    let mut out = Vec::with_capacity(n_up + n_low);
    for &s in &singular {
        let (lo, hi) = two_level_reference(T::lit(2.0) * s, delta);
        out.push(lo);
        out.push(hi);
    }
    out.extend(std::iter::repeat_n(T::zero(), n_low - rank));
    out.extend(std::iter::repeat_n(delta, n_up - rank));
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Morris-Shore spectrum of a scenario at drive `omega`. Only exact when
/// neither manifold has internal structure.
pub fn morris_shore_for_spec<T: Real>(spec: &SystemSpec, omega: T) -> Result<Vec<T>> {
    if spec.lower.hyperfine_a != 0.0 || spec.upper.hyperfine_a != 0.0 {
        return Err(Error::Contract(format!(
            "Morris-Shore reference needs degenerate manifolds, got A_lower = {}, A_upper = {}",
            spec.lower.hyperfine_a, spec.upper.hyperfine_a
        )));
    }
    let block = coupling_block(spec, omega)?;
    let base = T::lit(spec.lower.base_energy);
    let delta = T::lit(spec.upper_offset()? - spec.lower.base_energy);
    Ok(morris_shore_reference(&block, delta)?
        .into_iter()
        .map(|e| e + base)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairBranch {
    Minus,
    Plus,
}

/// One dashed line: a hyperfine level treated as an isolated driven
/// two-level system.
#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationLine<T> {
    pub f: HalfInt,
    pub m_f: HalfInt,
    pub branch: PairBranch,
    /// Effective Rabi frequency per unit `Ω`.
    pub rabi_ratio: T,
    /// Detuning of the bright upper state from the level (MHz).
    pub detuning: T,
    pub energies: Vec<T>,
}

/// Weak-drive extrapolation for the lower hyperfine levels of `block`.
///
/// Each `|F, m_F>` couples to the upper manifold through the bright state
/// `b = C|F, m_F>`. The level is replaced by a two-level system with Rabi
/// frequency `Ω_F = 2 |b|` and detuning `E_b - E_F`, offset by `E_F`.
pub fn two_level_extrapolation<T: Real>(
    spec: &SystemSpec,
    block: &BlockInfo,
    omega_grid: &[T],
) -> Result<Vec<ExtrapolationLine<T>>> {
    spec.validate()?;
    let basis = build_basis(spec);
    let n_low = spec.lower.dimension();
    let lower_in_block: Vec<usize> = block
        .indices
        .iter()
        .copied()
        .filter(|&i| basis[i].manifold == Manifold::Lower)
        .collect();
    let Some(&first) = lower_in_block.first() else {
        return Ok(Vec::new());
    };
    let m_f = basis[first].m_j + basis[first].m_i;

    let unit = coupling_block::<T>(spec, T::one())?;
    let h0 = build_hamiltonian::<T>(spec, T::zero())?;
    let upper_idx: Vec<usize> = (n_low..basis.len()).collect();
    let h_up = h0.entries().principal(&upper_idx);
    let product = product_basis(spec.lower.j, spec.lower.i);
    debug_assert_eq!(product.len(), n_low);

    let mut lines = Vec::new();
    for f in spec.lower.f_levels() {
        if !f.admits(m_f) {
            continue;
        }
        let state: Vec<T> = coupled_state(spec.lower.j, spec.lower.i, f, m_f)?;
        let bright = unit.mul_vec(&state);
        let b_norm = norm(&bright);
        let rabi_ratio = T::lit(2.0) * b_norm;
        let e_f = T::lit(spec.lower.level_energy(f));
        let e_bright = if b_norm > T::zero() {
            dot(&bright, &h_up.mul_vec(&bright)) / (b_norm * b_norm)
        } else {
            T::lit(spec.upper_offset()?)
        };
        let detuning = e_bright - e_f;
        let (lo, hi): (Vec<T>, Vec<T>) = omega_grid
            .iter()
            .map(|&w| {
                let (a, b) = two_level_reference(rabi_ratio * w, detuning);
                (e_f + a, e_f + b)
            })
            .unzip();
        for (branch, energies) in [(PairBranch::Minus, lo), (PairBranch::Plus, hi)] {
            lines.push(ExtrapolationLine {
                f,
                m_f,
                branch,
                rabi_ratio,
                detuning,
                energies,
            });
        }
    }
    Ok(lines)
}
