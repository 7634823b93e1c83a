//! System description and Hamiltonian assembly for two coupled manifolds.
//!
//! Energies are ordinary frequencies in MHz (`h = 1`), so a resonantly
//! driven two-level pair splits by exactly `Ω`. The rotating-wave
//! approximation is implied: the coupling block is time independent.

mod spec;

pub use spec::{DetuningMode, ManifoldSpec, ReferenceTransition, SystemSpec};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::angmom::{idotj_matrix, HalfInt};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Lower,
    Upper,
}

/// Uncoupled basis state `|manifold, m_j, m_I>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub manifold: Manifold,
    pub m_j: HalfInt,
    #[serde(rename = "m_I")]
    pub m_i: HalfInt,
}

impl BasisState {
    pub fn lower(m_j: HalfInt, m_i: HalfInt) -> Self {
        Self {
            manifold: Manifold::Lower,
            m_j,
            m_i,
        }
    }

    pub fn upper(m_j: HalfInt, m_i: HalfInt) -> Self {
        Self {
            manifold: Manifold::Upper,
            m_j,
            m_i,
        }
    }

    pub fn is_upper(&self) -> bool {
        self.manifold == Manifold::Upper
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.manifold {
            Manifold::Lower => "L",
            Manifold::Upper => "U",
        };
        write!(f, "{tag}(m_j={}, m_I={})", self.m_j, self.m_i)
    }
}

/// Dense real symmetric matrix with one basis label per row/column.
#[derive(Debug, Clone)]
pub struct LabeledMatrix<T> {
    labels: Vec<BasisState>,
    entries: Matrix<T>,
}

impl<T: Real> LabeledMatrix<T> {
    pub fn new(labels: Vec<BasisState>, entries: Matrix<T>) -> Result<Self> {
        if !entries.is_square() || entries.rows() != labels.len() {
            return Err(Error::Precondition(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                entries.rows(),
                entries.cols()
            )));
        }
        let scale = entries.max_abs().max(T::one());
        if entries.asymmetry() > T::lit(1e-12) * scale {
            return Err(Error::Precondition("labeled matrix is not symmetric".into()));
        }
        Ok(Self { labels, entries })
    }

    pub fn labels(&self) -> &[BasisState] {
        &self.labels
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.labels.iter().position(|s| s == state)
    }
}

/// Lower manifold first; within each, `m_j` descending then `m_I` descending.
pub fn build_basis(spec: &SystemSpec) -> Vec<BasisState> {
    let mut basis = Vec::with_capacity(spec.dimension());
    for (manifold, m) in [(Manifold::Lower, &spec.lower), (Manifold::Upper, &spec.upper)] {
        for m_j in m.j.projections() {
            for m_i in m.i.projections() {
                basis.push(BasisState { manifold, m_j, m_i });
            }
        }
    }
    basis
}

/// Lower→upper coupling amplitudes `(Ω/2) CG(m_j) / CG_ref` as an
/// `upper_dim × lower_dim` matrix in basis order.
pub fn coupling_block<T: Real>(spec: &SystemSpec, omega: T) -> Result<Matrix<T>> {
    spec.validate()?;
    if omega < T::zero() || !omega.is_finite() {
        return Err(Error::Precondition(format!("omega must be finite and >= 0, got {omega}")));
    }
    let basis = build_basis(spec);
    let n_low = spec.lower.dimension();
    let (lower, upper) = basis.split_at(n_low);
    let reference = spec.reference_cg()?;
    let half_omega = omega * T::lit(0.5);
    let mut block = Matrix::zeros(upper.len(), n_low);
    for (l, s) in lower.iter().enumerate() {
        let target = BasisState::upper(s.m_j + spec.q(), s.m_i);
        if let Some(u) = upper.iter().position(|x| *x == target) {
            let ratio = spec.dipole_cg(s.m_j)? / reference;
            block[(u, l)] = half_omega * T::lit(ratio);
        }
    }
    Ok(block)
}

/// Coupling part of the Hamiltonian on the full basis (diagonal blocks zero).
pub fn build_coupling<T: Real>(spec: &SystemSpec, omega: T) -> Result<LabeledMatrix<T>> {
    let block = coupling_block(spec, omega)?;
    let basis = build_basis(spec);
    let n_low = spec.lower.dimension();
    let mut m = Matrix::zeros(basis.len(), basis.len());
    for u in 0..block.rows() {
        for l in 0..block.cols() {
            let v = block[(u, l)];
            m[(n_low + u, l)] = v;
            m[(l, n_low + u)] = v;
        }
    }
    LabeledMatrix::new(basis, m)
}

/// Full Hamiltonian
/// `[[A_l I·J + E_l, Ω†/2], [Ω/2, A_u I·J + E_u + Δ_eff]]` in MHz.
///
/// Eigenvalues are reported without any further offset, so at `Ω = 0` the
/// lower manifold reproduces the hyperfine interval energies directly.
pub fn build_hamiltonian<T: Real>(spec: &SystemSpec, omega: T) -> Result<LabeledMatrix<T>> {
    let coupling = build_coupling(spec, omega)?;
    let mut m = coupling.entries().clone();
    let n_low = spec.lower.dimension();

    let lower_ij = idotj_matrix::<T>(spec.lower.j, spec.lower.i)?.entries;
    let a_low = T::lit(spec.lower.hyperfine_a);
    let e_low = T::lit(spec.lower.base_energy);
    for r in 0..n_low {
        for c in 0..n_low {
            m[(r, c)] = a_low * lower_ij[(r, c)];
        }
        m[(r, r)] = m[(r, r)] + e_low;
    }

    let upper_ij = idotj_matrix::<T>(spec.upper.j, spec.upper.i)?.entries;
    let a_up = T::lit(spec.upper.hyperfine_a);
    let e_up = T::lit(spec.upper_offset()?);
    let n_up = spec.upper.dimension();
    for r in 0..n_up {
        for c in 0..n_up {
            m[(n_low + r, n_low + c)] = a_up * upper_ij[(r, c)];
        }
        m[(n_low + r, n_low + r)] = m[(n_low + r, n_low + r)] + e_up;
    }

    LabeledMatrix::new(coupling.labels().to_vec(), m)
}
