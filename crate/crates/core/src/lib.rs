//! Dressed-state simulation of a strongly driven pair of atomic manifolds.
//!
//! The crate assembles the hyperfine plus dipole-coupling Hamiltonian in the
//! uncoupled `|m_j, m_I>` basis, splits it into blocks of conserved
//! atom-plus-photon projection, tracks dressed energies against the drive
//! strength, and turns eigenvectors into probe signal weights, broadened
//! spectra and fitted peaks.
//!
//! Energies are ordinary frequencies in MHz with `h = 1`. Numeric routines
//! are generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angmom;
pub mod blocks;
pub mod error;
pub mod io;
pub mod matrix;
pub mod model;
pub mod scenario;
pub mod spectral;
pub mod spectro;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use angmom::HalfInt;
pub use blocks::BlockDecomposition;
pub use model::{BasisState, LabeledMatrix, SystemSpec};
pub use scenario::Scenario;

pub type Matrix64 = matrix::Matrix<f64>;
pub type Hamiltonian = model::LabeledMatrix<f64>;
pub type BranchSet = spectral::EigenBranchSet<f64>;
pub type Eigen64 = spectral::Eigen<f64>;
pub type Spectrum64 = spectro::Spectrum<f64>;
pub type FitReport64 = spectro::FitReport<f64>;
pub type FitError64 = spectro::FitError<f64>;
