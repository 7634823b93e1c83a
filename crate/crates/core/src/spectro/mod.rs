//! Probe signal weights, inhomogeneously broadened spectra and Gaussian
//! peak fitting.

mod fit;
mod probe;
mod synth;
mod trap;

pub use fit::{fit_peaks, FitError, FitOptions, FitReport, GaussianPeak};
pub use probe::{signal_weight, ProbeSpec};
pub use synth::{dressed_lines, synthesize_spectrum, DressedLine, Spectrum};
pub use trap::{
    trap_omega_distribution, BeamSpec, OmegaDistribution, OmegaModel, TrapConfig, DEFAULT_SEED,
};
