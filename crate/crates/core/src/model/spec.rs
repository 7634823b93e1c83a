use serde::{Deserialize, Serialize};

use crate::angmom::{clebsch_gordan_exact, lande_interval, HalfInt};
use crate::error::{Error, Result};

/// One fine-structure manifold with nuclear spin, e.g. `6P_{3/2}` with `I = 3/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub label: String,
    pub j: HalfInt,
    pub i: HalfInt,
    /// Magnetic-dipole hyperfine constant in MHz; zero leaves the manifold degenerate.
    #[serde(rename = "hyperfine_a_mhz", default)]
    pub hyperfine_a: f64,
    /// Constant added to every diagonal entry of this manifold (MHz).
    #[serde(rename = "base_energy_mhz", default)]
    pub base_energy: f64,
}

impl ManifoldSpec {
    pub fn dimension(&self) -> usize {
        self.j.multiplicity() * self.i.multiplicity()
    }

    /// Hyperfine level energy `A (F(F+1) - J(J+1) - I(I+1)) / 2 + base` in MHz.
    pub fn level_energy(&self, f: HalfInt) -> f64 {
        self.base_energy + self.hyperfine_a * lande_interval::<f64>(f, self.j, self.i)
    }

    /// Allowed total angular momenta `|J - I| ..= J + I`.
    pub fn f_levels(&self) -> Vec<HalfInt> {
        HalfInt::coupled_range(self.j, self.i).collect()
    }

    fn validate(&self) -> Result<()> {
        self.j.check_magnitude(&format!("{} J", self.label))?;
        self.i.check_magnitude(&format!("{} I", self.label))?;
        if !self.hyperfine_a.is_finite() || !self.base_energy.is_finite() {
            return Err(Error::Config(format!(
                "manifold {} has non-finite energies",
                self.label
            )));
        }
        Ok(())
    }
}

/// How the drive frequency is placed relative to the lower manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DetuningMode {
    /// Drive resonant with the lower hyperfine level `F`.
    ResonantWithF { f: HalfInt },
    /// Upper manifold shifted by `delta_mhz` relative to its base energy.
    Explicit { delta_mhz: f64 },
}

/// The transition whose coupling element is exactly `Ω/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTransition {
    pub lower_mj: HalfInt,
    pub upper_mj: HalfInt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub lower: ManifoldSpec,
    pub upper: ManifoldSpec,
    /// Spherical component of the drive polarization: -1 (σ⁻), 0 (π) or +1 (σ⁺).
    pub polarization_q: i32,
    pub detuning: DetuningMode,
    /// Defaults to the stretched transition for the chosen polarization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_transition: Option<ReferenceTransition>,
}

impl SystemSpec {
    pub fn q(&self) -> HalfInt {
        HalfInt::from_int(self.polarization_q)
    }

    /// Explicit reference transition, or the stretched one: `m_j = ±J_lower`
    /// driven to `m_j + q`.
    pub fn reference(&self) -> ReferenceTransition {
        self.reference_transition.unwrap_or_else(|| {
            let lower_mj = if self.polarization_q >= 0 {
                self.lower.j
            } else {
                -self.lower.j
            };
            ReferenceTransition {
                lower_mj,
                upper_mj: lower_mj + self.q(),
            }
        })
    }

    /// Dipole Clebsch-Gordan coefficient `<J_l m; 1 q | J_u m+q>`.
    pub fn dipole_cg(&self, lower_mj: HalfInt) -> Result<f64> {
        let upper_mj = lower_mj + self.q();
        if !self.upper.j.admits(upper_mj) {
            return Ok(0.0);
        }
        Ok(clebsch_gordan_exact(
            self.lower.j,
            lower_mj,
            HalfInt::ONE,
            self.q(),
            self.upper.j,
            upper_mj,
        )?
        .to_real())
    }

    /// CG coefficient of the reference transition; nonzero for a valid spec.
    pub fn reference_cg(&self) -> Result<f64> {
        let r = self.reference();
        if r.upper_mj != r.lower_mj + self.q() {
            return Err(Error::Config(format!(
                "reference transition {} -> {} violates the selection rule for q = {}",
                r.lower_mj, r.upper_mj, self.polarization_q
            )));
        }
        if !self.lower.j.admits(r.lower_mj) || !self.upper.j.admits(r.upper_mj) {
            return Err(Error::Config(format!(
                "reference transition {} -> {} is outside the manifolds",
                r.lower_mj, r.upper_mj
            )));
        }
        let cg = self.dipole_cg(r.lower_mj)?;
        if cg == 0.0 {
            return Err(Error::Config(format!(
                "reference transition {} -> {} has a vanishing Clebsch-Gordan coefficient",
                r.lower_mj, r.upper_mj
            )));
        }
        Ok(cg)
    }

    /// Constant placed on the upper-manifold diagonal (MHz), on top of its
    /// own hyperfine term.
    pub fn upper_offset(&self) -> Result<f64> {
        match &self.detuning {
            DetuningMode::Explicit { delta_mhz } => Ok(self.upper.base_energy + delta_mhz),
            DetuningMode::ResonantWithF { f } => {
                if !self.lower.f_levels().contains(f) {
                    return Err(Error::Config(format!(
                        "resonant level F = {f} outside {}..={} of the lower manifold",
                        (self.lower.j - self.lower.i).abs(),
                        self.lower.j + self.lower.i
                    )));
                }
                Ok(self.lower.level_energy(*f))
            }
        }
    }

    /// Detuning `Δ_eff` of the upper manifold relative to its base energy.
    pub fn effective_detuning(&self) -> Result<f64> {
        Ok(self.upper_offset()? - self.upper.base_energy)
    }

    pub fn dimension(&self) -> usize {
        self.lower.dimension() + self.upper.dimension()
    }

    pub fn validate(&self) -> Result<()> {
        self.lower.validate()?;
        self.upper.validate()?;
        if !(-1..=1).contains(&self.polarization_q) {
            return Err(Error::Config(format!(
                "polarization_q must be -1, 0 or +1, got {}",
                self.polarization_q
            )));
        }
        if let DetuningMode::Explicit { delta_mhz } = &self.detuning {
            if !delta_mhz.is_finite() {
                return Err(Error::Config("explicit detuning must be finite".into()));
            }
        }
        self.upper_offset()?;
        self.reference_cg()?;
        Ok(())
    }

    /// Rubidium-87 `6P_{3/2} -> 25D_{5/2}` under σ⁺ drive resonant with `F = 3`.
    ///
    /// `hyperfine_a` is the lower-manifold constant in MHz; the shipped
    /// scenario file carries the literature value.
    pub fn rb87_6p_25d(hyperfine_a: f64) -> Self {
        SystemSpec {
            lower: ManifoldSpec {
                label: "6P3/2".into(),
                j: HalfInt::from_twice(3),
                i: HalfInt::from_twice(3),
                hyperfine_a,
                base_energy: 0.0,
            },
            upper: ManifoldSpec {
                label: "25D5/2".into(),
                j: HalfInt::from_twice(5),
                i: HalfInt::from_twice(3),
                hyperfine_a: 0.0,
                base_energy: 0.0,
            },
            polarization_q: 1,
            detuning: DetuningMode::ResonantWithF {
                f: HalfInt::from_int(3),
            },
            reference_transition: None,
        }
    }
}
