//! Deformation-potential coupling of the exciton to longitudinal acoustic
//! phonons, and the thermal one-sided rates derived from it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ev_to_j, nm_to_m, HBAR, K_B};

/// Exciton-phonon environment. Defaults are GaAs material constants with the
/// electron and hole radii used for the headline results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhononSpec {
    /// Electron wavefunction radius, m.
    pub r_e: f64,
    /// Hole wavefunction radius, m.
    pub r_h: f64,
    /// Electron deformation potential, J.
    pub d_e: f64,
    /// Hole deformation potential, J.
    pub d_h: f64,
    /// Mass density, kg/m^3.
    pub rho_mass: f64,
    /// Longitudinal sound speed, m/s.
    pub c_s: f64,
    /// K
    pub temperature: f64,
    pub enabled: bool,
    pub form: DissipatorForm,
}

/// How the phonon dissipator is assembled from the bath rates; see
/// [`crate::dynamics::RedfieldDissipator`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorForm {
    /// Single jump operator `sum_mn sqrt(gamma(E_n - E_m)) A_mn |m><n|`:
    /// keeps the non-secular coherences and is completely positive.
    #[default]
    Universal,
    /// Full Bloch-Redfield tensor; not positivity preserving.
    Redfield,
    /// Secular rate form over clusters of near-degenerate levels.
    Secular,
}

impl Default for PhononSpec {
    fn default() -> Self {
        Self {
            r_e: nm_to_m(5.9),
            r_h: nm_to_m(3.6),
            d_e: ev_to_j(7.0),
            d_h: ev_to_j(-3.5),
            rho_mass: 5370.0,
            c_s: 5110.0,
            temperature: 4.2,
            enabled: true,
            form: DissipatorForm::Universal,
        }
    }
}

impl PhononSpec {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phonon.r_e_nm", self.r_e),
            ("phonon.r_h_nm", self.r_h),
            ("phonon.density_kg_m3", self.rho_mass),
            ("phonon.c_s_m_s", self.c_s),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("phonon.temperature_K", "must be non-negative"));
        }
        if !(self.d_e.is_finite() && self.d_h.is_finite()) {
            return Err(Error::config("phonon.D_e_eV", "deformation potentials must be finite"));
        }
        Ok(())
    }

    /// Frequency beyond which the form factors suppress the coupling.
    pub fn cutoff(&self) -> f64 {
        self.c_s / self.r_e.min(self.r_h)
    }
}

/// Spectral density
/// `J(w) = w^3 / (4 pi^2 rho hbar c^5) [D_e e^{-w^2 r_e^2 / 4c^2} - D_h e^{-w^2 r_h^2 / 4c^2}]^2`
/// in rad/s. Negative arguments are treated as their magnitude.
pub fn spectral_density(spec: &PhononSpec, omega: f64) -> f64 {
    let w = omega.abs();
    let c2 = spec.c_s * spec.c_s;
    let form = spec.d_e * (-w * w * spec.r_e * spec.r_e / (4.0 * c2)).exp()
        - spec.d_h * (-w * w * spec.r_h * spec.r_h / (4.0 * c2)).exp();
    w.powi(3) / (4.0 * PI * PI * spec.rho_mass * HBAR * spec.c_s.powi(5)) * form * form
}

/// Bose-Einstein occupation at angular frequency `omega`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if temperature == 0.0 {
        return Ok(0.0);
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "thermal occupation diverges at omega = {omega:e} for T = {temperature} K"
        )));
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

/// One-sided rate for a system transition that releases energy `hbar omega`
/// into the bath: `2 pi J (n + 1)` for emission (`omega > 0`), `2 pi J n`
/// for absorption (`omega < 0`), zero at `omega = 0` or when disabled.
pub fn bath_rate(spec: &PhononSpec, omega: f64) -> f64 {
    if !spec.enabled || omega == 0.0 {
        return 0.0;
    }
    let w = omega.abs();
    let n = thermal_occupation(w, spec.temperature).unwrap_or(0.0);
    let occupation = if omega > 0.0 { n + 1.0 } else { n };
    2.0 * PI * spectral_density(spec, w) * occupation
}
