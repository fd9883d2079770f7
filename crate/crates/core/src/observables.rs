//! Figures of merit computed from trajectories and system parameters.

use serde::{Deserialize, Serialize};

use crate::dynamics::{SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{trapezoid, TimeGrid};
use crate::quantum::{partial_trace_tls, HilbertSpec};

/// Photon number at the end of a trajectory may be at most this fraction of its peak.
pub const RESIDUAL_PHOTON_FRACTION: f64 = 1e-6;
/// Absolute photon number treated as integration noise in the residual check.
pub const PHOTON_NOISE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureOfMerit {
    /// Photons emitted through the collection mode per pulse.
    pub pi_e: f64,
    pub beta_c: f64,
    /// `beta_c * pi_e`
    pub eta_c: f64,
    pub max_excited_pop: f64,
}

impl FigureOfMerit {
    pub fn new(pi_e: f64, beta_c: f64, max_excited_pop: f64) -> Self {
        Self {
            pi_e,
            beta_c,
            eta_c: beta_c * pi_e,
            max_excited_pop,
        }
    }

    pub fn from_trajectory(traj: &Trajectory, system: &SystemSpec) -> Result<Self> {
        let pi_e = population_inversion(traj, system.kappa)?;
        let peak = traj.excited_pop.iter().copied().fold(0.0, f64::max);
        Ok(Self::new(pi_e, beta_collection(system), peak))
    }
}

/// `pi_e = int kappa <a^dag a> dt` by the trapezoidal rule.
///
/// Fails with [`Error::Truncation`] when the photon number at the end of the
/// trajectory exceeds [`RESIDUAL_PHOTON_FRACTION`] of its peak plus
/// [`PHOTON_NOISE_FLOOR`].
pub fn population_inversion(traj: &Trajectory, kappa: f64) -> Result<f64> {
    photon_flux_integral(&traj.grid, &traj.photon_number, kappa)
}

/// [`population_inversion`] from a photon-number series sampled on `grid`.
pub fn photon_flux_integral(grid: &TimeGrid, n: &[f64], kappa: f64) -> Result<f64> {
    let peak = n.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let last = *n.last().expect("trajectories hold at least two states");
    if last > RESIDUAL_PHOTON_FRACTION * peak + PHOTON_NOISE_FLOOR {
        return Err(Error::Truncation(format!(
            "photon number at the end is {:.2e} of its peak; extend the propagation window",
            last / peak
        )));
    }
    Ok(kappa * trapezoid(grid, n))
}

/// Purcell factor of a mode detuned by `detuning` from the emitter,
/// `4 g^2 / (kappa gamma_bg) / (1 + (2 detuning / kappa)^2)`.
pub fn purcell_factor(g: f64, kappa: f64, gamma_bg: f64, detuning: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa:e}")));
    }
    if !(gamma_bg > 0.0) {
        return Err(Error::Domain(
            "Purcell factor is undefined without background decay".into(),
        ));
    }
    Ok(4.0 * g * g / (kappa * gamma_bg) * lorentzian(detuning, kappa))
}

fn lorentzian(detuning: f64, kappa: f64) -> f64 {
    let x = 2.0 * detuning / kappa;
    1.0 / (1.0 + x * x)
}

/// Probability that an exciton emits into the collection mode rather than
/// the excitation mode or the background:
/// `F_c / (F_c + F_e + 1)`, both modes sharing `g` and `kappa`.
///
/// Without background decay this is the limit `L_c / (L_c + L_e)` of the
/// Lorentzian weights.
pub fn beta_collection(system: &SystemSpec) -> f64 {
    let lc = lorentzian(system.delta_omega_c, system.kappa);
    let le = lorentzian(system.delta_omega_e, system.kappa);
    if system.gamma_bg > 0.0 {
        let f = 4.0 * system.g * system.g / (system.kappa * system.gamma_bg);
        f * lc / (f * (lc + le) + 1.0)
    } else {
        lc / (lc + le)
    }
}

/// Bloch vector `(s_x, s_y, s_z)` of the reduced emitter state at every
/// sample, with `s_z = rho_ee - rho_gg` and `s_x - i s_y = 2 rho_eg`.
pub fn bloch_trajectory(traj: &Trajectory, space: &HilbertSpec) -> Result<Vec<[f64; 3]>> {
    traj.states
        .iter()
        .map(|rho| {
            let r = partial_trace_tls(rho, space)?;
            let m = r.matrix();
            let eg = m[(1, 0)];
            Ok([2.0 * eg.re, -2.0 * eg.im, (m[(1, 1)] - m[(0, 0)]).re])
        })
        .collect()
}
