//! Driven emitter-cavity master equation.
//!
//! The state lives on TLS (x) collection-mode Fock space in the frame rotating
//! at the emitter frequency. Cavity leakage and background emitter decay enter
//! as Lindblad terms; phonons enter through a time-local Bloch-Redfield
//! dissipator built in the eigenbasis of the Hamiltonian in the frame that
//! follows the instantaneous drive frequency.

mod hamiltonian;
mod ode;
mod propagate;
mod redfield;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quantum::{DensityMatrix, HilbertSpec};

pub use hamiltonian::{frozen_hamiltonian, hamiltonian_at};
pub use ode::{Dopri5, OdeStats};
pub use propagate::{default_propagation_grid, propagate, propagate_observed, ring_down_time};
pub use redfield::{redfield_dissipator, RedfieldDissipator};

/// Emitter-cavity parameters. Frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// Emitter-collection-mode coupling.
    pub g: f64,
    /// Collection-mode linewidth.
    pub kappa: f64,
    /// Collection-mode detuning from the emitter.
    pub delta_omega_c: f64,
    /// Excitation-mode detuning from the emitter.
    pub delta_omega_e: f64,
    /// Emitter decay into non-cavity channels.
    pub gamma_bg: f64,
    pub hilbert: HilbertSpec,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::config("system.g_GHz", "must be finite and non-negative"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("system.kappa_GHz", "must be positive"));
        }
        if !(self.gamma_bg >= 0.0 && self.gamma_bg.is_finite()) {
            return Err(Error::config("system.gamma_bg_GHz", "must be finite and non-negative"));
        }
        if !self.delta_omega_c.is_finite() {
            return Err(Error::config("system.collection_detuning_GHz", "must be finite"));
        }
        if !self.delta_omega_e.is_finite() {
            return Err(Error::config("system.excitation_detuning_GHz", "must be finite"));
        }
        HilbertSpec::new(self.hilbert.n_max)?;
        Ok(())
    }

    /// Total emitter decay rate in the bad-cavity limit, `4 g^2 / kappa + gamma_bg`.
    pub fn emitter_decay_rate(&self) -> f64 {
        4.0 * self.g * self.g / self.kappa + self.gamma_bg
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Per-step error tolerance (absolute and relative).
    pub tol: f64,
    /// Most negative eigenvalue an accepted state may have.
    pub positivity_slack: f64,
}

impl SolverOptions {
    pub const DEFAULT_POSITIVITY_SLACK: f64 = 1e-6;

    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            positivity_slack: Self::DEFAULT_POSITIVITY_SLACK,
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::new(1e-8)
    }
}

/// Density-matrix evolution sampled on a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    /// `<a^dag a>(t)`
    pub photon_number: Vec<f64>,
    /// `<sigma_+ sigma_->(t)`
    pub excited_pop: Vec<f64>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectories hold at least two states")
    }
}

/// `<a^dag a>` and `<sigma_+ sigma_->` read from the diagonal of `rho`.
pub(crate) fn diagonal_observables(space: &HilbertSpec, rho: &crate::quantum::CMatrix) -> (f64, f64) {
    let nf = space.fock_dim();
    let mut photons = 0.0;
    let mut excited = 0.0;
    for s in 0..2 {
        for n in 0..nf {
            let p = rho[(s * nf + n, s * nf + n)].re;
            photons += n as f64 * p;
            if s == 1 {
                excited += p;
            }
        }
    }
    (photons, excited)
}
