//! Single runs driven by a [`RunConfig`]: field construction, propagation and
//! figures of merit, plus the ideal-emitter Bloch scans.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{FieldMethod, RunConfig};
use crate::dynamics::{default_propagation_grid, propagate, propagate_observed, OdeStats, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::observables::{beta_collection, bloch_trajectory, photon_flux_integral, FigureOfMerit};
use crate::phonon::PhononSpec;
use crate::pulse::{
    default_field_grid, input_envelope, intracavity_field_analytic, intracavity_field_numeric, pulse_area,
    CavityModeSpec, IntracavityField, PulseShape, PulseSpec,
};
use crate::quantum::{DensityMatrix, HilbertSpec};
use crate::units::ps_to_s;

/// Samples kept per Bloch path.
const BLOCH_SAMPLES: usize = 401;
/// Half-width of the bare-pulse grid in pulse widths.
const BARE_PULSE_SPAN: f64 = 8.0;

/// The field grid selected by `config.grid`.
pub fn field_grid(config: &RunConfig) -> Result<TimeGrid> {
    let auto = default_field_grid(&config.pulse_spec(), &config.cavity_mode())?;
    let g = &config.grid;
    let t0 = g.t_start_ps.map(ps_to_s).unwrap_or(auto.t_start());
    let t1 = g.t_end_ps.map(ps_to_s).unwrap_or(auto.t_end());
    match g.n_points {
        Some(n) => TimeGrid::new(t0, t1, n),
        None if g.t_start_ps.is_none() && g.t_end_ps.is_none() => Ok(auto),
        None => TimeGrid::with_max_spacing(t0, t1, auto.spacing()),
    }
}

/// Intra-cavity field for `config` on [`field_grid`].
pub fn build_field(config: &RunConfig) -> Result<IntracavityField> {
    config.validate()?;
    let pulse = config.pulse_spec();
    let mode = config.cavity_mode();
    let grid = field_grid(config)?;
    let analytic = match config.solver.field {
        FieldMethod::Auto => pulse.shape == PulseShape::Sech,
        FieldMethod::Analytic => true,
        FieldMethod::Numeric => false,
    };
    let field = if analytic {
        intracavity_field_analytic(&pulse, &mode, &grid)?
    } else {
        intracavity_field_numeric(&pulse, &mode, &grid)?
    };
    field.check_boundaries()?;
    Ok(field)
}

/// Figures of merit of one run, without the stored trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub merit: FigureOfMerit,
    /// Intra-cavity pulse area over pi.
    pub pulse_area_pi: f64,
    pub stats: OdeStats,
}

/// A full run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub system: SystemSpec,
    pub field: IntracavityField,
    pub trajectory: Trajectory,
    pub bloch: Vec<[f64; 3]>,
    pub outcome: Outcome,
}

/// Propagates `config` and keeps every sample.
pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    let field = build_field(config)?;
    let system = config.system_spec()?;
    let grid = default_propagation_grid(&system, &field)?;
    let rho0 = DensityMatrix::ground(&system.hilbert);
    let trajectory = propagate(&system, &field, &config.phonon_spec(), &rho0, &grid, &config.solver_options())?;
    let merit = FigureOfMerit::from_trajectory(&trajectory, &system)?;
    let bloch = bloch_trajectory(&trajectory, &system.hilbert)?;
    Ok(Simulation {
        system,
        outcome: Outcome {
            merit,
            pulse_area_pi: pulse_area(&field),
            stats: trajectory.stats,
        },
        field,
        trajectory,
        bloch,
    })
}

/// Figures of merit for `config`, streaming over the propagation grid.
pub fn run_outcome(config: &RunConfig) -> Result<Outcome> {
    let field = build_field(config)?;
    let system = config.system_spec()?;
    outcome_for_field(&system, &field, &config.phonon_spec(), config)
}

pub(crate) fn outcome_for_field(
    system: &SystemSpec,
    field: &IntracavityField,
    phonon: &PhononSpec,
    config: &RunConfig,
) -> Result<Outcome> {
    let grid = default_propagation_grid(system, field)?;
    let rho0 = DensityMatrix::ground(&system.hilbert);
    let mut photons = Vec::with_capacity(grid.n_points());
    let mut peak_excited: f64 = 0.0;
    let nf = system.hilbert.fock_dim();
    let stats = propagate_observed(system, field, phonon, &rho0, &grid, &config.solver_options(), |_, _, rho| {
        let m = rho.matrix();
        let mut n = 0.0;
        let mut e = 0.0;
        for k in 0..2 * nf {
            let p = m[(k, k)].re;
            n += (k % nf) as f64 * p;
            if k >= nf {
                e += p;
            }
        }
        photons.push(n);
        peak_excited = peak_excited.max(e);
        Ok(())
    })?;
    let pi_e = photon_flux_integral(&grid, &photons, system.kappa)?;
    Ok(Outcome {
        merit: FigureOfMerit::new(pi_e, beta_collection(system), peak_excited),
        pulse_area_pi: pulse_area(field),
        stats,
    })
}

/// Pulse families compared on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Transform-limited Gaussian on resonance.
    Resonant,
    /// Gaussian with the configured linear chirp.
    Chirped,
    /// The configured pulse after the excitation mode.
    CavityFiltered,
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "resonant" => Ok(Self::Resonant),
            "chirped" => Ok(Self::Chirped),
            "cavity_filtered" | "cavityfiltered" => Ok(Self::CavityFiltered),
            _ => Err(Error::config(
                "--mechanism",
                format!("expected resonant, chirped or cavity-filtered, got `{s}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    /// Area of the field acting on the emitter, over pi.
    pub area_pi: f64,
    /// Input pulse area over pi (differs from `area_pi` only after filtering).
    pub input_area_pi: f64,
    pub endpoint: [f64; 3],
    pub rho_ee: f64,
    /// `(t, s)` samples along the way.
    pub path: Vec<(f64, [f64; 3])>,
}

/// Field of unit input area for `mechanism`.
fn unit_field(config: &RunConfig, mechanism: Mechanism) -> Result<IntracavityField> {
    let base = config.pulse_spec();
    let bare = |pulse: PulseSpec, n: usize| -> Result<IntracavityField> {
        let half = BARE_PULSE_SPAN * pulse.t_p;
        let grid = TimeGrid::new(-half, half, n)?;
        IntracavityField::new(grid, grid.times().map(|t| input_envelope(&pulse, t)).collect())
    };
    match mechanism {
        Mechanism::Resonant => bare(
            PulseSpec {
                shape: PulseShape::Gaussian,
                delta_omega_l: 0.0,
                amplitude: 1.0,
                chirp_rate: 0.0,
                ..base
            },
            4001,
        ),
        Mechanism::Chirped => {
            if config.pulse.chirp_per_ps2 == 0.0 {
                return Err(Error::config("pulse.chirp_per_ps2", "chirped mechanism needs a nonzero chirp"));
            }
            let pulse = PulseSpec {
                shape: PulseShape::ChirpedGaussian,
                delta_omega_l: 0.0,
                amplitude: 1.0,
                ..base
            };
            // resolve the fastest phase rotation at the grid edge
            let edge_rate = (pulse.chirp_rate * BARE_PULSE_SPAN * pulse.t_p).abs();
            let span = 2.0 * BARE_PULSE_SPAN * pulse.t_p;
            let n = ((span * edge_rate / (2.0 * PI) * 40.0).ceil() as usize).max(4001);
            bare(pulse, n)
        }
        Mechanism::CavityFiltered => {
            let mut unit = config.clone();
            unit.pulse.amplitude_pi = 1.0 / PI;
            build_field(&unit)
        }
    }
}

fn ideal_emitter() -> SystemSpec {
    SystemSpec {
        g: 0.0,
        kappa: 1.0,
        delta_omega_c: 0.0,
        delta_omega_e: 0.0,
        gamma_bg: 0.0,
        hilbert: HilbertSpec { n_max: 1 },
    }
}

/// Drives a lossless, phonon-free emitter with fields of the given areas
/// (in units of pi, measured on the field that reaches the emitter) and
/// records the Bloch vector.
pub fn bloch_scan(config: &RunConfig, mechanism: Mechanism, areas_pi: &[f64]) -> Result<Vec<BlochPoint>> {
    config.validate()?;
    if areas_pi.is_empty() {
        return Err(Error::config("--areas", "need at least one area"));
    }
    if let Some(a) = areas_pi.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::config("--areas", format!("areas must be finite and non-negative, got {a}")));
    }
    let unit = unit_field(config, mechanism)?;
    let unit_area = pulse_area(&unit);
    let system = ideal_emitter();
    let rho0 = DensityMatrix::ground(&system.hilbert);
    let fg = unit.grid();
    let grid = TimeGrid::new(fg.t_start(), fg.t_end(), BLOCH_SAMPLES)?;
    areas_pi
        .iter()
        .map(|&area| {
            let scale = if unit_area > 0.0 { area / unit_area } else { 0.0 };
            let field = unit.scaled(scale);
            let tr = propagate(&system, &field, &PhononSpec::disabled(), &rho0, &grid, &config.solver_options())?;
            let s = bloch_trajectory(&tr, &system.hilbert)?;
            let endpoint = *s.last().expect("grid has samples");
            Ok(BlochPoint {
                area_pi: area,
                input_area_pi: scale / PI,
                endpoint,
                rho_ee: *tr.excited_pop.last().expect("grid has samples"),
                path: grid.times().zip(s).collect(),
            })
        })
        .collect()
}

/// Cavity mode of `config` as used by the field builder.
pub fn excitation_mode(config: &RunConfig) -> CavityModeSpec {
    config.cavity_mode()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_run_is_dark() {
        let mut c = RunConfig::default();
        c.pulse.amplitude_pi = 0.0;
        let o = run_outcome(&c).unwrap();
        assert_eq!(o.merit.pi_e, 0.0);
        assert_eq!(o.pulse_area_pi, 0.0);
    }

    #[test]
    fn streaming_and_full_runs_agree() {
        let mut c = RunConfig::default();
        c.pulse.amplitude_pi = 6.0;
        c.phonon.enabled = false;
        let full = simulate(&c).unwrap();
        let fast = run_outcome(&c).unwrap();
        assert!((full.outcome.merit.pi_e - fast.merit.pi_e).abs() < 1e-12);
        assert!(full.outcome.merit.pi_e > 0.1);
        assert_eq!(full.bloch.len(), full.trajectory.len());
    }

    #[test]
    fn resonant_bloch_scan_is_a_rabi_rotation() {
        let c = RunConfig::default();
        let pts = bloch_scan(&c, Mechanism::Resonant, &[1.0, 2.0, 0.5]).unwrap();
        assert!((pts[0].rho_ee - 1.0).abs() < 1e-3);
        assert!(pts[1].rho_ee < 1e-3);
        assert!((pts[2].rho_ee - 0.5).abs() < 1e-3);
        let e = pts[0].endpoint;
        assert!(e[0].abs() < 1e-2 && e[1].abs() < 5e-2 && (e[2] - 1.0).abs() < 2e-3, "{e:?}");
    }

    #[test]
    fn chirped_scan_needs_chirp() {
        let c = RunConfig::default();
        assert!(bloch_scan(&c, Mechanism::Chirped, &[1.0]).unwrap_err().is_validation());
        assert!(bloch_scan(&c, Mechanism::Resonant, &[]).unwrap_err().is_validation());
        assert!("nope".parse::<Mechanism>().is_err());
        assert_eq!("cavity-filtered".parse::<Mechanism>().unwrap(), Mechanism::CavityFiltered);
    }
}
