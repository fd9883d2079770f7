//! Parameter sweeps over one or two config keys, run cell by cell on a
//! worker pool.
//!
//! Cells are independent propagations over immutable inputs; results are
//! gathered by cell index, so values do not depend on the worker count.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, CAVITY_DETUNING_KEY};
use crate::error::{Error, Result};
use crate::experiment::{build_field, outcome_for_field, simulate, Outcome};

/// Config key of the pulse amplitude in units of pi.
pub const AMPLITUDE_KEY: &str = "pulse.amplitude_pi";
/// Config key of the laser detuning from the emitter.
pub const LASER_DETUNING_KEY: &str = "pulse.laser_detuning_GHz";
/// Config key of the excitation-mode detuning, i.e. the mode splitting
/// when the collection mode sits on the emitter.
pub const SPLITTING_KEY: &str = "system.excitation_detuning_GHz";
/// Largest allowed `|delta pi_e|` between `n_max` and `n_max + 2`.
pub const FOCK_TOLERANCE: f64 = 1e-4;

/// Scalar kept per cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduce {
    /// Full trajectory per cell; the cell value is `pi_e`.
    TimeSeries,
    PiE,
    EtaC,
    /// Best `metric` over `amplitude_grid`.
    MaxOverAmplitude,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    PiE,
    EtaC,
}

impl Metric {
    fn of(self, o: &Outcome) -> f64 {
        match self {
            Metric::PiE => o.merit.pi_e,
            Metric::EtaC => o.merit.eta_c,
        }
    }
}

/// A swept config key and its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    /// A list, or `{ start, stop, n }` for evenly spaced values.
    #[serde(deserialize_with = "values_or_linspace")]
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(path: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            path: path.into(),
            values,
        }
    }

    fn validate(&self, key: &str, base: &RunConfig) -> Result<()> {
        check_values(key, &self.values)?;
        base.get_param(&self.path)
            .map_err(|_| Error::config(format!("{key}.path"), format!("`{}` is not a numeric config key", self.path)))?;
        Ok(())
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ValuesFile {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, n: usize },
}

fn values_or_linspace<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Ok(match ValuesFile::deserialize(d)? {
        ValuesFile::List(v) => v,
        ValuesFile::Linspace { start, stop, n } => linspace(start, stop, n),
    })
}

fn check_values(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::config(key, "needs at least one value"));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::config(key, format!("values must be finite, got {x}")));
    }
    let up = v.windows(2).all(|w| w[1] > w[0]);
    let down = v.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::config(key, "values must be strictly monotone"));
    }
    Ok(())
}

/// A sweep definition, usually read from a TOML recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: RunConfig,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub reduce: Reduce,
    #[serde(default)]
    pub metric: Metric,
    /// Amplitudes (units of pi) for [`Reduce::MaxOverAmplitude`].
    #[serde(default, deserialize_with = "values_or_linspace")]
    pub amplitude_grid: Vec<f64>,
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config("sweep", e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.axis1.validate("axis1", &self.base)?;
        if let Some(a) = &self.axis2 {
            a.validate("axis2", &self.base)?;
            if a.path == self.axis1.path {
                return Err(Error::config("axis2.path", "both axes sweep the same key"));
            }
        }
        if self.reduce == Reduce::MaxOverAmplitude {
            check_values("amplitude_grid", &self.amplitude_grid)?;
            if let Some(a) = self.amplitude_grid.iter().find(|a| **a < 0.0) {
                return Err(Error::config("amplitude_grid", format!("amplitudes must be non-negative, got {a}")));
            }
            let swept = |a: &Axis| a.path == AMPLITUDE_KEY;
            if swept(&self.axis1) || self.axis2.as_ref().is_some_and(swept) {
                return Err(Error::config("amplitude_grid", "the amplitude is already a sweep axis"));
            }
        }
        Ok(())
    }

    /// `(len(axis1), len(axis2))`, with 1 for a missing second axis.
    pub fn shape(&self) -> (usize, usize) {
        (
            self.axis1.values.len(),
            self.axis2.as_ref().map_or(1, |a| a.values.len()),
        )
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("sweep spec serializes to JSON");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Config of cell `(i, j)`.
    pub fn cell_config(&self, i: usize, j: usize) -> Result<RunConfig> {
        let mut c = self.base.clone();
        c.set_param(&self.axis1.path, self.axis1.values[i])?;
        if let Some(a) = &self.axis2 {
            c.set_param(&a.path, a.values[j])?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Sampled trajectory of one cell, in output units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSeries {
    pub t_ps: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub photon_number: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub value: f64,
    pub pi_e: f64,
    pub eta_c: f64,
    /// Intra-cavity pulse area over pi, at the best amplitude for
    /// [`Reduce::MaxOverAmplitude`].
    pub pulse_area_pi: f64,
    /// Maximizing amplitude, only for [`Reduce::MaxOverAmplitude`].
    pub best_amplitude_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<CellSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub spec_hash: String,
    pub base_config_hash: String,
    pub version: String,
    pub wall_time_s: f64,
    pub workers: usize,
    pub reduce: Reduce,
    pub metric: Metric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub shape: (usize, usize),
    /// Row-major, `cells[i * shape.1 + j]`.
    pub cells: Vec<Cell>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.shape.1 + j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cell(i, j).value
    }

    /// Cell values, row-major.
    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.value).collect()
    }

    /// Largest value along axis 2 for each axis-1 entry.
    pub fn row_maxima(&self) -> Vec<f64> {
        (0..self.shape.0)
            .map(|i| (0..self.shape.1).map(|j| self.value(i, j)).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    pub fn max_value(&self) -> f64 {
        self.cells.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Long-format rows `(axis1, axis2, value)`; `axis2` is NaN for 1-D sweeps.
    pub fn long_rows(&self) -> Vec<(f64, f64, f64)> {
        let mut rows = Vec::with_capacity(self.cells.len());
        for i in 0..self.shape.0 {
            for j in 0..self.shape.1 {
                let y = self.axis2.as_ref().map_or(f64::NAN, |a| a.values[j]);
                rows.push((self.axis1.values[i], y, self.value(i, j)));
            }
        }
        rows
    }
}

fn eval_cell(spec: &SweepSpec, i: usize, j: usize) -> Result<Cell> {
    let config = spec.cell_config(i, j)?;
    match spec.reduce {
        Reduce::PiE | Reduce::EtaC => {
            let field = build_field(&config)?;
            let o = outcome_for_field(&config.system_spec()?, &field, &config.phonon_spec(), &config)?;
            let metric = if spec.reduce == Reduce::PiE { Metric::PiE } else { Metric::EtaC };
            Ok(Cell {
                value: metric.of(&o),
                pi_e: o.merit.pi_e,
                eta_c: o.merit.eta_c,
                pulse_area_pi: o.pulse_area_pi,
                best_amplitude_pi: None,
                series: None,
            })
        }
        Reduce::MaxOverAmplitude => {
            // the field is linear in the amplitude: build it once at unit area
            let mut unit = config.clone();
            unit.pulse.amplitude_pi = 1.0;
            let field = build_field(&unit)?;
            let system = config.system_spec()?;
            let phonon = config.phonon_spec();
            let mut best: Option<(f64, Outcome)> = None;
            for &a in &spec.amplitude_grid {
                let o = outcome_for_field(&system, &field.scaled(a), &phonon, &config)?;
                if best.as_ref().is_none_or(|(_, b)| spec.metric.of(&o) > spec.metric.of(b)) {
                    best = Some((a, o));
                }
            }
            let (a, o) = best.expect("amplitude grid is not empty");
            Ok(Cell {
                value: spec.metric.of(&o),
                pi_e: o.merit.pi_e,
                eta_c: o.merit.eta_c,
                pulse_area_pi: o.pulse_area_pi,
                best_amplitude_pi: Some(a),
                series: None,
            })
        }
        Reduce::TimeSeries => {
            let sim = simulate(&config)?;
            let m = sim.outcome.merit;
            Ok(Cell {
                value: m.pi_e,
                pi_e: m.pi_e,
                eta_c: m.eta_c,
                pulse_area_pi: sim.outcome.pulse_area_pi,
                best_amplitude_pi: None,
                series: Some(CellSeries {
                    t_ps: sim.trajectory.grid.times().map(crate::units::s_to_ps).collect(),
                    rho_ee: sim.trajectory.excited_pop,
                    photon_number: sim.trajectory.photon_number,
                }),
            })
        }
    }
}

/// Runs every cell of `spec` on `workers` threads (at least one).
///
/// The first failing cell in row-major order aborts the sweep with
/// [`Error::SweepCell`].
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let workers = workers.max(1);
    let (n1, n2) = spec.shape();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("--workers", e.to_string()))?;
    let results: Vec<Result<Cell>> =
        pool.install(|| (0..n1 * n2).into_par_iter().map(|k| eval_cell(spec, k / n2, k % n2)).collect());
    let mut cells = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => cells.push(c),
            Err(e) => {
                return Err(Error::SweepCell {
                    i: k / n2,
                    j: k % n2,
                    source: Box::new(e),
                })
            }
        }
    }
    if let Some(k) = cells.iter().position(|c| !c.value.is_finite()) {
        return Err(Error::SweepCell {
            i: k / n2,
            j: k % n2,
            source: Box::new(Error::Domain("cell value is not finite".into())),
        });
    }
    log::info!("sweep of {} cells took {:.2?}", cells.len(), started.elapsed());
    Ok(SweepResult {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        shape: (n1, n2),
        cells,
        metadata: SweepMetadata {
            spec_hash: spec.hash(),
            base_config_hash: spec.base.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            workers,
            reduce: spec.reduce,
            metric: spec.metric,
        },
    })
}

/// `pi_e` (and `eta_c`) against the pulse amplitude in units of pi.
pub fn power_sweep(config: &RunConfig, amplitudes_pi: &[f64], workers: usize) -> Result<SweepResult> {
    if let Some(a) = amplitudes_pi.iter().find(|a| **a < 0.0) {
        return Err(Error::config("amplitudes", format!("amplitudes must be non-negative, got {a}")));
    }
    run_sweep(
        &SweepSpec {
            base: config.clone(),
            axis1: Axis::new(AMPLITUDE_KEY, amplitudes_pi.to_vec()),
            axis2: None,
            reduce: Reduce::PiE,
            metric: Metric::PiE,
            amplitude_grid: Vec::new(),
        },
        workers,
    )
}

/// `pi_e` over laser detuning (GHz, axis 1) and amplitude (units of pi, axis 2).
pub fn detuning_amplitude_map(
    config: &RunConfig,
    laser_detunings_ghz: &[f64],
    amplitudes_pi: &[f64],
    workers: usize,
) -> Result<SweepResult> {
    run_sweep(
        &SweepSpec {
            base: config.clone(),
            axis1: Axis::new(LASER_DETUNING_KEY, laser_detunings_ghz.to_vec()),
            axis2: Some(Axis::new(AMPLITUDE_KEY, amplitudes_pi.to_vec())),
            reduce: Reduce::PiE,
            metric: Metric::PiE,
            amplitude_grid: Vec::new(),
        },
        workers,
    )
}

/// Second axis of [`modesplit_map`].
#[derive(Clone, Debug, PartialEq)]
pub enum ModesplitAxis {
    /// `eta_c` over laser detuning (GHz), maximized over `amplitude_grid`.
    LaserDetuning {
        detunings_ghz: Vec<f64>,
        amplitude_grid: Vec<f64>,
    },
    /// `pi_e` over amplitude (units of pi) at the configured laser detuning.
    Amplitude(Vec<f64>),
}

/// Sweeps the excitation-mode detuning (GHz, axis 1) against `second`.
pub fn modesplit_map(
    config: &RunConfig,
    splittings_ghz: &[f64],
    second: ModesplitAxis,
    workers: usize,
) -> Result<SweepResult> {
    let axis1 = Axis::new(SPLITTING_KEY, splittings_ghz.to_vec());
    let spec = match second {
        ModesplitAxis::LaserDetuning {
            detunings_ghz,
            amplitude_grid,
        } => SweepSpec {
            base: config.clone(),
            axis1,
            axis2: Some(Axis::new(LASER_DETUNING_KEY, detunings_ghz)),
            reduce: Reduce::MaxOverAmplitude,
            metric: Metric::EtaC,
            amplitude_grid,
        },
        ModesplitAxis::Amplitude(amplitudes) => SweepSpec {
            base: config.clone(),
            axis1,
            axis2: Some(Axis::new(AMPLITUDE_KEY, amplitudes)),
            reduce: Reduce::PiE,
            metric: Metric::PiE,
            amplitude_grid: Vec::new(),
        },
    };
    run_sweep(&spec, workers)
}

/// `eta_c` over the common cavity detuning (GHz, axis 1) and amplitude
/// (units of pi, axis 2) at fixed laser detuning.
pub fn cavity_detuning_map(
    config: &RunConfig,
    cavity_detunings_ghz: &[f64],
    amplitudes_pi: &[f64],
    workers: usize,
) -> Result<SweepResult> {
    run_sweep(
        &SweepSpec {
            base: config.clone(),
            axis1: Axis::new(CAVITY_DETUNING_KEY, cavity_detunings_ghz.to_vec()),
            axis2: Some(Axis::new(AMPLITUDE_KEY, amplitudes_pi.to_vec())),
            reduce: Reduce::EtaC,
            metric: Metric::EtaC,
            amplitude_grid: Vec::new(),
        },
        workers,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockReport {
    pub n_max: usize,
    pub pi_e: f64,
    pub pi_e_refined: f64,
    pub delta: f64,
}

/// Reruns `config` at `n_max` and `n_max + 2` and requires
/// `|delta pi_e| <` [`FOCK_TOLERANCE`].
pub fn fock_convergence(config: &RunConfig) -> Result<FockReport> {
    let pi_e = |n: usize| -> Result<f64> {
        let mut c = config.clone();
        c.solver.n_max = n;
        Ok(crate::experiment::run_outcome(&c)?.merit.pi_e)
    };
    let n_max = config.solver.n_max;
    let (a, b) = (pi_e(n_max)?, pi_e(n_max + 2)?);
    let delta = (b - a).abs();
    if !(delta < FOCK_TOLERANCE) {
        return Err(Error::FockConvergence { n_max, delta });
    }
    Ok(FockReport {
        n_max,
        pi_e: a,
        pi_e_refined: b,
        delta,
    })
}
