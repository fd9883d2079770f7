//! Run configuration in laboratory units, read from TOML.
//!
//! Frequencies are ordinary frequencies in GHz (converted with a factor
//! `2 pi`), times in ps, lengths in nm, energies in eV, temperatures in K and
//! pulse areas in units of pi.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{SolverOptions, SystemSpec};
use crate::error::{Error, Result};
use crate::phonon::{DissipatorForm, PhononSpec};
use crate::pulse::{CavityModeSpec, PulseShape, PulseSpec};
use crate::quantum::HilbertSpec;
use crate::units::{ev_to_j, ghz_to_rad_s, nm_to_m, ps_to_s};

/// Shifts both cavity modes together, keeping their splitting.
pub const CAVITY_DETUNING_KEY: &str = "system.cavity_detuning_GHz";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pulse: PulseConfig,
    pub system: SystemConfig,
    pub phonon: PhononConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pulse: PulseConfig::default(),
            system: SystemConfig::default(),
            phonon: PhononConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub shape: PulseShape,
    /// Intensity FWHM.
    pub t_p_ps: f64,
    #[serde(rename = "laser_detuning_GHz")]
    pub laser_detuning_ghz: f64,
    /// Input pulse area over pi.
    pub amplitude_pi: f64,
    /// rad/ps^2
    pub chirp_per_ps2: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            shape: PulseShape::Sech,
            t_p_ps: 3.6,
            laser_detuning_ghz: 88.0,
            amplitude_pi: 12.0,
            chirp_per_ps2: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    #[serde(rename = "g_GHz")]
    pub g_ghz: f64,
    #[serde(rename = "kappa_GHz")]
    pub kappa_ghz: f64,
    #[serde(rename = "collection_detuning_GHz")]
    pub collection_detuning_ghz: f64,
    #[serde(rename = "excitation_detuning_GHz")]
    pub excitation_detuning_ghz: f64,
    #[serde(rename = "gamma_bg_GHz")]
    pub gamma_bg_ghz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            g_ghz: 4.0,
            kappa_ghz: 25.0,
            collection_detuning_ghz: 0.0,
            excitation_detuning_ghz: -50.0,
            gamma_bg_ghz: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhononConfig {
    pub enabled: bool,
    pub form: DissipatorForm,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub r_e_nm: f64,
    pub r_h_nm: f64,
    #[serde(rename = "d_e_eV")]
    pub d_e_ev: f64,
    #[serde(rename = "d_h_eV")]
    pub d_h_ev: f64,
    pub density_kg_m3: f64,
    pub sound_speed_m_s: f64,
}

impl Default for PhononConfig {
    fn default() -> Self {
        let p = PhononSpec::default();
        Self {
            enabled: p.enabled,
            form: p.form,
            temperature_k: p.temperature,
            r_e_nm: 5.9,
            r_h_nm: 3.6,
            d_e_ev: 7.0,
            d_h_ev: -3.5,
            density_kg_m3: p.rho_mass,
            sound_speed_m_s: p.c_s,
        }
    }
}

/// Field grid. Unset bounds fall back to the pulse- and linewidth-based default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub t_start_ps: Option<f64>,
    pub t_end_ps: Option<f64>,
    pub n_points: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_start_ps: None,
            t_end_ps: None,
            n_points: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMethod {
    /// Closed form for sech pulses, convolution otherwise.
    Auto,
    Analytic,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub n_max: usize,
    pub positivity_slack: f64,
    pub field: FieldMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            n_max: 3,
            positivity_slack: SolverOptions::DEFAULT_POSITIVITY_SLACK,
            field: FieldMethod::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

fn toml_error(e: impl std::fmt::Display) -> Error {
    Error::config("<file>", e.to_string())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(toml_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Checks every field, reporting the first failure by key path.
    pub fn validate(&self) -> Result<()> {
        self.pulse_spec().validate()?;
        if !(self.pulse.t_p_ps > 0.0) {
            return Err(Error::config("pulse.t_p_ps", "must be positive"));
        }
        if self.pulse.shape == PulseShape::ChirpedGaussian && self.pulse.chirp_per_ps2 == 0.0 {
            return Err(Error::config("pulse.chirp_per_ps2", "chirped pulses need a nonzero chirp"));
        }
        self.system_spec()?.validate()?;
        self.phonon_spec().validate()?;
        let s = &self.solver;
        if !(s.tol >= 1e-12 && s.tol <= 1e-4) {
            return Err(Error::config("solver.tol", "must lie in [1e-12, 1e-4]"));
        }
        if !(s.positivity_slack >= 0.0 && s.positivity_slack < 1.0) {
            return Err(Error::config("solver.positivity_slack", "must lie in [0, 1)"));
        }
        if s.field == FieldMethod::Analytic && self.pulse.shape != PulseShape::Sech {
            return Err(Error::config("solver.field", "the closed form needs a sech pulse"));
        }
        let g = &self.grid;
        for (key, v) in [("grid.t_start_ps", g.t_start_ps), ("grid.t_end_ps", g.t_end_ps)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::config(key, "must be finite"));
                }
            }
        }
        if let (Some(a), Some(b)) = (g.t_start_ps, g.t_end_ps) {
            if a >= b {
                return Err(Error::config("grid.t_end_ps", "must exceed grid.t_start_ps"));
            }
        }
        if let Some(n) = g.n_points {
            if n < 2 {
                return Err(Error::config("grid.n_points", "must be at least 2"));
            }
        }
        if self.output.directory.is_empty() {
            return Err(Error::config("output.directory", "must not be empty"));
        }
        Ok(())
    }

    pub fn pulse_spec(&self) -> PulseSpec {
        let p = &self.pulse;
        PulseSpec {
            shape: p.shape,
            t_p: ps_to_s(p.t_p_ps),
            delta_omega_l: ghz_to_rad_s(p.laser_detuning_ghz),
            amplitude: p.amplitude_pi * PI,
            chirp_rate: p.chirp_per_ps2 * 1e24,
        }
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let s = &self.system;
        let hilbert = HilbertSpec::new(self.solver.n_max)
            .map_err(|e| Error::config("solver.n_max", e.to_string()))?;
        Ok(SystemSpec {
            g: ghz_to_rad_s(s.g_ghz),
            kappa: ghz_to_rad_s(s.kappa_ghz),
            delta_omega_c: ghz_to_rad_s(s.collection_detuning_ghz),
            delta_omega_e: ghz_to_rad_s(s.excitation_detuning_ghz),
            gamma_bg: ghz_to_rad_s(s.gamma_bg_ghz),
            hilbert,
        })
    }

    pub fn cavity_mode(&self) -> CavityModeSpec {
        CavityModeSpec {
            delta_omega_e: ghz_to_rad_s(self.system.excitation_detuning_ghz),
            kappa: ghz_to_rad_s(self.system.kappa_ghz),
        }
    }

    pub fn phonon_spec(&self) -> PhononSpec {
        let p = &self.phonon;
        PhononSpec {
            r_e: nm_to_m(p.r_e_nm),
            r_h: nm_to_m(p.r_h_nm),
            d_e: ev_to_j(p.d_e_ev),
            d_h: ev_to_j(p.d_h_ev),
            rho_mass: p.density_kg_m3,
            c_s: p.sound_speed_m_s,
            temperature: p.temperature_k,
            enabled: p.enabled,
            form: p.form,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            positivity_slack: self.solver.positivity_slack,
        }
    }

    /// Mirror image in frequency: every detuning changes sign.
    pub fn mirrored(&self) -> Self {
        let mut c = self.clone();
        c.pulse.laser_detuning_ghz = -c.pulse.laser_detuning_ghz;
        c.pulse.chirp_per_ps2 = -c.pulse.chirp_per_ps2;
        c.system.collection_detuning_ghz = -c.system.collection_detuning_ghz;
        c.system.excitation_detuning_ghz = -c.system.excitation_detuning_ghz;
        c
    }

    /// Sets the numeric entry at `path` (e.g. `pulse.laser_detuning_GHz`).
    ///
    /// Integer entries accept only integral values. [`CAVITY_DETUNING_KEY`]
    /// moves both modes, keeping their splitting.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::config(path, "value must be finite"));
        }
        if path == CAVITY_DETUNING_KEY {
            let split = self.system.excitation_detuning_ghz - self.system.collection_detuning_ghz;
            self.system.collection_detuning_ghz = value;
            self.system.excitation_detuning_ghz = value + split;
            return Ok(());
        }
        let mut root = toml::Table::try_from(&*self).map_err(toml_error)?;
        let (section, key) = path
            .split_once('.')
            .ok_or_else(|| Error::config(path, "expected `section.key`"))?;
        let table = root
            .get_mut(section)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| Error::config(path, "unknown section"))?;
        let slot = table.get_mut(key).ok_or_else(|| Error::config(path, "unknown or unset key"))?;
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::config(path, format!("needs a non-negative integer, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            _ => return Err(Error::config(path, "not a numeric key")),
        };
        let cfg: Self = toml::Value::Table(root).try_into().map_err(toml_error)?;
        *self = cfg;
        Ok(())
    }

    /// Reads the numeric entry at `path`; see [`RunConfig::set_param`].
    pub fn get_param(&self, path: &str) -> Result<f64> {
        if path == CAVITY_DETUNING_KEY {
            return Ok(self.system.collection_detuning_ghz);
        }
        let root = toml::Table::try_from(self).map_err(toml_error)?;
        let (section, key) = path
            .split_once('.')
            .ok_or_else(|| Error::config(path, "expected `section.key`"))?;
        match root.get(section).and_then(|v| v.get(key)) {
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(n)) => Ok(*n as f64),
            Some(_) => Err(Error::config(path, "not a numeric key")),
            None => Err(Error::config(path, "unknown or unset key")),
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes to JSON");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Internal SI values, one `name = value` per line.
    pub fn unit_dump(&self) -> Result<String> {
        let s = self.system_spec()?;
        let p = self.pulse_spec();
        let ph = self.phonon_spec();
        Ok(format!(
            "g = {:e} rad/s\nkappa = {:e} rad/s\ndelta_omega_c = {:e} rad/s\ndelta_omega_e = {:e} rad/s\n\
             gamma_bg = {:e} rad/s\nt_p = {:e} s\nsech_width = {:e} s\ndelta_omega_l = {:e} rad/s\n\
             amplitude = {:e} rad\nchirp_rate = {:e} rad/s^2\nr_e = {:e} m\nr_h = {:e} m\n\
             d_e = {:e} J\nd_h = {:e} J\ntemperature = {:e} K\nn_max = {}\n",
            s.g,
            s.kappa,
            s.delta_omega_c,
            s.delta_omega_e,
            s.gamma_bg,
            p.t_p,
            p.width(),
            p.delta_omega_l,
            p.amplitude,
            p.chirp_rate,
            ph.r_e,
            ph.r_h,
            ph.d_e,
            ph.d_h,
            ph.temperature,
            s.hilbert.n_max,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_blue_case() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let s = c.system_spec().unwrap();
        assert!((s.kappa - 2.0 * PI * 25e9).abs() < 1e-3);
        assert!((s.delta_omega_e + 2.0 * PI * 50e9).abs() < 1e-3);
        assert_eq!(c.phonon_spec(), PhononSpec::default());
        assert_eq!(s.hilbert.n_max, 3);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_toml_str("[pulse]\nlaser_detuning_GHz = -82.0\n[system]\nexcitation_detuning_GHz = 50.0\n").unwrap();
        assert_eq!(c.pulse.laser_detuning_ghz, -82.0);
        assert_eq!(c.pulse.t_p_ps, 3.6);
        assert_eq!(c.system.excitation_detuning_ghz, 50.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml_str("[pulse]\nwidth = 3.0\n").unwrap_err().is_validation());
        let e = RunConfig::from_toml_str("[system]\nkappa_GHz = -1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "system.kappa_GHz"), "{e}");
        let e = RunConfig::from_toml_str("[solver]\nn_max = 0\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "solver.n_max"), "{e}");
    }

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.grid.t_start_ps = Some(-80.0);
        let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn set_param_by_path() {
        let mut c = RunConfig::default();
        c.set_param("pulse.laser_detuning_GHz", 35.0).unwrap();
        assert_eq!(c.pulse.laser_detuning_ghz, 35.0);
        c.set_param("solver.n_max", 5.0).unwrap();
        assert_eq!(c.solver.n_max, 5);
        assert!(c.set_param("solver.n_max", 2.5).is_err());
        assert!(c.set_param("pulse.nope", 1.0).is_err());
        assert!(c.set_param("phonon.enabled", 1.0).is_err());
        assert_eq!(c.get_param("pulse.laser_detuning_GHz").unwrap(), 35.0);
        let h = c.hash();
        c.set_param("pulse.amplitude_pi", 3.0).unwrap();
        assert_ne!(h, c.hash());
    }

    #[test]
    fn cavity_detuning_moves_both_modes() {
        let mut c = RunConfig::default();
        c.set_param(CAVITY_DETUNING_KEY, 10.0).unwrap();
        assert_eq!(c.system.collection_detuning_ghz, 10.0);
        assert_eq!(c.system.excitation_detuning_ghz, -40.0);
        assert_eq!(c.get_param(CAVITY_DETUNING_KEY).unwrap(), 10.0);
    }

    #[test]
    fn mirror_flips_detunings() {
        let m = RunConfig::default().mirrored();
        assert_eq!(m.pulse.laser_detuning_ghz, -88.0);
        assert_eq!(m.system.excitation_detuning_ghz, 50.0);
    }

    #[test]
    fn unit_dump_is_si() {
        let d = RunConfig::default().unit_dump().unwrap();
        assert!(d.contains(&format!("kappa = {:e} rad/s", 2.0 * PI * 25e9)), "{d}");
    }
}
