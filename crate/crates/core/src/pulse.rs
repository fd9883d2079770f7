//! Input laser pulses and their filtering by the excitation cavity mode.
//!
//! All envelopes are complex amplitudes in the frame rotating at the emitter
//! frequency, with a spectral component at detuning `d` carrying the phase
//! `e^{+i d t}`. The drive term of the Hamiltonian pairs this convention with
//! the physical positive-frequency field (see [`crate::dynamics`]).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trapezoid, TimeGrid};
use crate::specfun::{gauss_2f1_11_logistic, ln_sech, sech, ComplexValue};

/// Ratio of boundary to peak envelope magnitude above which a grid is
/// considered too short.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Minimum number of samples per pulse width and per filter period.
pub const MIN_POINTS_PER_PERIOD: f64 = 20.0;

const DEFAULT_FIELD_POINTS: usize = 4096;

/// Intensity FWHM of `sech^2(t / tau)` in units of `tau`, `2 ln(1 + sqrt 2)`.
const SECH_FWHM_PER_WIDTH: f64 = 1.762_747_174_039_086;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Sech,
    Gaussian,
    ChirpedGaussian,
}

/// Input laser pulse.
///
/// `amplitude` multiplies a unit-area envelope, so it equals the input pulse
/// area in radians. `t_p` is the intensity FWHM for every shape; the sech
/// envelope is `sech(t / tau) / (pi tau)` with `tau` = [`PulseSpec::width`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// s
    pub t_p: f64,
    /// Laser detuning from the emitter, rad/s.
    pub delta_omega_l: f64,
    pub amplitude: f64,
    /// rad/s^2, only read for `ChirpedGaussian`.
    pub chirp_rate: f64,
}

impl PulseSpec {
    pub fn sech(t_p: f64, delta_omega_l: f64, amplitude: f64) -> Self {
        Self {
            shape: PulseShape::Sech,
            t_p,
            delta_omega_l,
            amplitude,
            chirp_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_p > 0.0 && self.t_p.is_finite()) {
            return Err(Error::config("pulse.t_p_ps", "must be positive"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config("pulse.amplitude", "must be finite and non-negative"));
        }
        if !self.delta_omega_l.is_finite() {
            return Err(Error::config("pulse.laser_detuning_GHz", "must be finite"));
        }
        if !self.chirp_rate.is_finite() {
            return Err(Error::config("pulse.chirp_per_ps2", "must be finite"));
        }
        Ok(())
    }

    /// Shape parameter: `t_p / (2 acosh sqrt 2)` for `Sech`, `t_p` otherwise.
    pub fn width(&self) -> f64 {
        match self.shape {
            PulseShape::Sech => self.t_p / SECH_FWHM_PER_WIDTH,
            PulseShape::Gaussian | PulseShape::ChirpedGaussian => self.t_p,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Excitation cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityModeSpec {
    /// Mode detuning from the emitter, rad/s.
    pub delta_omega_e: f64,
    /// Angular linewidth, rad/s.
    pub kappa: f64,
}

impl CavityModeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("system.kappa_GHz", "must be positive"));
        }
        if !self.delta_omega_e.is_finite() {
            return Err(Error::config("system.excitation_detuning_GHz", "must be finite"));
        }
        Ok(())
    }
}

/// Complex Rabi envelope driving the emitter, sampled on a uniform grid.
///
/// Values between samples come from a natural cubic spline through the
/// samples.
#[derive(Clone, Debug)]
pub struct IntracavityField {
    grid: TimeGrid,
    envelope: Vec<ComplexValue>,
    curvature: Vec<ComplexValue>,
}

impl IntracavityField {
    pub fn new(grid: TimeGrid, envelope: Vec<ComplexValue>) -> Result<Self> {
        if envelope.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                got: envelope.len(),
            });
        }
        let curvature = spline_curvature(&envelope, grid.spacing());
        Ok(Self {
            grid,
            envelope,
            curvature,
        })
    }

    /// Identically zero field.
    pub fn zero(grid: TimeGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            envelope: vec![Complex64::new(0.0, 0.0); n],
            curvature: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn envelope(&self) -> &[ComplexValue] {
        &self.envelope
    }

    /// Interpolated envelope at `t`.
    pub fn at(&self, t: f64) -> Result<ComplexValue> {
        if !self.grid.contains(t) {
            return Err(Error::OutOfGrid {
                t,
                start: self.grid.t_start(),
                end: self.grid.t_end(),
            });
        }
        Ok(self.interpolate(t))
    }

    /// Interpolated envelope, taken as zero outside the grid.
    pub fn at_or_zero(&self, t: f64) -> ComplexValue {
        if self.grid.contains(t) {
            self.interpolate(t)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Instantaneous frequency `d arg E / dt` from the spline, 0 outside
    /// the grid and where the envelope vanishes.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        if !self.grid.contains(t) {
            return 0.0;
        }
        let e = self.interpolate(t);
        let p = e.norm_sqr();
        let w = (e.conj() * self.slope(t)).im / p;
        if p > 0.0 && w.is_finite() {
            w
        } else {
            0.0
        }
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.envelope.len() - 2;
        let s = (t - self.grid.t_start()) / self.grid.spacing();
        let i = (s.floor().max(0.0) as usize).min(last);
        (i, s - i as f64)
    }

    fn slope(&self, t: f64) -> ComplexValue {
        let h = self.grid.spacing();
        let (i, u) = self.locate(t);
        let v = 1.0 - u;
        let (y0, y1) = (self.envelope[i], self.envelope[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        (y1 - y0) / h + (m1 * (3.0 * u * u - 1.0) - m0 * (3.0 * v * v - 1.0)) * (h / 6.0)
    }

    fn interpolate(&self, t: f64) -> ComplexValue {
        let h = self.grid.spacing();
        let (i, u) = self.locate(t);
        let v = 1.0 - u;
        let (y0, y1) = (self.envelope[i], self.envelope[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        y0 * v + y1 * u + (m0 * (v * v * v - v) + m1 * (u * u * u - u)) * (h * h / 6.0)
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.envelope.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            envelope: self.envelope.iter().map(|z| z * factor).collect(),
            curvature: self.curvature.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest boundary magnitude relative to the peak (0 for a null field).
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak_magnitude();
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.envelope[0].norm();
        let last = self.envelope[self.envelope.len() - 1].norm();
        first.max(last) / peak
    }

    /// Fails when the envelope has not decayed at the grid boundaries.
    pub fn check_boundaries(&self) -> Result<()> {
        let r = self.boundary_ratio();
        if r > BOUNDARY_TOLERANCE {
            return Err(Error::Resolution(format!(
                "field at grid boundary is {r:.3e} of its peak; extend the grid"
            )));
        }
        Ok(())
    }
}

/// Second derivatives of the natural cubic spline through uniform samples.
fn spline_curvature(y: &[ComplexValue], h: f64) -> Vec<ComplexValue> {
    let n = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![zero; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm for M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / h^2
    let inner = n - 2;
    let mut diag = vec![4.0; inner];
    let mut rhs: Vec<ComplexValue> = (1..n - 1)
        .map(|i| (y[i + 1] - y[i] * 2.0 + y[i - 1]) * (6.0 / (h * h)))
        .collect();
    for k in 1..inner {
        let w = 1.0 / diag[k - 1];
        diag[k] -= w;
        let prev = rhs[k - 1];
        rhs[k] -= prev * w;
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for k in (0..inner - 1).rev() {
        m[k + 1] = (rhs[k] - m[k + 2]) / diag[k];
    }
    m
}

/// Input pulse envelope (including `amplitude`) at time `t`.
pub fn input_envelope(pulse: &PulseSpec, t: f64) -> ComplexValue {
    let phase = Complex64::from_polar(1.0, pulse.delta_omega_l * t);
    let tp = pulse.width();
    let magnitude = match pulse.shape {
        PulseShape::Sech => sech(t / tp) / (PI * tp),
        PulseShape::Gaussian | PulseShape::ChirpedGaussian => {
            // field FWHM sqrt(2) t_p, intensity FWHM t_p, unit area
            let norm = tp * (PI / (2.0 * LN_2)).sqrt();
            (-2.0 * LN_2 * (t / tp).powi(2)).exp() / norm
        }
    };
    let chirp = match pulse.shape {
        PulseShape::ChirpedGaussian => Complex64::from_polar(1.0, 0.5 * pulse.chirp_rate * t * t),
        _ => Complex64::new(1.0, 0.0),
    };
    phase * chirp * (magnitude * pulse.amplitude)
}

/// Rotating-frame impulse response of the excitation mode,
/// `Theta(tau) e^{-kappa tau / 2} e^{i delta_e tau}`.
pub fn cavity_impulse_response(mode: &CavityModeSpec, tau: f64) -> ComplexValue {
    if tau < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(-0.5 * mode.kappa * tau, mode.delta_omega_e * tau).exp()
}

/// Default field grid: pulse tails plus at least fifteen field ring-down
/// times, sampled finely enough for the numeric convolution.
pub fn default_field_grid(pulse: &PulseSpec, mode: &CavityModeSpec) -> Result<TimeGrid> {
    let t_start = -(15.0 * pulse.t_p + 6.0 / mode.kappa);
    let t_end = 15.0 * pulse.t_p + 30.0 / mode.kappa;
    let fastest = mode
        .kappa
        .max((pulse.delta_omega_l - mode.delta_omega_e).abs())
        .max(pulse.delta_omega_l.abs())
        .max(mode.delta_omega_e.abs());
    let max_dt = (pulse.t_p.min(2.0 * PI / fastest)) / (2.0 * MIN_POINTS_PER_PERIOD);
    let span = t_end - t_start;
    let n = DEFAULT_FIELD_POINTS.max((span / max_dt).ceil() as usize + 1);
    TimeGrid::new(t_start, t_end, n)
}

/// The `j` parameter of the closed-form field, `1 + (kappa/2 + i delta_EL) tau`,
/// with `delta_EL = delta_L - delta_e` and `tau` the sech width.
pub fn filter_parameter(pulse: &PulseSpec, mode: &CavityModeSpec) -> ComplexValue {
    let d_el = pulse.delta_omega_l - mode.delta_omega_e;
    let tau = pulse.width();
    Complex64::new(1.0 + 0.5 * mode.kappa * tau, d_el * tau)
}

/// Closed-form intra-cavity field for a sech input pulse:
///
/// ```text
/// E(t) = A kappa / (2 pi j) e^{i delta_L t} sech(t/tau) 2F1(1, 1; 1 + j/2; z(t))
/// z(t) = 1 / (1 + e^{-2 t / tau})
/// ```
///
/// normalized so the output reduces to the input envelope when
/// `kappa -> infinity`.
pub fn intracavity_field_analytic(
    pulse: &PulseSpec,
    mode: &CavityModeSpec,
    grid: &TimeGrid,
) -> Result<IntracavityField> {
    if pulse.shape != PulseShape::Sech {
        return Err(Error::Domain(format!(
            "closed-form field needs a sech pulse, got {:?}",
            pulse.shape
        )));
    }
    pulse.validate()?;
    mode.validate()?;
    let j = filter_parameter(pulse, mode);
    let c = 1.0 + j * 0.5;
    let prefactor = mode.kappa * pulse.amplitude / (2.0 * PI * j);
    let envelope = grid
        .times()
        .map(|t| {
            let x = t / pulse.width();
            let shaped = gauss_2f1_11_logistic(c, x, ln_sech(x))?;
            Ok(prefactor * Complex64::from_polar(1.0, pulse.delta_omega_l * t) * shaped)
        })
        .collect::<Result<Vec<_>>>()?;
    IntracavityField::new(*grid, envelope)
}

/// Intra-cavity field by direct convolution of [`input_envelope`] with
/// [`cavity_impulse_response`], scaled by `kappa / 2`.
///
/// The convolution integral is advanced interval by interval using
/// `h(tau + dt) = h(dt) h(tau)`; each interval is integrated with the
/// trapezoidal rule at spacings `dt` and `dt/2` combined by one Richardson
/// step. The input is assumed negligible before `grid.t_start`.
pub fn intracavity_field_numeric(
    pulse: &PulseSpec,
    mode: &CavityModeSpec,
    grid: &TimeGrid,
) -> Result<IntracavityField> {
    pulse.validate()?;
    mode.validate()?;
    let dt = grid.spacing();
    let d_el = (pulse.delta_omega_l - mode.delta_omega_e).abs();
    let period = 2.0 * PI / d_el.max(mode.kappa);
    if dt * MIN_POINTS_PER_PERIOD > pulse.t_p || dt * MIN_POINTS_PER_PERIOD > period {
        return Err(Error::Resolution(format!(
            "spacing {dt:.3e} s resolves neither t_p = {:.3e} s nor filter period {period:.3e} s \
             with {MIN_POINTS_PER_PERIOD} points",
            pulse.t_p
        )));
    }

    let h_full = cavity_impulse_response(mode, dt);
    let h_half = cavity_impulse_response(mode, 0.5 * dt);
    let gain = 0.5 * mode.kappa;

    let mut out = Vec::with_capacity(grid.n_points());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut e_prev = input_envelope(pulse, grid.time(0));
    out.push(acc);
    for k in 1..grid.n_points() {
        let t0 = grid.time(k - 1);
        let t1 = grid.time(k);
        let e_mid = input_envelope(pulse, 0.5 * (t0 + t1));
        let e_next = input_envelope(pulse, t1);
        let coarse = (h_full * e_prev + e_next) * (0.5 * dt);
        let fine = (h_full * e_prev + h_half * e_mid * 2.0 + e_next) * (0.25 * dt);
        acc = h_full * acc + (fine * 4.0 - coarse) / 3.0;
        out.push(acc * gain);
        e_prev = e_next;
    }
    IntracavityField::new(*grid, out)
}

/// Pulse area `int |Omega(t)| dt` in units of pi.
pub fn pulse_area(field: &IntracavityField) -> f64 {
    let mags: Vec<f64> = field.envelope().iter().map(|z| z.norm()).collect();
    trapezoid(field.grid(), &mags) / PI
}

/// Intra-cavity amplitude enhancement of a one-sided cavity of given finesse,
/// `sqrt(2 F / pi)`.
pub fn finesse_enhancement(finesse: f64) -> f64 {
    assert!(finesse > 0.0, "finesse must be positive, got {finesse}");
    (2.0 * finesse / PI).sqrt()
}
