//! Special functions needed by the closed-form intra-cavity field.
//!
//! Only the Gauss hypergeometric function with both numerator parameters
//! equal to one, `2F1(1, 1; c; z)`, is provided, for real `0 <= z < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex value used for envelopes and hypergeometric arithmetic.
pub type ComplexValue = Complex64;

const MAX_TERMS: usize = 10_000;
const REL_TERM_CUTOFF: f64 = 1e-16;
const SMALL_STREAK: usize = 3;

/// Distance from an integer below which the connection formula is evaluated
/// at `c +/- i k NEAR_INTEGER_SHIFT`, `k = 1, 2, 4`, and extrapolated to zero shift.
const NEAR_INTEGER_SHIFT: f64 = 1e-2;

/// Hyperbolic secant, `2 / (e^x + e^-x)`, evaluated without overflow.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Natural log of `sech(x)`, finite for every finite `x`.
pub fn ln_sech(x: f64) -> f64 {
    let a = x.abs();
    std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p()
}

/// `2F1(1, 1; c; z)` by direct power-series summation.
///
/// Requires `Re(c) > 0` and `0 <= z < 1`. Summation stops once three
/// consecutive terms fall below `1e-16` of the running sum.
pub fn gauss_2f1_11(c: ComplexValue, z: f64) -> Result<ComplexValue> {
    if !(c.re > 0.0) || !c.im.is_finite() {
        return Err(Error::Domain(format!("2F1(1,1;c;z) needs Re(c) > 0, got c = {c}")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1(1,1;c;z) needs 0 <= z < 1, got z = {z}")));
    }
    series(c, z)
}

/// Series with no restriction on `Re(c)` beyond avoiding the poles at
/// non-positive integers.
fn series(c: ComplexValue, z: f64) -> Result<ComplexValue> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut streak = 0;
    for n in 0..MAX_TERMS {
        let denom = c + n as f64;
        if denom.norm() == 0.0 {
            return Err(Error::Domain(format!("2F1(1,1;c;z) has a pole at c = {c}")));
        }
        // (1)_n (1)_n / ((c)_n n!) z^n  ->  ratio (n + 1) z / (c + n)
        term *= (n as f64 + 1.0) * z / denom;
        sum += term;
        if term.norm() < REL_TERM_CUTOFF * sum.norm() {
            streak += 1;
            if streak >= SMALL_STREAK {
                return Ok(sum);
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::NonConvergence { terms: MAX_TERMS })
}

/// `exp(log_scale) * 2F1(1, 1; c; z)` at the logistic argument
/// `z = 1 / (1 + e^{-2x})`, valid for every finite `x`.
///
/// For `x <= 0` (so `z <= 1/2`) the direct series is used. For `x > 0` the
/// `z -> 1 - z` connection formula
///
/// ```text
/// F(1,1;c;z) = (c-1)/(c-2) F(1,1;3-c;1-z)
///            + (c-1) pi / sin(pi (c-1)) (1-z)^(c-2) z^(1-c)
/// ```
///
/// is applied, with the singular branch assembled in log space so that the
/// `(1-z)^(c-2)` growth and a small `exp(log_scale)` cancel without overflow.
/// Requires `Re(c) > 0`.
pub fn gauss_2f1_11_logistic(c: ComplexValue, x: f64, log_scale: f64) -> Result<ComplexValue> {
    if !(c.re > 0.0) || !c.im.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!(
            "logistic 2F1 needs Re(c) > 0 and finite x, got c = {c}, x = {x}"
        )));
    }
    if x <= 0.0 {
        let e = (2.0 * x).exp();
        let z = e / (1.0 + e);
        return Ok(series(c, z)? * log_scale.exp());
    }
    let frac = c.re - c.re.round();
    if frac.abs() < NEAR_INTEGER_SHIFT && c.im.abs() < NEAR_INTEGER_SHIFT {
        // the symmetric mean is even in the shift; two Richardson levels remove the
        // quadratic and quartic terms
        let mean = |d: f64| -> Result<ComplexValue> {
            let shift = Complex64::new(0.0, d);
            Ok((connection(c + shift, x, log_scale)? + connection(c - shift, x, log_scale)?) * 0.5)
        };
        let (a1, a2, a4) = (
            mean(NEAR_INTEGER_SHIFT)?,
            mean(2.0 * NEAR_INTEGER_SHIFT)?,
            mean(4.0 * NEAR_INTEGER_SHIFT)?,
        );
        let r1 = (a1 * 4.0 - a2) / 3.0;
        let r2 = (a2 * 4.0 - a4) / 3.0;
        return Ok((r1 * 16.0 - r2) / 15.0);
    }
    connection(c, x, log_scale)
}

fn connection(c: ComplexValue, x: f64, log_scale: f64) -> Result<ComplexValue> {
    // w = 1 - z = 1 / (1 + e^{2x}); both logs are formed without cancellation.
    let em = (-2.0 * x).exp();
    let ln_z = -em.ln_1p();
    let ln_w = -2.0 * x + ln_z;
    let w = ln_w.exp();

    let cm1 = c - 1.0;
    let regular = cm1 / (c - 2.0) * series(3.0 - c, w)? * log_scale.exp();
    let log_singular = (cm1 * PI).ln() - (cm1 * PI).sin().ln() + (c - 2.0) * ln_w - cm1 * ln_z
        + log_scale;
    Ok(regular + log_singular.exp())
}
