//! Physical constants (CODATA 2018, exact where SI defines them) and the
//! conversions between config units and the SI values used internally.

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge, J per eV.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Ordinary frequency in GHz to angular frequency in rad/s.
pub fn ghz_to_rad_s(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz * 1e9
}

/// Angular frequency in rad/s to ordinary frequency in GHz.
pub fn rad_s_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

pub fn ps_to_s(t_ps: f64) -> f64 {
    t_ps * 1e-12
}

pub fn s_to_ps(t_s: f64) -> f64 {
    t_s * 1e12
}

pub fn nm_to_m(l_nm: f64) -> f64 {
    l_nm * 1e-9
}

pub fn ev_to_j(e_ev: f64) -> f64 {
    e_ev * ELECTRON_VOLT
}
