//! Shared inputs for the benchmarks.

use cavex_core::config::RunConfig;

/// The default upper-mode configuration at an amplitude near the first
/// inversion maximum.
pub fn blue_case(phonons: bool) -> RunConfig {
    let mut c = RunConfig::default();
    c.pulse.amplitude_pi = 12.0;
    c.phonon.enabled = phonons;
    c
}
