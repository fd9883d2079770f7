//! Simulation of a quantum-dot two-level emitter excited through one mode of
//! a polarization-split cavity and emitting into the other.
//!
//! The input pulse is filtered by the excitation mode ([`pulse`]), drives the
//! emitter coupled to the collection mode under a Lindblad plus
//! Bloch-Redfield phonon master equation ([`dynamics`], [`phonon`]), and the
//! emitted photon number gives the figures of merit ([`observables`]).
//! [`config`], [`experiment`] and [`sweep`] drive runs from TOML files.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod observables;
pub mod phonon;
pub mod pulse;
pub mod quantum;
pub mod specfun;
pub mod sweep;
pub mod units;

pub use nalgebra;
pub use num_complex;

pub use config::RunConfig;
pub use dynamics::{propagate, SolverOptions, SystemSpec, Trajectory};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use observables::FigureOfMerit;
pub use phonon::PhononSpec;
pub use pulse::{CavityModeSpec, IntracavityField, PulseShape, PulseSpec};
pub use quantum::{DensityMatrix, HilbertSpec, Operator};
pub use sweep::{SweepResult, SweepSpec};
