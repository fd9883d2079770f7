use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid, endpoints included. Times in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_start >= t_end {
            return Err(Error::config(
                "grid",
                format!("need finite t_start < t_end, got [{t_start:e}, {t_end:e}]"),
            ));
        }
        if n_points < 2 {
            return Err(Error::config("grid.n_points", format!("need >= 2 points, got {n_points}")));
        }
        Ok(Self { t_start, t_end, n_points })
    }

    /// Grid over `[t_start, t_end]` with spacing no larger than `max_dt`.
    pub fn with_max_spacing(t_start: f64, t_end: f64, max_dt: f64) -> Result<Self> {
        let intervals = ((t_end - t_start) / max_dt).ceil().max(1.0) as usize;
        Self::new(t_start, t_end, intervals + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.time(i))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }
}

/// Composite trapezoidal rule for samples on a uniform grid.
pub fn trapezoid(grid: &TimeGrid, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), grid.n_points());
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    grid.spacing() * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}
