use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::phonon::PhononSpec;
use crate::pulse::IntracavityField;
use crate::quantum::{annihilation, sigma_minus, CMatrix, DensityMatrix, HilbertSpec};

use super::hamiltonian::StaticParts;
use super::ode::{Dopri5, OdeStats};
use super::redfield::RedfieldDissipator;
use super::{diagonal_observables, SolverOptions, SystemSpec, Trajectory};

type C = Complex64;

const TOL_RANGE: (f64, f64) = (1e-12, 1e-4);
const TRACE_DRIFT: f64 = 1e-8;
/// Photon-number decay factor covered by the default ring-down window.
const RING_DOWN_DECADES: f64 = 7.0;
/// Longest step inside the field window, in field-grid spacings.
const DRIVEN_STEP_SPACINGS: f64 = 10.0;

/// Operator with at most one nonzero per row, stored as `(row, col, value)`.
struct Sparse(Vec<(usize, usize, f64)>);

impl Sparse {
    fn from_dense(m: &CMatrix) -> Self {
        let mut v = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let x = m[(i, j)];
                if x != C::new(0.0, 0.0) {
                    debug_assert_eq!(x.im, 0.0);
                    v.push((i, j, x.re));
                }
            }
        }
        Self(v)
    }

    /// `out += rate * c rho c^dag`
    fn add_jump(&self, rate: f64, rho: &CMatrix, out: &mut CMatrix) {
        for &(i, ci, vi) in &self.0 {
            for &(j, cj, vj) in &self.0 {
                out[(i, j)] += rho[(ci, cj)] * (rate * vi * vj);
            }
        }
    }
}

/// Right-hand side of the master equation with reusable buffers.
struct Generator<'a> {
    system: &'a SystemSpec,
    phonon: &'a PhononSpec,
    field: &'a IntracavityField,
    parts: StaticParts,
    lower_cavity: Sparse,
    lower_emitter: Sparse,
    /// Diagonal of `(kappa a^dag a + gamma_bg sigma_+ sigma_-) / 2`
    damping: Vec<f64>,
    h: CMatrix,
    frozen: CMatrix,
    rho: CMatrix,
    hr: CMatrix,
    out: CMatrix,
    undriven: Option<RedfieldDissipator>,
    warned: bool,
}

impl<'a> Generator<'a> {
    fn new(system: &'a SystemSpec, phonon: &'a PhononSpec, field: &'a IntracavityField) -> Self {
        let space = &system.hilbert;
        let dim = space.dim();
        let nf = space.fock_dim();
        let damping = (0..dim)
            .map(|k| {
                let n = (k % nf) as f64;
                let e = if k >= nf { 1.0 } else { 0.0 };
                0.5 * (system.kappa * n + system.gamma_bg * e)
            })
            .collect();
        Self {
            system,
            phonon,
            field,
            parts: StaticParts::new(system),
            lower_cavity: Sparse::from_dense(annihilation(space).matrix()),
            lower_emitter: Sparse::from_dense(sigma_minus(space).matrix()),
            damping,
            h: CMatrix::zeros(dim, dim),
            frozen: CMatrix::zeros(dim, dim),
            rho: CMatrix::zeros(dim, dim),
            hr: CMatrix::zeros(dim, dim),
            out: CMatrix::zeros(dim, dim),
            undriven: None,
            warned: false,
        }
    }

    fn note_degeneracy(&mut self, d: &RedfieldDissipator, t: f64) {
        if d.degenerate() && !self.warned {
            log::warn!("near-degenerate Hamiltonian eigenvalues at t = {t:e} s; phonon rates taken by continuity");
            self.warned = true;
        }
    }

    fn eval(&mut self, t: f64, y: &[C], dy: &mut [C]) -> Result<()> {
        let n = self.rho.nrows();
        self.rho.as_mut_slice().copy_from_slice(y);
        let omega = self.field.at_or_zero(t);
        self.parts.fill(omega, &mut self.h);

        // -i H_eff rho + h.c. with H_eff = H - i damping
        self.hr.gemm(C::new(1.0, 0.0), &self.h, &self.rho, C::new(0.0, 0.0));
        for j in 0..n {
            for i in 0..n {
                let y = C::new(self.hr[(i, j)].im, -self.hr[(i, j)].re) - self.rho[(i, j)] * self.damping[i];
                self.hr[(i, j)] = y;
            }
        }
        for j in 0..n {
            for i in 0..n {
                self.out[(i, j)] = self.hr[(i, j)] + self.hr[(j, i)].conj();
            }
        }
        self.lower_cavity.add_jump(self.system.kappa, &self.rho, &mut self.out);
        if self.system.gamma_bg > 0.0 {
            self.lower_emitter.add_jump(self.system.gamma_bg, &self.rho, &mut self.out);
        }

        if self.phonon.enabled {
            if omega == C::new(0.0, 0.0) {
                if self.undriven.is_none() {
                    let d = RedfieldDissipator::build(self.system, self.phonon, &self.h);
                    self.note_degeneracy(&d, t);
                    self.undriven = Some(d);
                }
                if let Some(d) = &self.undriven {
                    d.add_to(&self.rho, &mut self.out);
                }
            } else {
                // the bath sees the Hamiltonian in the frame following the drive phase
                self.frozen.copy_from(&self.h);
                self.parts.shift_frame(self.field.instantaneous_frequency(t), &mut self.frozen);
                let d = RedfieldDissipator::build(self.system, self.phonon, &self.frozen);
                self.note_degeneracy(&d, t);
                d.add_to(&self.rho, &mut self.out);
            }
        }
        dy.copy_from_slice(self.out.as_slice());
        Ok(())
    }
}

/// Time for the slowest single-excitation eigenmode to bring the photon
/// number down by `1e-7`.
pub fn ring_down_time(system: &SystemSpec) -> f64 {
    let rate = if system.g == 0.0 {
        0.5 * system.kappa
    } else {
        // eigenvalues of [[-gamma_bg/2, -i g], [-i g, -i delta_c - kappa/2]]
        let a = C::new(-0.5 * system.gamma_bg, 0.0);
        let d = C::new(-0.5 * system.kappa, -system.delta_omega_c);
        let half_tr = (a + d) * 0.5;
        let det = a * d + system.g * system.g;
        let root = (half_tr * half_tr - det).sqrt();
        (half_tr + root).re.abs().min((half_tr - root).re.abs())
    };
    RING_DOWN_DECADES * std::f64::consts::LN_10 / (2.0 * rate)
}

/// Grid from the start of the field through its end plus [`ring_down_time`],
/// at the field-grid spacing.
pub fn default_propagation_grid(system: &SystemSpec, field: &IntracavityField) -> Result<TimeGrid> {
    let fg = field.grid();
    let t_end = fg.t_end() + ring_down_time(system);
    TimeGrid::with_max_spacing(fg.t_start(), t_end, fg.spacing())
}

fn check_inputs(system: &SystemSpec, phonon: &PhononSpec, rho0: &DensityMatrix, solver: &SolverOptions) -> Result<()> {
    system.validate()?;
    phonon.validate()?;
    let tol = solver.tol;
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(Error::config(
            "solver.tol",
            format!("must lie in [{:e}, {:e}], got {tol:e}", TOL_RANGE.0, TOL_RANGE.1),
        ));
    }
    if !(solver.positivity_slack >= 0.0 && solver.positivity_slack < 1.0) {
        return Err(Error::config("solver.positivity_slack", "must lie in [0, 1)"));
    }
    if rho0.dim() != system.hilbert.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.hilbert.dim(),
            got: rho0.dim(),
        });
    }
    rho0.validate()
}

/// Integrates the master equation from `grid.t_start` to `grid.t_end`,
/// calling `observer(i, t_i, rho(t_i))` at every grid point in order.
///
/// The drive is zero outside the field grid. Both field-grid endpoints are
/// integration breakpoints. Fails on step-size underflow, on trace drift
/// beyond `1e-8` or when an accepted state has an eigenvalue below
/// `-solver.positivity_slack`.
pub fn propagate_observed<F>(
    system: &SystemSpec,
    field: &IntracavityField,
    phonon: &PhononSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    solver: &SolverOptions,
    mut observer: F,
) -> Result<OdeStats>
where
    F: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
{
    check_inputs(system, phonon, rho0, solver)?;
    let slack = solver.positivity_slack;
    let dim = system.hilbert.dim();
    let outputs: Vec<f64> = grid.times().collect();
    let fg = field.grid();

    let mut cuts = vec![grid.t_start()];
    for b in [fg.t_start(), fg.t_end()] {
        if b > grid.t_start() && b < grid.t_end() {
            cuts.push(b);
        }
    }
    cuts.push(grid.t_end());

    let mut gen = Generator::new(system, phonon, field);
    let mut y: Vec<C> = rho0.matrix().as_slice().to_vec();
    let trace0 = rho0.trace().re;
    let mut stats = OdeStats::default();
    let mut h_carry = None;

    let wrap = |v: &[C]| DensityMatrix::from_matrix_unchecked(CMatrix::from_column_slice(dim, dim, v));
    observer(0, outputs[0], rho0)?;

    for seg in cuts.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        let driven = t1 > fg.t_start() && t0 < fg.t_end();
        let h_max = if driven {
            DRIVEN_STEP_SPACINGS * fg.spacing()
        } else {
            f64::INFINITY
        };
        let check = |t: f64, v: &[C]| -> Result<()> {
            let trace: f64 = (0..dim).map(|k| v[k * dim + k].re).sum();
            if (trace - trace0).abs() > TRACE_DRIFT {
                return Err(Error::InvariantViolation {
                    t,
                    what: format!("trace drifted to {trace:.12}"),
                });
            }
            if !wrap(v).is_positive_within(slack) {
                return Err(Error::InvariantViolation {
                    t,
                    what: format!("state has an eigenvalue below -{slack:e}"),
                });
            }
            Ok(())
        };
        let (s, h_last) = Dopri5::new(solver.tol, h_max).integrate(
            |t, y, dy| gen.eval(t, y, dy),
            t0,
            t1,
            &mut y,
            h_carry,
            &outputs,
            check,
            |i, t, v| observer(i, t, &wrap(v)),
        )?;
        stats += s;
        h_carry = Some(h_last);
    }
    Ok(stats)
}

/// Full trajectory on `grid`; see [`propagate_observed`].
pub fn propagate(
    system: &SystemSpec,
    field: &IntracavityField,
    phonon: &PhononSpec,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    solver: &SolverOptions,
) -> Result<Trajectory> {
    let n = grid.n_points();
    let mut states = Vec::with_capacity(n);
    let mut photon_number = Vec::with_capacity(n);
    let mut excited_pop = Vec::with_capacity(n);
    let space: HilbertSpec = system.hilbert;
    let stats = propagate_observed(system, field, phonon, rho0, grid, solver, |_, _, rho| {
        let (p, e) = diagonal_observables(&space, rho.matrix());
        photon_number.push(p);
        excited_pop.push(e);
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        grid: *grid,
        stats,
        states,
        photon_number,
        excited_pop,
    })
}
