use num_complex::Complex64;

use crate::error::Result;
use crate::pulse::IntracavityField;
use crate::quantum::{annihilation, number, sigma_minus, CMatrix, HilbertSpec, Operator};
use crate::specfun::ComplexValue;

use super::SystemSpec;

/// Drive-independent pieces of the Hamiltonian.
#[derive(Clone, Debug)]
pub(crate) struct StaticParts {
    /// `delta_c a^dag a + g (a^dag sigma_- + a sigma_+)`
    pub h0: CMatrix,
    /// `sigma_-`
    pub lower: CMatrix,
    /// Diagonal of the excitation number `a^dag a + sigma_+ sigma_-`.
    pub excitations: Vec<f64>,
}

impl StaticParts {
    pub fn new(system: &SystemSpec) -> Self {
        let space: &HilbertSpec = &system.hilbert;
        let a = annihilation(space).into_matrix();
        let sm = sigma_minus(space).into_matrix();
        let jc = a.adjoint() * &sm;
        let h0 = number(space).into_matrix() * Complex64::new(system.delta_omega_c, 0.0)
            + (&jc + jc.adjoint()) * Complex64::new(system.g, 0.0);
        let nf = space.fock_dim();
        let excitations = (0..space.dim()).map(|k| (k % nf + k / nf) as f64).collect();
        Self { h0, lower: sm, excitations }
    }

    /// Subtracts `w N` from `h`, with `N = a^dag a + sigma_+ sigma_-`.
    pub fn shift_frame(&self, w: f64, h: &mut CMatrix) {
        if w == 0.0 {
            return;
        }
        for (k, n) in self.excitations.iter().enumerate() {
            h[(k, k)] -= Complex64::new(w * n, 0.0);
        }
    }

    /// Writes `H` for drive envelope `omega` into `out`.
    ///
    /// The envelope carries `e^{+i d t}` for a laser detuned by `d`, so the
    /// raising operator pairs with its conjugate: `(conj(omega) sigma_+ + omega sigma_-) / 2`.
    pub fn fill(&self, omega: ComplexValue, out: &mut CMatrix) {
        out.copy_from(&self.h0);
        if omega == Complex64::new(0.0, 0.0) {
            return;
        }
        let half = omega * 0.5;
        let n = self.lower.nrows();
        for i in 0..n {
            for j in 0..n {
                let s = self.lower[(i, j)];
                if s != Complex64::new(0.0, 0.0) {
                    // sigma_- has entry (i, j); sigma_+ has entry (j, i)
                    out[(i, j)] += half * s;
                    out[(j, i)] += half.conj() * s;
                }
            }
        }
    }
}

/// Hamiltonian (over hbar) at time `t`:
/// `delta_c a^dag a + g (a^dag sigma_- + a sigma_+) + (conj(Omega) sigma_+ + Omega sigma_-) / 2`.
///
/// Fails when `t` lies outside the field grid.
pub fn hamiltonian_at(system: &SystemSpec, field: &IntracavityField, t: f64) -> Result<Operator> {
    let omega = field.at(t)?;
    let parts = StaticParts::new(system);
    let mut h = CMatrix::zeros(parts.h0.nrows(), parts.h0.ncols());
    parts.fill(omega, &mut h);
    Ok(Operator::from_matrix(h))
}

/// Hamiltonian seen by the phonon bath at `t`: [`hamiltonian_at`] in the frame
/// co-rotating with the drive phase, `H(t) - w(t) (a^dag a + sigma_+ sigma_-)`
/// with `w` the instantaneous drive frequency. For a drive of fixed
/// frequency this matrix is time independent up to the envelope magnitude.
pub fn frozen_hamiltonian(system: &SystemSpec, field: &IntracavityField, t: f64) -> Result<Operator> {
    let mut h = hamiltonian_at(system, field, t)?.into_matrix();
    StaticParts::new(system).shift_frame(field.instantaneous_frequency(t), &mut h);
    Ok(Operator::from_matrix(h))
}
