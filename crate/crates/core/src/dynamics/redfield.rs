use std::ops::Range;

use num_complex::Complex64;

use crate::phonon::{bath_rate, DissipatorForm, PhononSpec};
use crate::quantum::{CMatrix, DensityMatrix, Operator};

use super::SystemSpec;

/// Relative gap (in units of `kappa`) below which two eigenvalues count as degenerate.
const DEGENERACY_GAP: f64 = 1e-6;
/// Levels closer than this (in units of `kappa`) share one secular cluster.
pub const SECULAR_CLUSTER_GAP: f64 = 1e-2;

/// Phonon dissipator for a frozen Hamiltonian, coupling through the exciton
/// population `A = sigma_+ sigma_-`. With `H |m> = E_m |m>` and the one-sided
/// bath rate `gamma` of [`bath_rate`]:
///
/// Universal form: `D(rho) = L rho L^dag - {L^dag L, rho} / 2` with the single
/// jump `L = sum_mn sqrt(gamma(E_n - E_m)) A_mn |m><n|`.
///
/// Redfield form: `D(rho) = X + X^dag` with `X = Lambda rho A - A Lambda rho`
/// and `Lambda_mn = gamma(E_n - E_m) A_mn / 2`.
///
/// Secular form: levels are grouped into clusters of neighbours closer than
/// [`SECULAR_CLUSTER_GAP`]` * kappa`, and each ordered pair of clusters
/// `(a, b)` contributes a Lindblad jump `sqrt(gamma(w_ab)) P_a A P_b`, with
/// `w_ab` the difference of the cluster mean energies. Grouping keeps the
/// result independent of how the eigensolver splits a near-degenerate
/// subspace, e.g. at a weakly avoided crossing.
#[derive(Clone, Debug)]
pub struct RedfieldDissipator {
    kind: Kind,
    degenerate: bool,
}

#[derive(Clone, Debug)]
struct Jump {
    to: Range<usize>,
    from: Range<usize>,
    /// `sqrt(rate) P_to A P_from`, rows `to`, columns `from`
    op: CMatrix,
}

#[derive(Clone, Debug)]
enum Kind {
    Zero,
    Universal {
        jump: CMatrix,
        /// `L^dag L`
        loss: CMatrix,
    },
    Full {
        lambda: CMatrix,
        excited: Vec<f64>,
    },
    Secular {
        /// eigenvectors ordered by energy
        basis: CMatrix,
        jumps: Vec<Jump>,
        /// `sum L^dag L` in the eigenbasis
        loss: CMatrix,
    },
}

/// Dissipator for the instantaneous Hamiltonian `h_now`.
pub fn redfield_dissipator(system: &SystemSpec, phonon: &PhononSpec, h_now: &Operator) -> RedfieldDissipator {
    RedfieldDissipator::build(system, phonon, h_now.matrix())
}

impl RedfieldDissipator {
    pub(crate) fn build(system: &SystemSpec, phonon: &PhononSpec, h: &CMatrix) -> Self {
        if !phonon.enabled {
            return Self {
                kind: Kind::Zero,
                degenerate: false,
            };
        }
        let dim = h.nrows();
        let nf = system.hilbert.fock_dim();

        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let v = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);

        // A in the eigenbasis: V^dag P V, using only the excited rows of V
        let ve = v.rows(nf, dim - nf);
        let a_eig = ve.adjoint() * ve;

        let degenerate = energies.windows(2).any(|w| w[1] - w[0] < DEGENERACY_GAP * system.kappa);
        let rate = |m: usize, n: usize| if m == n { 0.0 } else { bath_rate(phonon, energies[n] - energies[m]) };
        let kind = match phonon.form {
            DissipatorForm::Universal => {
                let root = CMatrix::from_fn(dim, dim, |m, n| Complex64::new(rate(m, n).sqrt(), 0.0));
                let jump = &v * a_eig.component_mul(&root) * v.adjoint();
                let loss = jump.adjoint() * &jump;
                Kind::Universal { jump, loss }
            }
            DissipatorForm::Secular => secular(phonon, &energies, v, &a_eig, SECULAR_CLUSTER_GAP * system.kappa),
            DissipatorForm::Redfield => {
                let gamma = CMatrix::from_fn(dim, dim, |m, n| Complex64::new(rate(m, n), 0.0));
                let lambda_eig = a_eig.component_mul(&gamma) * Complex64::new(0.5, 0.0);
                let lambda = &v * lambda_eig * v.adjoint();
                let excited = (0..dim).map(|k| if k >= nf { 1.0 } else { 0.0 }).collect();
                Kind::Full { lambda, excited }
            }
        };
        Self { kind, degenerate }
    }

    /// True when the Hamiltonian it was built from had near-degenerate levels.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// `D(rho)`.
    pub fn apply(&self, rho: &DensityMatrix) -> CMatrix {
        let m = rho.matrix();
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        self.add_to(m, &mut out);
        out
    }

    /// Accumulates `D(rho)` into `out`.
    pub(crate) fn add_to(&self, rho: &CMatrix, out: &mut CMatrix) {
        match &self.kind {
            Kind::Zero => {}
            Kind::Universal { jump, loss } => {
                let lr = jump * rho;
                *out += &lr * jump.adjoint() - (loss * rho + rho * loss) * Complex64::new(0.5, 0.0);
            }
            Kind::Full { lambda, excited } => {
                let m = lambda * rho;
                let n = m.nrows();
                for j in 0..n {
                    for i in 0..n {
                        let d = excited[j] - excited[i];
                        if d != 0.0 {
                            let x = m[(i, j)] * d;
                            out[(i, j)] += x;
                            out[(j, i)] += x.conj();
                        }
                    }
                }
            }
            Kind::Secular { basis, jumps, loss } => {
                let r = basis.adjoint() * rho * basis;
                let mut d = (loss * &r + &r * loss) * Complex64::new(-0.5, 0.0);
                for j in jumps {
                    let block = r.view((j.from.start, j.from.start), (j.from.len(), j.from.len()));
                    let gain = &j.op * block * j.op.adjoint();
                    let mut target = d.view_mut((j.to.start, j.to.start), (j.to.len(), j.to.len()));
                    target += gain;
                }
                *out += basis * d * basis.adjoint();
            }
        }
    }
}

fn secular(phonon: &PhononSpec, energies: &[f64], basis: CMatrix, a_eig: &CMatrix, cluster_gap: f64) -> Kind {
    let dim = energies.len();
    let mut starts = vec![0];
    starts.extend((1..dim).filter(|&k| energies[k] - energies[k - 1] >= cluster_gap));
    starts.push(dim);
    let clusters: Vec<Range<usize>> = starts.windows(2).map(|w| w[0]..w[1]).collect();
    let mean = |c: &Range<usize>| energies[c.clone()].iter().sum::<f64>() / c.len() as f64;

    let mut jumps = Vec::new();
    let mut loss = CMatrix::zeros(dim, dim);
    for a in &clusters {
        for b in &clusters {
            if a == b {
                continue;
            }
            let rate = bath_rate(phonon, mean(b) - mean(a));
            let block = a_eig.view((a.start, b.start), (a.len(), b.len()));
            if rate == 0.0 || block.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let op = block * Complex64::new(rate.sqrt(), 0.0);
            let mut l = loss.view_mut((b.start, b.start), (b.len(), b.len()));
            l += op.adjoint() * &op;
            jumps.push(Jump {
                to: a.clone(),
                from: b.clone(),
                op,
            });
        }
    }
    Kind::Secular { basis, jumps, loss }
}
