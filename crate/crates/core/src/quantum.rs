//! Dense operators on the emitter (x) truncated-Fock space.
//!
//! Basis ordering is TLS (x) Fock: index `k = s (n_max + 1) + n` with
//! `s = 0` for the ground and `s = 1` for the excited state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ComplexValue;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    pub n_max: usize,
}

impl HilbertSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::config("solver.n_max", "Fock truncation must be >= 1"));
        }
        Ok(Self { n_max })
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim()
    }

    /// Basis index of `|s, n>`; `excited` selects `s`.
    pub fn index(&self, excited: bool, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        usize::from(excited) * self.fock_dim() + n
    }
}

/// Dense operator on a [`HilbertSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(CMatrix);

impl Operator {
    pub fn from_matrix(m: CMatrix) -> Self {
        assert!(m.is_square(), "operators are square");
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.0 - self.0.adjoint()).camax() <= tol
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

/// Density matrix. Construction through [`DensityMatrix::new`] validates
/// Hermiticity, unit trace and positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = Self(m);
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix without validation; used by the propagator, which
    /// checks invariants itself.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// Pure basis state `|k><k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    /// `|g, 0><g, 0|`.
    pub fn ground(space: &HilbertSpec) -> Self {
        Self::basis_state(space.dim(), space.index(false, 0))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every eigenvalue exceeds `-tol`, tested via a Cholesky
    /// factorization of `rho + tol I`.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let n = self.dim();
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0)
            + CMatrix::identity(n, n) * Complex64::new(tol, 0.0);
        hermitian_cholesky_succeeds(h)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.0 - self.0.adjoint()).camax();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvariantViolation {
                t: f64::NAN,
                what: format!("density matrix not Hermitian (deviation {herm:.3e})"),
            });
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvariantViolation {
                t: f64::NAN,
                what: format!("density matrix trace {tr} differs from 1"),
            });
        }
        let lmin = self.min_eigenvalue();
        if lmin < -POSITIVITY_TOL {
            return Err(Error::InvariantViolation {
                t: f64::NAN,
                what: format!("density matrix has eigenvalue {lmin:.3e}"),
            });
        }
        Ok(())
    }
}

/// In-place Cholesky of a Hermitian matrix; false at the first non-positive pivot.
fn hermitian_cholesky_succeeds(mut m: CMatrix) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= m[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        m[(j, j)] = Complex64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / d;
        }
    }
    true
}

fn on_fock(fock: &CMatrix) -> Operator {
    Operator(CMatrix::identity(2, 2).kronecker(fock))
}

fn on_tls(space: &HilbertSpec, tls: &CMatrix) -> Operator {
    let nf = space.fock_dim();
    Operator(tls.kronecker(&CMatrix::identity(nf, nf)))
}

/// Collection-mode annihilation operator `1 (x) a`.
pub fn annihilation(space: &HilbertSpec) -> Operator {
    let nf = space.fock_dim();
    let mut a = CMatrix::zeros(nf, nf);
    for n in 1..nf {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    on_fock(&a)
}

pub fn creation(space: &HilbertSpec) -> Operator {
    annihilation(space).adjoint()
}

pub fn number(space: &HilbertSpec) -> Operator {
    let a = annihilation(space);
    &a.adjoint() * &a
}

/// Emitter lowering operator `|g><e| (x) 1`.
pub fn sigma_minus(space: &HilbertSpec) -> Operator {
    let mut s = CMatrix::zeros(2, 2);
    s[(0, 1)] = Complex64::new(1.0, 0.0);
    on_tls(space, &s)
}

pub fn sigma_plus(space: &HilbertSpec) -> Operator {
    sigma_minus(space).adjoint()
}

/// Excited-state projector `sigma_+ sigma_-`.
pub fn excited_projector(space: &HilbertSpec) -> Operator {
    &sigma_plus(space) * &sigma_minus(space)
}

/// `Tr(rho op)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<ComplexValue> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: op.dim(),
        });
    }
    Ok(trace_of_product(rho.matrix(), op.matrix()))
}

/// `Tr(a b)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Reduced emitter state, tracing out the collection mode.
pub fn partial_trace_tls(rho: &DensityMatrix, space: &HilbertSpec) -> Result<DensityMatrix> {
    if rho.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: rho.dim(),
        });
    }
    let nf = space.fock_dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(2, 2);
    for s in 0..2 {
        for r in 0..2 {
            out[(s, r)] = (0..nf).map(|n| m[(s * nf + n, r * nf + n)]).sum();
        }
    }
    Ok(DensityMatrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket(dim: usize, k: usize) -> DMatrix<Complex64> {
        let mut v = DMatrix::zeros(dim, 1);
        v[(k, 0)] = c(1.0);
        v
    }

    #[test]
    fn rejects_zero_truncation() {
        assert!(HilbertSpec::new(0).is_err());
        assert_eq!(HilbertSpec::new(3).unwrap().dim(), 8);
    }

    #[test]
    fn annihilation_on_single_photon() {
        let s = HilbertSpec::new(1).unwrap();
        let a = annihilation(&s);
        let one = ket(s.dim(), s.index(false, 1));
        let zero = ket(s.dim(), s.index(false, 0));
        assert_eq!(a.matrix() * &one, zero);
        assert!((a.matrix() * &zero).camax() == 0.0);
    }

    #[test]
    fn number_operator_diagonal() {
        let s = HilbertSpec::new(4).unwrap();
        let n = number(&s);
        for exc in [false, true] {
            for k in 0..=4 {
                let i = s.index(exc, k);
                assert!((n.matrix()[(i, i)].re - k as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn commutator_is_identity_below_truncation() {
        let s = HilbertSpec::new(3).unwrap();
        let a = annihilation(&s);
        let ad = creation(&s);
        let comm = (&a * &ad).into_matrix() - (&ad * &a).into_matrix();
        for exc in [false, true] {
            for k in 0..3 {
                let i = s.index(exc, k);
                assert!((comm[(i, i)] - c(1.0)).norm() < 1e-14);
            }
            let edge = s.index(exc, 3);
            assert!((comm[(edge, edge)] - c(-3.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn sigma_algebra() {
        let s = HilbertSpec::new(2).unwrap();
        let sm = sigma_minus(&s);
        let sp = sigma_plus(&s);
        assert!((&sm * &sm).matrix().camax() == 0.0);
        let e0 = ket(s.dim(), s.index(true, 0));
        assert_eq!(sm.matrix() * &e0, ket(s.dim(), s.index(false, 0)));
        for n in 0..=2 {
            assert!((sm.matrix() * ket(s.dim(), s.index(false, n))).camax() == 0.0);
        }
        let anti = (&sp * &sm).into_matrix() + (&sm * &sp).into_matrix();
        assert_eq!(anti, CMatrix::identity(s.dim(), s.dim()));
    }

    #[test]
    fn golden_operators_for_two_photons() {
        // TLS (x) Fock, n_max = 2: rows/cols g0 g1 g2 e0 e1 e2
        let s = HilbertSpec::new(2).unwrap();
        let r2 = 2f64.sqrt();
        #[rustfmt::skip]
        let a_gold = [
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, r2,  0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, r2,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        #[rustfmt::skip]
        let sm_gold = [
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        let to_m = |v: &[f64]| CMatrix::from_row_iterator(6, 6, v.iter().map(|x| c(*x)));
        assert_eq!(annihilation(&s).matrix(), &to_m(&a_gold));
        assert_eq!(sigma_minus(&s).matrix(), &to_m(&sm_gold));
    }

    #[test]
    fn expectation_values() {
        let s = HilbertSpec::new(3).unwrap();
        let g0 = DensityMatrix::ground(&s);
        assert_eq!(expectation(&g0, &number(&s)).unwrap(), c(0.0));
        let e0 = DensityMatrix::basis_state(s.dim(), s.index(true, 0));
        assert_eq!(expectation(&e0, &excited_projector(&s)).unwrap(), c(1.0));
        let mixed = DensityMatrix::maximally_mixed(s.dim());
        let v = expectation(&mixed, &Operator::identity(s.dim())).unwrap();
        assert!((v - c(1.0)).norm() < 1e-14);
        let wrong = Operator::identity(4);
        assert!(matches!(expectation(&g0, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn partial_trace_cases() {
        let s = HilbertSpec::new(3).unwrap();
        let e0 = DensityMatrix::basis_state(s.dim(), s.index(true, 0));
        let r = partial_trace_tls(&e0, &s).unwrap();
        assert_eq!(r.matrix()[(1, 1)], c(1.0));
        assert_eq!(r.matrix()[(0, 0)], c(0.0));
        let mixed = DensityMatrix::maximally_mixed(s.dim());
        let r = partial_trace_tls(&mixed, &s).unwrap();
        assert!((r.matrix() - CMatrix::identity(2, 2) * c(0.5)).camax() < 1e-15);
        r.validate().unwrap();
        assert!(partial_trace_tls(&DensityMatrix::maximally_mixed(6), &s).is_err());
    }

    #[test]
    fn validation_catches_bad_states() {
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.1);
        neg[(1, 1)] = c(-0.1);
        assert!(DensityMatrix::new(neg.clone()).is_err());
        assert!(!DensityMatrix(neg).is_positive_within(1e-6));
        assert!(DensityMatrix::maximally_mixed(4).is_positive_within(1e-6));
    }

    fn random_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(move |v| CMatrix::from_iterator(dim, dim, v.into_iter().map(|(r, i)| Complex64::new(r, i))))
    }

    proptest! {
        #[test]
        fn adjoint_reverses_products(a in random_matrix(6), b in random_matrix(6)) {
            let (a, b) = (Operator::from_matrix(a), Operator::from_matrix(b));
            let lhs = (&a * &b).adjoint();
            let rhs = &b.adjoint() * &a.adjoint();
            prop_assert!((lhs.matrix() - rhs.matrix()).camax() < 1e-12);
        }

        #[test]
        fn partial_trace_preserves_trace(a in random_matrix(8)) {
            let s = HilbertSpec::new(3).unwrap();
            let h = &a * a.adjoint();
            let tr = h.trace();
            let rho = DensityMatrix(h / tr);
            let red = partial_trace_tls(&rho, &s).unwrap();
            prop_assert!((red.trace() - rho.trace()).norm() < 1e-12);
            prop_assert!(red.validate().is_ok());
        }
    }
}
