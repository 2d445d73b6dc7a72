//! Fock-basis operator algebra.
//!
//! Everything is a dense complex matrix in the number basis of an oscillator
//! of mass `mu` and frequency `omega`, with hbar = 1. Composite operators are
//! always products of the truncated `x` and `p`, so algebraic identities hold
//! away from the bottom-right corner; [`interior_norm`] measures residuals
//! on the block that excludes it.

mod eigen;
mod expm;
mod ncpoly;
mod series;
mod spectral;

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QhermError, Result};

pub use eigen::{eig_general, eig_hermitian, fix_phase, Eigenpair, HermitianEigen};
pub use expm::{general_expm, herm_expm};
pub use ncpoly::{Monomial, NcPolynomial, Symbol};
pub use series::{adjoint_exp, SeriesDepth, SeriesOutcome};
pub use spectral::{hermite_functions, momentum_spectrum, position_spectrum};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Truncation size and the number of trailing rows/columns excluded from
/// residual checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    dim: usize,
    margin: usize,
}

impl BasisSpec {
    pub const MIN_DIM: usize = 8;

    pub fn new(dim: usize, margin: usize) -> Result<Self> {
        if dim < Self::MIN_DIM || 2 * margin >= dim {
            return Err(QhermError::InvalidBasis { dim, margin });
        }
        Ok(Self { dim, margin })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Same truncation, different margin.
    pub fn with_margin(&self, margin: usize) -> Result<Self> {
        Self::new(self.dim, margin)
    }

    /// Largest margin allowed for this dimension.
    pub fn max_margin(&self) -> usize {
        (self.dim - 1) / 2
    }
}

/// Dense operator tagged with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisSpec,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_matrix(basis: BasisSpec, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != basis.dim() || entries.ncols() != basis.dim() {
            return Err(QhermError::BasisMismatch {
                left: basis.dim(),
                right: entries.nrows(),
            });
        }
        Ok(Self { basis, entries })
    }

    pub(crate) fn wrap(basis: BasisSpec, entries: DMatrix<C64>) -> Self {
        debug_assert_eq!(entries.nrows(), basis.dim());
        Self { basis, entries }
    }

    pub fn zeros(basis: BasisSpec) -> Self {
        Self::wrap(basis, DMatrix::zeros(basis.dim(), basis.dim()))
    }

    pub fn identity(basis: BasisSpec) -> Self {
        Self::wrap(basis, DMatrix::identity(basis.dim(), basis.dim()))
    }

    pub fn from_diagonal(basis: BasisSpec, diag: &[C64]) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(QhermError::BasisMismatch {
                left: basis.dim(),
                right: diag.len(),
            });
        }
        Ok(Self::wrap(
            basis,
            DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        ))
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.basis, self.entries.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.basis, self.entries.transpose())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::wrap(self.basis, &self.entries * factor)
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `self * other + other * self`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self * other + other * self
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut out = Self::identity(self.basis);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-abs entry of `M - M^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                let d = self.entries[(r, c)] - self.entries[(c, r)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Hermitian part `(M + M^dag)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap(
            self.basis,
            (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_same_basis(self.basis, v.basis);
        StateVector::wrap(self.basis, &self.entries * &v.amplitudes)
    }

    /// One-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.dim())
            .map(|c| self.entries.column(c).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Same entries re-tagged with a different margin.
    pub fn rebased(&self, basis: BasisSpec) -> Result<Self> {
        Self::from_matrix(basis, self.entries.clone())
    }
}

fn assert_same_basis(a: BasisSpec, b: BasisSpec) {
    assert_eq!(
        a.dim(),
        b.dim(),
        "operators from different truncations cannot be combined"
    );
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self.basis, rhs.basis);
        OperatorMatrix::wrap(self.basis, &self.entries * &rhs.entries)
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self * &rhs
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self.basis, rhs.basis);
        OperatorMatrix::wrap(self.basis, &self.entries + &rhs.entries)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(mut self, rhs: OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self.basis, rhs.basis);
        self.entries += rhs.entries;
        self
    }
}

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        assert_same_basis(self.basis, rhs.basis);
        self.entries += &rhs.entries;
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self.basis, rhs.basis);
        OperatorMatrix::wrap(self.basis, &self.entries - &rhs.entries)
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(mut self, rhs: OperatorMatrix) -> OperatorMatrix {
        assert_same_basis(self.basis, rhs.basis);
        self.entries -= rhs.entries;
        self
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix::wrap(self.basis, -self.entries)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale_re(rhs)
    }
}

/// Column of amplitudes in a given basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: BasisSpec,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: BasisSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(QhermError::BasisMismatch {
                left: basis.dim(),
                right: amplitudes.len(),
            });
        }
        Ok(Self::wrap(basis, DVector::from_vec(amplitudes)))
    }

    pub(crate) fn wrap(basis: BasisSpec, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        Self { basis, amplitudes }
    }

    /// Number state `|n>`.
    pub fn fock(basis: BasisSpec, n: usize) -> Self {
        let mut v = DVector::zeros(basis.dim());
        v[n] = C64::new(1.0, 0.0);
        Self::wrap(basis, v)
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn get(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    /// Euclidean `<self|other>`, antilinear in `self`.
    pub fn dot(&self, other: &Self) -> C64 {
        assert_same_basis(self.basis, other.basis);
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::wrap(self.basis, &self.amplitudes / C64::new(n, 0.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::wrap(self.basis, &self.amplitudes * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_same_basis(self.basis, other.basis);
        Self::wrap(self.basis, &self.amplitudes + &other.amplitudes)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_same_basis(self.basis, other.basis);
        Self::wrap(self.basis, &self.amplitudes - &other.amplitudes)
    }
}

/// Annihilation and creation operators, `a[n, n+1] = sqrt(n+1)`.
pub fn build_ladder(basis: BasisSpec) -> (OperatorMatrix, OperatorMatrix) {
    let n = basis.dim();
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        a[(k, k + 1)] = C64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    let a_dag = a.transpose();
    (
        OperatorMatrix::wrap(basis, a),
        OperatorMatrix::wrap(basis, a_dag),
    )
}

/// Position and momentum of the oscillator with mass `mass`, frequency `freq`.
pub fn build_xp(
    basis: BasisSpec,
    mass: f64,
    freq: f64,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_positive("mass", mass)?;
    check_positive("frequency", freq)?;
    let (a, a_dag) = build_ladder(basis);
    let x = (&a + &a_dag).scale_re(1.0 / (2.0 * mass * freq).sqrt());
    let p = (&a_dag - &a).scale(I * (mass * freq / 2.0).sqrt());
    Ok((x, p))
}

/// Fock parity `diag((-1)^n)`.
pub fn fock_parity(basis: BasisSpec) -> OperatorMatrix {
    let diag: Vec<C64> = (0..basis.dim())
        .map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    OperatorMatrix::wrap(basis, DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// Max-abs entry of the leading `(dim - margin)` square block.
pub fn interior_norm(m: &OperatorMatrix, margin: usize) -> Result<f64> {
    let dim = m.dim();
    if 2 * margin >= dim {
        return Err(QhermError::MarginOutOfRange { margin, dim });
    }
    Ok(block_max_abs(m.entries(), dim - margin))
}

pub(crate) fn block_max_abs(m: &DMatrix<C64>, k: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..k {
        for r in 0..k {
            worst = worst.max(m[(r, c)].norm());
        }
    }
    worst
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(QhermError::NonPositive { name, value })
    }
}
