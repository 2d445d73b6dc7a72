//! Metric operators, similarity maps between the non-Hermitian `H` and its
//! Hermitian partner `h`, physical observables, and position densities.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QhermError, Result};
use crate::opalg::{
    adjoint_exp, eig_hermitian, hermite_functions, interior_norm, HermitianEigen, NcPolynomial,
    OperatorMatrix, SeriesDepth, StateVector, C64,
};

/// Where a metric comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Exact,
    /// Correct through this order in the coupling.
    PerturbativeOrder(u32),
}

impl Provenance {
    fn series_depth(self) -> SeriesDepth {
        match self {
            Provenance::Exact => SeriesDepth::UntilNilpotent { max_depth: 24 },
            // two orders past the metric's own accuracy: the neglected
            // remainder is then far below what the metric itself gets wrong
            Provenance::PerturbativeOrder(k) => SeriesDepth::Fixed(2 * k as usize + 2),
        }
    }
}

/// Known closed form of `Q`, when there is one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MetricShape {
    General,
    /// `Q = c x^2`.
    PositionQuadratic {
        c: f64,
    },
    /// `Q = c p^2`.
    MomentumQuadratic {
        c: f64,
    },
}

/// `Q` with `eta = e^{-Q}`, `rho = e^{-Q/2}` and `rho^{-1} = e^{Q/2}`.
#[derive(Clone, Debug)]
pub struct MetricPackage {
    q: OperatorMatrix,
    eta: OperatorMatrix,
    rho: OperatorMatrix,
    rho_inv: OperatorMatrix,
    provenance: Provenance,
    shape: MetricShape,
}

/// Tolerance for `Q` being Hermitian (relative to `max(1, max|Q|)`).
const Q_HERMITIAN_TOL: f64 = 1e-10;

/// Build the package from `Q` by Hermitian eigendecomposition.
pub fn metric_from_q(q: OperatorMatrix, provenance: Provenance) -> Result<MetricPackage> {
    let eig = eig_hermitian(&q)?;
    Ok(MetricPackage::assemble(q, &eig, provenance))
}

impl MetricPackage {
    /// Build from `Q` and an eigensystem of `Q` supplied by the caller, for
    /// when a more accurate one is known than a generic solver would find.
    /// The eigensystem must reproduce `Q`.
    pub fn from_eigensystem(
        q: OperatorMatrix,
        eig: &HermitianEigen,
        provenance: Provenance,
    ) -> Result<Self> {
        let asymmetry = q.hermiticity_defect();
        let scale = q.max_abs().max(1.0);
        if asymmetry > Q_HERMITIAN_TOL * scale {
            return Err(QhermError::NotHermitian { asymmetry });
        }
        let rebuilt = eig.apply_fn(|l| C64::new(l, 0.0));
        let mismatch = (&rebuilt - &q).max_abs();
        if mismatch > 1e-9 * scale {
            return Err(QhermError::NotHermitian {
                asymmetry: mismatch,
            });
        }
        Ok(Self::assemble(q, eig, provenance))
    }

    fn assemble(q: OperatorMatrix, eig: &HermitianEigen, provenance: Provenance) -> Self {
        let eta = eig.apply_fn(|l| C64::new((-l).exp(), 0.0));
        let rho = eig.apply_fn(|l| C64::new((-0.5 * l).exp(), 0.0));
        let rho_inv = eig.apply_fn(|l| C64::new((0.5 * l).exp(), 0.0));
        Self {
            q,
            eta,
            rho,
            rho_inv,
            provenance,
            shape: MetricShape::General,
        }
    }

    /// `Q = 0`.
    pub fn trivial(basis: crate::opalg::BasisSpec) -> Self {
        let id = OperatorMatrix::identity(basis);
        Self {
            q: OperatorMatrix::zeros(basis),
            eta: id.clone(),
            rho: id.clone(),
            rho_inv: id,
            provenance: Provenance::Exact,
            shape: MetricShape::PositionQuadratic { c: 0.0 },
        }
    }

    /// Record the closed form of `Q`. The caller vouches for it.
    pub fn with_shape(mut self, shape: MetricShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn shape(&self) -> MetricShape {
        self.shape
    }

    pub fn q(&self) -> &OperatorMatrix {
        &self.q
    }
    pub fn eta(&self) -> &OperatorMatrix {
        &self.eta
    }
    pub fn rho(&self) -> &OperatorMatrix {
        &self.rho
    }
    pub fn rho_inv(&self) -> &OperatorMatrix {
        &self.rho_inv
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `e^{sQ} A e^{-sQ}`.
    ///
    /// Summed as a commutator series: exact metrics stop at the first
    /// vanishing term (polynomial `Q` and `A`), perturbative ones at a fixed
    /// depth. A series that never terminates falls back to the dense
    /// product of exponentials.
    pub fn conjugate(&self, a: &OperatorMatrix, s: f64) -> OperatorMatrix {
        let out = adjoint_exp(&self.q, a, s, self.provenance.series_depth());
        if out.terminated {
            return out.value;
        }
        let (left, right) = self.dense_pair(s);
        &(&left * a) * &right
    }

    fn dense_pair(&self, s: f64) -> (OperatorMatrix, OperatorMatrix) {
        if s == 0.5 {
            (self.rho_inv.clone(), self.rho.clone())
        } else if s == -0.5 {
            (self.rho.clone(), self.rho_inv.clone())
        } else if s == -1.0 {
            (self.eta.clone(), &self.rho_inv * &self.rho_inv)
        } else {
            let eig = eig_hermitian(&self.q).expect("Q was validated as Hermitian");
            (
                eig.apply_fn(|l| C64::new((s * l).exp(), 0.0)),
                eig.apply_fn(|l| C64::new((-s * l).exp(), 0.0)),
            )
        }
    }

    /// Dense `rho^{-1} A rho`, bypassing the commutator series.
    pub fn conjugate_dense(&self, a: &OperatorMatrix) -> OperatorMatrix {
        &(&self.rho_inv * a) * &self.rho
    }
}

/// Physical position and momentum `X = rho^{-1} x rho`, `P = rho^{-1} p rho`.
#[derive(Clone, Debug)]
pub struct ObservablePair {
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
    pub metric: Arc<MetricPackage>,
    /// Accuracy of `x` and `p` themselves, which may exceed the metric's.
    pub provenance: Provenance,
}

impl ObservablePair {
    pub fn from_metric(x: &OperatorMatrix, p: &OperatorMatrix, metric: Arc<MetricPackage>) -> Self {
        Self {
            x: observable_from(x, &metric),
            p: observable_from(p, &metric),
            provenance: metric.provenance(),
            metric,
        }
    }

    /// Interior max of `X^dag eta - eta X` and the same for `P`.
    pub fn observable_defects(&self, margin: usize) -> Result<(f64, f64)> {
        let eta = self.metric.eta();
        let d = |a: &OperatorMatrix| interior_norm(&(&(&a.adjoint() * eta) - &(eta * a)), margin);
        Ok((d(&self.x)?, d(&self.p)?))
    }

    /// Interior norm of `[X, P] - i`.
    pub fn canonical_defect(&self, margin: usize) -> Result<f64> {
        let id = OperatorMatrix::identity(self.x.basis()).scale(crate::opalg::I);
        interior_norm(&(&self.x.commutator(&self.p) - &id), margin)
    }
}

/// A non-Hermitian model bundled with its Hermitian partner.
#[derive(Clone, Debug)]
pub struct QuasiSystem {
    pub big_h: OperatorMatrix,
    /// Hermitian partner on the bare `(x, p)`.
    pub small_h: OperatorMatrix,
    /// The same partner as a polynomial in the physical `(X, P)`.
    pub h_poly: NcPolynomial,
    /// Mass that multiplies velocities in the partner.
    pub mu: f64,
    pub x: OperatorMatrix,
    pub p: OperatorMatrix,
    pub pair: ObservablePair,
}

impl QuasiSystem {
    pub fn metric(&self) -> &MetricPackage {
        &self.pair.metric
    }

    pub fn basis(&self) -> crate::opalg::BasisSpec {
        self.big_h.basis()
    }
}

/// `|eta H eta^{-1} - H^dag| / |H|` on the interior block.
pub fn quasi_hermiticity_residual(
    h: &OperatorMatrix,
    m: &MetricPackage,
    margin: usize,
) -> Result<f64> {
    let conj = m.conjugate(h, -1.0);
    let num = interior_norm(&(&conj - &h.adjoint()), margin)?;
    let den = interior_norm(h, margin)?;
    Ok(if den == 0.0 { num } else { num / den })
}

/// `h = rho H rho^{-1}`.
pub fn to_hermitian(h: &OperatorMatrix, m: &MetricPackage) -> OperatorMatrix {
    m.conjugate(h, -0.5)
}

/// `A = rho^{-1} a rho`.
pub fn observable_from(a: &OperatorMatrix, m: &MetricPackage) -> OperatorMatrix {
    m.conjugate(a, 0.5)
}

/// `psi = rho^{-1} phi`.
pub fn state_from_hermitian(phi: &StateVector, m: &MetricPackage) -> StateVector {
    m.rho_inv().apply(phi)
}

/// `phi = rho psi`.
pub fn state_to_hermitian(psi: &StateVector, m: &MetricPackage) -> StateVector {
    m.rho().apply(psi)
}

/// `<u| eta |v>`.
pub fn eta_inner(u: &StateVector, v: &StateVector, m: &MetricPackage) -> C64 {
    u.dot(&m.eta().apply(v))
}

/// `<u| eta O |v>`.
pub fn matrix_element(
    u: &StateVector,
    o: &OperatorMatrix,
    v: &StateVector,
    m: &MetricPackage,
) -> C64 {
    u.dot(&m.eta().apply(&o.apply(v)))
}

/// Rescale a right eigenvector of `H` so `<psi|eta|psi> = 1`, with its phase
/// chosen so that `<phi|rho psi>` is real and positive.
pub fn align_to_hermitian(psi: &StateVector, phi: &StateVector, m: &MetricPackage) -> StateVector {
    let norm = eta_inner(psi, psi, m).re.sqrt();
    let psi = psi.scale(C64::new(1.0 / norm, 0.0));
    let overlap = phi.dot(&m.rho().apply(&psi));
    if overlap.norm() == 0.0 {
        return psi;
    }
    psi.scale(overlap.conj() / overlap.norm())
}

/// Sample points for position-space quantities, with trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl PositionGrid {
    /// `lo, lo + step, ..., hi` (inclusive, rounded to the nearest count).
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Result<Self> {
        crate::opalg::check_positive("grid step", step)?;
        if !(hi > lo) {
            return Err(QhermError::NonPositive {
                name: "grid span",
                value: hi - lo,
            });
        }
        let count = ((hi - lo) / step).round() as usize + 1;
        let points: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
        let mut weights = vec![step; count];
        weights[0] = 0.5 * step;
        weights[count - 1] = 0.5 * step;
        Ok(Self { points, weights })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// `sum_n phi_n chi_n(x)` on the grid, `chi_n` the Hermite functions of the
/// `(mu, omega)` oscillator.
pub fn position_wavefunction(
    phi: &StateVector,
    grid: &PositionGrid,
    mu: f64,
    omega: f64,
) -> Result<Vec<C64>> {
    crate::opalg::check_positive("mass", mu)?;
    crate::opalg::check_positive("frequency", omega)?;
    let n = phi.basis().dim();
    let scale = (mu * omega).sqrt();
    // well beyond the classical turning point of the top level, every
    // retained Hermite function has decayed to nothing
    let support = 2.0 * (2.0 * n as f64 + 1.0).sqrt() / scale;
    let norm = scale.sqrt();
    grid.points
        .iter()
        .map(|&x| {
            if x.abs() > support {
                return Err(QhermError::OutsideSupport { x, support });
            }
            let chi = hermite_functions(scale * x, n);
            Ok(chi
                .iter()
                .zip(phi.amplitudes().iter())
                .map(|(c, a)| a * (c * norm))
                .sum())
        })
        .collect()
}

/// `|<x| rho |psi>|^2` on the grid.
pub fn probability_density(
    psi: &StateVector,
    m: &MetricPackage,
    grid: &PositionGrid,
    mu: f64,
    omega: f64,
) -> Result<Vec<f64>> {
    let phi = state_to_hermitian(psi, m);
    Ok(position_wavefunction(&phi, grid, mu, omega)?
        .iter()
        .map(|z| z.norm_sqr())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{build_xp, BasisSpec, I};
    use approx::assert_abs_diff_eq;

    fn basis() -> BasisSpec {
        BasisSpec::new(32, 4).unwrap()
    }

    #[test]
    fn trivial_metric() {
        let b = basis();
        let m = metric_from_q(OperatorMatrix::zeros(b), Provenance::Exact).unwrap();
        assert!((m.eta() - &OperatorMatrix::identity(b)).max_abs() < 1e-15);
        assert!((m.rho() - &OperatorMatrix::identity(b)).max_abs() < 1e-15);
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        let h = (&p * &p + &x * &x).scale_re(0.5);
        assert!(quasi_hermiticity_residual(&h, &m, 4).unwrap() < 1e-14);
        assert_eq!(to_hermitian(&h, &m), h);
        assert_eq!(observable_from(&x, &m), x);
        let phi = StateVector::fock(b, 3);
        assert_eq!(state_from_hermitian(&phi, &m), phi);
        assert_abs_diff_eq!(eta_inner(&phi, &phi, &m).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_q() {
        let (x, p) = build_xp(basis(), 1.0, 1.0).unwrap();
        assert!(metric_from_q(&x * &p, Provenance::Exact).is_err());
    }

    #[test]
    fn semigroup_identities() {
        let b = basis();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        let q = (&x * &x).scale_re(0.1) + (&p * &p).scale_re(0.05);
        let m = metric_from_q(q, Provenance::Exact).unwrap();
        assert!((&(m.rho() * m.rho()) - m.eta()).max_abs() < 1e-10);
        assert!((&(m.rho() * m.rho_inv()) - &OperatorMatrix::identity(b)).max_abs() < 1e-10);
        assert!(m.eta().hermiticity_defect() < 1e-10);
    }

    #[test]
    fn series_matches_dense_for_small_generator() {
        let b = BasisSpec::new(40, 8).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        let q = (&p * &p).scale_re(-0.05);
        let m = metric_from_q(q, Provenance::Exact).unwrap();
        let via_series = observable_from(&x, &m);
        let want = &x + &p.scale(I * 0.05);
        assert!(interior_norm(&(&via_series - &want), 8).unwrap() < 1e-12);
        // dense product agrees on the low block when the metric is mild
        let dense = m.conjugate_dense(&x);
        assert!(interior_norm(&(&dense - &want), 19).unwrap() < 1e-8);
    }

    #[test]
    fn uniform_grid() {
        let g = PositionGrid::uniform(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(g.points(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-15);
        assert!(PositionGrid::uniform(1.0, -1.0, 0.5).is_err());
        assert!(PositionGrid::uniform(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ground_state_wavefunction() {
        let b = basis();
        let g = PositionGrid::uniform(-8.0, 8.0, 0.01).unwrap();
        let psi0 = position_wavefunction(&StateVector::fock(b, 0), &g, 1.0, 1.0).unwrap();
        let mid = g.points().len() / 2;
        assert_abs_diff_eq!(psi0[mid].re, 0.75112554, epsilon = 1e-8);
        let psi1 = position_wavefunction(&StateVector::fock(b, 1), &g, 1.0, 1.0).unwrap();
        assert!(psi1[mid].norm() < 1e-15);
        let far = PositionGrid::uniform(100.0, 101.0, 0.5).unwrap();
        assert!(position_wavefunction(&StateVector::fock(b, 0), &far, 1.0, 1.0).is_err());
    }
}
