//! Model builders: the Swanson oscillator with its two exact metrics, and the
//! imaginary cubic oscillator with its first-order metric and the series for
//! its observables and Hermitian partner.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QhermError, Result};
use crate::nhqcore::{
    metric_from_q, observable_from, MetricPackage, MetricShape, ObservablePair, Provenance,
    QuasiSystem,
};
use crate::opalg::{
    build_xp, eig_general, interior_norm, momentum_spectrum, position_spectrum, BasisSpec,
    Monomial, NcPolynomial, OperatorMatrix, StateVector, Symbol, C64, I,
};
use crate::pertoracle::{rs_state1, PerturbationProblem};

use Symbol::{P, X};

/// Which exact metric accompanies the Swanson Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricCase {
    /// `Q` quadratic in position.
    #[serde(rename = "i")]
    PositionQ,
    /// `Q` quadratic in momentum.
    #[serde(rename = "ii")]
    MomentumQ,
}

impl MetricCase {
    pub fn label(self) -> &'static str {
        match self {
            MetricCase::PositionQ => "i",
            MetricCase::MomentumQ => "ii",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwansonSpec {
    pub m1: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub metric_case: MetricCase,
}

impl SwansonSpec {
    pub fn new(m1: f64, epsilon: f64, omega: f64, metric_case: MetricCase) -> Result<Self> {
        let s = Self {
            m1,
            epsilon,
            omega,
            metric_case,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        crate::opalg::check_positive("m1", self.m1)?;
        crate::opalg::check_positive("omega", self.omega)?;
        if !(self.epsilon.abs() < 1.0) {
            return Err(QhermError::EpsilonOutOfRange {
                epsilon: self.epsilon,
            });
        }
        Ok(())
    }

    /// `(1 - eps^2) m1`.
    pub fn m2(&self) -> f64 {
        (1.0 - self.epsilon * self.epsilon) * self.m1
    }

    /// Mass of the equivalent Hermitian oscillator for this metric.
    pub fn effective_mass(&self) -> f64 {
        match self.metric_case {
            MetricCase::PositionQ => self.m1,
            MetricCase::MomentumQ => self.m2(),
        }
    }

    pub fn with_case(&self, metric_case: MetricCase) -> Self {
        Self {
            metric_case,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSpec {
    pub g: f64,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    /// Largest `|Im E|` over the trusted window.
    pub max_imag: f64,
    /// `max_imag` below [`REALITY_TOL`].
    pub reality_flag: bool,
    pub trusted_count: usize,
}

pub const REALITY_TOL: f64 = 1e-8;

/// Tolerance of the construction-time check on the momentum-type metric.
const METRIC_SELF_CHECK: f64 = 1e-10;

fn swanson_xp(s: &SwansonSpec, basis: BasisSpec) -> Result<(OperatorMatrix, OperatorMatrix)> {
    build_xp(basis, s.m1, s.omega)
}

/// `p^2/(2 m1) + (i omega eps / 2)(xp + px) + m2 omega^2 x^2 / 2`, one axis.
#[allow(non_snake_case)]
pub fn swanson_H(s: &SwansonSpec, basis: BasisSpec) -> Result<OperatorMatrix> {
    s.validate()?;
    let (x, p) = swanson_xp(s, basis)?;
    Ok((&p * &p).scale_re(0.5 / s.m1)
        + x.anticommutator(&p).scale(I * (0.5 * s.omega * s.epsilon))
        + (&x * &x).scale_re(0.5 * s.m2() * s.omega * s.omega))
}

/// Exact metric. Case (i): `Q = eps m1 omega x^2`. Case (ii):
/// `Q = -eps p^2 / (m2 omega)`.
///
/// `e^{-Q}` spans a huge dynamic range at realistic truncations, so it is
/// built from the Gauss-Hermite eigensystem of `x` (or `p`), whose small
/// components are accurate, rather than by diagonalizing `Q`.
pub fn swanson_metric(s: &SwansonSpec, basis: BasisSpec) -> Result<MetricPackage> {
    s.validate()?;
    let (x, p) = swanson_xp(s, basis)?;
    let (q, eig, shape) = match s.metric_case {
        MetricCase::PositionQ => {
            let c = s.epsilon * s.m1 * s.omega;
            let eig = position_spectrum(basis, s.m1, s.omega)?.map_values(|t| c * t * t);
            (
                (&x * &x).scale_re(c),
                eig,
                MetricShape::PositionQuadratic { c },
            )
        }
        MetricCase::MomentumQ => {
            let c = -s.epsilon / (s.m2() * s.omega);
            let eig = momentum_spectrum(basis, s.m1, s.omega)?.map_values(|t| c * t * t);
            (
                (&p * &p).scale_re(c),
                eig,
                MetricShape::MomentumQuadratic { c },
            )
        }
    };
    let metric = MetricPackage::from_eigensystem(q, &eig, Provenance::Exact)?.with_shape(shape);
    if s.metric_case == MetricCase::MomentumQ {
        let want = &x + &p.scale(I * (s.epsilon / (s.m2() * s.omega)));
        let residual = interior_norm(&(&observable_from(&x, &metric) - &want), basis.margin())?;
        if residual > METRIC_SELF_CHECK {
            return Err(QhermError::ConstructionCheck {
                what: "rho^-1 x rho against x + i eps p/(m2 omega)",
                residual,
                threshold: METRIC_SELF_CHECK,
            });
        }
    }
    Ok(metric)
}

/// Closed-form physical observables. Case (i): `X = x`,
/// `P = p + i eps m1 omega x`. Case (ii): `X = x + i eps p/(m2 omega)`, `P = p`.
pub fn swanson_observables(s: &SwansonSpec, basis: BasisSpec) -> Result<ObservablePair> {
    let metric = Arc::new(swanson_metric(s, basis)?);
    let (x, p) = swanson_xp(s, basis)?;
    let (xo, po) = match s.metric_case {
        MetricCase::PositionQ => (x.clone(), &p + &x.scale(I * (s.epsilon * s.m1 * s.omega))),
        MetricCase::MomentumQ => (
            &x + &p.scale(I * (s.epsilon / (s.m2() * s.omega))),
            p.clone(),
        ),
    };
    Ok(ObservablePair {
        x: xo,
        p: po,
        metric,
        provenance: Provenance::Exact,
    })
}

/// Hermitian partner as a polynomial in the physical `(X, P)`:
/// `P^2/(2 mu) + mu omega^2 X^2 / 2`.
pub fn oscillator_polynomial(mu: f64, omega: f64) -> NcPolynomial {
    NcPolynomial::new(vec![
        Monomial::real(0.5 / mu, &[P, P]),
        Monomial::real(0.5 * mu * omega * omega, &[X, X]),
    ])
}

/// `(h, mu)`: the oscillator with the effective mass of the metric case.
pub fn swanson_h(s: &SwansonSpec, basis: BasisSpec) -> Result<(OperatorMatrix, f64)> {
    s.validate()?;
    let (x, p) = swanson_xp(s, basis)?;
    let mu = s.effective_mass();
    Ok((oscillator_polynomial(mu, s.omega).evaluate(&x, &p), mu))
}

/// Everything the gauging and rate code needs for one Swanson instance.
pub fn swanson_system(s: &SwansonSpec, basis: BasisSpec) -> Result<QuasiSystem> {
    let (x, p) = swanson_xp(s, basis)?;
    let (small_h, mu) = swanson_h(s, basis)?;
    Ok(QuasiSystem {
        big_h: swanson_H(s, basis)?,
        small_h,
        h_poly: oscillator_polynomial(mu, s.omega),
        mu,
        x,
        p,
        pair: swanson_observables(s, basis)?,
    })
}

/// `(p^2 + x^2)/2 + i g x^3` at unit mass and frequency.
#[allow(non_snake_case)]
pub fn cubic_H(c: &CubicSpec, basis: BasisSpec) -> Result<OperatorMatrix> {
    let (x, p) = build_xp(basis, 1.0, 1.0)?;
    Ok((&p * &p + &x * &x).scale_re(0.5) + x.powi(3).scale(I * c.g))
}

/// First-order metric `Q = -g (4/3 p^3 + 2 x p x)`.
pub fn cubic_q(c: &CubicSpec, basis: BasisSpec) -> Result<OperatorMatrix> {
    let (x, p) = build_xp(basis, 1.0, 1.0)?;
    let xpx = &(&x * &p) * &x;
    Ok((p.powi(3).scale_re(4.0 / 3.0) + xpx.scale_re(2.0)).scale_re(-c.g))
}

pub fn cubic_metric(c: &CubicSpec, basis: BasisSpec) -> Result<MetricPackage> {
    metric_from_q(cubic_q(c, basis)?, Provenance::PerturbativeOrder(1))
}

/// Second-order series for the physical observables:
/// `X = x + i g (x^2 + 2 p^2) + g^2 (-x^3 + 2 p x p)`,
/// `P = p - i g (x p + p x) + g^2 (2 p^3 - x p x)`.
#[allow(non_snake_case)]
pub fn cubic_XP_series(c: &CubicSpec, basis: BasisSpec) -> Result<ObservablePair> {
    let (x, p) = build_xp(basis, 1.0, 1.0)?;
    let g = c.g;
    let x2 = &x * &x;
    let p2 = &p * &p;
    let pxp = &(&p * &x) * &p;
    let xpx = &(&x * &p) * &x;
    let xo = &x
        + &(&x2 + &p2.scale_re(2.0)).scale(I * g)
        + (&pxp.scale_re(2.0) - &x.powi(3)).scale_re(g * g);
    let po =
        &p - &x.anticommutator(&p).scale(I * g) + (&p.powi(3).scale_re(2.0) - &xpx).scale_re(g * g);
    Ok(ObservablePair {
        x: xo,
        p: po,
        metric: Arc::new(cubic_metric(c, basis)?),
        provenance: Provenance::PerturbativeOrder(2),
    })
}

/// Constant inside the `3 g^2 (...)` bracket of the second-order Hermitian
/// partner. With the three-term symmetrization of `x^2 p^2` the ground-state
/// offset already matches second-order perturbation theory, so nothing is
/// added.
pub const CUBIC_H2_OFFSET: f64 = 0.0;

/// `h_2` as a polynomial in `(X, P)`:
/// `(P^2 + X^2)/2 + 3 g^2 (X^4/2 + (X^2 P^2 + X P^2 X + P^2 X^2)/3 + offset)`.
pub fn cubic_h_polynomial(c: &CubicSpec) -> NcPolynomial {
    let k = 3.0 * c.g * c.g;
    NcPolynomial::new(vec![
        Monomial::real(0.5, &[P, P]),
        Monomial::real(0.5, &[X, X]),
        Monomial::real(0.5 * k, &[X, X, X, X]),
        Monomial::real(k / 3.0, &[X, X, P, P]),
        Monomial::real(k / 3.0, &[X, P, P, X]),
        Monomial::real(k / 3.0, &[P, P, X, X]),
        Monomial::real(k * CUBIC_H2_OFFSET, &[]),
    ])
}

/// Second-order Hermitian partner evaluated on the bare `(x, p)`.
pub fn cubic_h_series(c: &CubicSpec, basis: BasisSpec) -> Result<OperatorMatrix> {
    let (x, p) = build_xp(basis, 1.0, 1.0)?;
    Ok(cubic_h_polynomial(c).evaluate(&x, &p))
}

pub fn cubic_system(c: &CubicSpec, basis: BasisSpec) -> Result<QuasiSystem> {
    let (x, p) = build_xp(basis, 1.0, 1.0)?;
    Ok(QuasiSystem {
        big_h: cubic_H(c, basis)?,
        small_h: cubic_h_series(c, basis)?,
        h_poly: cubic_h_polynomial(c),
        mu: 1.0,
        x,
        p,
        pair: cubic_XP_series(c, basis)?,
    })
}

fn check_lower_third(i: usize, basis: BasisSpec) -> Result<()> {
    let window = basis.dim() / 3;
    if i >= window {
        return Err(QhermError::UntrustedLevel { level: i, window });
    }
    Ok(())
}

/// `|i> + g sum_{j != i} <j|i x^3|i> / (E_i - E_j) |j>`, normalized, phase
/// fixed like the eigensolvers.
pub fn cubic_first_order_states(c: &CubicSpec, basis: BasisSpec, i: usize) -> Result<StateVector> {
    check_lower_third(i, basis)?;
    let (x, _) = build_xp(basis, 1.0, 1.0)?;
    let correction = rs_state1(&PerturbationProblem::oscillator(x.powi(3).scale(I), i))?;
    Ok(phase_fixed(
        StateVector::fock(basis, i).add(&correction.scale(C64::new(c.g, 0.0))),
    ))
}

/// The same sum without energy denominators:
/// `|i> + g sum_{j != i} <j|i x^3|i> |j>`.
pub fn cubic_first_order_states_undivided(
    c: &CubicSpec,
    basis: BasisSpec,
    i: usize,
) -> Result<StateVector> {
    check_lower_third(i, basis)?;
    let (x, _) = build_xp(basis, 1.0, 1.0)?;
    let v = x.powi(3).scale(I);
    let amps = (0..basis.dim())
        .map(|j| {
            if j == i {
                C64::new(1.0, 0.0)
            } else {
                v.get(j, i) * c.g
            }
        })
        .collect();
    Ok(phase_fixed(StateVector::new(basis, amps)?))
}

fn phase_fixed(v: StateVector) -> StateVector {
    let mut amps = v.normalized().amplitudes().clone();
    crate::opalg::fix_phase(&mut amps);
    StateVector::new(v.basis(), amps.iter().copied().collect()).expect("same length")
}

/// Sorted eigenvalues and a reality verdict on the lowest `trusted_count`.
pub fn spectrum(h: &OperatorMatrix, trusted_count: usize) -> Result<SpectrumReport> {
    spectrum_with_tolerance(h, trusted_count, REALITY_TOL)
}

pub fn spectrum_with_tolerance(
    h: &OperatorMatrix,
    trusted_count: usize,
    tol: f64,
) -> Result<SpectrumReport> {
    let window = h.dim() / 3;
    if trusted_count > window {
        return Err(QhermError::UntrustedLevel {
            level: trusted_count,
            window,
        });
    }
    let eigenvalues: Vec<C64> = eig_general(h)?.into_iter().map(|e| e.value).collect();
    let max_imag = eigenvalues[..trusted_count]
        .iter()
        .fold(0.0f64, |m, z| m.max(z.im.abs()));
    Ok(SpectrumReport {
        eigenvalues,
        max_imag,
        reality_flag: max_imag < tol,
        trusted_count,
    })
}
