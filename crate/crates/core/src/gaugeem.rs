//! Electromagnetic gauging of quasi-Hermitian systems: phase transformations
//! `e^{i e alpha(X)}`, minimal substitution in the dipole approximation,
//! functions of the physical position, transition elements and rates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QhermError, Result};
use crate::models::{swanson_system, SwansonSpec};
use crate::nhqcore::{
    align_to_hermitian, matrix_element, MetricPackage, MetricShape, ObservablePair, Provenance,
    QuasiSystem,
};
use crate::opalg::{
    adjoint_exp, eig_general, eig_hermitian, general_expm, interior_norm, BasisSpec, NcPolynomial,
    OperatorMatrix, SeriesDepth, StateVector, Symbol, C64, I,
};

/// Highest polynomial degree accepted for gauge functions and Hamiltonians.
pub const MAX_DEGREE: usize = 4;

/// `sum_k c_k xi^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct PolyFn {
    coefficients: Vec<C64>,
}

impl PolyFn {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(QhermError::NonFinite {
                what: "polynomial coefficients",
            });
        }
        let mut coefficients = coefficients;
        while coefficients.last().is_some_and(|c| c.norm() == 0.0) {
            coefficients.pop();
        }
        let degree = coefficients.len().saturating_sub(1);
        if degree > MAX_DEGREE {
            return Err(QhermError::DegreeTooHigh {
                degree,
                cap: MAX_DEGREE,
            });
        }
        Ok(Self { coefficients })
    }

    pub fn real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            coefficients: Vec::new(),
        }
    }

    /// `c xi^k`.
    pub fn monomial(c: f64, k: usize) -> Result<Self> {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Self::real(&v)
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        Self { coefficients }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        let at = |v: &[C64], k: usize| v.get(k).copied().unwrap_or_default();
        let coefficients = (0..len)
            .map(|k| at(&self.coefficients, k) + at(&other.coefficients, k))
            .collect();
        Self::new(coefficients).expect("sum of valid polynomials")
    }

    pub fn eval(&self, xi: C64) -> C64 {
        self.coefficients
            .iter()
            .rev()
            .fold(C64::default(), |acc, c| acc * xi + c)
    }

    /// Horner evaluation on a matrix argument.
    pub fn apply(&self, a: &OperatorMatrix) -> OperatorMatrix {
        let id = OperatorMatrix::identity(a.basis());
        self.coefficients
            .iter()
            .rev()
            .fold(OperatorMatrix::zeros(a.basis()), |acc, c| {
                &(&acc * a) + &id.scale(*c)
            })
    }
}

impl TryFrom<Vec<C64>> for PolyFn {
    type Error = QhermError;
    fn try_from(v: Vec<C64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PolyFn> for Vec<C64> {
    fn from(p: PolyFn) -> Self {
        p.coefficients
    }
}

/// The functions of position the gauging code needs.
#[derive(Clone, Debug, PartialEq)]
pub enum PositionFn {
    Poly(PolyFn),
    /// `e^{i k xi}`.
    PlaneWave {
        k: f64,
    },
}

/// `f(X) = rho^{-1} f(x) rho`, with `f(x)` from the eigensystem of `x`.
///
/// Polynomials go through the commutator series, which terminates for the
/// exact metrics. A plane wave commutes with a position-quadratic `Q`; for a
/// momentum-quadratic `Q = c p^2` the momentum kick of `e^{ikx}` gives
/// `rho^{-1} e^{ikx} rho = e^{ckp/2} e^{ikx} e^{ckp/2}`, which keeps the huge
/// eigenvalues of `rho` out of the product. Other metrics use dense `rho`.
#[allow(non_snake_case)]
pub fn function_of_X(
    f: &PositionFn,
    m: &MetricPackage,
    x: &OperatorMatrix,
    p: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    let ex = eig_hermitian(x)?;
    match f {
        PositionFn::Poly(poly) => {
            let fx = ex.apply_fn(|t| poly.eval(C64::new(t, 0.0)));
            Ok(m.conjugate(&fx, 0.5))
        }
        PositionFn::PlaneWave { k } => {
            let fx = ex.apply_fn(|t| (I * (k * t)).exp());
            match m.shape() {
                MetricShape::PositionQuadratic { .. } => Ok(m.conjugate(&fx, 0.5)),
                MetricShape::MomentumQuadratic { c } => {
                    let half =
                        eig_hermitian(p)?.apply_fn(|t| C64::new((0.5 * c * k * t).exp(), 0.0));
                    Ok(&(&half * &fx) * &half)
                }
                MetricShape::General => Ok(m.conjugate_dense(&fx)),
            }
        }
    }
}

/// `e^{i e alpha(X)} psi` with `alpha(X)` evaluated on the physical position.
pub fn phase_transform(
    psi: &StateVector,
    alpha: &PolyFn,
    e_charge: f64,
    pair: &ObservablePair,
) -> Result<StateVector> {
    if alpha.is_zero() || e_charge == 0.0 {
        return Ok(psi.clone());
    }
    let u = general_expm(&alpha.apply(&pair.x).scale(I * e_charge))?;
    Ok(u.apply(psi))
}

/// `alpha -> A + alpha'`: the potential that the phase `e^{i e alpha(X)}`
/// maps back onto `A`.
pub fn gauge_shifted_potential(a: &PolyFn, alpha: &PolyFn) -> PolyFn {
    a.add(&alpha.derivative())
}

/// Interior norm of `e^{-i e alpha(X)} (P - e A'(X)) e^{i e alpha(X)} - (P - e A(X))`.
pub fn gauge_covariance_residual(
    alpha: &PolyFn,
    a: &PolyFn,
    e_charge: f64,
    pair: &ObservablePair,
    margin: usize,
) -> Result<f64> {
    let shifted = gauge_shifted_potential(a, alpha);
    let kinetic = |pot: &PolyFn| &pair.p - &pot.apply(&pair.x).scale_re(e_charge);
    let generator = alpha.apply(&pair.x).scale(I * e_charge);
    let out = adjoint_exp(
        &generator,
        &kinetic(&shifted),
        -1.0,
        SeriesDepth::UntilNilpotent { max_depth: 24 },
    );
    let lhs = if out.terminated {
        out.value
    } else {
        let u = general_expm(&generator)?;
        let u_inv = general_expm(&generator.scale_re(-1.0))?;
        &(&u_inv * &kinetic(&shifted)) * &u
    };
    interior_norm(&(&lhs - &kinetic(a)), margin)
}

fn check_degree(h: &NcPolynomial) -> Result<()> {
    if h.degree() > MAX_DEGREE {
        return Err(QhermError::DegreeTooHigh {
            degree: h.degree(),
            cap: MAX_DEGREE,
        });
    }
    Ok(())
}

/// `h(X, P - e A0)` in the dipole approximation.
pub fn minimal_substitution(
    h: &NcPolynomial,
    pair: &ObservablePair,
    e_a0: f64,
) -> Result<OperatorMatrix> {
    check_degree(h)?;
    let shifted = &pair.p - &OperatorMatrix::identity(pair.p.basis()).scale_re(e_a0);
    Ok(h.evaluate(&pair.x, &shifted))
}

/// The operator `W` with `H_A = h + e A0 W + O(A0^2)`. A central difference at
/// unit step, exact while `h` is at most quadratic in `P`.
pub fn linear_coupling(h: &NcPolynomial, pair: &ObservablePair) -> Result<OperatorMatrix> {
    let degree = h.degree_in(Symbol::P);
    if degree > 2 {
        return Err(QhermError::DegreeTooHigh { degree, cap: 2 });
    }
    let plus = minimal_substitution(h, pair, 1.0)?;
    let minus = minimal_substitution(h, pair, -1.0)?;
    Ok((&plus - &minus).scale_re(0.5))
}

/// Which side of the similarity map a matrix element is computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitionRoute {
    /// `<psi_i| eta P |psi_j>` with right eigenvectors of `H`.
    #[serde(rename = "HPicture")]
    NonHermitian,
    /// `<phi_i| p |phi_j>` with eigenvectors of `h`.
    #[serde(rename = "hPicture")]
    Hermitian,
}

impl TransitionRoute {
    pub fn label(self) -> &'static str {
        match self {
            TransitionRoute::NonHermitian => "HPicture",
            TransitionRoute::Hermitian => "hPicture",
        }
    }
}

/// Gaussian spectral amplitude `A0 exp(-(w - w0)^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl PulseSpec {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        let p = Self {
            amplitude,
            center,
            width,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(QhermError::BadPulse { sigma: self.width });
        }
        if !self.amplitude.is_finite() || !self.center.is_finite() {
            return Err(QhermError::NonFinite { what: "pulse" });
        }
        Ok(())
    }

    pub fn spectral_amplitude(&self, omega: f64) -> f64 {
        let d = omega - self.center;
        self.amplitude.abs() * (-d * d / (2.0 * self.width * self.width)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionResult {
    pub i: usize,
    pub j: usize,
    /// `E_i - E_j`.
    pub omega_ij: f64,
    pub element: C64,
    pub rate: f64,
    pub route: TransitionRoute,
    pub effective_mass: f64,
}

/// Eigenstates of both pictures over the trusted window, lined up so that
/// `phi_n = rho psi_n`.
#[derive(Clone, Debug)]
pub struct PictureStates<'a> {
    sys: &'a QuasiSystem,
    /// Eigenvalues of `h`.
    pub energies: Vec<f64>,
    /// Eigenvalues of `H`.
    pub energies_big: Vec<C64>,
    pub phi: Vec<StateVector>,
    pub psi: Vec<StateVector>,
    /// `| |<phi_n| rho |psi_n>| - 1 |`. Zero in exact arithmetic for an exact
    /// metric; large when `eta` magnifies round-off in the tails of `psi_n`.
    pub consistency: Vec<f64>,
}

/// Smallest level spacing accepted inside the trusted window.
const MIN_GAP: f64 = 1e-8;

/// Largest tolerated `consistency` for H-picture elements on exact metrics.
const CONSISTENCY_TOL: f64 = 1e-6;
/// The same for series metrics, whose states only agree to the series order.
const CONSISTENCY_TOL_SERIES: f64 = 1e-2;

impl<'a> PictureStates<'a> {
    pub fn new(sys: &'a QuasiSystem) -> Result<Self> {
        let window = sys.basis().dim() / 3;
        let h = eig_hermitian(&sys.small_h)?;
        let big = eig_general(&sys.big_h)?;
        let phi: Vec<StateVector> = (0..window).map(|n| h.vector(n)).collect();
        let psi: Vec<StateVector> = big[..window]
            .iter()
            .zip(&phi)
            .map(|(pair, phi)| align_to_hermitian(&pair.vector, phi, sys.metric()))
            .collect();
        let consistency = psi
            .iter()
            .zip(&phi)
            .map(|(psi, phi)| (phi.dot(&sys.metric().rho().apply(psi)).norm() - 1.0).abs())
            .collect();
        Ok(Self {
            sys,
            energies: h.values[..window].to_vec(),
            energies_big: big[..window].iter().map(|p| p.value).collect(),
            phi,
            psi,
            consistency,
        })
    }

    pub fn system(&self) -> &QuasiSystem {
        self.sys
    }

    pub fn window(&self) -> usize {
        self.phi.len()
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        for level in [i, j] {
            if level >= self.window() {
                return Err(QhermError::UntrustedLevel {
                    level,
                    window: self.window(),
                });
            }
        }
        for level in [i, j] {
            for (n, &e) in self.energies.iter().enumerate() {
                let gap = (e - self.energies[level]).abs();
                if n != level && gap < MIN_GAP {
                    return Err(QhermError::Degenerate {
                        i: level,
                        j: n,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    /// `E_i - E_j`, from the spectrum of the picture in use.
    pub fn omega(&self, i: usize, j: usize, route: TransitionRoute) -> f64 {
        match route {
            TransitionRoute::Hermitian => self.energies[i] - self.energies[j],
            TransitionRoute::NonHermitian => (self.energies_big[i] - self.energies_big[j]).re,
        }
    }
}

/// Momentum matrix element between levels `i` and `j`.
pub fn transition_element(
    states: &PictureStates,
    i: usize,
    j: usize,
    route: TransitionRoute,
) -> Result<C64> {
    states.check(i, j)?;
    let sys = states.sys;
    if route == TransitionRoute::NonHermitian {
        let tol = match sys.metric().provenance() {
            Provenance::Exact => CONSISTENCY_TOL,
            _ => CONSISTENCY_TOL_SERIES,
        };
        for level in [i, j] {
            let defect = states.consistency[level];
            if !(defect < tol) {
                return Err(QhermError::IllConditioned { level, defect });
            }
        }
    }
    Ok(match route {
        TransitionRoute::NonHermitian => {
            matrix_element(&states.psi[i], &sys.pair.p, &states.psi[j], sys.metric())
        }
        TransitionRoute::Hermitian => states.phi[i].dot(&sys.p.apply(&states.phi[j])),
    })
}

/// `|<a| p |b> - i mu (E_a - E_b) <a| x |b>|`.
pub fn dipole_residual(
    (a, e_a): (&StateVector, f64),
    (b, e_b): (&StateVector, f64),
    x: &OperatorMatrix,
    p: &OperatorMatrix,
    mu: f64,
) -> f64 {
    let pe = a.dot(&p.apply(b));
    let xe = a.dot(&x.apply(b));
    (pe - I * (mu * (e_a - e_b)) * xe).norm()
}

/// Dipole identity on eigenstates of `h`.
pub fn dipole_identity_residual(states: &PictureStates, i: usize, j: usize) -> Result<f64> {
    states.check(i, j)?;
    let sys = states.sys;
    Ok(dipole_residual(
        (&states.phi[i], states.energies[i]),
        (&states.phi[j], states.energies[j]),
        &sys.x,
        &sys.p,
        sys.mu,
    ))
}

/// `2 pi A(|w_ij|)^2 (e / mu)^2 |element|^2`.
pub fn golden_rule(element: C64, omega_ij: f64, mu: f64, e_charge: f64, pulse: &PulseSpec) -> f64 {
    let amp = pulse.spectral_amplitude(omega_ij.abs());
    2.0 * PI * amp * amp * (e_charge / mu).powi(2) * element.norm_sqr()
}

pub fn transition_rate(
    states: &PictureStates,
    i: usize,
    j: usize,
    e_charge: f64,
    pulse: &PulseSpec,
    route: TransitionRoute,
) -> Result<TransitionResult> {
    pulse.validate()?;
    let element = transition_element(states, i, j, route)?;
    let omega_ij = states.omega(i, j, route);
    let mu = states.sys.mu;
    Ok(TransitionResult {
        i,
        j,
        omega_ij,
        element,
        rate: golden_rule(element, omega_ij, mu, e_charge, pulse),
        route,
        effective_mass: mu,
    })
}

/// A transition of the separable 3-d Swanson oscillator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition3d {
    pub levels_i: [usize; 3],
    pub levels_j: [usize; 3],
    /// The one axis whose level changes, if exactly one does.
    pub axis: Option<usize>,
    /// 1-d levels on that axis; the projected element and rate.
    pub result: TransitionResult,
    pub note: Option<String>,
}

const UNIT_TOL: f64 = 1e-12;

/// Separable rate: the element is `n_r <i_r| eta P |j_r>` on the single axis
/// `r` that changes, times Kronecker factors on the others.
#[allow(clippy::too_many_arguments)]
pub fn transition_rate_3d(
    levels_i: [usize; 3],
    levels_j: [usize; 3],
    polarization: [f64; 3],
    s: &SwansonSpec,
    basis: BasisSpec,
    pulse: &PulseSpec,
    e_charge: f64,
    route: TransitionRoute,
) -> Result<Transition3d> {
    let norm = polarization.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(QhermError::NotUnit { norm });
    }
    let sys = swanson_system(s, basis)?;
    let states = PictureStates::new(&sys)?;
    let window = states.window();
    for &level in levels_i.iter().chain(&levels_j) {
        if level >= window {
            return Err(QhermError::UntrustedLevel { level, window });
        }
    }
    let changed: Vec<usize> = (0..3).filter(|&r| levels_i[r] != levels_j[r]).collect();
    if changed.len() != 1 {
        let note = if changed.is_empty() {
            "no level changes: no transition"
        } else {
            "more than one axis changes: element vanishes by orthogonality"
        };
        return Ok(Transition3d {
            levels_i,
            levels_j,
            axis: None,
            result: TransitionResult {
                i: 0,
                j: 0,
                omega_ij: 0.0,
                element: C64::default(),
                rate: 0.0,
                route,
                effective_mass: sys.mu,
            },
            note: Some(note.to_string()),
        });
    }
    let r = changed[0];
    let (i, j) = (levels_i[r], levels_j[r]);
    let element = transition_element(&states, i, j, route)? * polarization[r];
    let omega_ij = states.omega(i, j, route);
    Ok(Transition3d {
        levels_i,
        levels_j,
        axis: Some(r),
        result: TransitionResult {
            i,
            j,
            omega_ij,
            element,
            rate: golden_rule(element, omega_ij, sys.mu, e_charge, pulse),
            route,
            effective_mass: sys.mu,
        },
        note: None,
    })
}
