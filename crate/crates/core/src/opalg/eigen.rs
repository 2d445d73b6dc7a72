use nalgebra::{DMatrix, DVector};

use super::{OperatorMatrix, StateVector, C64};
use crate::error::{QhermError, Result};

/// Tolerance on `max |M - M^dag|`, relative to `max(1, max |M|)`.
const HERMITIAN_TOL: f64 = 1e-10;

/// Inverse-iteration sweeps applied to each Schur eigenvector. They restore
/// relative accuracy in the small trailing components, which matter once
/// the vectors are weighted by a strongly graded metric.
const REFINE_SWEEPS: usize = 2;

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: C64,
    pub vector: StateVector,
}

/// Spectral decomposition of a Hermitian operator. Columns of `vectors`
/// are orthonormal and ordered like `values`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub(crate) basis: super::BasisSpec,
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::wrap(self.basis, self.vectors.column(k).into_owned())
    }

    /// Same vectors, eigenvalues replaced by `f(lambda)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            basis: self.basis,
            values: self.values.iter().map(|&l| f(l)).collect(),
            vectors: self.vectors.clone(),
        }
    }

    /// `f(M) = V diag(f(lambda)) V^dag`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        OperatorMatrix::wrap(self.basis, scaled * self.vectors.adjoint())
    }
}

/// Multiply by a unit phase so the largest-magnitude component is real and
/// positive (first index wins on ties).
pub fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (k, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = k;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

pub fn eig_hermitian(m: &OperatorMatrix) -> Result<HermitianEigen> {
    let scale = m.max_abs().max(1.0);
    let asymmetry = m.hermiticity_defect();
    if asymmetry > HERMITIAN_TOL * scale {
        return Err(QhermError::NotHermitian { asymmetry });
    }
    if !m.is_finite() {
        return Err(QhermError::NonFinite {
            what: "Hermitian eigenproblem",
        });
    }
    let sym = m.hermitian_part().into_entries();
    let eig = sym.symmetric_eigen();
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
        values.push(eig.eigenvalues[src]);
    }
    Ok(HermitianEigen {
        basis: m.basis(),
        values,
        vectors,
    })
}

/// Full right eigensystem, ascending real part, unit Euclidean norm, phase
/// fixed by [`fix_phase`].
pub fn eig_general(m: &OperatorMatrix) -> Result<Vec<Eigenpair>> {
    if !m.is_finite() {
        return Err(QhermError::NonFinite {
            what: "eigenproblem",
        });
    }
    let n = m.dim();
    let max_iter = 200 * n;
    let schur = nalgebra::linalg::Schur::try_new(m.entries().clone(), f64::EPSILON, max_iter)
        .ok_or(QhermError::NoConvergence {
            iterations: max_iter,
        })?;
    let (z, t) = schur.unpack();
    let t_norm = t
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()))
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * t_norm;

    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let y = triangular_eigvec(&t, k, tiny);
        let mut v = &z * y;
        v /= C64::new(v.norm(), 0.0);
        let v = refine(m.entries(), lambda, v);
        pairs.push((lambda, v));
    }
    pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(pairs
        .into_iter()
        .map(|(value, mut v)| {
            fix_phase(&mut v);
            Eigenpair {
                value,
                vector: StateVector::wrap(m.basis(), v),
            }
        })
        .collect())
}

fn triangular_eigvec(t: &DMatrix<C64>, k: usize, tiny: f64) -> DVector<C64> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let mut y = DVector::<C64>::zeros(n);
    y[k] = C64::new(1.0, 0.0);
    for j in (0..k).rev() {
        let mut s = C64::new(0.0, 0.0);
        for l in j + 1..=k {
            s += t[(j, l)] * y[l];
        }
        let mut d = t[(j, j)] - lambda;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        y[j] = -s / d;
        let big = y[j].norm();
        if big > 1e100 {
            let inv = C64::new(1.0 / big, 0.0);
            for l in j..=k {
                y[l] *= inv;
            }
        }
    }
    y
}

fn refine(m: &DMatrix<C64>, lambda: C64, mut v: DVector<C64>) -> DVector<C64> {
    let n = m.nrows();
    let shift = lambda + C64::new(1e-10 * lambda.norm().max(1.0), 0.0);
    let mut shifted = m.clone();
    for d in 0..n {
        shifted[(d, d)] -= shift;
    }
    let lu = shifted.lu();
    for _ in 0..REFINE_SWEEPS {
        match lu.solve(&v) {
            Some(w) => {
                let norm = w.norm();
                if !norm.is_finite() || norm == 0.0 {
                    break;
                }
                v = w / C64::new(norm, 0.0);
            }
            None => break,
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{build_xp, BasisSpec};
    use approx::assert_abs_diff_eq;

    fn oscillator(n: usize) -> OperatorMatrix {
        let b = BasisSpec::new(n, 4).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        (&p * &p + &x * &x).scale_re(0.5)
    }

    #[test]
    fn oscillator_spectrum_both_solvers() {
        let h = oscillator(64);
        let herm = eig_hermitian(&h).unwrap();
        let gen = eig_general(&h).unwrap();
        for n in 0..20 {
            let want = n as f64 + 0.5;
            assert_abs_diff_eq!(herm.values[n], want, epsilon = 1e-10);
            assert_abs_diff_eq!(gen[n].value.re, want, epsilon = 1e-10);
            assert!(gen[n].value.im.abs() < 1e-10);
        }
        for (a, b) in herm.values.iter().zip(&gen) {
            assert!((a - b.value.re).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_sorted() {
        let b = BasisSpec::new(8, 0).unwrap();
        let d: Vec<C64> = [3.0, -1.0, 2.0, 0.5, 7.0, 1.0, -4.0, 0.0]
            .iter()
            .map(|&r| C64::new(r, 0.0))
            .collect();
        let m = OperatorMatrix::from_diagonal(b, &d).unwrap();
        let got: Vec<f64> = eig_general(&m)
            .unwrap()
            .iter()
            .map(|e| e.value.re)
            .collect();
        assert_eq!(got, vec![-4.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 7.0]);
        let gh = eig_hermitian(&m).unwrap();
        assert_eq!(gh.values, got);
    }

    #[test]
    fn identity_and_parity_symmetry() {
        let b = BasisSpec::new(16, 0).unwrap();
        let e = eig_hermitian(&OperatorMatrix::identity(b)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let (x, _) = build_xp(b, 1.0, 1.0).unwrap();
        let ex = eig_hermitian(&x).unwrap();
        for k in 0..16 {
            assert_abs_diff_eq!(ex.values[k], -ex.values[15 - k], epsilon = 1e-10);
        }
    }

    #[test]
    fn phase_convention() {
        let h = oscillator(32);
        for pair in eig_general(&h).unwrap().iter().take(10) {
            let v = pair.vector.amplitudes();
            let (k, big) = v.iter().enumerate().fold((0, 0.0), |acc, (k, z)| {
                if z.norm() > acc.1 * (1.0 + 1e-12) {
                    (k, z.norm())
                } else {
                    acc
                }
            });
            assert!(v[k].im.abs() < 1e-14 && v[k].re > 0.0);
            assert_abs_diff_eq!(big, v[k].re, epsilon = 1e-14);
            assert_abs_diff_eq!(pair.vector.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn right_eigenvectors_of_non_normal() {
        let b = BasisSpec::new(32, 4).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        let h = (&p * &p).scale_re(0.5)
            + (&x * &p + &p * &x).scale(C64::new(0.0, 0.15))
            + (&x * &x).scale_re(0.5 * (1.0 - 0.09));
        for pair in eig_general(&h).unwrap().iter().take(10) {
            let r = h.apply(&pair.vector).sub(&pair.vector.scale(pair.value));
            assert!(r.norm() < 1e-9, "residual {}", r.norm());
        }
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let b = BasisSpec::new(8, 0).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        assert!(eig_hermitian(&(&x * &p)).is_err());
    }

    #[test]
    fn apply_fn_reconstructs() {
        let h = oscillator(24);
        let e = eig_hermitian(&h).unwrap();
        let back = e.apply_fn(|l| C64::new(l, 0.0));
        assert!((&back - &h).max_abs() < 1e-11);
    }
}
