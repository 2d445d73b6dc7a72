//! Eigensystems of the truncated `x` and `p`.
//!
//! The truncated position matrix is a Jacobi matrix whose eigenvalues are the
//! Gauss-Hermite nodes, and whose eigenvector at node `t` has components
//! proportional to the Hermite functions `chi_n(t)`. Building the vectors
//! from the recursion (rather than from a generic eigensolver) keeps every
//! component accurate to a few ulps relative to its own size, which is what
//! functions like `exp(c x^2)` need when `c x^2` spans dozens of e-folds.

use nalgebra::DMatrix;

use super::{check_positive, BasisSpec, HermitianEigen, C64, I};
use crate::error::Result;

/// Normalized Hermite functions `chi_0(xi) .. chi_{count-1}(xi)` of the unit
/// oscillator, by the stable three-term recursion.
pub fn hermite_functions(xi: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if count > 1 {
        out[1] = 2f64.sqrt() * xi * out[0];
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] =
            (2.0 / (nf + 1.0)).sqrt() * xi * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

fn unit_position_nodes(dim: usize) -> (Vec<f64>, DMatrix<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut vectors = DMatrix::<f64>::zeros(dim, dim);
    for (k, &t) in nodes.iter().enumerate() {
        let chi = hermite_functions(t, dim);
        let norm = chi.iter().map(|c| c * c).sum::<f64>().sqrt();
        for (n, c) in chi.iter().enumerate() {
            vectors[(n, k)] = c / norm;
        }
    }
    (nodes, vectors)
}

/// Eigensystem of the truncated `x` for the `(mass, freq)` oscillator.
pub fn position_spectrum(basis: BasisSpec, mass: f64, freq: f64) -> Result<HermitianEigen> {
    check_positive("mass", mass)?;
    check_positive("frequency", freq)?;
    let (nodes, vectors) = unit_position_nodes(basis.dim());
    let scale = 1.0 / (mass * freq).sqrt();
    Ok(HermitianEigen {
        basis,
        values: nodes.iter().map(|t| t * scale).collect(),
        vectors: vectors.map(|v| C64::new(v, 0.0)),
    })
}

/// Eigensystem of the truncated `p`. Uses `p = U x U^dag` with
/// `U = diag(i^n)` at unit scale.
pub fn momentum_spectrum(basis: BasisSpec, mass: f64, freq: f64) -> Result<HermitianEigen> {
    check_positive("mass", mass)?;
    check_positive("frequency", freq)?;
    let (nodes, vectors) = unit_position_nodes(basis.dim());
    let scale = (mass * freq).sqrt();
    let dim = basis.dim();
    let mut complex = DMatrix::<C64>::zeros(dim, dim);
    let mut phase = C64::new(1.0, 0.0);
    for n in 0..dim {
        for k in 0..dim {
            complex[(n, k)] = phase * vectors[(n, k)];
        }
        phase *= I;
    }
    Ok(HermitianEigen {
        basis,
        values: nodes.iter().map(|t| t * scale).collect(),
        vectors: complex,
    })
}
