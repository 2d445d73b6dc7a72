use nalgebra::DMatrix;

use super::{eig_hermitian, OperatorMatrix, C64};
use crate::error::{QhermError, Result};

/// `exp(scale * q)` for Hermitian `q`, through its eigendecomposition.
pub fn herm_expm(q: &OperatorMatrix, scale: f64) -> Result<OperatorMatrix> {
    let eig = eig_hermitian(q)?;
    Ok(eig.apply_fn(|lambda| C64::new((scale * lambda).exp(), 0.0)))
}

// Pade coefficients and theta thresholds for degrees 3, 5, 7, 9, 13
// (Higham 2005, "The scaling and squaring method for the matrix exponential revisited").
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(m)` by scaling and squaring around a diagonal Pade approximant.
pub fn general_expm(m: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !m.is_finite() {
        return Err(QhermError::NonFinite {
            what: "expm argument",
        });
    }
    let norm = m.norm_one();
    let a = m.entries();
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);

    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            let (u, v) = pade_low(a, &id, deg);
            return finish(m, solve_pade(&u, &v)?);
        }
    }

    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    if s > 1000 {
        return Err(QhermError::ExpOverflow { norm });
    }
    let scaled = a * C64::new(2f64.powi(-s), 0.0);
    let (u, v) = pade13(&scaled, &id);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    finish(m, r)
}

fn finish(m: &OperatorMatrix, r: DMatrix<C64>) -> Result<OperatorMatrix> {
    let out = OperatorMatrix::wrap(m.basis(), r);
    if !out.is_finite() {
        return Err(QhermError::ExpOverflow { norm: m.norm_one() });
    }
    Ok(out)
}

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pade_low(a: &DMatrix<C64>, id: &DMatrix<C64>, deg: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let b: &[f64] = match deg {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let a2 = a * a;
    let mut powers = vec![id.clone(), a2.clone()];
    for k in 2..=deg / 2 {
        let next = &powers[k - 1] * &a2;
        powers.push(next);
    }
    let n = a.nrows();
    let mut u_inner = DMatrix::<C64>::zeros(n, n);
    let mut v = DMatrix::<C64>::zeros(n, n);
    for k in 0..=deg / 2 {
        u_inner += &powers[k] * cr(b[2 * k + 1]);
        v += &powers[k] * cr(b[2 * k]);
    }
    (a * u_inner, v)
}

fn pade13(a: &DMatrix<C64>, id: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * cr(b[13]) + &a4 * cr(b[11]) + &a2 * cr(b[9]));
    let u_inner = u_hi + &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + id * cr(b[1]);
    let u = a * u_inner;
    let v_hi = &a6 * (&a6 * cr(b[12]) + &a4 * cr(b[10]) + &a2 * cr(b[8]));
    let v = v_hi + &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + id * cr(b[0]);
    (u, v)
}

fn solve_pade(u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let lhs = v - u;
    let rhs = v + u;
    lhs.lu().solve(&rhs).ok_or(QhermError::NonFinite {
        what: "Pade denominator",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{build_xp, interior_norm, BasisSpec, I};
    use approx::assert_abs_diff_eq;

    fn max_dev_from_identity(m: &OperatorMatrix) -> f64 {
        (m - &OperatorMatrix::identity(m.basis())).max_abs()
    }

    #[test]
    fn zero_gives_identity() {
        let b = BasisSpec::new(8, 0).unwrap();
        let z = OperatorMatrix::zeros(b);
        assert_eq!(max_dev_from_identity(&general_expm(&z).unwrap()), 0.0);
        assert!(max_dev_from_identity(&herm_expm(&z, 1.0).unwrap()) < 1e-15);
    }

    #[test]
    fn diagonal_log2() {
        let b = BasisSpec::new(8, 0).unwrap();
        let mut d = vec![C64::new(0.0, 0.0); 8];
        d[0] = C64::new(2f64.ln(), 0.0);
        let q = OperatorMatrix::from_diagonal(b, &d).unwrap();
        let e = herm_expm(&q, 1.0).unwrap();
        assert_abs_diff_eq!(e.get(0, 0).re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(1, 1).re, 1.0, epsilon = 1e-14);
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn scalar_rotation() {
        // exp(i t) on a 1-dimensional subspace embedded diagonally
        let b = BasisSpec::new(8, 0).unwrap();
        let t = 2.5;
        let m = OperatorMatrix::identity(b).scale(I * t);
        let e = general_expm(&m).unwrap();
        assert_abs_diff_eq!(e.get(3, 3).re, t.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(3, 3).im, t.sin(), epsilon = 1e-14);
    }

    #[test]
    fn nilpotent_is_finite_series() {
        // exp of a strictly upper shift terminates: exp(J)[0,2] = 1/2
        let b = BasisSpec::new(8, 0).unwrap();
        let mut j = DMatrix::<C64>::zeros(8, 8);
        for k in 0..7 {
            j[(k, k + 1)] = C64::new(1.0, 0.0);
        }
        let e = general_expm(&OperatorMatrix::wrap(b, j)).unwrap();
        assert_abs_diff_eq!(e.get(0, 2).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.get(0, 7).re, 1.0 / 5040.0, epsilon = 1e-16);
    }

    #[test]
    fn group_inverse_and_consistency() {
        let b = BasisSpec::new(24, 4).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        let q = (&x * &x).scale_re(0.1) + p.scale_re(0.3);
        let plus = herm_expm(&q, 1.0).unwrap();
        let minus = herm_expm(&q, -1.0).unwrap();
        assert!(max_dev_from_identity(&(&plus * &minus)) < 1e-10);
        let g = general_expm(&q).unwrap();
        assert!((&g - &plus).max_abs() / plus.max_abs() < 1e-10);

        let m = (&x * &p).scale(I * 0.2);
        let e = general_expm(&m).unwrap();
        let back = general_expm(&m.scale_re(-1.0)).unwrap();
        assert!(interior_norm(&(&(&e * &back) - &OperatorMatrix::identity(b)), 0).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let b = BasisSpec::new(8, 0).unwrap();
        let mut m = DMatrix::<C64>::zeros(8, 8);
        m[(1, 1)] = C64::new(f64::NAN, 0.0);
        assert!(general_expm(&OperatorMatrix::wrap(b, m)).is_err());
    }

    #[test]
    fn rejects_non_hermitian() {
        let b = BasisSpec::new(8, 0).unwrap();
        let (x, p) = build_xp(b, 1.0, 1.0).unwrap();
        assert!(matches!(
            herm_expm(&(&x * &p), 1.0),
            Err(QhermError::NotHermitian { .. })
        ));
    }
}
