//! Least-squares order of convergence.

use crate::CliError;

/// Slope of `ln r` against `ln g`. Needs at least three points. Any zero or
/// negative residual means the identity held exactly somewhere and the order
/// is reported as infinite.
pub fn fit_order(g_values: &[f64], residuals: &[f64]) -> Result<f64, CliError> {
    if g_values.len() != residuals.len() {
        return Err(CliError::config_msg(
            "g_list",
            format!(
                "{} couplings but {} residuals",
                g_values.len(),
                residuals.len()
            ),
        ));
    }
    if g_values.len() < 3 {
        return Err(CliError::config_msg(
            "g_list",
            "need at least three couplings",
        ));
    }
    if g_values.iter().any(|&g| !(g > 0.0)) {
        return Err(CliError::config_msg("g_list", "couplings must be positive"));
    }
    if residuals.iter().any(|&r| !(r > 0.0)) {
        return Ok(f64::INFINITY);
    }
    let n = g_values.len() as f64;
    let lx: Vec<f64> = g_values.iter().map(|g| g.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::config_msg("g_list", "couplings must differ"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: [f64; 3] = [0.04, 0.02, 0.01];

    #[test]
    fn exact_powers() {
        let cubic: Vec<f64> = G.iter().map(|g| 7.0 * g * g * g).collect();
        assert!((fit_order(&G, &cubic).unwrap() - 3.0).abs() < 1e-12);
        let square: Vec<f64> = G.iter().map(|g| g * g).collect();
        assert!((fit_order(&G, &square).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_identity_is_infinite() {
        assert_eq!(fit_order(&G, &[1e-3, 0.0, 1e-5]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_short_or_bad_input() {
        assert!(fit_order(&G[..2], &[1.0, 2.0]).is_err());
        assert!(fit_order(&[0.1, 0.1, 0.1], &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_order(&[0.1, -0.1, 0.2], &[1.0, 1.0, 1.0]).is_err());
    }
}
