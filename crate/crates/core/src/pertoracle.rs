//! Brute-force Rayleigh-Schroedinger perturbation theory, orders one and two.
//!
//! Deliberately naive: plain sums over the truncated basis, no cleverness,
//! so it can serve as an independent reference for the model builders.

use crate::error::{QhermError, Result};
use crate::opalg::{BasisSpec, OperatorMatrix, StateVector, C64};

/// Unperturbed spectrum, perturbation (with the coupling divided out) and
/// the level being corrected.
#[derive(Clone, Debug)]
pub struct PerturbationProblem {
    pub h0_energies: Vec<f64>,
    pub v: OperatorMatrix,
    pub level: usize,
}

impl PerturbationProblem {
    /// Unit oscillator `E_n = n + 1/2` with perturbation `v`.
    pub fn oscillator(v: OperatorMatrix, level: usize) -> Self {
        let h0_energies = (0..v.dim()).map(|n| n as f64 + 0.5).collect();
        Self {
            h0_energies,
            v,
            level,
        }
    }

    fn basis(&self) -> BasisSpec {
        self.v.basis()
    }

    fn check(&self) -> Result<()> {
        let window = self.h0_energies.len();
        if self.level >= window || window != self.v.dim() {
            return Err(QhermError::UntrustedLevel {
                level: self.level,
                window,
            });
        }
        let en = self.h0_energies[self.level];
        for (m, &em) in self.h0_energies.iter().enumerate() {
            if m != self.level && (en - em).abs() < 1e-12 {
                return Err(QhermError::Degenerate {
                    i: self.level,
                    j: m,
                    gap: (en - em).abs(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyCorrections {
    /// Real part of `<n|V|n>`.
    pub first_order: f64,
    /// `sum_{m != n} V_nm V_mn / (E_n - E_m)`, real part.
    pub second_order: f64,
    /// Magnitude of the last non-zero term of the second-order sum.
    pub truncation_estimate: f64,
}

/// First- and second-order energy shifts. The second-order numerator is the
/// product `V_nm V_mn`, not `|V_mn|^2`; the two differ for non-Hermitian `V`.
pub fn rs_energy2(prob: &PerturbationProblem) -> Result<EnergyCorrections> {
    prob.check()?;
    let n = prob.level;
    let en = prob.h0_energies[n];
    let mut second = C64::new(0.0, 0.0);
    let mut last = 0.0;
    for (m, &em) in prob.h0_energies.iter().enumerate() {
        if m == n {
            continue;
        }
        let term = prob.v.get(n, m) * prob.v.get(m, n) / (en - em);
        if term.norm() > 0.0 {
            last = term.norm();
        }
        second += term;
    }
    Ok(EnergyCorrections {
        first_order: prob.v.get(n, n).re,
        second_order: second.re,
        truncation_estimate: last,
    })
}

/// First-order state correction `sum_{j != n} V_jn / (E_n - E_j) |j>`.
pub fn rs_state1(prob: &PerturbationProblem) -> Result<StateVector> {
    prob.check()?;
    let n = prob.level;
    let en = prob.h0_energies[n];
    let amps = prob
        .h0_energies
        .iter()
        .enumerate()
        .map(|(j, &ej)| {
            if j == n {
                C64::new(0.0, 0.0)
            } else {
                prob.v.get(j, n) / (en - ej)
            }
        })
        .collect();
    StateVector::new(prob.basis(), amps)
}
