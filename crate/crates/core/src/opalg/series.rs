//! Conjugation by an exponential through the nested-commutator series
//! `e^{sG} A e^{-sG} = sum_k s^k ad_G^k(A) / k!`.
//!
//! Every term is a product of truncated polynomial operators, so for
//! polynomial `G` and `A` the truncation defect stays near the corner. The
//! dense product `e^{sG} A e^{-sG}` instead inherits the defect of the
//! truncated exponential everywhere it is large.

use super::{block_max_abs, OperatorMatrix};

/// How many commutator terms to sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesDepth {
    /// Stop at the first term that vanishes on the leading half block; give
    /// up after `max_depth` terms.
    UntilNilpotent { max_depth: usize },
    /// Sum exactly `depth` commutator terms.
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct SeriesOutcome {
    pub value: OperatorMatrix,
    /// Number of commutator terms added.
    pub depth: usize,
    /// `true` when a vanishing term was found (or the depth was fixed).
    pub terminated: bool,
}

/// A term counts as vanished when it is below this fraction of the crude
/// bound `(|s| 2 |G|)^k |A| / k!` on the same block.
const VANISH: f64 = 1e-13;

pub fn adjoint_exp(
    generator: &OperatorMatrix,
    a: &OperatorMatrix,
    scale: f64,
    depth: SeriesDepth,
) -> SeriesOutcome {
    let block = (a.dim() / 2).max(1);
    let g_norm = block_max_abs(generator.entries(), block);
    let a_norm = block_max_abs(a.entries(), block).max(f64::MIN_POSITIVE);
    let max_depth = match depth {
        SeriesDepth::UntilNilpotent { max_depth } => max_depth,
        SeriesDepth::Fixed(k) => k,
    };

    let mut value = a.clone();
    let mut term = a.clone();
    let mut bound = a_norm;
    for k in 1..=max_depth {
        term = generator.commutator(&term).scale_re(scale / k as f64);
        bound *= 2.0 * scale.abs() * g_norm / k as f64;
        if let SeriesDepth::UntilNilpotent { .. } = depth {
            if block_max_abs(term.entries(), block) <= VANISH * bound.max(a_norm * f64::EPSILON) {
                return SeriesOutcome {
                    value,
                    depth: k - 1,
                    terminated: true,
                };
            }
        }
        value += &term;
    }
    SeriesOutcome {
        value,
        depth: max_depth,
        terminated: matches!(depth, SeriesDepth::Fixed(_)),
    }
}
