//! Polynomials in two non-commuting symbols, evaluated on operator pairs.

use serde::{Deserialize, Serialize};

use super::{OperatorMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    X,
    P,
}

/// `coeff * s_1 s_2 ... s_k`, read left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: C64,
    pub word: Vec<Symbol>,
}

impl Monomial {
    pub fn new(coeff: C64, word: &[Symbol]) -> Self {
        Self {
            coeff,
            word: word.to_vec(),
        }
    }

    pub fn real(coeff: f64, word: &[Symbol]) -> Self {
        Self::new(C64::new(coeff, 0.0), word)
    }

    pub fn degree(&self) -> usize {
        self.word.len()
    }

    pub fn degree_in(&self, s: Symbol) -> usize {
        self.word.iter().filter(|&&w| w == s).count()
    }
}

/// Ordered sum of monomials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NcPolynomial {
    pub terms: Vec<Monomial>,
}

impl NcPolynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn push(&mut self, m: Monomial) {
        self.terms.push(m);
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: Symbol) -> usize {
        self.terms.iter().map(|m| m.degree_in(s)).max().unwrap_or(0)
    }

    /// Substitute matrices for the symbols. The empty word is the identity.
    pub fn evaluate(&self, x: &OperatorMatrix, p: &OperatorMatrix) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(x.basis());
        for m in &self.terms {
            let mut prod = OperatorMatrix::identity(x.basis());
            for s in &m.word {
                prod = match s {
                    Symbol::X => &prod * x,
                    Symbol::P => &prod * p,
                };
            }
            out += &prod.scale(m.coeff);
        }
        out
    }
}
