//! Finite-support probability distributions with exact rational weights.

use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::instance::ModelError;
use crate::rational::Rational;

/// Sorted by state, strictly positive weights, summing to one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    entries: Vec<(usize, Rational)>,
}

impl Distribution {
    /// Merges repeated targets and drops zero weights. `owner` names the
    /// state in errors.
    pub fn new(owner: usize, n: usize, entries: Vec<(usize, Rational)>) -> Result<Self, ModelError> {
        let mut merged: Vec<(usize, Rational)> = Vec::new();
        let mut sorted = entries;
        sorted.sort_by_key(|(y, _)| *y);
        for (y, p) in sorted {
            if y >= n {
                return Err(ModelError::StateOutOfRange { index: y, n });
            }
            if p.is_negative() {
                return Err(ModelError::BadDistribution { state: owner, reason: format!("negative weight {p} on {y}") });
            }
            match merged.last_mut() {
                Some((last, q)) if *last == y => *q += p,
                _ => merged.push((y, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        let total: Rational = merged.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            return Err(ModelError::BadDistribution { state: owner, reason: format!("weights sum to {total}, not 1") });
        }
        Ok(Distribution { entries: merged })
    }

    /// Point mass.
    pub fn dirac(y: usize) -> Self {
        Distribution { entries: alloc::vec![(y, Rational::one())] }
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(y, _)| *y)
    }

    pub fn prob(&self, y: usize) -> Rational {
        match self.entries.binary_search_by_key(&y, |(s, _)| *s) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// `Σ_y δ(y)·f(y)`.
    pub fn expect(&self, f: &[Rational]) -> Rational {
        self.entries.iter().map(|(y, p)| p * &f[*y]).sum()
    }
}
