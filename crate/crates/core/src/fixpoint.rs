//! Kleene iteration from ⊥, degrees and co-degrees.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::rngs::SmallRng;
use rand::SeedableRng;

use crate::lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue, Point};

/// A monotone endofunction on a concrete lattice.
pub trait MonotoneMap {
    fn lattice(&self) -> LatticeKind;
    fn apply(&self, value: &LatticeValue) -> Result<LatticeValue, LatticeError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixpointError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("function is not monotone: {0}")]
    NotMonotone(String),
    #[error("Kleene chain not ascending at iteration {iteration}, point {point}")]
    NotAscending { iteration: usize, point: Point },
}

/// Result of a degree or co-degree query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    Finite(usize),
    /// The chain reached its fixpoint without the condition ever holding.
    Undefined,
    /// The iteration bound ran out first.
    Unknown { iterations: usize },
}

impl Degree {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Degree::Finite(k) => Some(*k),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Degree::Finite(_))
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(k) => write!(f, "{k}"),
            Degree::Undefined => write!(f, "undefined (fixpoint reached)"),
            Degree::Unknown { iterations } => write!(f, "unknown after {iterations} iterations"),
        }
    }
}

/// A map together with its iteration bound.
pub struct FixpointProblem<'a> {
    pub map: &'a dyn MonotoneMap,
    pub max_iter: usize,
}

/// `f^0(⊥), f^1(⊥), ...` up to convergence or the bound.
#[derive(Debug, Clone)]
pub struct KleeneChain {
    kind: LatticeKind,
    iterates: Vec<LatticeValue>,
    converged: bool,
    max_iter: usize,
}

const MONOTONE_SAMPLES: usize = 10;
const MONOTONE_SEED: u64 = 0x5eed_f1c5;

/// Applies `map` to random ordered pairs `a ⊑ a ⊔ r` and checks the images.
pub fn spot_check_monotone<M: MonotoneMap + ?Sized>(map: &M, samples: usize, seed: u64) -> Result<(), FixpointError> {
    let kind = map.lattice();
    let mut rng = SmallRng::seed_from_u64(seed);
    for _ in 0..samples {
        let (Some(a), Some(r)) = (kind.random_value(&mut rng), kind.random_value(&mut rng)) else {
            return Ok(());
        };
        let b = kind.join(&[a.clone(), r])?;
        let (fa, fb) = (map.apply(&a)?, map.apply(&b)?);
        if let Some(p) = kind.leq_violation(&fa, &fb)? {
            return Err(FixpointError::NotMonotone(format!("a ⊑ b but f(a) ⋢ f(b) at {p} (a = {a}, b = {b})")));
        }
    }
    Ok(())
}

impl KleeneChain {
    /// Iterates until `f^k(⊥) = f^{k+1}(⊥)` or `max_iter` applications.
    pub fn compute<M: MonotoneMap + ?Sized>(map: &M, max_iter: usize) -> Result<Self, FixpointError> {
        spot_check_monotone(map, MONOTONE_SAMPLES, MONOTONE_SEED)?;
        let kind = map.lattice();
        let mut iterates = alloc::vec![kind.bottom()];
        let mut converged = false;
        for i in 0..max_iter {
            let next = map.apply(&iterates[i])?;
            if let Some(point) = kind.leq_violation(&iterates[i], &next)? {
                return Err(FixpointError::NotAscending { iteration: i + 1, point });
            }
            if next == iterates[i] {
                converged = true;
                break;
            }
            iterates.push(next);
        }
        Ok(KleeneChain { kind, iterates, converged, max_iter })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Index of the last computed iterate.
    pub fn last_index(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &LatticeValue {
        self.iterates.last().expect("chain holds at least ⊥")
    }

    pub fn iterates(&self) -> &[LatticeValue] {
        &self.iterates
    }

    /// `f^i(⊥)`, available past the end once the chain has converged.
    pub fn iterate(&self, i: usize) -> Option<&LatticeValue> {
        match self.iterates.get(i) {
            Some(v) => Some(v),
            None if self.converged => Some(self.last()),
            None => None,
        }
    }

    pub fn fixpoint(&self) -> Option<&LatticeValue> {
        self.converged.then(|| self.last())
    }

    fn first_index(&self, mut pred: impl FnMut(&LatticeValue) -> Result<bool, LatticeError>) -> Result<Degree, LatticeError> {
        for (k, v) in self.iterates.iter().enumerate() {
            if pred(v)? {
                return Ok(Degree::Finite(k));
            }
        }
        Ok(if self.converged { Degree::Undefined } else { Degree::Unknown { iterations: self.last_index() } })
    }

    /// Least k with `a ≪ f^k(⊥)`.
    pub fn degree_of(&self, a: &LatticeValue) -> Result<Degree, LatticeError> {
        self.first_index(|v| self.kind.way_below(a, v))
    }

    /// Least k with `f^k(⊥) ⋢ a`.
    pub fn codegree_of(&self, a: &LatticeValue) -> Result<Degree, LatticeError> {
        self.first_index(|v| Ok(!self.kind.leq(v, a)?))
    }

    pub fn degree(&self, b: &BasisElement) -> Result<Degree, LatticeError> {
        self.degree_of(&b.to_value(self.kind)?)
    }

    pub fn codegree(&self, b: &BasisElement) -> Result<Degree, LatticeError> {
        self.codegree_of(&b.to_value(self.kind)?)
    }
}

/// Outcome of [`kleene_lfp`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfp {
    pub value: LatticeValue,
    pub iterations: usize,
    pub converged: bool,
}

pub fn kleene_lfp(problem: &FixpointProblem<'_>) -> Result<Lfp, FixpointError> {
    let chain = KleeneChain::compute(problem.map, problem.max_iter)?;
    Ok(Lfp { value: chain.last().clone(), iterations: chain.last_index(), converged: chain.is_converged() })
}

pub fn degree(problem: &FixpointProblem<'_>, b: &BasisElement) -> Result<Degree, FixpointError> {
    Ok(KleeneChain::compute(problem.map, problem.max_iter)?.degree(b)?)
}

pub fn codegree(problem: &FixpointProblem<'_>, b: &BasisElement) -> Result<Degree, FixpointError> {
    Ok(KleeneChain::compute(problem.map, problem.max_iter)?.codegree(b)?)
}
