//! The interface every fixpoint instance implements.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fixpoint::{KleeneChain, MonotoneMap};
use crate::game::StrategyError;
use crate::lattice::{BasisElement, LatticeValue};
use crate::witness::{Payload, Witness, WitnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstanceTag {
    Bisim,
    Metric,
    Termination,
}

impl InstanceTag {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceTag::Bisim => "bisim",
            InstanceTag::Metric => "metric",
            InstanceTag::Termination => "termination",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "bisim" => Some(InstanceTag::Bisim),
            "metric" => Some(InstanceTag::Metric),
            "termination" => Some(InstanceTag::Termination),
            _ => None,
        }
    }
}

impl fmt::Display for InstanceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A behaviour function together with its logic side: α, the one-step
/// logic operators and the instance-specific strategy synthesizers.
pub trait Instance: MonotoneMap {
    fn tag(&self) -> InstanceTag;

    fn state_count(&self) -> usize;

    fn default_max_iter(&self) -> usize;

    /// Behaviour-side semantics of a finite payload set.
    fn alpha(&self, payloads: &[Payload]) -> Result<LatticeValue, WitnessError>;

    /// Grammar, model consistency and top-level form of a witness payload.
    fn check_payload(&self, payload: &Payload) -> Result<(), WitnessError>;

    /// One logic step: a witness `a` built from `a_set` with `b ≪ α({a})`.
    fn apc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError>;

    /// One logic step: a witness `a` built from `a_set` with `α({a}) ⋢ ḃ`.
    fn adc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError>;

    /// Finite F with `b ≪ 𝕓(⊔F)` and smaller degrees.
    fn primal_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError>;

    /// Finite F covering every valid ∃-move at `ḃ`, with smaller co-degrees.
    fn dual_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError>;

    /// Extra shape constraints on ∃-moves beyond the game inequality.
    fn check_move_shape(&self, _d: &LatticeValue) -> Result<(), String> {
        Ok(())
    }

    /// `payload ∈ γ(d)`.
    fn in_gamma(&self, payload: &Payload, d: &LatticeValue) -> Result<bool, WitnessError>;

    /// `α(γ(d))` when it is finitely computable.
    fn alpha_of_gamma(&self, d: &LatticeValue) -> Option<LatticeValue>;

    /// `α(ℓ(A))`, computed on the semantic side.
    fn alpha_of_logic_step(&self, a_set: &[Payload]) -> Result<LatticeValue, WitnessError>;

    /// Human-readable semantics of a payload, used as verification evidence.
    fn describe(&self, payload: &Payload) -> String;
}

/// Malformed model input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model has no states")]
    Empty,
    #[error("state index {index} out of range for {n} states")]
    StateOutOfRange { index: usize, n: usize },
    #[error("state {state} lists successor {successor} twice")]
    DuplicateSuccessor { state: usize, successor: usize },
    #[error("distribution of state {state}: {reason}")]
    BadDistribution { state: usize, reason: String },
    #[error("terminal state {0} has outgoing transitions")]
    TerminalWithTransitions(usize),
    #[error("non-terminal state {0} has no distribution")]
    MissingDistribution(usize),
    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },
}
