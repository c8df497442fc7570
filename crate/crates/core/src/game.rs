//! The primal way-below game and the dual game as state machines, strategy
//! synthesis, and a game loop with pluggable policies.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::fixpoint::{Degree, KleeneChain};
use crate::instance::Instance;
use crate::lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue, Point};
use crate::rational::{self, Rational};
use crate::witness::{self, Witness, WitnessError};

/// Basis element → the finite set F played from it.
pub type Strategy = BTreeMap<BasisElement, Vec<BasisElement>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("degree of {element} is {degree}; no finitary strategy")]
    NotFinite { element: String, degree: Degree },
    #[error("{0}")]
    WrongBasis(String),
    #[error("internal degree inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("it is {expected}'s turn, not {found}'s")]
    WrongTurn { expected: Player, found: Player },
    #[error("policy failed: {0}")]
    Policy(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// ∃ proves `b ≪ μ𝕓`; infinite plays go to ∀.
    Primal,
    /// ∃ proves `μ𝕓 ⊑ ḃ`; infinite plays go to ∃.
    Dual,
}

impl Variant {
    pub fn infinite_play_winner(&self) -> Player {
        match self {
            Variant::Primal => Player::Forall,
            Variant::Dual => Player::Exists,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Primal => "primal",
            Variant::Dual => "dual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(&self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Player::Exists => "exists",
            Player::Forall => "forall",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Exists => "∃",
            Player::Forall => "∀",
        })
    }
}

/// An ∃-move. In the primal game the engine records the finite set F and
/// `value` is `⊔F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistsMove {
    pub value: LatticeValue,
    pub basis: Option<Vec<BasisElement>>,
}

impl ExistsMove {
    pub fn value(value: LatticeValue) -> Self {
        ExistsMove { value, basis: None }
    }

    pub fn join_of<I: Instance + ?Sized>(inst: &I, f: Vec<BasisElement>) -> Result<Self, LatticeError> {
        let value = inst.lattice().join_basis(&f)?;
        Ok(ExistsMove { value, basis: Some(f) })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Position {
    ExistsTurn { at: BasisElement, round: usize },
    ForallTurn { at: BasisElement, offer: ExistsMove, round: usize },
}

impl Position {
    pub fn turn(&self) -> Player {
        match self {
            Position::ExistsTurn { .. } => Player::Exists,
            Position::ForallTurn { .. } => Player::Forall,
        }
    }

    pub fn at(&self) -> &BasisElement {
        match self {
            Position::ExistsTurn { at, .. } | Position::ForallTurn { at, .. } => at,
        }
    }

    pub fn round(&self) -> usize {
        match self {
            Position::ExistsTurn { round, .. } | Position::ForallTurn { round, .. } => *round,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Exists(ExistsMove),
    Forall(BasisElement),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveVerdict {
    pub accepted: bool,
    pub reason: String,
}

fn gap(a: &LatticeValue, b: &LatticeValue, p: &Point) -> String {
    match (a.value_at(p), b.value_at(p)) {
        (Some(x), Some(y)) => format!(" ({x} vs {y})"),
        _ => String::new(),
    }
}

/// Checks an ∃-move at `at`.
pub fn validate_exists_move<I: Instance + ?Sized>(
    inst: &I,
    variant: Variant,
    at: &BasisElement,
    d: &LatticeValue,
) -> Result<MoveVerdict, GameError> {
    let kind = inst.lattice();
    if d.kind() != kind {
        return Ok(MoveVerdict { accepted: false, reason: format!("move lives in {}, game is over {kind}", d.kind()) });
    }
    if let Err(reason) = inst.check_move_shape(d) {
        return Ok(MoveVerdict { accepted: false, reason });
    }
    let bd = inst.apply(d)?;
    let bv = at.to_value(kind)?;
    Ok(match variant {
        Variant::Primal => match kind.way_below_violation(&bv, &bd)? {
            None => MoveVerdict { accepted: true, reason: format!("{at} ≪ 𝕓(d)") },
            Some(p) => MoveVerdict {
                accepted: false,
                reason: format!("{at} ≪ 𝕓(d) fails at {p}{}", gap(&bv, &bd, &p)),
            },
        },
        Variant::Dual => match kind.leq_violation(&bd, &bv)? {
            None => MoveVerdict { accepted: true, reason: format!("𝕓(ḋ) ⊑ {at}") },
            Some(p) => MoveVerdict {
                accepted: false,
                reason: format!("𝕓(ḋ) ⊑ {at} fails at {p}{}", gap(&bd, &bv, &p)),
            },
        },
    })
}

/// Checks a ∀-reply to the ∃-move `d`.
pub fn validate_forall_move<I: Instance + ?Sized>(
    inst: &I,
    variant: Variant,
    d: &LatticeValue,
    reply: &BasisElement,
) -> Result<MoveVerdict, GameError> {
    let kind = inst.lattice();
    if let Err(e) = reply.validate(kind) {
        return Ok(MoveVerdict { accepted: false, reason: format!("{e}") });
    }
    let rv = reply.to_value(kind)?;
    Ok(match variant {
        Variant::Primal => {
            if !reply.is_join() {
                return Ok(MoveVerdict { accepted: false, reason: format!("{reply} is not a join-basis element") });
            }
            match kind.way_below_violation(&rv, d)? {
                None => MoveVerdict { accepted: true, reason: format!("{reply} ≪ d") },
                Some(p) => MoveVerdict { accepted: false, reason: format!("{reply} ≪ d fails at {p}{}", gap(&rv, d, &p)) },
            }
        }
        Variant::Dual => {
            if !reply.is_meet() {
                return Ok(MoveVerdict { accepted: false, reason: format!("{reply} is not a meet-basis element") });
            }
            match kind.way_above_violation(&rv, d)? {
                None => MoveVerdict { accepted: true, reason: format!("{reply} ⩺ ḋ") },
                Some(p) => MoveVerdict { accepted: false, reason: format!("{reply} ⩺ ḋ fails at {p}{}", gap(&rv, d, &p)) },
            }
        }
    })
}

/// Checks a move against the position, including whose turn it is.
pub fn validate_move<I: Instance + ?Sized>(
    inst: &I,
    variant: Variant,
    position: &Position,
    mv: &Move,
) -> Result<MoveVerdict, GameError> {
    match (position, mv) {
        (Position::ExistsTurn { at, .. }, Move::Exists(m)) => validate_exists_move(inst, variant, at, &m.value),
        (Position::ForallTurn { offer, .. }, Move::Forall(r)) => validate_forall_move(inst, variant, &offer.value, r),
        (p, Move::Exists(_)) => Err(GameError::WrongTurn { expected: p.turn(), found: Player::Exists }),
        (p, Move::Forall(_)) => Err(GameError::WrongTurn { expected: p.turn(), found: Player::Forall }),
    }
}

fn require_finite(b: &BasisElement, d: Degree) -> Result<usize, StrategyError> {
    d.finite().ok_or_else(|| StrategyError::NotFinite { element: format!("{b}"), degree: d })
}

/// The finite set F ∃ plays at `b` in the primal game, checked against
/// `b ≪ 𝕓(⊔F)`, `⊔F ⊑ 𝕓^{k-1}(⊥)` and decreasing degrees.
pub fn primal_exists_strategy<I: Instance + ?Sized>(
    inst: &I,
    chain: &KleeneChain,
    b: &BasisElement,
) -> Result<Vec<BasisElement>, StrategyError> {
    let kind = inst.lattice();
    b.validate(kind)?;
    if !b.is_join() {
        return Err(StrategyError::WrongBasis(format!("{b} is not a join-basis element")));
    }
    let k = require_finite(b, chain.degree(b)?)?;
    let f = inst.primal_strategy(chain, b)?;
    for e in &f {
        e.validate(kind)?;
        let de = chain.degree(e)?;
        if !matches!(de, Degree::Finite(j) if j < k) {
            return Err(StrategyError::Internal(format!("{e} in F for {b} has degree {de}, not below {k}")));
        }
    }
    let join = kind.join_basis(&f)?;
    if let Some(p) = kind.way_below_violation(&b.to_value(kind)?, &inst.apply(&join)?)? {
        return Err(StrategyError::Internal(format!("{b} ≪ 𝕓(⊔F) fails at {p}")));
    }
    let prev = chain.iterate(k - 1).expect("k is within the chain");
    if let Some(p) = kind.leq_violation(&join, prev)? {
        return Err(StrategyError::Internal(format!("⊔F ⊑ 𝕓^{}(⊥) fails at {p}", k - 1)));
    }
    Ok(f)
}

/// The finite reply set F ∀ precomputes at `ḃ` in the dual game.
pub fn dual_forall_strategy<I: Instance + ?Sized>(
    inst: &I,
    chain: &KleeneChain,
    b: &BasisElement,
) -> Result<Vec<BasisElement>, StrategyError> {
    let kind = inst.lattice();
    b.validate(kind)?;
    if !b.is_meet() {
        return Err(StrategyError::WrongBasis(format!("{b} is not a meet-basis element")));
    }
    let k = require_finite(b, chain.codegree(b)?)?;
    let f = inst.dual_strategy(chain, b)?;
    for e in &f {
        e.validate(kind)?;
        let de = chain.codegree(e)?;
        if !matches!(de, Degree::Finite(j) if j < k) {
            return Err(StrategyError::Internal(format!("{e} in F for {b} has co-degree {de}, not below {k}")));
        }
    }
    Ok(f)
}

fn chain_values_at(chain: &KleeneChain, p: &Point) -> Vec<Rational> {
    let mut vals: Vec<Rational> = chain
        .iterates()
        .iter()
        .filter_map(|v| match (v, p) {
            (LatticeValue::Dist(d), Point::Pair(a, b)) => Some(rational::min(d.get(*a, *b), d.get(*b, *a))),
            _ => v.value_at(p).cloned(),
        })
        .collect();
    vals.sort();
    vals.dedup();
    vals
}

/// The maximal ∀-replies to `d`: in the primal game the join-basis elements
/// way-below `d`, in the dual game the meet-basis elements way-above `d`.
pub fn forall_candidates(
    kind: LatticeKind,
    chain: &KleeneChain,
    variant: Variant,
    d: &LatticeValue,
) -> Result<Vec<BasisElement>, GameError> {
    let mut out = Vec::new();
    match (variant, d) {
        (Variant::Primal, LatticeValue::Rel(r)) => {
            out.extend(r.complement().pairs().map(|(x1, x2)| BasisElement::RelJoin { x1, x2 }))
        }
        (Variant::Dual, LatticeValue::Rel(r)) => out.extend(r.pairs().map(|(x1, x2)| BasisElement::RelMeet { x1, x2 })),
        (_, LatticeValue::Set(_)) => return Err(GameError::Policy(String::from("games over the set lattice are not played"))),
        (_, _) => {
            let points: Vec<Point> = match kind {
                LatticeKind::Dist { n } => (0..n).flat_map(|a| (a..n).map(move |b| Point::Pair(a, b))).collect(),
                LatticeKind::Val { n } => (0..n).map(Point::State).collect(),
                _ => unreachable!(),
            };
            for p in points {
                let (lo, hi) = match (d, &p) {
                    (LatticeValue::Dist(dd), Point::Pair(a, b)) => {
                        (rational::min(dd.get(*a, *b), dd.get(*b, *a)), rational::max(dd.get(*a, *b), dd.get(*b, *a)))
                    }
                    _ => (d.value_at(&p).unwrap().clone(), d.value_at(&p).unwrap().clone()),
                };
                let vals = chain_values_at(chain, &p);
                let c = match variant {
                    Variant::Primal if !lo.is_zero() => {
                        let below = vals.iter().rev().find(|v| **v < lo).cloned().unwrap_or_else(rational::zero);
                        Some(rational::midpoint(&below, &lo))
                    }
                    Variant::Dual if !hi.is_one() => {
                        let above = vals.iter().find(|v| **v > hi).cloned().unwrap_or_else(rational::one);
                        Some(rational::midpoint(&hi, &above))
                    }
                    _ => None,
                };
                if let Some(c) = c {
                    out.push(match (variant, p) {
                        (Variant::Primal, Point::Pair(a, b)) => BasisElement::dist_join(a, b, c)?,
                        (Variant::Dual, Point::Pair(a, b)) => BasisElement::dist_meet(a, b, c)?,
                        (Variant::Primal, Point::State(x)) => BasisElement::val_join(x, c)?,
                        (Variant::Dual, Point::State(x)) => BasisElement::val_meet(x, c)?,
                        _ => unreachable!(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Produces ∃-moves.
pub trait ExistsPolicy {
    fn exists_move(&mut self, at: &BasisElement, round: usize) -> Result<Option<ExistsMove>, GameError>;
}

/// Produces ∀-replies.
pub trait ForallPolicy {
    fn forall_move(&mut self, at: &BasisElement, offer: &ExistsMove, round: usize) -> Result<Option<BasisElement>, GameError>;
}

/// The engine's ∃: plays ⊔F of the synthesized primal strategy, or the last
/// Kleene iterate in the dual game.
pub struct EngineExists<'a, I: Instance + ?Sized> {
    pub inst: &'a I,
    pub chain: &'a KleeneChain,
    pub variant: Variant,
}

impl<I: Instance + ?Sized> ExistsPolicy for EngineExists<'_, I> {
    fn exists_move(&mut self, at: &BasisElement, _round: usize) -> Result<Option<ExistsMove>, GameError> {
        if self.variant == Variant::Primal && self.chain.degree(at)?.is_finite() {
            if let Ok(f) = primal_exists_strategy(self.inst, self.chain, at) {
                return Ok(Some(ExistsMove::join_of(self.inst, f)?));
            }
        }
        let last = self.chain.last().clone();
        if validate_exists_move(self.inst, self.variant, at, &last)?.accepted {
            return Ok(Some(ExistsMove::value(last)));
        }
        Ok(None)
    }
}

/// Ranks ∀-candidates: in the primal game the largest degree, in the dual
/// game the smallest co-degree; non-finite values rank as infinite.
pub fn best_forall_candidate(
    chain: &KleeneChain,
    variant: Variant,
    candidates: Vec<BasisElement>,
) -> Result<Option<BasisElement>, GameError> {
    let mut best: Option<(usize, BasisElement)> = None;
    for c in candidates {
        let score = match variant {
            Variant::Primal => chain.degree(&c)?.finite().unwrap_or(usize::MAX),
            Variant::Dual => usize::MAX - chain.codegree(&c)?.finite().unwrap_or(usize::MAX),
        };
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, c));
        }
    }
    Ok(best.map(|(_, c)| c))
}

/// Exhaustive adversarial ∀ over the maximal candidates. In the dual game it
/// first consults the precomputed finitary strategy.
pub struct EngineForall<'a, I: Instance + ?Sized> {
    pub inst: &'a I,
    pub chain: &'a KleeneChain,
    pub variant: Variant,
}

impl<I: Instance + ?Sized> ForallPolicy for EngineForall<'_, I> {
    fn forall_move(&mut self, at: &BasisElement, offer: &ExistsMove, _round: usize) -> Result<Option<BasisElement>, GameError> {
        let kind = self.inst.lattice();
        if self.variant == Variant::Dual && self.chain.codegree(at)?.is_finite() {
            if let Ok(f) = dual_forall_strategy(self.inst, self.chain, at) {
                for e in f {
                    if kind.way_above(&e.to_value(kind)?, &offer.value)? {
                        return Ok(Some(e));
                    }
                }
            }
        }
        let cands = forall_candidates(kind, self.chain, self.variant, &offer.value)?;
        best_forall_candidate(self.chain, self.variant, cands)
    }
}

/// ∃ driven by a primal witness: each round plays α of the current
/// witness's subterms.
pub struct WitnessExists<'a, I: Instance + ?Sized> {
    inst: &'a I,
    current: Witness,
    pending: Option<Vec<Witness>>,
}

pub fn strategy_from_primal_witness<I: Instance + ?Sized>(inst: &I, w: Witness) -> WitnessExists<'_, I> {
    WitnessExists { inst, current: w, pending: None }
}

impl<I: Instance + ?Sized> WitnessExists<'_, I> {
    pub fn current(&self) -> &Witness {
        &self.current
    }
}

impl<I: Instance + ?Sized> ExistsPolicy for WitnessExists<'_, I> {
    fn exists_move(&mut self, at: &BasisElement, _round: usize) -> Result<Option<ExistsMove>, GameError> {
        if let Some(subs) = self.pending.take() {
            self.current = witness::primal_witness_continue(self.inst, at, &subs)?;
        }
        let (value, subs) = witness::primal_witness_move(self.inst, &self.current)?;
        self.pending = Some(subs);
        Ok(Some(ExistsMove::value(value)))
    }
}

/// ∀ driven by a dual witness: replies `Z(α(subterms), ḋ)`.
pub struct WitnessForall<'a, I: Instance + ?Sized> {
    inst: &'a I,
    current: Witness,
}

pub fn dual_strategy_from_witness<I: Instance + ?Sized>(inst: &I, w: Witness) -> WitnessForall<'_, I> {
    WitnessForall { inst, current: w }
}

impl<I: Instance + ?Sized> WitnessForall<'_, I> {
    pub fn current(&self) -> &Witness {
        &self.current
    }
}

impl<I: Instance + ?Sized> ForallPolicy for WitnessForall<'_, I> {
    fn forall_move(&mut self, _at: &BasisElement, offer: &ExistsMove, _round: usize) -> Result<Option<BasisElement>, GameError> {
        let (reply, next) = witness::dual_witness_reply(self.inst, &self.current, &offer.value)?;
        self.current = next;
        Ok(Some(reply))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub round: usize,
    pub player: Player,
    pub mv: Move,
    pub verdict: MoveVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndReason {
    Stuck(Player),
    InvalidMove(Player),
    RoundLimit,
    Repetition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub winner: Player,
    pub rounds: usize,
    pub end: EndReason,
    pub transcript: Vec<TranscriptEntry>,
}

/// Runs a game from `start` until someone is stuck, a move is invalid, a
/// position repeats or `max_rounds` is exceeded.
pub fn play<I: Instance + ?Sized>(
    inst: &I,
    variant: Variant,
    start: &BasisElement,
    exists: &mut dyn ExistsPolicy,
    forall: &mut dyn ForallPolicy,
    max_rounds: usize,
) -> Result<Outcome, GameError> {
    let mut transcript = Vec::new();
    let mut seen = BTreeSet::new();
    let mut at = start.clone();
    let mut round = 1;
    let finish = |winner, rounds, end, transcript| Ok(Outcome { winner, rounds, end, transcript });
    loop {
        if round > max_rounds {
            return finish(variant.infinite_play_winner(), round - 1, EndReason::RoundLimit, transcript);
        }
        if !seen.insert(at.clone()) {
            return finish(variant.infinite_play_winner(), round - 1, EndReason::Repetition, transcript);
        }
        let Some(em) = exists.exists_move(&at, round)? else {
            return finish(Player::Forall, round, EndReason::Stuck(Player::Exists), transcript);
        };
        let verdict = validate_exists_move(inst, variant, &at, &em.value)?;
        let ok = verdict.accepted;
        transcript.push(TranscriptEntry { round, player: Player::Exists, mv: Move::Exists(em.clone()), verdict });
        if !ok {
            return finish(Player::Forall, round, EndReason::InvalidMove(Player::Exists), transcript);
        }
        let Some(reply) = forall.forall_move(&at, &em, round)? else {
            return finish(Player::Exists, round, EndReason::Stuck(Player::Forall), transcript);
        };
        let verdict = validate_forall_move(inst, variant, &em.value, &reply)?;
        let ok = verdict.accepted;
        transcript.push(TranscriptEntry { round, player: Player::Forall, mv: Move::Forall(reply.clone()), verdict });
        if !ok {
            return finish(Player::Exists, round, EndReason::InvalidMove(Player::Forall), transcript);
        }
        at = reply;
        round += 1;
    }
}
