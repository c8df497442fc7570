//! Witness data model, the auxiliary functions and the
//! witness/strategy transformations, and witness verification.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;


use crate::bisim::HmlFormula;
use crate::fixpoint::{FixpointError, KleeneChain};
use crate::game::{Strategy, StrategyError};
use crate::instance::{Instance, InstanceTag};
use crate::lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue, Point};
use crate::metric::MetricFormula;
use crate::rational;
use crate::termination::WitnessTree;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("malformed witness: {0}")]
    Malformed(String),
    #[error("witness belongs to instance {found}, expected {expected}")]
    WrongInstance { expected: InstanceTag, found: InstanceTag },
    #[error("incomplete strategy: no entry for {0}")]
    IncompleteStrategy(String),
    #[error("witness does not verify: {0}")]
    Invalid(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Fixpoint(#[from] FixpointError),
}

/// Witness syntax of the three instances.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Hml(HmlFormula),
    Metric(MetricFormula),
    Tree(WitnessTree),
}

impl Payload {
    pub fn tag(&self) -> InstanceTag {
        match self {
            Payload::Hml(_) => InstanceTag::Bisim,
            Payload::Metric(_) => InstanceTag::Metric,
            Payload::Tree(_) => InstanceTag::Termination,
        }
    }

    /// Modal depth, metric nesting degree or tree height.
    pub fn degree(&self) -> usize {
        match self {
            Payload::Hml(f) => f.modal_depth(),
            Payload::Metric(f) => f.degree(),
            Payload::Tree(t) => t.height(),
        }
    }

    /// The logic-side strategy read off the syntax: the immediate subterms
    /// one logic step below the payload.
    pub fn subterms(&self) -> Vec<Payload> {
        match self {
            Payload::Hml(f) => f.step_subterms().into_iter().map(Payload::Hml).collect(),
            Payload::Metric(f) => f.step_subterms().into_iter().map(Payload::Metric).collect(),
            Payload::Tree(t) => t.children().iter().cloned().map(Payload::Tree).collect(),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Hml(x) => write!(f, "{x}"),
            Payload::Metric(x) => write!(f, "{x}"),
            Payload::Tree(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness {
    pub payload: Payload,
    pub claimed_degree: usize,
}

impl Witness {
    /// Claims exactly the structural degree.
    pub fn new(payload: Payload) -> Self {
        let claimed_degree = payload.degree();
        Witness { payload, claimed_degree }
    }

    pub fn tag(&self) -> InstanceTag {
        self.payload.tag()
    }

    pub fn subterms(&self) -> Vec<Witness> {
        self.payload.subterms().into_iter().map(Witness::new).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessClaim {
    /// `b ≪ μ𝕓` for a join-basis element.
    Primal(BasisElement),
    /// `μ𝕓 ⋢ ḃ` for a meet-basis element.
    Dual(BasisElement),
}

impl WitnessClaim {
    pub fn basis(&self) -> &BasisElement {
        match self {
            WitnessClaim::Primal(b) | WitnessClaim::Dual(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: String,
    pub structural_degree: usize,
    /// `α({w})` when the payload was well-formed.
    pub alpha: Option<LatticeValue>,
    pub semantics: String,
}

fn payloads(ws: &[Witness]) -> Vec<Payload> {
    ws.iter().map(|w| w.payload.clone()).collect()
}

fn alpha_one<I: Instance + ?Sized>(inst: &I, p: &Payload) -> Result<LatticeValue, WitnessError> {
    inst.alpha(core::slice::from_ref(p))
}

/// Checks a witness against a claim using only the model and the payload.
pub fn verify_witness<I: Instance + ?Sized>(inst: &I, claim: &WitnessClaim, w: &Witness) -> Verdict {
    let structural_degree = w.payload.degree();
    let reject = |reason: String, alpha: Option<LatticeValue>, semantics: String| Verdict {
        accepted: false,
        reason,
        structural_degree,
        alpha,
        semantics,
    };
    let kind = inst.lattice();
    let b = claim.basis();
    if let Err(e) = b.validate(kind) {
        return reject(format!("claim is not over this model: {e}"), None, String::new());
    }
    match claim {
        WitnessClaim::Primal(b) if !b.is_join() => return reject(format!("{b} is not a join-basis element"), None, String::new()),
        WitnessClaim::Dual(b) if !b.is_meet() => return reject(format!("{b} is not a meet-basis element"), None, String::new()),
        _ => {}
    }
    if w.tag() != inst.tag() {
        return reject(format!("witness is for instance {}, model is {}", w.tag(), inst.tag()), None, String::new());
    }
    if let Err(e) = inst.check_payload(&w.payload) {
        return reject(format!("{e}"), None, String::new());
    }
    let semantics = inst.describe(&w.payload);
    if w.claimed_degree != structural_degree {
        return reject(
            format!("claimed degree {} differs from structural degree {structural_degree}", w.claimed_degree),
            None,
            semantics,
        );
    }
    let alpha = match alpha_one(inst, &w.payload) {
        Ok(a) => a,
        Err(e) => return reject(format!("{e}"), None, semantics),
    };
    let bv = b.to_value(kind).expect("validated");
    let outcome = match claim {
        WitnessClaim::Primal(_) => kind.way_below_violation(&bv, &alpha).map(|v| match v {
            None => Ok(format!("{b} ≪ α(w)")),
            Some(p) => Err(format!("{b} is not way-below α(w) at {p}: {}", point_gap(&bv, &alpha, &p, "≮"))),
        }),
        WitnessClaim::Dual(_) => kind.leq_violation(&alpha, &bv).map(|v| match v {
            Some(p) => Ok(format!("α(w) ⋢ {b} at {p}: {}", point_gap(&alpha, &bv, &p, ">"))),
            None => Err(format!("α(w) ⊑ {b}: the witness does not escape the bound")),
        }),
    };
    match outcome {
        Ok(Ok(reason)) => Verdict { accepted: true, reason, structural_degree, alpha: Some(alpha), semantics },
        Ok(Err(reason)) => reject(reason, Some(alpha), semantics),
        Err(e) => reject(format!("{e}"), Some(alpha), semantics),
    }
}

fn point_gap(a: &LatticeValue, b: &LatticeValue, p: &Point, rel: &str) -> String {
    match (a.value_at(p), b.value_at(p)) {
        (Some(x), Some(y)) => format!("{x} {rel} {y}"),
        _ => match (a, b, p) {
            (LatticeValue::Rel(ra), LatticeValue::Rel(rb), Point::Pair(x, y)) => format!(
                "pair ({x},{y}) is {} the left relation and {} the right",
                if ra.contains(*x, *y) { "in" } else { "not in" },
                if rb.contains(*x, *y) { "in" } else { "not in" }
            ),
            _ => format!("at {p}"),
        },
    }
}

/// Primal auxiliary function: picks from `a_set`, or applies one logic step.
pub fn aux_p<I: Instance + ?Sized>(
    inst: &I,
    b: &BasisElement,
    a_set: &[Witness],
    apply_logic_step: bool,
) -> Result<Witness, WitnessError> {
    let kind = inst.lattice();
    let bv = b.to_value(kind)?;
    if apply_logic_step {
        let w = inst.apc(b, a_set)?;
        if !kind.way_below(&bv, &alpha_one(inst, &w.payload)?)? {
            return Err(WitnessError::Contract(format!("logic step produced {} which does not witness {b}", w.payload)));
        }
        return Ok(w);
    }
    for a in a_set {
        if kind.way_below(&bv, &alpha_one(inst, &a.payload)?)? {
            return Ok(a.clone());
        }
    }
    Err(WitnessError::NoWitness(format!("{b} is not way-below α of any of {} candidates", a_set.len())))
}

/// Dual auxiliary function: picks from `a_set`, or applies one logic step.
pub fn aux_d<I: Instance + ?Sized>(
    inst: &I,
    b: &BasisElement,
    a_set: &[Witness],
    apply_logic_step: bool,
) -> Result<Witness, WitnessError> {
    let kind = inst.lattice();
    let bv = b.to_value(kind)?;
    if apply_logic_step {
        let w = inst.adc(b, a_set)?;
        if kind.leq(&alpha_one(inst, &w.payload)?, &bv)? {
            return Err(WitnessError::Contract(format!("logic step produced {} with α below {b}", w.payload)));
        }
        return Ok(w);
    }
    for a in a_set {
        if !kind.leq(&alpha_one(inst, &a.payload)?, &bv)? {
            return Ok(a.clone());
        }
    }
    Err(WitnessError::NoWitness(format!("α of every one of {} candidates lies below {b}", a_set.len())))
}

/// A meet-basis element `ḃ'` with `ḃ' ⩺ ḋ` and `ė ⋢ ḃ'`.
pub fn z_pick(kind: LatticeKind, e: &LatticeValue, d: &LatticeValue) -> Result<BasisElement, WitnessError> {
    let no_point = || WitnessError::Contract(format!("ė ⊑ ḋ (ė = {e}, ḋ = {d})"));
    match (kind, e, d) {
        (LatticeKind::Rel { .. }, LatticeValue::Rel(er), LatticeValue::Rel(dr)) => {
            // ė ⋢ ḋ under ⊇: a pair of ḋ that ė lacks
            let (x1, x2) = dr.pairs().find(|&(a, b)| !er.contains(a, b)).ok_or_else(no_point)?;
            Ok(BasisElement::RelMeet { x1, x2 })
        }
        (LatticeKind::Val { .. }, LatticeValue::Val(ev), LatticeValue::Val(dv)) => {
            let x = (0..ev.len()).find(|&x| ev[x] > dv[x]).ok_or_else(no_point)?;
            Ok(BasisElement::val_meet(x, rational::midpoint(&dv[x], &ev[x]))?)
        }
        (LatticeKind::Dist { n }, LatticeValue::Dist(ed), LatticeValue::Dist(dd)) => {
            for x1 in 0..n {
                for x2 in x1..n {
                    let em = rational::max(ed.get(x1, x2), ed.get(x2, x1));
                    let dm = rational::max(dd.get(x1, x2), dd.get(x2, x1));
                    if em > dm {
                        return Ok(BasisElement::dist_meet(x1, x2, rational::midpoint(&dm, &em))?);
                    }
                }
            }
            if kind.leq(e, d)? {
                Err(no_point())
            } else {
                Err(WitnessError::Contract(format!("ḋ = {d} is not symmetric; no pair separates it from ė")))
            }
        }
        _ => Err(WitnessError::Contract(format!("z_pick is not defined on {kind}"))),
    }
}

/// `wit(b) = apc(b, wit[strategy(b)])`, recursively over the strategy table.
pub fn primal_witness_from_strategy<I: Instance + ?Sized>(
    inst: &I,
    b: &BasisElement,
    strategy: &Strategy,
) -> Result<Witness, WitnessError> {
    let mut memo = BTreeMap::new();
    build(inst, b, strategy, &mut memo, true, 0)
}

/// `wit(ḃ) = adc(ḃ, wit[strategy(ḃ)])`, recursively over the strategy table.
pub fn dual_witness_from_strategy<I: Instance + ?Sized>(
    inst: &I,
    b: &BasisElement,
    strategy: &Strategy,
) -> Result<Witness, WitnessError> {
    let mut memo = BTreeMap::new();
    build(inst, b, strategy, &mut memo, false, 0)
}

fn build<I: Instance + ?Sized>(
    inst: &I,
    b: &BasisElement,
    strategy: &Strategy,
    memo: &mut BTreeMap<BasisElement, Witness>,
    primal: bool,
    depth: usize,
) -> Result<Witness, WitnessError> {
    if let Some(w) = memo.get(b) {
        return Ok(w.clone());
    }
    if depth > strategy.len() {
        return Err(WitnessError::Contract(format!("strategy cycles through {b}")));
    }
    let moves = strategy.get(b).ok_or_else(|| WitnessError::IncompleteStrategy(format!("{b}")))?;
    let mut children = Vec::with_capacity(moves.len());
    for m in moves {
        children.push(build(inst, m, strategy, memo, primal, depth + 1)?);
    }
    let w = if primal { aux_p(inst, b, &children, true)? } else { aux_d(inst, b, &children, true)? };
    memo.insert(b.clone(), w.clone());
    Ok(w)
}

/// ∃'s move read off a primal witness: `α` of its subterms.
pub fn primal_witness_move<I: Instance + ?Sized>(inst: &I, w: &Witness) -> Result<(LatticeValue, Vec<Witness>), WitnessError> {
    let subs = w.subterms();
    Ok((inst.alpha(&payloads(&subs))?, subs))
}

/// The witness to continue with after ∀ replied `b'`.
pub fn primal_witness_continue<I: Instance + ?Sized>(
    inst: &I,
    reply: &BasisElement,
    subterms: &[Witness],
) -> Result<Witness, WitnessError> {
    aux_p(inst, reply, subterms, false).map_err(|e| WitnessError::Invalid(format!("∀'s reply {reply} admits no subterm witness ({e})")))
}

/// ∀'s reply read off a dual witness, with the witness for the reply.
pub fn dual_witness_reply<I: Instance + ?Sized>(
    inst: &I,
    w: &Witness,
    d: &LatticeValue,
) -> Result<(BasisElement, Witness), WitnessError> {
    let subs = w.subterms();
    let e = inst.alpha(&payloads(&subs))?;
    let reply = z_pick(inst.lattice(), &e, d).map_err(|err| WitnessError::Invalid(format!("no reply to {d} from the subterms of {} ({err})", w.payload)))?;
    let next = aux_d(inst, &reply, &subs, false)?;
    Ok((reply, next))
}

/// Synthesizes a full primal strategy table reachable from `b`.
pub fn synthesize_primal<I: Instance + ?Sized>(inst: &I, chain: &KleeneChain, b: &BasisElement) -> Result<Strategy, StrategyError> {
    synthesize(inst, chain, b, true)
}

/// Synthesizes a full dual strategy table reachable from `ḃ`.
pub fn synthesize_dual<I: Instance + ?Sized>(inst: &I, chain: &KleeneChain, b: &BasisElement) -> Result<Strategy, StrategyError> {
    synthesize(inst, chain, b, false)
}

fn synthesize<I: Instance + ?Sized>(inst: &I, chain: &KleeneChain, b: &BasisElement, primal: bool) -> Result<Strategy, StrategyError> {
    let mut table = Strategy::new();
    let mut todo = alloc::vec![b.clone()];
    while let Some(cur) = todo.pop() {
        if table.contains_key(&cur) {
            continue;
        }
        let f = if primal {
            crate::game::primal_exists_strategy(inst, chain, &cur)?
        } else {
            crate::game::dual_forall_strategy(inst, chain, &cur)?
        };
        todo.extend(f.iter().filter(|x| !table.contains_key(*x)).cloned());
        table.insert(cur, f);
    }
    Ok(table)
}

/// Primal witness for `b`, built from the synthesized strategy.
pub fn primal_witness<I: Instance + ?Sized>(inst: &I, chain: &KleeneChain, b: &BasisElement) -> Result<Witness, WitnessError> {
    let s = synthesize_primal(inst, chain, b)?;
    primal_witness_from_strategy(inst, b, &s)
}

/// Dual witness for `ḃ`, built from the synthesized strategy.
pub fn dual_witness<I: Instance + ?Sized>(inst: &I, chain: &KleeneChain, b: &BasisElement) -> Result<Witness, WitnessError> {
    let s = synthesize_dual(inst, chain, b)?;
    dual_witness_from_strategy(inst, b, &s)
}
