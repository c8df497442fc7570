//! Bisimilarity on unlabelled transition systems and Hennessy-Milner
//! formulas as distinguishing witnesses.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fixpoint::{KleeneChain, MonotoneMap};
use crate::game::StrategyError;
use crate::instance::{Instance, InstanceTag, ModelError};
use crate::lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue, Relation};
use crate::witness::{Payload, Witness, WitnessError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    succ: Vec<Vec<usize>>,
}

impl TransitionSystem {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in edges {
            for i in [a, b] {
                if i >= n {
                    return Err(ModelError::StateOutOfRange { index: i, n });
                }
            }
            if succ[a].contains(&b) {
                return Err(ModelError::DuplicateSuccessor { state: a, successor: b });
            }
            succ[a].push(b);
        }
        Self::from_successors(succ)
    }

    pub fn from_successors(succ: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let n = succ.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        for (x, ys) in succ.iter().enumerate() {
            for (i, &y) in ys.iter().enumerate() {
                if y >= n {
                    return Err(ModelError::StateOutOfRange { index: y, n });
                }
                if ys[..i].contains(&y) {
                    return Err(ModelError::DuplicateSuccessor { state: x, successor: y });
                }
            }
        }
        Ok(TransitionSystem { succ })
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, x: usize) -> &[usize] {
        &self.succ[x]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ.iter().enumerate().flat_map(|(x, ys)| ys.iter().map(move |&y| (x, y))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HmlFormula {
    True,
    Diamond(Box<HmlFormula>),
    And(Vec<HmlFormula>),
    Not(Box<HmlFormula>),
}

impl HmlFormula {
    pub fn diamond(f: HmlFormula) -> Self {
        HmlFormula::Diamond(Box::new(f))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: HmlFormula) -> Self {
        HmlFormula::Not(Box::new(f))
    }

    /// Conjunction without duplicate conjuncts; one conjunct collapses to
    /// itself and none to `True`.
    pub fn and(conjuncts: Vec<HmlFormula>) -> Self {
        let mut out: Vec<HmlFormula> = Vec::with_capacity(conjuncts.len());
        for c in conjuncts {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        match out.len() {
            0 => HmlFormula::True,
            1 => out.pop().unwrap(),
            _ => HmlFormula::And(out),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            HmlFormula::True => 0,
            HmlFormula::Diamond(f) => 1 + f.modal_depth(),
            HmlFormula::And(fs) => fs.iter().map(|f| f.modal_depth()).max().unwrap_or(0),
            HmlFormula::Not(f) => f.modal_depth(),
        }
    }

    fn maximal_diamonds<'a>(&'a self, out: &mut Vec<&'a HmlFormula>) {
        match self {
            HmlFormula::True => {}
            HmlFormula::Diamond(_) => {
                if !out.contains(&self) {
                    out.push(self)
                }
            }
            HmlFormula::And(fs) => fs.iter().for_each(|f| f.maximal_diamonds(out)),
            HmlFormula::Not(f) => f.maximal_diamonds(out),
        }
    }

    /// For `◇φ`, the maximal ◇-subformulas of φ.
    pub fn step_subterms(&self) -> Vec<HmlFormula> {
        let mut out = Vec::new();
        match self {
            HmlFormula::Diamond(f) => f.maximal_diamonds(&mut out),
            other => other.maximal_diamonds(&mut out),
        }
        out.into_iter().cloned().collect()
    }
}

impl fmt::Display for HmlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HmlFormula::True => write!(f, "true"),
            HmlFormula::Diamond(g) => write!(f, "◇{g}"),
            HmlFormula::Not(g) => write!(f, "¬{g}"),
            HmlFormula::And(gs) => {
                write!(f, "(")?;
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ∧ ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Membership vector of `⟦φ⟧`.
pub fn eval_formula(ts: &TransitionSystem, phi: &HmlFormula) -> Vec<bool> {
    let n = ts.n();
    match phi {
        HmlFormula::True => vec![true; n],
        HmlFormula::Diamond(g) => {
            let s = eval_formula(ts, g);
            (0..n).map(|x| ts.successors(x).iter().any(|&y| s[y])).collect()
        }
        HmlFormula::And(gs) => {
            let mut acc = vec![true; n];
            for g in gs {
                for (a, b) in acc.iter_mut().zip(eval_formula(ts, g)) {
                    *a &= b;
                }
            }
            acc
        }
        HmlFormula::Not(g) => eval_formula(ts, g).into_iter().map(|b| !b).collect(),
    }
}

/// `(x1,x2) ∈ 𝕓(R)` iff every move of either side is matched into `R`.
pub fn bisim_functional(ts: &TransitionSystem, r: &Relation) -> Relation {
    let n = ts.n();
    let mut out = Relation::empty(n);
    for x1 in 0..n {
        for x2 in 0..n {
            let fwd = ts.successors(x1).iter().all(|&y1| ts.successors(x2).iter().any(|&y2| r.contains(y1, y2)));
            let bwd = ts.successors(x2).iter().all(|&y2| ts.successors(x1).iter().any(|&y1| r.contains(y1, y2)));
            if fwd && bwd {
                out.insert(x1, x2);
            }
        }
    }
    out
}

/// Greatest bisimulation, by Kleene iteration from X×X.
pub fn bisimilarity(ts: &TransitionSystem) -> Relation {
    let chain = KleeneChain::compute(ts, ts.default_max_iter()).expect("bisimulation functional is monotone");
    debug_assert!(chain.is_converged());
    chain.last().as_rel().expect("relation carrier").clone()
}

/// Pairs agreeing on every predicate.
pub fn alpha_bisim(n: usize, predicates: &[Vec<bool>]) -> Relation {
    let mut r = Relation::empty(n);
    for x1 in 0..n {
        for x2 in 0..n {
            if predicates.iter().all(|p| p[x1] == p[x2]) {
                r.insert(x1, x2);
            }
        }
    }
    r
}

/// First index at which the pair leaves the chain, if it does.
fn removal_index(chain: &KleeneChain, x1: usize, x2: usize) -> Option<usize> {
    chain.iterates().iter().position(|v| !v.as_rel().expect("relation carrier").contains(x1, x2))
}

/// The side and successor ∃ (resp. ∀) commits to for a non-bisimilar pair,
/// with the pairs to be answered next.
fn choose_successor(ts: &TransitionSystem, chain: &KleeneChain, x1: usize, x2: usize) -> Result<Vec<(usize, usize)>, StrategyError> {
    let k = removal_index(chain, x1, x2).ok_or_else(|| StrategyError::NotFinite {
        element: format!("({x1},{x2})"),
        degree: chain.degree(&BasisElement::RelJoin { x1, x2 }).unwrap_or(crate::Degree::Undefined),
    })?;
    if k == 0 {
        return Err(StrategyError::Internal(String::from("pair missing from X×X")));
    }
    let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
    let sides: [(usize, usize, bool); 2] = [(x1, x2, false), (x2, x1, true)];
    for (from, to, flipped) in sides {
        for &y in ts.successors(from) {
            let pairs: Vec<(usize, usize)> =
                ts.successors(to).iter().map(|&z| if flipped { (z, y) } else { (y, z) }).collect();
            let degs: Option<Vec<usize>> = pairs.iter().map(|&(a, b)| removal_index(chain, a, b).filter(|&d| d < k)).collect();
            if let Some(degs) = degs {
                let m = degs.into_iter().max().unwrap_or(0);
                if best.as_ref().is_none_or(|(bm, _)| m < *bm) {
                    best = Some((m, pairs));
                }
            }
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| StrategyError::Internal(format!("no successor of {x1} or {x2} is unmatched below degree {k}")))
}

/// Co-singletons `(y1,y)` for `y ∈ succ(x2)`, or the mirrored block.
pub fn bisim_primal_strategy(ts: &TransitionSystem, chain: &KleeneChain, x1: usize, x2: usize) -> Result<Vec<BasisElement>, StrategyError> {
    Ok(choose_successor(ts, chain, x1, x2)?.into_iter().map(|(x1, x2)| BasisElement::RelJoin { x1, x2 }).collect())
}

/// Singletons `{(y1,y)}` for `y ∈ succ(x2)`, or the mirrored block.
pub fn bisim_dual_strategy(ts: &TransitionSystem, chain: &KleeneChain, x1: usize, x2: usize) -> Result<Vec<BasisElement>, StrategyError> {
    Ok(choose_successor(ts, chain, x1, x2)?.into_iter().map(|(x1, x2)| BasisElement::RelMeet { x1, x2 }).collect())
}

fn hml_payloads<'a>(ws: impl IntoIterator<Item = &'a Payload>) -> Result<Vec<&'a HmlFormula>, WitnessError> {
    ws.into_iter()
        .map(|p| match p {
            Payload::Hml(f) => Ok(f),
            other => Err(WitnessError::WrongInstance { expected: InstanceTag::Bisim, found: other.tag() }),
        })
        .collect()
}

/// `◇(⋀{P ∈ A | y ⊨ P} ∧ ⋀{¬P | P ∈ A, y ⊭ P})` for a successor `y` of one
/// side that no successor of the other side agrees with on all of A.
fn distinguishing_step(ts: &TransitionSystem, x1: usize, x2: usize, a_set: &[Witness]) -> Result<Witness, WitnessError> {
    let forms = hml_payloads(a_set.iter().map(|w| &w.payload))?;
    let sems: Vec<Vec<bool>> = forms.iter().map(|f| eval_formula(ts, f)).collect();
    let differ = |a: usize, b: usize| sems.iter().any(|s| s[a] != s[b]);
    for (from, to) in [(x1, x2), (x2, x1)] {
        if let Some(&y) = ts.successors(from).iter().find(|&&y| ts.successors(to).iter().all(|&z| differ(y, z))) {
            let conj = forms
                .iter()
                .zip(&sems)
                .map(|(f, s)| if s[y] { (*f).clone() } else { HmlFormula::not((*f).clone()) })
                .collect();
            return Ok(Witness::new(Payload::Hml(HmlFormula::diamond(HmlFormula::and(conj)))));
        }
    }
    Err(WitnessError::NoWitness(format!("({x1},{x2}) ∈ 𝕓(α(A)): every successor is matched by one agreeing on A")))
}

impl MonotoneMap for TransitionSystem {
    fn lattice(&self) -> LatticeKind {
        LatticeKind::Rel { n: self.n() }
    }

    fn apply(&self, value: &LatticeValue) -> Result<LatticeValue, LatticeError> {
        match value {
            LatticeValue::Rel(r) if r.n() == self.n() => Ok(LatticeValue::Rel(bisim_functional(self, r))),
            other => Err(LatticeError::CarrierMismatch { expected: format!("{}", self.lattice()), found: format!("{}", other.kind()) }),
        }
    }
}

impl Instance for TransitionSystem {
    fn tag(&self) -> InstanceTag {
        InstanceTag::Bisim
    }

    fn state_count(&self) -> usize {
        self.n()
    }

    fn default_max_iter(&self) -> usize {
        self.n() * self.n() + 1
    }

    fn alpha(&self, payloads: &[Payload]) -> Result<LatticeValue, WitnessError> {
        let preds: Vec<Vec<bool>> = hml_payloads(payloads)?.into_iter().map(|f| eval_formula(self, f)).collect();
        Ok(LatticeValue::Rel(alpha_bisim(self.n(), &preds)))
    }

    fn check_payload(&self, payload: &Payload) -> Result<(), WitnessError> {
        match payload {
            Payload::Hml(HmlFormula::Diamond(_)) => Ok(()),
            Payload::Hml(f) => Err(WitnessError::Malformed(format!("{f} is not a ◇-formula"))),
            other => Err(WitnessError::WrongInstance { expected: InstanceTag::Bisim, found: other.tag() }),
        }
    }

    fn apc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::RelJoin { x1, x2 } => distinguishing_step(self, *x1, *x2, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a co-singleton"))),
        }
    }

    fn adc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::RelMeet { x1, x2 } => distinguishing_step(self, *x1, *x2, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a singleton"))),
        }
    }

    fn primal_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        match b {
            BasisElement::RelJoin { x1, x2 } => bisim_primal_strategy(self, chain, *x1, *x2),
            other => Err(StrategyError::WrongBasis(format!("{other} is not a co-singleton"))),
        }
    }

    fn dual_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        match b {
            BasisElement::RelMeet { x1, x2 } => bisim_dual_strategy(self, chain, *x1, *x2),
            other => Err(StrategyError::WrongBasis(format!("{other} is not a singleton"))),
        }
    }

    fn in_gamma(&self, payload: &Payload, d: &LatticeValue) -> Result<bool, WitnessError> {
        let f = hml_payloads([payload])?[0];
        let r = d.as_rel().ok_or_else(|| WitnessError::Contract(String::from("γ expects a relation")))?;
        let s = eval_formula(self, f);
        Ok(r.pairs().all(|(a, b)| s[a] == s[b]))
    }

    fn alpha_of_gamma(&self, d: &LatticeValue) -> Option<LatticeValue> {
        let n = self.n();
        let r = d.as_rel()?;
        if n > 8 {
            return None;
        }
        let closed: Vec<Vec<bool>> = (0u32..1 << n)
            .map(|m| (0..n).map(|x| m >> x & 1 == 1).collect::<Vec<bool>>())
            .filter(|s| r.pairs().all(|(a, b)| s[a] == s[b]))
            .collect();
        Some(LatticeValue::Rel(alpha_bisim(n, &closed)))
    }

    fn alpha_of_logic_step(&self, a_set: &[Payload]) -> Result<LatticeValue, WitnessError> {
        let n = self.n();
        let preds: Vec<Vec<bool>> = hml_payloads(a_set)?.into_iter().map(|f| eval_formula(self, f)).collect();
        // atoms of the Boolean algebra generated by A
        let mut atom_of = vec![0usize; n];
        let mut atoms: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        for x in 0..n {
            let key: Vec<bool> = preds.iter().map(|p| p[x]).collect();
            let next = atoms.len();
            atom_of[x] = *atoms.entry(key).or_insert(next);
        }
        let m = atoms.len();
        let diamonds: Vec<Vec<bool>> = if m <= 12 {
            (0u32..1 << m)
                .map(|mask| {
                    let s: Vec<bool> = (0..n).map(|y| mask >> atom_of[y] & 1 == 1).collect();
                    (0..n).map(|x| self.successors(x).iter().any(|&y| s[y])).collect()
                })
                .collect()
        } else {
            // ◇ of unions of atoms agree iff the sets of hit atoms agree
            let hits: Vec<BTreeSet<usize>> =
                (0..n).map(|x| self.successors(x).iter().map(|&y| atom_of[y]).collect()).collect();
            let mut r = Relation::empty(n);
            for x1 in 0..n {
                for x2 in 0..n {
                    if hits[x1] == hits[x2] {
                        r.insert(x1, x2);
                    }
                }
            }
            return Ok(LatticeValue::Rel(r));
        };
        Ok(LatticeValue::Rel(alpha_bisim(n, &diamonds)))
    }

    fn describe(&self, payload: &Payload) -> String {
        match payload {
            Payload::Hml(f) => {
                let s = eval_formula(self, f);
                let members: Vec<String> = (0..self.n()).filter(|&x| s[x]).map(|x| format!("{x}")).collect();
                format!("⟦{f}⟧ = {{{}}}", members.join(","))
            }
            other => format!("{other}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::Degree;
    use crate::witness::{self, WitnessClaim};

    // u=0 → w=2; v=1 and w=2 terminal
    fn three() -> TransitionSystem {
        TransitionSystem::new(3, &[(0, 2)]).unwrap()
    }

    // a=0→b=1→c=2 ; a'=3→b'=4
    fn chains() -> TransitionSystem {
        TransitionSystem::new(5, &[(0, 1), (1, 2), (3, 4)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let ts = three();
        let d = HmlFormula::diamond(HmlFormula::True);
        assert_eq!(eval_formula(&ts, &d), vec![true, false, false]);
        assert_eq!(eval_formula(&ts, &HmlFormula::True), vec![true; 3]);
        assert_eq!(eval_formula(&ts, &HmlFormula::not(d)), vec![false, true, true]);
    }

    #[test]
    fn functional_examples() {
        let ts = three();
        let r = bisim_functional(&ts, &Relation::full(3));
        assert!(!r.contains(0, 1) && r.contains(1, 2));
        let none = TransitionSystem::new(3, &[]).unwrap();
        assert_eq!(bisim_functional(&none, &Relation::empty(3)), Relation::full(3));
    }

    #[test]
    fn bisimilarity_examples() {
        let r = bisimilarity(&three());
        assert!(r.contains(1, 2) && !r.contains(0, 1));
        // two isomorphic 2-cycles
        let cyc = TransitionSystem::new(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert_eq!(bisimilarity(&cyc), Relation::full(4));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_bisim(3, &[]), Relation::full(3));
        let r = alpha_bisim(3, &[vec![true, false, false]]);
        assert_eq!(r, Relation::from_pairs(3, [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]));
        let singles: Vec<Vec<bool>> = (0..3).map(|i| (0..3).map(|j| i == j).collect()).collect();
        assert_eq!(alpha_bisim(3, &singles), Relation::from_pairs(3, [(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn degrees_and_strategies() {
        let ts = three();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        let b = BasisElement::RelJoin { x1: 0, x2: 1 };
        assert_eq!(chain.degree(&b).unwrap(), Degree::Finite(1));
        assert_eq!(chain.codegree(&BasisElement::RelMeet { x1: 0, x2: 1 }).unwrap(), Degree::Finite(1));
        assert!(bisim_primal_strategy(&ts, &chain, 0, 1).unwrap().is_empty());
        assert!(bisim_dual_strategy(&ts, &chain, 0, 1).unwrap().is_empty());
        assert!(bisim_primal_strategy(&ts, &chain, 1, 2).is_err());

        let ts = chains();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        assert_eq!(bisim_primal_strategy(&ts, &chain, 0, 3).unwrap(), vec![BasisElement::RelJoin { x1: 1, x2: 4 }]);
        assert_eq!(bisim_dual_strategy(&ts, &chain, 0, 3).unwrap(), vec![BasisElement::RelMeet { x1: 1, x2: 4 }]);
    }

    #[test]
    fn witnesses() {
        let ts = three();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        let b = BasisElement::RelJoin { x1: 0, x2: 1 };
        let w = witness::primal_witness(&ts, &chain, &b).unwrap();
        assert_eq!(w.payload, Payload::Hml(HmlFormula::diamond(HmlFormula::True)));
        assert!(witness::verify_witness(&ts, &WitnessClaim::Primal(b), &w).accepted);
        let bd = BasisElement::RelMeet { x1: 0, x2: 1 };
        let wd = witness::dual_witness(&ts, &chain, &bd).unwrap();
        assert_eq!(wd, w);

        let ts = chains();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        let w = witness::primal_witness(&ts, &chain, &BasisElement::RelJoin { x1: 0, x2: 3 }).unwrap();
        // the successor b has a move, b' does not
        let expect = HmlFormula::diamond(HmlFormula::diamond(HmlFormula::True));
        assert_eq!(w.payload, Payload::Hml(expect));
        assert_eq!(w.claimed_degree, 2);
    }

    #[test]
    fn aux_p_picks_the_only_candidate() {
        let ts = three();
        let p = Witness::new(Payload::Hml(HmlFormula::diamond(HmlFormula::True)));
        let b = BasisElement::RelJoin { x1: 0, x2: 1 };
        assert_eq!(witness::aux_p(&ts, &b, core::slice::from_ref(&p), false).unwrap(), p);
        let bisimilar = BasisElement::RelJoin { x1: 1, x2: 2 };
        assert!(matches!(witness::aux_p(&ts, &bisimilar, &[p], false), Err(WitnessError::NoWitness(_))));
    }

    #[test]
    fn normalization() {
        let t = HmlFormula::diamond(HmlFormula::True);
        assert_eq!(HmlFormula::and(vec![t.clone(), t.clone()]), t);
        assert_eq!(HmlFormula::and(vec![]), HmlFormula::True);
        let phi = HmlFormula::diamond(HmlFormula::and(vec![t.clone(), HmlFormula::not(HmlFormula::diamond(t.clone()))]));
        assert_eq!(phi.modal_depth(), 3);
        assert_eq!(phi.step_subterms(), vec![t.clone(), HmlFormula::diamond(t)]);
    }

    #[test]
    fn compatibility_on_small_example() {
        let ts = three();
        let a = vec![Payload::Hml(HmlFormula::diamond(HmlFormula::True))];
        let lhs = ts.alpha_of_logic_step(&a).unwrap();
        let rhs = ts.apply(&ts.alpha(&a).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let empty: Vec<Payload> = vec![];
        assert_eq!(ts.alpha(&empty).unwrap(), LatticeKind::Rel { n: 3 }.bottom());
        assert_eq!(ts.alpha_of_logic_step(&empty).unwrap(), ts.apply(&LatticeKind::Rel { n: 3 }.bottom()).unwrap());
    }
}
