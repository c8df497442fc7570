//! Termination probabilities of Markov chains with witness trees.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::distribution::Distribution;
use crate::fixpoint::{Degree, KleeneChain, MonotoneMap};
use crate::game::StrategyError;
use crate::instance::{Instance, InstanceTag, ModelError};
use crate::lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue};
use crate::rational::{self, Rational};
use crate::witness::{Payload, Witness, WitnessError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovChain {
    terminal: Vec<bool>,
    delta: Vec<Option<Distribution>>,
}

impl MarkovChain {
    /// `delta[x]` must be `None` exactly for terminal states.
    pub fn new(terminal: Vec<bool>, delta: Vec<Option<Distribution>>) -> Result<Self, ModelError> {
        let n = terminal.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        if delta.len() != n {
            return Err(ModelError::LabelCount { expected: n, found: delta.len() });
        }
        for x in 0..n {
            match (&delta[x], terminal[x]) {
                (Some(_), true) => return Err(ModelError::TerminalWithTransitions(x)),
                (None, false) => return Err(ModelError::MissingDistribution(x)),
                (Some(d), false) => {
                    if let Some(y) = d.support().find(|&y| y >= n) {
                        return Err(ModelError::StateOutOfRange { index: y, n });
                    }
                }
                (None, true) => {}
            }
        }
        Ok(MarkovChain { terminal, delta })
    }

    pub fn n(&self) -> usize {
        self.terminal.len()
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.terminal[x]
    }

    pub fn delta(&self, x: usize) -> Option<&Distribution> {
        self.delta[x].as_ref()
    }

    /// `δ(x)(y)`, zero for terminal `x`.
    pub fn prob(&self, x: usize, y: usize) -> Rational {
        self.delta(x).map(|d| d.prob(y)).unwrap_or_else(rational::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessTree {
    Leaf(usize),
    Node(usize, Vec<WitnessTree>),
}

impl WitnessTree {
    pub fn root(&self) -> usize {
        match self {
            WitnessTree::Leaf(x) | WitnessTree::Node(x, _) => *x,
        }
    }

    pub fn children(&self) -> &[WitnessTree] {
        match self {
            WitnessTree::Leaf(_) => &[],
            WitnessTree::Node(_, cs) => cs,
        }
    }

    pub fn height(&self) -> usize {
        1 + self.children().iter().map(|c| c.height()).max().unwrap_or(0)
    }

    /// Compact JSON with sorted keys: `{"state":x}` or
    /// `{"children":[...],"state":x}`. Used to break ties between trees.
    pub fn canonical_json(&self) -> String {
        match self {
            WitnessTree::Leaf(x) => format!("{{\"state\":{x}}}"),
            WitnessTree::Node(x, cs) => {
                let inner: Vec<String> = cs.iter().map(|c| c.canonical_json()).collect();
                format!("{{\"children\":[{}],\"state\":{x}}}", inner.join(","))
            }
        }
    }

    /// Leaves sit on terminal states, nodes on non-terminal ones with
    /// non-empty, distinct-rooted, positive-probability children.
    pub fn validate(&self, mc: &MarkovChain) -> Result<(), WitnessError> {
        let n = mc.n();
        let x = self.root();
        if x >= n {
            return Err(WitnessError::Malformed(format!("state {x} out of range for {n} states")));
        }
        match self {
            WitnessTree::Leaf(_) if !mc.is_terminal(x) => Err(WitnessError::Malformed(format!("leaf {x} is not terminal"))),
            WitnessTree::Leaf(_) => Ok(()),
            WitnessTree::Node(_, cs) => {
                if mc.is_terminal(x) {
                    return Err(WitnessError::Malformed(format!("terminal state {x} has children")));
                }
                if cs.is_empty() {
                    return Err(WitnessError::Malformed(format!("node {x} has no children")));
                }
                for (i, c) in cs.iter().enumerate() {
                    if cs[..i].iter().any(|o| o.root() == c.root()) {
                        return Err(WitnessError::Malformed(format!("node {x} has two children rooted at {}", c.root())));
                    }
                    if c.root() < n && mc.prob(x, c.root()).is_zero() {
                        return Err(WitnessError::Malformed(format!("child {} of {x} has probability 0", c.root())));
                    }
                    c.validate(mc)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for WitnessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessTree::Leaf(x) => write!(f, "{x}"),
            WitnessTree::Node(x, cs) => {
                write!(f, "{x}→")?;
                if cs.len() == 1 {
                    return write!(f, "{}", cs[0]);
                }
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn pt_unchecked(mc: &MarkovChain, tree: &WitnessTree) -> Rational {
    match tree {
        WitnessTree::Leaf(_) => rational::one(),
        WitnessTree::Node(x, cs) => cs.iter().map(|c| mc.prob(*x, c.root()) * pt_unchecked(mc, c)).sum(),
    }
}

/// Probability mass the tree certifies: 1 at leaves, `Σ δ(x)(root_i)·pt(child_i)` at nodes.
pub fn pt(mc: &MarkovChain, tree: &WitnessTree) -> Result<Rational, WitnessError> {
    tree.validate(mc)?;
    Ok(pt_unchecked(mc, tree))
}

/// `𝕓(f)(x) = 1` on terminal states, `Σ_y δ(x)(y)·f(y)` elsewhere.
pub fn term_functional(mc: &MarkovChain, f: &[Rational]) -> Vec<Rational> {
    (0..mc.n())
        .map(|x| match mc.delta(x) {
            None => rational::one(),
            Some(d) => d.expect(f),
        })
        .collect()
}

/// Solves `a·x = b` exactly; `None` when `a` is singular.
pub fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for k in col..n {
            a[col][k] = &a[col][k] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for k in col..n {
                    let t = &factor * &a[col][k];
                    a[r][k] -= t;
                }
                let t = &factor * &b[col];
                b[r] -= t;
            }
        }
    }
    Some(b)
}

/// Exact termination probabilities: states that cannot reach a terminal
/// state get 0, the rest solve `x = Σ δ·x` with terminal states fixed at 1.
pub fn termination_oracle(mc: &MarkovChain) -> Vec<Rational> {
    let n = mc.n();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        if let Some(d) = mc.delta(x) {
            for y in d.support() {
                preds[y].push(x);
            }
        }
    }
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&x| mc.is_terminal(x)).collect();
    for &t in &queue {
        reach[t] = true;
    }
    while let Some(y) = queue.pop_front() {
        for &x in &preds[y] {
            if !reach[x] {
                reach[x] = true;
                queue.push_back(x);
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&x| reach[x] && !mc.is_terminal(x)).collect();
    let index: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let m = unknown.len();
    let mut a = vec![vec![rational::zero(); m]; m];
    let mut b = vec![rational::zero(); m];
    for (i, &x) in unknown.iter().enumerate() {
        a[i][i] = rational::one();
        for (y, p) in mc.delta(x).expect("non-terminal").entries() {
            if mc.is_terminal(*y) {
                b[i] += p;
            } else if let Some(&j) = index.get(y) {
                a[i][j] -= p;
            }
        }
    }
    let sol = solve_linear(a, b).expect("system is non-singular once zero states are removed");
    (0..n)
        .map(|x| {
            if mc.is_terminal(x) {
                rational::one()
            } else {
                index.get(&x).map(|&i| sol[i].clone()).unwrap_or_else(rational::zero)
            }
        })
        .collect()
}

fn val_of(v: &LatticeValue) -> &[Rational] {
    v.as_val().expect("valuation carrier")
}

/// Greedy constants: successors by decreasing `δ·d_{k−1}` until the sum
/// passes `c`, each lowered by half the surplus.
fn strategy_constants(mc: &MarkovChain, chain: &KleeneChain, x: usize, c: &Rational, k: usize) -> Result<Vec<(usize, Rational)>, StrategyError> {
    let Some(d) = mc.delta(x) else {
        return Ok(Vec::new());
    };
    if k < 2 {
        return Err(StrategyError::Internal(format!("non-terminal {x} has degree {k}")));
    }
    let prev = val_of(chain.iterate(k - 1).expect("within chain"));
    let mut succ: Vec<(usize, Rational, Rational)> =
        d.entries().iter().map(|(y, p)| (*y, p * &prev[*y], p.clone())).collect();
    succ.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut sum = rational::zero();
    let mut chosen = Vec::new();
    for (y, w, _) in succ {
        if sum > *c {
            break;
        }
        sum += w;
        chosen.push(y);
    }
    if sum <= *c {
        return Err(StrategyError::Internal(format!("Σ δ(x)·d_{}(⊥) = {sum} does not exceed {c}", k - 1)));
    }
    let half_gap = (&sum - c) / rational::int(2);
    Ok(chosen
        .into_iter()
        .map(|y| (y, &prev[y] - &half_gap))
        .filter(|(_, ci)| ci.is_positive())
        .collect())
}

fn finite(b: &BasisElement, d: Degree) -> Result<usize, StrategyError> {
    d.finite().ok_or_else(|| StrategyError::NotFinite { element: format!("{b}"), degree: d })
}

pub fn term_primal_strategy(mc: &MarkovChain, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
    let BasisElement::ValJoin { x, c } = b else {
        return Err(StrategyError::WrongBasis(format!("{b} is not a valuation join-basis element")));
    };
    let k = finite(b, chain.degree(b)?)?;
    strategy_constants(mc, chain, *x, c, k)?.into_iter().map(|(y, c)| Ok(BasisElement::val_join(y, c)?)).collect()
}

pub fn term_dual_strategy(mc: &MarkovChain, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
    let BasisElement::ValMeet { x, c } = b else {
        return Err(StrategyError::WrongBasis(format!("{b} is not a valuation meet-basis element")));
    };
    let k = finite(b, chain.codegree(b)?)?;
    strategy_constants(mc, chain, *x, c, k)?.into_iter().map(|(y, c)| Ok(BasisElement::val_meet(y, c)?)).collect()
}

fn tree_payloads<'a>(ps: impl IntoIterator<Item = &'a Payload>) -> Result<Vec<&'a WitnessTree>, WitnessError> {
    ps.into_iter()
        .map(|p| match p {
            Payload::Tree(t) => Ok(t),
            other => Err(WitnessError::WrongInstance { expected: InstanceTag::Termination, found: other.tag() }),
        })
        .collect()
}

/// Highest-pt tree per root, ties to the least canonical JSON.
fn best_per_root<'a>(mc: &MarkovChain, trees: &[&'a WitnessTree]) -> BTreeMap<usize, (&'a WitnessTree, Rational)> {
    let mut best: BTreeMap<usize, (&WitnessTree, Rational)> = BTreeMap::new();
    for &t in trees {
        let v = pt_unchecked(mc, t);
        let better = match best.get(&t.root()) {
            None => true,
            Some((o, ov)) => v > *ov || (v == *ov && t.canonical_json() < o.canonical_json()),
        };
        if better {
            best.insert(t.root(), (t, v));
        }
    }
    best
}

/// One logic step: the leaf at a terminal state, or the node combining the
/// best available child per successor.
fn tree_step(mc: &MarkovChain, x: usize, c: &Rational, a_set: &[Witness]) -> Result<Witness, WitnessError> {
    if mc.is_terminal(x) {
        return Ok(Witness::new(Payload::Tree(WitnessTree::Leaf(x))));
    }
    let trees = tree_payloads(a_set.iter().map(|w| &w.payload))?;
    let best = best_per_root(mc, &trees);
    let children: Vec<WitnessTree> = best
        .iter()
        .filter(|(y, (_, v))| mc.prob(x, **y).is_positive() && v.is_positive())
        .map(|(_, (t, _))| (*t).clone())
        .collect();
    if children.is_empty() {
        return Err(WitnessError::NoWitness(format!("no tree in A is rooted at a successor of {x}")));
    }
    let tree = WitnessTree::Node(x, children);
    let v = pt_unchecked(mc, &tree);
    if v <= *c {
        return Err(WitnessError::NoWitness(format!("best combination at {x} has pt {v}, not above {c}")));
    }
    Ok(Witness::new(Payload::Tree(tree)))
}

impl MonotoneMap for MarkovChain {
    fn lattice(&self) -> LatticeKind {
        LatticeKind::Val { n: self.n() }
    }

    fn apply(&self, value: &LatticeValue) -> Result<LatticeValue, LatticeError> {
        match value {
            LatticeValue::Val(v) if v.len() == self.n() => Ok(LatticeValue::Val(term_functional(self, v))),
            other => Err(LatticeError::CarrierMismatch { expected: format!("{}", self.lattice()), found: format!("{}", other.kind()) }),
        }
    }
}

impl Instance for MarkovChain {
    fn tag(&self) -> InstanceTag {
        InstanceTag::Termination
    }

    fn state_count(&self) -> usize {
        self.n()
    }

    fn default_max_iter(&self) -> usize {
        64
    }

    fn alpha(&self, payloads: &[Payload]) -> Result<LatticeValue, WitnessError> {
        let trees = tree_payloads(payloads)?;
        let mut v = vec![rational::zero(); self.n()];
        for t in trees {
            t.validate(self)?;
            let p = pt_unchecked(self, t);
            if p > v[t.root()] {
                v[t.root()] = p;
            }
        }
        Ok(LatticeValue::Val(v))
    }

    fn check_payload(&self, payload: &Payload) -> Result<(), WitnessError> {
        tree_payloads([payload])?[0].validate(self)
    }

    fn apc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::ValJoin { x, c } => tree_step(self, *x, c, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a valuation join-basis element"))),
        }
    }

    fn adc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::ValMeet { x, c } => tree_step(self, *x, c, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a valuation meet-basis element"))),
        }
    }

    fn primal_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        term_primal_strategy(self, chain, b)
    }

    fn dual_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        term_dual_strategy(self, chain, b)
    }

    fn in_gamma(&self, payload: &Payload, d: &LatticeValue) -> Result<bool, WitnessError> {
        let t = tree_payloads([payload])?[0];
        let v = d.as_val().ok_or_else(|| WitnessError::Contract(String::from("γ expects a valuation")))?;
        Ok(pt(self, t)? <= v[t.root()])
    }

    fn alpha_of_gamma(&self, _d: &LatticeValue) -> Option<LatticeValue> {
        None
    }

    fn alpha_of_logic_step(&self, a_set: &[Payload]) -> Result<LatticeValue, WitnessError> {
        let trees = tree_payloads(a_set)?;
        let n = self.n();
        let mut out = vec![rational::zero(); n];
        for (x, slot) in out.iter_mut().enumerate() {
            if self.is_terminal(x) {
                *slot = rational::one();
                continue;
            }
            // every choice of at most one tree per successor root
            let mut groups: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
            for t in &trees {
                if self.prob(x, t.root()).is_positive() {
                    groups.entry(t.root()).or_default().push(pt_unchecked(self, t));
                }
            }
            let mut sums = vec![rational::zero()];
            for (y, vals) in &groups {
                let p = self.prob(x, *y);
                let mut next = Vec::with_capacity(sums.len() * (vals.len() + 1));
                for s in &sums {
                    next.push(s.clone());
                    for v in vals {
                        next.push(s + &p * v);
                    }
                }
                next.sort();
                next.dedup();
                sums = next;
            }
            *slot = sums.into_iter().max().expect("non-empty");
        }
        Ok(LatticeValue::Val(out))
    }

    fn describe(&self, payload: &Payload) -> String {
        match payload {
            Payload::Tree(t) => format!("pt({t}) = {}", pt_unchecked(self, t)),
            other => format!("{other}"),
        }
    }
}

/// Result of [`term_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermWitness {
    Found(Witness),
    /// The iterates never exceed c, and the chain converged: c ≥ μ𝕓(x).
    Refuted { fixpoint: Rational },
    /// The bound ran out; `last` is the last iterate at x.
    Unknown { last: Rational, iterations: usize },
}

/// Shortest positive-probability path from `x` to a terminal state, as a tree.
pub fn shortest_path_tree(mc: &MarkovChain, x: usize) -> Option<WitnessTree> {
    let n = mc.n();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    let mut hit = None;
    while let Some(y) = queue.pop_front() {
        if mc.is_terminal(y) {
            hit = Some(y);
            break;
        }
        for z in mc.delta(y).expect("non-terminal").support() {
            if !seen[z] {
                seen[z] = true;
                parent[z] = Some(y);
                queue.push_back(z);
            }
        }
    }
    let mut node = hit?;
    let mut tree = WitnessTree::Leaf(node);
    while let Some(p) = parent[node] {
        tree = WitnessTree::Node(p, vec![tree]);
        node = p;
    }
    Some(tree)
}

/// A tree certifying that state `x` terminates with probability above `c`.
pub fn term_witness(mc: &MarkovChain, x: usize, c: &Rational, max_iter: usize) -> Result<TermWitness, WitnessError> {
    if c.is_zero() {
        return Ok(match shortest_path_tree(mc, x) {
            Some(t) => TermWitness::Found(Witness::new(Payload::Tree(t))),
            None => TermWitness::Refuted { fixpoint: rational::zero() },
        });
    }
    let chain = KleeneChain::compute(mc, max_iter)?;
    let b = BasisElement::val_join(x, c.clone())?;
    match chain.degree(&b)? {
        Degree::Finite(_) => Ok(TermWitness::Found(crate::witness::primal_witness(mc, &chain, &b)?)),
        Degree::Undefined => Ok(TermWitness::Refuted { fixpoint: val_of(chain.last())[x].clone() }),
        Degree::Unknown { iterations } => Ok(TermWitness::Unknown { last: val_of(chain.last())[x].clone(), iterations }),
    }
}
