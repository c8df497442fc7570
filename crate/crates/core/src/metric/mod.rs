//! Kantorovich behavioural distances on labelled Markov chains, with metric
//! formulas as witnesses.

pub mod transport;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::distribution::Distribution;
use crate::fixpoint::{KleeneChain, MonotoneMap};
use crate::game::StrategyError;
use crate::instance::{Instance, InstanceTag, ModelError};
use crate::lattice::{BasisElement, DistFn, LatticeError, LatticeKind, LatticeValue};
use crate::rational::{self, Rational};
use crate::witness::{Payload, Witness, WitnessError};

pub use transport::{TransportError, TransportSolution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledMarkovChain {
    labels: Vec<String>,
    delta: Vec<Distribution>,
}

impl LabelledMarkovChain {
    pub fn new(labels: Vec<String>, delta: Vec<Distribution>) -> Result<Self, ModelError> {
        if labels.is_empty() {
            return Err(ModelError::Empty);
        }
        if labels.len() != delta.len() {
            return Err(ModelError::LabelCount { expected: delta.len(), found: labels.len() });
        }
        let n = labels.len();
        for d in &delta {
            if let Some(y) = d.support().find(|&y| y >= n) {
                return Err(ModelError::StateOutOfRange { index: y, n });
            }
        }
        Ok(LabelledMarkovChain { labels, delta })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn delta(&self, x: usize) -> &Distribution {
        &self.delta[x]
    }

    fn distinct_labels(&self) -> Vec<&str> {
        let mut ls: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        ls.sort();
        ls.dedup();
        ls
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricFormula {
    /// 1 on states labelled `a`, 0 elsewhere.
    LabelInd(String),
    /// Expectation under the successor distribution.
    Next(Box<MetricFormula>),
    OneMinus(Box<MetricFormula>),
    /// Truncated subtraction `f ⊖ q`.
    SubQ(Box<MetricFormula>, Rational),
    Max(Box<MetricFormula>, Box<MetricFormula>),
}

impl MetricFormula {
    pub fn label(a: &str) -> Self {
        MetricFormula::LabelInd(String::from(a))
    }

    pub fn next(f: MetricFormula) -> Self {
        MetricFormula::Next(Box::new(f))
    }

    /// `1 − f`, cancelling double complements.
    pub fn one_minus(f: MetricFormula) -> Self {
        match f {
            MetricFormula::OneMinus(g) => *g,
            g => MetricFormula::OneMinus(Box::new(g)),
        }
    }

    /// `f ⊖ q`; `q = 0` is the identity.
    pub fn sub(f: MetricFormula, q: Rational) -> Self {
        if q.is_zero() {
            f
        } else {
            MetricFormula::SubQ(Box::new(f), q)
        }
    }

    pub fn max(f: MetricFormula, g: MetricFormula) -> Self {
        if f == g {
            f
        } else {
            MetricFormula::Max(Box::new(f), Box::new(g))
        }
    }

    pub fn min(f: MetricFormula, g: MetricFormula) -> Self {
        if f == g {
            f
        } else {
            Self::one_minus(Self::max(Self::one_minus(f), Self::one_minus(g)))
        }
    }

    /// The constant `q`, built from any formula `g`.
    pub fn constant(g: MetricFormula, q: Rational) -> Self {
        Self::sub(Self::one_minus(Self::sub(g, rational::one())), rational::one() - q)
    }

    fn atoms<'a>(&'a self, out: &mut Vec<&'a MetricFormula>) {
        match self {
            MetricFormula::LabelInd(_) | MetricFormula::Next(_) => {
                if !out.contains(&self) {
                    out.push(self)
                }
            }
            MetricFormula::OneMinus(f) | MetricFormula::SubQ(f, _) => f.atoms(out),
            MetricFormula::Max(f, g) => {
                f.atoms(out);
                g.atoms(out)
            }
        }
    }

    /// Label indicators have degree 1; `○g` has one more than the atoms of g.
    pub fn degree(&self) -> usize {
        match self {
            MetricFormula::LabelInd(_) => 1,
            MetricFormula::Next(g) => 1 + g.degree(),
            MetricFormula::OneMinus(f) | MetricFormula::SubQ(f, _) => f.degree(),
            MetricFormula::Max(f, g) => f.degree().max(g.degree()),
        }
    }

    /// For `○g`, the maximal label/next subformulas of g.
    pub fn step_subterms(&self) -> Vec<MetricFormula> {
        let mut out = Vec::new();
        match self {
            MetricFormula::LabelInd(_) => {}
            MetricFormula::Next(g) => g.atoms(&mut out),
            other => other.atoms(&mut out),
        }
        out.into_iter().cloned().collect()
    }

    fn check_constants(&self) -> Result<(), WitnessError> {
        match self {
            MetricFormula::LabelInd(_) => Ok(()),
            MetricFormula::Next(f) | MetricFormula::OneMinus(f) => f.check_constants(),
            MetricFormula::SubQ(f, q) => {
                if !rational::in_unit_interval(q) {
                    return Err(WitnessError::Malformed(format!("subtraction constant {q} outside [0,1]")));
                }
                f.check_constants()
            }
            MetricFormula::Max(f, g) => {
                f.check_constants()?;
                g.check_constants()
            }
        }
    }
}

impl fmt::Display for MetricFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricFormula::LabelInd(a) => write!(f, "[{a}]"),
            MetricFormula::Next(g) => write!(f, "○{g}"),
            MetricFormula::OneMinus(g) => write!(f, "(1 − {g})"),
            MetricFormula::SubQ(g, q) => write!(f, "({g} ⊖ {q})"),
            MetricFormula::Max(g, h) => write!(f, "max({g}, {h})"),
        }
    }
}

/// Values of `f` at every state.
pub fn eval_metric_all(lmc: &LabelledMarkovChain, f: &MetricFormula) -> Vec<Rational> {
    let n = lmc.n();
    match f {
        MetricFormula::LabelInd(a) => {
            (0..n).map(|x| if lmc.label(x) == a { rational::one() } else { rational::zero() }).collect()
        }
        MetricFormula::Next(g) => {
            let v = eval_metric_all(lmc, g);
            (0..n).map(|x| lmc.delta(x).expect(&v)).collect()
        }
        MetricFormula::OneMinus(g) => eval_metric_all(lmc, g).into_iter().map(|v| rational::one() - v).collect(),
        MetricFormula::SubQ(g, q) => eval_metric_all(lmc, g)
            .into_iter()
            .map(|v| {
                let r = v - q;
                if r.is_negative() {
                    rational::zero()
                } else {
                    r
                }
            })
            .collect(),
        MetricFormula::Max(g, h) => eval_metric_all(lmc, g)
            .into_iter()
            .zip(eval_metric_all(lmc, h))
            .map(|(a, b)| if a >= b { a } else { b })
            .collect(),
    }
}

pub fn eval_metric_formula(lmc: &LabelledMarkovChain, f: &MetricFormula, x: usize) -> Rational {
    eval_metric_all(lmc, f).swap_remove(x)
}

/// Optimal transport value between two distributions, with the coupling
/// and dual potentials restricted to the supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kantorovich {
    pub value: Rational,
    /// `(y1, y2, mass)` for every cell with positive mass.
    pub coupling: Vec<(usize, usize, Rational)>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
}

/// `K(d)(p,q)`, the cheapest coupling of `p` and `q` under cost `d`.
pub fn kantorovich(d: &DistFn, p: &Distribution, q: &Distribution) -> Result<Kantorovich, TransportError> {
    let rows: Vec<usize> = p.support().collect();
    let cols: Vec<usize> = q.support().collect();
    let supply: Vec<Rational> = p.entries().iter().map(|(_, w)| w.clone()).collect();
    let demand: Vec<Rational> = q.entries().iter().map(|(_, w)| w.clone()).collect();
    let cost: Vec<Vec<Rational>> = rows.iter().map(|&a| cols.iter().map(|&b| d.get(a, b).clone()).collect()).collect();
    let sol = transport::solve(&supply, &demand, &cost)?;
    let mut coupling = Vec::new();
    for (i, &a) in rows.iter().enumerate() {
        for (j, &b) in cols.iter().enumerate() {
            if !sol.flow[i][j].is_zero() {
                coupling.push((a, b, sol.flow[i][j].clone()));
            }
        }
    }
    // marginals re-checked independently of the solver
    for (i, w) in supply.iter().enumerate() {
        let s: Rational = sol.flow[i].iter().sum();
        assert_eq!(&s, w, "row marginal of the coupling");
    }
    for (j, w) in demand.iter().enumerate() {
        let s: Rational = sol.flow.iter().map(|r| &r[j]).sum();
        assert_eq!(&s, w, "column marginal of the coupling");
    }
    Ok(Kantorovich { value: sol.cost, coupling, rows, cols, u: sol.u, v: sol.v })
}

/// `𝕓(d)(x1,x2) = K(d)(δ(x1),δ(x2))` on equal labels, 1 otherwise.
pub fn metric_functional(lmc: &LabelledMarkovChain, d: &DistFn) -> DistFn {
    let n = lmc.n();
    let sym = d.is_symmetric();
    let mut out = DistFn::ones(n);
    for x1 in 0..n {
        for x2 in 0..n {
            if lmc.label(x1) != lmc.label(x2) {
                continue;
            }
            if sym && x2 < x1 {
                let v = out.get(x2, x1).clone();
                out.set(x1, x2, v);
                continue;
            }
            let k = kantorovich(d, lmc.delta(x1), lmc.delta(x2)).expect("model distributions are valid");
            out.set(x1, x2, k.value);
        }
    }
    out
}

fn dist_of(v: &LatticeValue) -> &DistFn {
    v.as_dist().expect("distance carrier")
}

fn supp_pairs(lmc: &LabelledMarkovChain, x1: usize, x2: usize, prev: &DistFn) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in lmc.delta(x1).support() {
        for b in lmc.delta(x2).support() {
            let key = (a.min(b), a.max(b));
            if a != b && prev.get(a, b).is_positive() && !out.contains(&key) {
                out.push(key);
            }
        }
    }
    out
}

/// Smallest `ρ = 1 − 2^{-j}` with `ρ·target > c`.
fn scaling(target: &Rational, c: &Rational) -> Rational {
    let mut j = 1;
    loop {
        let rho = rational::one_minus_pow2(j);
        if &rho * target > *c {
            return rho;
        }
        j += 1;
    }
}

fn strategy_constants(
    lmc: &LabelledMarkovChain,
    chain: &KleeneChain,
    x1: usize,
    x2: usize,
    c: &Rational,
    k: usize,
) -> Result<Vec<(usize, usize, Rational)>, StrategyError> {
    if lmc.label(x1) != lmc.label(x2) {
        return Ok(Vec::new());
    }
    if k < 2 {
        return Err(StrategyError::Internal(format!("equal labels at ({x1},{x2}) but degree {k}")));
    }
    let prev = dist_of(chain.iterate(k - 1).expect("within chain"));
    let cur = dist_of(chain.iterate(k).expect("within chain")).get(x1, x2);
    let rho = scaling(cur, c);
    Ok(supp_pairs(lmc, x1, x2, prev).into_iter().map(|(a, b)| (a, b, &rho * prev.get(a, b))).collect())
}

/// `{d^{ρ·d_{k−1}(y1,y2)}_{y1,y2}}` over off-diagonal support pairs.
pub fn metric_primal_strategy(lmc: &LabelledMarkovChain, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
    let BasisElement::DistJoin { x1, x2, c } = b else {
        return Err(StrategyError::WrongBasis(format!("{b} is not a distance join-basis element")));
    };
    let k = chain.degree(b)?.finite().ok_or_else(|| StrategyError::NotFinite { element: format!("{b}"), degree: chain.degree(b).unwrap() })?;
    strategy_constants(lmc, chain, *x1, *x2, c, k)?
        .into_iter()
        .map(|(a, b, c)| Ok(BasisElement::dist_join(a, b, c)?))
        .collect()
}

/// `{ḋ^{ρ·d_{k−1}(y1,y2)}_{y1,y2}}` over off-diagonal support pairs.
pub fn metric_dual_strategy(lmc: &LabelledMarkovChain, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
    let BasisElement::DistMeet { x1, x2, c } = b else {
        return Err(StrategyError::WrongBasis(format!("{b} is not a distance meet-basis element")));
    };
    let k = chain.codegree(b)?.finite().ok_or_else(|| StrategyError::NotFinite { element: format!("{b}"), degree: chain.codegree(b).unwrap() })?;
    strategy_constants(lmc, chain, *x1, *x2, c, k)?
        .into_iter()
        .map(|(a, b, c)| Ok(BasisElement::dist_meet(a, b, c)?))
        .collect()
}

fn metric_payloads<'a>(ps: impl IntoIterator<Item = &'a Payload>) -> Result<Vec<&'a MetricFormula>, WitnessError> {
    ps.into_iter()
        .map(|p| match p {
            Payload::Metric(f) => Ok(f),
            other => Err(WitnessError::WrongInstance { expected: InstanceTag::Metric, found: other.tag() }),
        })
        .collect()
}

fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// `α(F)(x1,x2) = max_f |f(x1) − f(x2)|`.
pub fn alpha_metric(lmc: &LabelledMarkovChain, formulas: &[&MetricFormula]) -> DistFn {
    let n = lmc.n();
    let vals: Vec<Vec<Rational>> = formulas.iter().map(|f| eval_metric_all(lmc, f)).collect();
    let mut d = DistFn::zeros(n);
    for x1 in 0..n {
        for x2 in 0..n {
            let m = vals.iter().map(|v| abs_diff(&v[x1], &v[x2])).max().unwrap_or_else(rational::zero);
            d.set(x1, x2, m);
        }
    }
    d
}

/// A formula `g` over the atoms `a_set` that agrees on `δ(x1)`'s and
/// `δ(x2)`'s supports with an optimal Kantorovich potential for `α(a_set)`,
/// so that `E_{δ(x1)} g − E_{δ(x2)} g = K(α(a_set))(δ(x1), δ(x2))`.
fn potential_formula(lmc: &LabelledMarkovChain, x1: usize, x2: usize, a_set: &[&MetricFormula]) -> Option<MetricFormula> {
    let first = (*a_set.first()?).clone();
    let vals: Vec<Vec<Rational>> = a_set.iter().map(|f| eval_metric_all(lmc, f)).collect();
    let d = alpha_metric(lmc, a_set);
    let (p, q) = (lmc.delta(x1), lmc.delta(x2));
    let k = kantorovich(&d, p, q).ok()?;
    if k.value.is_zero() {
        return None;
    }
    let mut pts: Vec<usize> = p.support().chain(q.support()).collect();
    pts.sort();
    pts.dedup();
    // f(x) = min_j (d(x, y_j) − v_j), shifted to have minimum 0
    let raw: Vec<Rational> = pts
        .iter()
        .map(|&x| k.cols.iter().zip(&k.v).map(|(&y, vy)| d.get(x, y) - vy).min().expect("non-empty support"))
        .collect();
    let lo = raw.iter().min().expect("non-empty").clone();
    let f: Vec<Rational> = raw.into_iter().map(|r| r - &lo).collect();

    let shift = |g: MetricFormula, s: Rational| -> MetricFormula {
        if s.is_negative() {
            MetricFormula::sub(g, -s)
        } else {
            MetricFormula::one_minus(MetricFormula::sub(MetricFormula::one_minus(g), s))
        }
    };
    let mut maxes: Vec<MetricFormula> = Vec::new();
    for (ix, &x) in pts.iter().enumerate() {
        let mut mins: Vec<MetricFormula> = Vec::new();
        for (iy, &y) in pts.iter().enumerate() {
            let h = if f[ix] > f[iy] {
                // an atom separating x and y by exactly d(x,y)
                let (ai, _) = vals
                    .iter()
                    .enumerate()
                    .find(|(_, v)| abs_diff(&v[x], &v[y]) == *d.get(x, y))
                    .expect("α attains its maximum");
                let (g, gx) = if vals[ai][x] >= vals[ai][y] {
                    (a_set[ai].clone(), vals[ai][x].clone())
                } else {
                    (MetricFormula::one_minus(a_set[ai].clone()), rational::one() - &vals[ai][x])
                };
                shift(g, &f[ix] - gx)
            } else {
                MetricFormula::constant(first.clone(), f[ix].clone())
            };
            if !mins.contains(&h) {
                mins.push(h);
            }
        }
        let gx = mins.into_iter().reduce(MetricFormula::min).expect("non-empty");
        if !maxes.contains(&gx) {
            maxes.push(gx);
        }
    }
    maxes.into_iter().reduce(MetricFormula::max)
}

/// One logic step: a formula in `ℓ(A)` separating x1 and x2 by more than `c`.
fn metric_step(lmc: &LabelledMarkovChain, x1: usize, x2: usize, c: &Rational, a_set: &[Witness]) -> Result<Witness, WitnessError> {
    if lmc.label(x1) != lmc.label(x2) {
        return Ok(Witness::new(Payload::Metric(MetricFormula::label(lmc.label(x1)))));
    }
    let forms = metric_payloads(a_set.iter().map(|w| &w.payload))?;
    let gap = |f: &MetricFormula| {
        let v = eval_metric_all(lmc, f);
        abs_diff(&v[x1], &v[x2])
    };
    for f in &forms {
        let cand = MetricFormula::next((*f).clone());
        if gap(&cand) > *c {
            return Ok(Witness::new(Payload::Metric(cand)));
        }
    }
    if let Some(g) = potential_formula(lmc, x1, x2, &forms) {
        let cand = MetricFormula::next(g);
        if gap(&cand) > *c {
            return Ok(Witness::new(Payload::Metric(cand)));
        }
    }
    Err(WitnessError::NoWitness(format!("no formula of ℓ(A) separates ({x1},{x2}) by more than {c}")))
}

impl MonotoneMap for LabelledMarkovChain {
    fn lattice(&self) -> LatticeKind {
        LatticeKind::Dist { n: self.n() }
    }

    fn apply(&self, value: &LatticeValue) -> Result<LatticeValue, LatticeError> {
        match value {
            LatticeValue::Dist(d) if d.n() == self.n() => Ok(LatticeValue::Dist(metric_functional(self, d))),
            other => Err(LatticeError::CarrierMismatch { expected: format!("{}", self.lattice()), found: format!("{}", other.kind()) }),
        }
    }
}

impl Instance for LabelledMarkovChain {
    fn tag(&self) -> InstanceTag {
        InstanceTag::Metric
    }

    fn state_count(&self) -> usize {
        self.n()
    }

    fn default_max_iter(&self) -> usize {
        64
    }

    fn alpha(&self, payloads: &[Payload]) -> Result<LatticeValue, WitnessError> {
        Ok(LatticeValue::Dist(alpha_metric(self, &metric_payloads(payloads)?)))
    }

    fn check_payload(&self, payload: &Payload) -> Result<(), WitnessError> {
        let f = metric_payloads([payload])?[0];
        if !matches!(f, MetricFormula::LabelInd(_) | MetricFormula::Next(_)) {
            return Err(WitnessError::Malformed(format!("{f} is neither a label indicator nor a ○-formula")));
        }
        f.check_constants()
    }

    fn apc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::DistJoin { x1, x2, c } => metric_step(self, *x1, *x2, c, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a distance join-basis element"))),
        }
    }

    fn adc(&self, b: &BasisElement, a_set: &[Witness]) -> Result<Witness, WitnessError> {
        match b {
            BasisElement::DistMeet { x1, x2, c } => metric_step(self, *x1, *x2, c, a_set),
            other => Err(WitnessError::Contract(format!("{other} is not a distance meet-basis element"))),
        }
    }

    fn primal_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        metric_primal_strategy(self, chain, b)
    }

    fn dual_strategy(&self, chain: &KleeneChain, b: &BasisElement) -> Result<Vec<BasisElement>, StrategyError> {
        metric_dual_strategy(self, chain, b)
    }

    fn check_move_shape(&self, d: &LatticeValue) -> Result<(), String> {
        match d {
            LatticeValue::Dist(d) if !d.is_symmetric() => Err(String::from("distance moves must be symmetric")),
            _ => Ok(()),
        }
    }

    fn in_gamma(&self, payload: &Payload, d: &LatticeValue) -> Result<bool, WitnessError> {
        let f = metric_payloads([payload])?[0];
        let d = d.as_dist().ok_or_else(|| WitnessError::Contract(String::from("γ expects a distance function")))?;
        let v = eval_metric_all(self, f);
        let n = self.n();
        Ok((0..n).all(|a| (0..n).all(|b| abs_diff(&v[a], &v[b]) <= *d.get(a, b))))
    }

    fn alpha_of_gamma(&self, _d: &LatticeValue) -> Option<LatticeValue> {
        None
    }

    fn alpha_of_logic_step(&self, a_set: &[Payload]) -> Result<LatticeValue, WitnessError> {
        let forms = metric_payloads(a_set)?;
        let mut cands: Vec<MetricFormula> = self.distinct_labels().into_iter().map(MetricFormula::label).collect();
        for f in &forms {
            cands.push(MetricFormula::next((*f).clone()));
            cands.push(MetricFormula::next(MetricFormula::one_minus((*f).clone())));
        }
        for (i, f) in forms.iter().enumerate() {
            for g in &forms[i + 1..] {
                cands.push(MetricFormula::next(MetricFormula::max((*f).clone(), (*g).clone())));
            }
        }
        let n = self.n();
        for x1 in 0..n {
            for x2 in 0..n {
                if x1 != x2 && self.label(x1) == self.label(x2) {
                    if let Some(g) = potential_formula(self, x1, x2, &forms) {
                        cands.push(MetricFormula::next(g));
                    }
                }
            }
        }
        let refs: Vec<&MetricFormula> = cands.iter().collect();
        Ok(LatticeValue::Dist(alpha_metric(self, &refs)))
    }

    fn describe(&self, payload: &Payload) -> String {
        match payload {
            Payload::Metric(f) => {
                let v: Vec<String> = eval_metric_all(self, f).iter().map(|q| format!("{q}")).collect();
                format!("{f} = [{}]", v.join(", "))
            }
            other => format!("{other}"),
        }
    }
}

/// Distance between two states with the formula certifying a strict lower
/// bound, when one is found within the iteration bound.
pub fn metric_witness(lmc: &LabelledMarkovChain, x1: usize, x2: usize, c: Rational, max_iter: usize) -> Result<Witness, WitnessError> {
    let chain = KleeneChain::compute(lmc, max_iter)?;
    let b = if c.is_zero() {
        return Err(WitnessError::Contract(String::from("c = 0 is not a join-basis constant; use a positive c")));
    } else {
        BasisElement::dist_join(x1, x2, c)?
    };
    crate::witness::primal_witness(lmc, &chain, &b)
}

impl LabelledMarkovChain {
    /// Iterate values `𝕓^k(⊥)(x1,x2)` for `k = 0..`.
    pub fn pair_iterates(&self, chain: &KleeneChain, x1: usize, x2: usize) -> Vec<Rational> {
        chain.iterates().iter().map(|v| dist_of(v).get(x1, x2).clone()).collect()
    }
}
