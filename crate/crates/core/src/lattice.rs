//! Concrete complete lattices: relations under reverse inclusion, distance
//! functions, valuations and finite sets of witness payloads.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};
use rand::Rng;

use crate::rational::{self, Rational};
use crate::witness::Payload;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("carrier mismatch: expected {expected}, found {found}")]
    CarrierMismatch { expected: String, found: String },
    #[error("state index {index} out of range for {n} states")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("constant {constant} outside the allowed range {range}")]
    ConstantOutOfRange { constant: String, range: &'static str },
    #[error("value {value} at {point} is outside [0,1]")]
    EntryOutOfRange { value: String, point: String },
    #[error("{0} is not finitely representable")]
    Unrepresentable(&'static str),
    #[error("{0} is not a {1} basis element")]
    WrongBasis(String, &'static str),
}

/// The carrier a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// Subsets of X×X ordered by ⊇.
    Rel { n: usize },
    /// X×X → [0,1], pointwise.
    Dist { n: usize },
    /// X → [0,1], pointwise.
    Val { n: usize },
    /// Finite sets of payloads under ⊆.
    Set,
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::Rel { n } => write!(f, "Rel({n})"),
            LatticeKind::Dist { n } => write!(f, "Dist({n})"),
            LatticeKind::Val { n } => write!(f, "Val({n})"),
            LatticeKind::Set => write!(f, "Set"),
        }
    }
}

/// A location inside a carrier, used for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Pair(usize, usize),
    State(usize),
    Member(Payload),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Pair(a, b) => write!(f, "({a},{b})"),
            Point::State(x) => write!(f, "{x}"),
            Point::Member(p) => write!(f, "{p}"),
        }
    }
}

/// Bitset over the n² pairs of an n-element state space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    n: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation { n, bits: vec![0; (n * n).div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut r = Self::empty(n);
        for i in 0..n * n {
            r.bits[i / 64] |= 1 << (i % 64);
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        let i = a * self.n + b;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n, "pair ({a},{b}) out of range");
        let i = a * self.n + b;
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n, "pair ({a},{b}) out of range");
        let i = a * self.n + b;
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        Relation { n: self.n, bits }
    }

    pub fn union(&self, other: &Relation) -> Relation {
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        Relation { n: self.n, bits }
    }

    pub fn complement(&self) -> Relation {
        let mut r = Relation::full(self.n);
        for (w, s) in r.bits.iter_mut().zip(&self.bits) {
            *w &= !s;
        }
        r
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n * n).map(move |i| (i / n, i % n)).filter(move |&(a, b)| self.contains(a, b))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (a, b)) in self.pairs().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "}}")
    }
}

/// A function X×X → [0,1], stored row-major. Symmetry is not required.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistFn {
    n: usize,
    entries: Vec<Rational>,
}

impl DistFn {
    pub fn constant(n: usize, c: Rational) -> Self {
        DistFn { n, entries: vec![c; n * n] }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, Rational::zero())
    }

    pub fn ones(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    pub fn from_entries(n: usize, entries: Vec<Rational>) -> Result<Self, LatticeError> {
        if entries.len() != n * n {
            return Err(LatticeError::CarrierMismatch {
                expected: format!("{} entries", n * n),
                found: format!("{} entries", entries.len()),
            });
        }
        for (i, v) in entries.iter().enumerate() {
            if !rational::in_unit_interval(v) {
                return Err(LatticeError::EntryOutOfRange {
                    value: format!("{v}"),
                    point: format!("{}", Point::Pair(i / n, i % n)),
                });
            }
        }
        Ok(DistFn { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &Rational {
        &self.entries[a * self.n + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: Rational) {
        assert!(rational::in_unit_interval(&v), "distance {v} outside [0,1]");
        self.entries[a * self.n + b] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|a| (a + 1..self.n).all(|b| self.get(a, b) == self.get(b, a)))
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }
}

impl fmt::Display for DistFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for a in 0..self.n {
            if a > 0 {
                write!(f, "; ")?;
            }
            for b in 0..self.n {
                if b > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(a, b))?;
            }
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LatticeValue {
    Rel(Relation),
    Dist(DistFn),
    Val(Vec<Rational>),
    Set(BTreeSet<Payload>),
}

impl LatticeValue {
    pub fn kind(&self) -> LatticeKind {
        match self {
            LatticeValue::Rel(r) => LatticeKind::Rel { n: r.n() },
            LatticeValue::Dist(d) => LatticeKind::Dist { n: d.n() },
            LatticeValue::Val(v) => LatticeKind::Val { n: v.len() },
            LatticeValue::Set(_) => LatticeKind::Set,
        }
    }

    pub fn as_rel(&self) -> Option<&Relation> {
        match self {
            LatticeValue::Rel(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_dist(&self) -> Option<&DistFn> {
        match self {
            LatticeValue::Dist(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_val(&self) -> Option<&[Rational]> {
        match self {
            LatticeValue::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Payload>> {
        match self {
            LatticeValue::Set(s) => Some(s),
            _ => None,
        }
    }

    /// The rational stored at a point of a numeric carrier.
    pub fn value_at(&self, p: &Point) -> Option<&Rational> {
        match (self, p) {
            (LatticeValue::Dist(d), Point::Pair(a, b)) if *a < d.n() && *b < d.n() => Some(d.get(*a, *b)),
            (LatticeValue::Val(v), Point::State(x)) => v.get(*x),
            _ => None,
        }
    }
}

impl fmt::Display for LatticeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeValue::Rel(r) => write!(f, "{r}"),
            LatticeValue::Dist(d) => write!(f, "{d}"),
            LatticeValue::Val(v) => {
                write!(f, "[")?;
                for (i, q) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{q}")?;
                }
                write!(f, "]")
            }
            LatticeValue::Set(s) => {
                write!(f, "{{")?;
                for (i, p) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Join- and meet-basis elements of every carrier. Dist elements refer to
/// the unordered pair and always store `x1 <= x2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisElement {
    /// Complement of the singleton {(x1,x2)}.
    RelJoin { x1: usize, x2: usize },
    /// The singleton {(x1,x2)}.
    RelMeet { x1: usize, x2: usize },
    /// c on the pair, 0 elsewhere; c ∈ (0,1].
    DistJoin { x1: usize, x2: usize, c: Rational },
    /// c on the pair, 1 elsewhere; c ∈ [0,1).
    DistMeet { x1: usize, x2: usize, c: Rational },
    /// c at x, 0 elsewhere; c ∈ (0,1].
    ValJoin { x: usize, c: Rational },
    /// c at x, 1 elsewhere; c ∈ [0,1).
    ValMeet { x: usize, c: Rational },
    SetJoin(Payload),
}

fn check_join_constant(c: &Rational) -> Result<(), LatticeError> {
    if c.is_zero() || !rational::in_unit_interval(c) {
        return Err(LatticeError::ConstantOutOfRange { constant: format!("{c}"), range: "(0,1]" });
    }
    Ok(())
}

fn check_meet_constant(c: &Rational) -> Result<(), LatticeError> {
    if c.is_one() || !rational::in_unit_interval(c) {
        return Err(LatticeError::ConstantOutOfRange { constant: format!("{c}"), range: "[0,1)" });
    }
    Ok(())
}

impl BasisElement {
    pub fn dist_join(x1: usize, x2: usize, c: Rational) -> Result<Self, LatticeError> {
        check_join_constant(&c)?;
        let (x1, x2) = (x1.min(x2), x1.max(x2));
        Ok(BasisElement::DistJoin { x1, x2, c })
    }

    pub fn dist_meet(x1: usize, x2: usize, c: Rational) -> Result<Self, LatticeError> {
        check_meet_constant(&c)?;
        let (x1, x2) = (x1.min(x2), x1.max(x2));
        Ok(BasisElement::DistMeet { x1, x2, c })
    }

    pub fn val_join(x: usize, c: Rational) -> Result<Self, LatticeError> {
        check_join_constant(&c)?;
        Ok(BasisElement::ValJoin { x, c })
    }

    pub fn val_meet(x: usize, c: Rational) -> Result<Self, LatticeError> {
        check_meet_constant(&c)?;
        Ok(BasisElement::ValMeet { x, c })
    }

    pub fn is_join(&self) -> bool {
        matches!(
            self,
            BasisElement::RelJoin { .. }
                | BasisElement::DistJoin { .. }
                | BasisElement::ValJoin { .. }
                | BasisElement::SetJoin(_)
        )
    }

    pub fn is_meet(&self) -> bool {
        !self.is_join()
    }

    /// The carrier location the element constrains.
    pub fn point(&self) -> Point {
        match self {
            BasisElement::RelJoin { x1, x2 }
            | BasisElement::RelMeet { x1, x2 }
            | BasisElement::DistJoin { x1, x2, .. }
            | BasisElement::DistMeet { x1, x2, .. } => Point::Pair(*x1, *x2),
            BasisElement::ValJoin { x, .. } | BasisElement::ValMeet { x, .. } => Point::State(*x),
            BasisElement::SetJoin(p) => Point::Member(p.clone()),
        }
    }

    pub fn constant(&self) -> Option<&Rational> {
        match self {
            BasisElement::DistJoin { c, .. }
            | BasisElement::DistMeet { c, .. }
            | BasisElement::ValJoin { c, .. }
            | BasisElement::ValMeet { c, .. } => Some(c),
            _ => None,
        }
    }

    /// Checks indices and constant ranges against a carrier.
    pub fn validate(&self, kind: LatticeKind) -> Result<(), LatticeError> {
        let mismatch = || LatticeError::CarrierMismatch { expected: format!("{kind}"), found: format!("{self}") };
        let idx = |i: usize, n: usize| if i < n { Ok(()) } else { Err(LatticeError::IndexOutOfRange { index: i, n }) };
        match (self, kind) {
            (BasisElement::RelJoin { x1, x2 } | BasisElement::RelMeet { x1, x2 }, LatticeKind::Rel { n }) => {
                idx(*x1, n)?;
                idx(*x2, n)
            }
            (BasisElement::DistJoin { x1, x2, c }, LatticeKind::Dist { n }) => {
                idx(*x1, n)?;
                idx(*x2, n)?;
                check_join_constant(c)
            }
            (BasisElement::DistMeet { x1, x2, c }, LatticeKind::Dist { n }) => {
                idx(*x1, n)?;
                idx(*x2, n)?;
                check_meet_constant(c)
            }
            (BasisElement::ValJoin { x, c }, LatticeKind::Val { n }) => {
                idx(*x, n)?;
                check_join_constant(c)
            }
            (BasisElement::ValMeet { x, c }, LatticeKind::Val { n }) => {
                idx(*x, n)?;
                check_meet_constant(c)
            }
            (BasisElement::SetJoin(_), LatticeKind::Set) => Ok(()),
            _ => Err(mismatch()),
        }
    }

    /// Embeds the element into its carrier.
    pub fn to_value(&self, kind: LatticeKind) -> Result<LatticeValue, LatticeError> {
        self.validate(kind)?;
        Ok(match (self, kind) {
            (BasisElement::RelJoin { x1, x2 }, LatticeKind::Rel { n }) => {
                let mut r = Relation::full(n);
                r.remove(*x1, *x2);
                LatticeValue::Rel(r)
            }
            (BasisElement::RelMeet { x1, x2 }, LatticeKind::Rel { n }) => {
                LatticeValue::Rel(Relation::from_pairs(n, [(*x1, *x2)]))
            }
            (BasisElement::DistJoin { x1, x2, c }, LatticeKind::Dist { n }) => {
                let mut d = DistFn::zeros(n);
                d.set(*x1, *x2, c.clone());
                d.set(*x2, *x1, c.clone());
                LatticeValue::Dist(d)
            }
            (BasisElement::DistMeet { x1, x2, c }, LatticeKind::Dist { n }) => {
                let mut d = DistFn::ones(n);
                d.set(*x1, *x2, c.clone());
                d.set(*x2, *x1, c.clone());
                LatticeValue::Dist(d)
            }
            (BasisElement::ValJoin { x, c }, LatticeKind::Val { n }) => {
                let mut v = vec![Rational::zero(); n];
                v[*x] = c.clone();
                LatticeValue::Val(v)
            }
            (BasisElement::ValMeet { x, c }, LatticeKind::Val { n }) => {
                let mut v = vec![Rational::one(); n];
                v[*x] = c.clone();
                LatticeValue::Val(v)
            }
            (BasisElement::SetJoin(p), LatticeKind::Set) => {
                LatticeValue::Set(core::iter::once(p.clone()).collect())
            }
            _ => unreachable!("validated above"),
        })
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElement::RelJoin { x1, x2 } => write!(f, "co({x1},{x2})"),
            BasisElement::RelMeet { x1, x2 } => write!(f, "pair({x1},{x2})"),
            BasisElement::DistJoin { x1, x2, c } => write!(f, "d^{{{c}}}_{{{x1},{x2}}}"),
            BasisElement::DistMeet { x1, x2, c } => write!(f, "ddot^{{{c}}}_{{{x1},{x2}}}"),
            BasisElement::ValJoin { x, c } => write!(f, "f^{{{c}}}_{x}"),
            BasisElement::ValMeet { x, c } => write!(f, "fdot^{{{c}}}_{x}"),
            BasisElement::SetJoin(p) => write!(f, "{{{p}}}"),
        }
    }
}

fn same_carrier(kind: LatticeKind, v: &LatticeValue) -> Result<(), LatticeError> {
    if v.kind() == kind {
        Ok(())
    } else {
        Err(LatticeError::CarrierMismatch { expected: format!("{kind}"), found: format!("{}", v.kind()) })
    }
}

/// Both orientations of every pair, or every state, of a numeric carrier.
fn numeric_points(kind: LatticeKind) -> Vec<Point> {
    match kind {
        LatticeKind::Dist { n } => (0..n * n).map(|i| Point::Pair(i / n, i % n)).collect(),
        LatticeKind::Val { n } => (0..n).map(Point::State).collect(),
        _ => Vec::new(),
    }
}

fn numeric_map(kind: LatticeKind, f: impl Fn(&Point) -> Rational) -> LatticeValue {
    match kind {
        LatticeKind::Dist { n } => {
            let entries = numeric_points(kind).iter().map(f).collect();
            LatticeValue::Dist(DistFn { n, entries })
        }
        LatticeKind::Val { .. } => LatticeValue::Val(numeric_points(kind).iter().map(f).collect()),
        _ => unreachable!("numeric carrier expected"),
    }
}

impl LatticeKind {
    pub fn state_count(&self) -> Option<usize> {
        match self {
            LatticeKind::Rel { n } | LatticeKind::Dist { n } | LatticeKind::Val { n } => Some(*n),
            LatticeKind::Set => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, LatticeKind::Dist { .. } | LatticeKind::Val { .. })
    }

    pub fn bottom(&self) -> LatticeValue {
        match *self {
            LatticeKind::Rel { n } => LatticeValue::Rel(Relation::full(n)),
            LatticeKind::Dist { n } => LatticeValue::Dist(DistFn::zeros(n)),
            LatticeKind::Val { n } => LatticeValue::Val(vec![Rational::zero(); n]),
            LatticeKind::Set => LatticeValue::Set(BTreeSet::new()),
        }
    }

    pub fn top(&self) -> Result<LatticeValue, LatticeError> {
        Ok(match *self {
            LatticeKind::Rel { n } => LatticeValue::Rel(Relation::empty(n)),
            LatticeKind::Dist { n } => LatticeValue::Dist(DistFn::ones(n)),
            LatticeKind::Val { n } => LatticeValue::Val(vec![Rational::one(); n]),
            LatticeKind::Set => return Err(LatticeError::Unrepresentable("the top of the set lattice")),
        })
    }

    /// First point witnessing `a ⋢ b`, if any.
    pub fn leq_violation(&self, a: &LatticeValue, b: &LatticeValue) -> Result<Option<Point>, LatticeError> {
        same_carrier(*self, a)?;
        same_carrier(*self, b)?;
        Ok(match (a, b) {
            // a ⊑ b iff a ⊇ b
            (LatticeValue::Rel(a), LatticeValue::Rel(b)) => b.pairs().find(|&(x, y)| !a.contains(x, y)).map(|(x, y)| Point::Pair(x, y)),
            (LatticeValue::Set(a), LatticeValue::Set(b)) => a.iter().find(|p| !b.contains(*p)).map(|p| Point::Member(p.clone())),
            _ => numeric_points(*self).into_iter().find(|p| a.value_at(p) > b.value_at(p)),
        })
    }

    pub fn leq(&self, a: &LatticeValue, b: &LatticeValue) -> Result<bool, LatticeError> {
        Ok(self.leq_violation(a, b)?.is_none())
    }

    /// First point witnessing that `a ≪ b` fails.
    pub fn way_below_violation(&self, a: &LatticeValue, b: &LatticeValue) -> Result<Option<Point>, LatticeError> {
        match self {
            LatticeKind::Rel { .. } | LatticeKind::Set => self.leq_violation(a, b),
            _ => {
                same_carrier(*self, a)?;
                same_carrier(*self, b)?;
                Ok(numeric_points(*self).into_iter().find(|p| {
                    let (x, y) = (a.value_at(p).unwrap(), b.value_at(p).unwrap());
                    !(x < y || x.is_zero())
                }))
            }
        }
    }

    /// `a ≪ b`.
    pub fn way_below(&self, a: &LatticeValue, b: &LatticeValue) -> Result<bool, LatticeError> {
        Ok(self.way_below_violation(a, b)?.is_none())
    }

    /// First point witnessing that `a ⩺ b` (a way-above b) fails.
    pub fn way_above_violation(&self, a: &LatticeValue, b: &LatticeValue) -> Result<Option<Point>, LatticeError> {
        same_carrier(*self, a)?;
        same_carrier(*self, b)?;
        match self {
            LatticeKind::Rel { .. } => self.leq_violation(b, a),
            // a finite set is never cofinite in the infinite payload universe
            LatticeKind::Set => Ok(Some(match a.as_set().and_then(|s| s.iter().next()) {
                Some(p) => Point::Member(p.clone()),
                None => return Err(LatticeError::Unrepresentable("way-above in the set lattice")),
            })),
            _ => Ok(numeric_points(*self).into_iter().find(|p| {
                let (x, y) = (a.value_at(p).unwrap(), b.value_at(p).unwrap());
                !(y < x || (x.is_one() && y.is_one()))
            })),
        }
    }

    /// `a ⩺ b`: pointwise `b < a`, or both equal to 1.
    pub fn way_above(&self, a: &LatticeValue, b: &LatticeValue) -> Result<bool, LatticeError> {
        if *self == LatticeKind::Set {
            same_carrier(*self, a)?;
            same_carrier(*self, b)?;
            return Ok(false);
        }
        Ok(self.way_above_violation(a, b)?.is_none())
    }

    pub fn join(&self, elems: &[LatticeValue]) -> Result<LatticeValue, LatticeError> {
        for e in elems {
            same_carrier(*self, e)?;
        }
        Ok(match self {
            LatticeKind::Rel { n } => LatticeValue::Rel(
                elems.iter().fold(Relation::full(*n), |acc, e| acc.intersection(e.as_rel().unwrap())),
            ),
            LatticeKind::Set => {
                LatticeValue::Set(elems.iter().flat_map(|e| e.as_set().unwrap().iter().cloned()).collect())
            }
            _ => numeric_map(*self, |p| {
                elems.iter().map(|e| e.value_at(p).unwrap()).max().cloned().unwrap_or_else(Rational::zero)
            }),
        })
    }

    pub fn meet(&self, elems: &[LatticeValue]) -> Result<LatticeValue, LatticeError> {
        for e in elems {
            same_carrier(*self, e)?;
        }
        Ok(match self {
            LatticeKind::Rel { n } => LatticeValue::Rel(
                elems.iter().fold(Relation::empty(*n), |acc, e| acc.union(e.as_rel().unwrap())),
            ),
            LatticeKind::Set => {
                let mut it = elems.iter().map(|e| e.as_set().unwrap());
                let first = it.next().ok_or(LatticeError::Unrepresentable("the empty meet of the set lattice"))?;
                LatticeValue::Set(it.fold(first.clone(), |acc, s| acc.intersection(s).cloned().collect()))
            }
            _ => numeric_map(*self, |p| {
                elems.iter().map(|e| e.value_at(p).unwrap()).min().cloned().unwrap_or_else(Rational::one)
            }),
        })
    }

    /// Join of basis elements, embedded.
    pub fn join_basis(&self, elems: &[BasisElement]) -> Result<LatticeValue, LatticeError> {
        let vals = elems.iter().map(|b| b.to_value(*self)).collect::<Result<Vec<_>, _>>()?;
        self.join(&vals)
    }

    /// Meet of basis elements, embedded.
    pub fn meet_basis(&self, elems: &[BasisElement]) -> Result<LatticeValue, LatticeError> {
        let vals = elems.iter().map(|b| b.to_value(*self)).collect::<Result<Vec<_>, _>>()?;
        self.meet(&vals)
    }

    /// Exact per-point join-basis elements below `a`. Their join is `a`
    /// (for Dist, when `a` is symmetric).
    pub fn join_basis_under(&self, a: &LatticeValue) -> Result<Vec<BasisElement>, LatticeError> {
        same_carrier(*self, a)?;
        Ok(match a {
            LatticeValue::Rel(r) => r.complement().pairs().map(|(x1, x2)| BasisElement::RelJoin { x1, x2 }).collect(),
            LatticeValue::Dist(d) => {
                let n = d.n();
                let mut out = Vec::new();
                for x1 in 0..n {
                    for x2 in x1..n {
                        let c = rational::min(d.get(x1, x2), d.get(x2, x1));
                        if !c.is_zero() {
                            out.push(BasisElement::DistJoin { x1, x2, c });
                        }
                    }
                }
                out
            }
            LatticeValue::Val(v) => v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(x, c)| BasisElement::ValJoin { x, c: c.clone() })
                .collect(),
            LatticeValue::Set(s) => s.iter().cloned().map(BasisElement::SetJoin).collect(),
        })
    }

    /// Exact per-point meet-basis elements above `a`. Their meet is `a`
    /// (for Dist, when `a` is symmetric).
    pub fn meet_basis_above(&self, a: &LatticeValue) -> Result<Vec<BasisElement>, LatticeError> {
        same_carrier(*self, a)?;
        Ok(match a {
            LatticeValue::Rel(r) => r.pairs().map(|(x1, x2)| BasisElement::RelMeet { x1, x2 }).collect(),
            LatticeValue::Dist(d) => {
                let n = d.n();
                let mut out = Vec::new();
                for x1 in 0..n {
                    for x2 in x1..n {
                        let c = rational::max(d.get(x1, x2), d.get(x2, x1));
                        if !c.is_one() {
                            out.push(BasisElement::DistMeet { x1, x2, c });
                        }
                    }
                }
                out
            }
            LatticeValue::Val(v) => v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_one())
                .map(|(x, c)| BasisElement::ValMeet { x, c: c.clone() })
                .collect(),
            LatticeValue::Set(_) => return Err(LatticeError::Unrepresentable("the meet basis of the set lattice")),
        })
    }

    /// A random element with denominators up to 8. `None` for the set lattice.
    pub fn random_value<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<LatticeValue> {
        let q = |rng: &mut R| {
            let d = rng.gen_range(1..=8i64);
            rational::ratio(rng.gen_range(0..=d), d)
        };
        match *self {
            LatticeKind::Rel { n } => {
                let mut r = Relation::empty(n);
                for i in 0..n * n {
                    if rng.gen_bool(0.5) {
                        r.insert(i / n, i % n);
                    }
                }
                Some(LatticeValue::Rel(r))
            }
            LatticeKind::Dist { n } => Some(LatticeValue::Dist(DistFn { n, entries: (0..n * n).map(|_| q(rng)).collect() })),
            LatticeKind::Val { n } => Some(LatticeValue::Val((0..n).map(|_| q(rng)).collect())),
            LatticeKind::Set => None,
        }
    }
}
