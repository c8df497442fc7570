//! Textual basis elements and claims, and JSON lattice values, all with
//! state names.
//!
//! Basis elements: `co(a,b)`, `pair(a,b)`, `d^{c}_{a,b}`, `ddot^{c}_{a,b}`,
//! `f^{c}_x`, `fdot^{c}_x` (braces around a single state are optional).
//! Claims: `a !~ b` (or `a ≁ b`), `d(a,b) > c`, `x > c`, or a basis element.

use fixwit_core::lattice::{DistFn, LatticeKind, LatticeValue, Relation};
use fixwit_core::rational::{format_rational, in_unit_interval, parse_rational, Rational};
use fixwit_core::{BasisElement, InstanceTag};
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::model::Model;

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    context: &'static str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, context: &'static str) -> Self {
        Cursor { text, pos: 0, context }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::syntax(self.context, msg, self.column())
    }

    fn skip_ws(&mut self) {
        let t = self.rest();
        self.pos += t.len() - t.trim_start().len();
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), CliError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    /// Reads up to (not including) the first char in `stops`.
    fn token(&mut self, stops: &[char], what: &str) -> Result<(&'a str, usize), CliError> {
        self.skip_ws();
        let col = self.column();
        let t = self.rest();
        let end = t.find(|c: char| stops.contains(&c) || c.is_whitespace()).unwrap_or(t.len());
        if end == 0 {
            return Err(self.err(format!("expected {what}")));
        }
        self.pos += end;
        Ok((&t[..end], col))
    }

    fn state(&mut self, model: &Model, stops: &[char]) -> Result<usize, CliError> {
        let (name, col) = self.token(stops, "a state name")?;
        model.state(name).map_err(|_| CliError::syntax(self.context, format!("unknown state `{name}`"), col))
    }

    fn rational(&mut self, stops: &[char]) -> Result<Rational, CliError> {
        let (t, col) = self.token(stops, "a rational p/q")?;
        parse_rational(t).map_err(|_| CliError::syntax(self.context, format!("`{t}` is not a rational p/q"), col))
    }

    fn end(&mut self) -> Result<(), CliError> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.err(format!("unexpected `{}`", self.rest())))
        }
    }
}

fn wrong_model(c: &Cursor<'_>, what: &str, model: &Model) -> CliError {
    CliError::syntax(c.context, format!("{what} does not apply to a {} model", model.tag()), 1)
}

/// Parses a basis element and checks it against the model.
pub fn parse_basis(model: &Model, text: &str) -> Result<BasisElement, CliError> {
    let mut c = Cursor::new(text, "basis element");
    let b = basis_at(model, &mut c)?;
    c.end()?;
    b.validate(model.instance().lattice()).map_err(|e| CliError::syntax("basis element", e.to_string(), 1))?;
    Ok(b)
}

fn subscript_pair(model: &Model, c: &mut Cursor<'_>) -> Result<(usize, usize), CliError> {
    c.expect("_")?;
    c.expect("{")?;
    let a = c.state(model, &[',', '}'])?;
    c.expect(",")?;
    let b = c.state(model, &['}'])?;
    c.expect("}")?;
    Ok((a, b))
}

fn subscript_state(model: &Model, c: &mut Cursor<'_>) -> Result<usize, CliError> {
    c.expect("_")?;
    if c.eat("{") {
        let x = c.state(model, &['}'])?;
        c.expect("}")?;
        Ok(x)
    } else {
        c.state(model, &[])
    }
}

fn superscript(c: &mut Cursor<'_>) -> Result<Rational, CliError> {
    c.expect("^")?;
    c.expect("{")?;
    let q = c.rational(&['}'])?;
    c.expect("}")?;
    Ok(q)
}

fn basis_at(model: &Model, c: &mut Cursor<'_>) -> Result<BasisElement, CliError> {
    let lattice = |e: fixwit_core::LatticeError, col: usize| CliError::syntax("basis element", e.to_string(), col);
    let tag = model.tag();
    for (kw, join) in [("co(", true), ("pair(", false)] {
        if c.eat(kw) {
            if tag != InstanceTag::Bisim {
                return Err(wrong_model(c, "a relation basis element", model));
            }
            let x1 = c.state(model, &[','])?;
            c.expect(",")?;
            let x2 = c.state(model, &[')'])?;
            c.expect(")")?;
            return Ok(if join { BasisElement::RelJoin { x1, x2 } } else { BasisElement::RelMeet { x1, x2 } });
        }
    }
    for (kw, join) in [("ddot", false), ("ḋ", false), ("d", true)] {
        if c.rest().trim_start().starts_with(kw) && c.rest().trim_start()[kw.len()..].starts_with('^') {
            c.eat(kw);
            if tag != InstanceTag::Metric {
                return Err(wrong_model(c, "a distance basis element", model));
            }
            let col = c.column();
            let q = superscript(c)?;
            let (a, b) = subscript_pair(model, c)?;
            return if join { BasisElement::dist_join(a, b, q) } else { BasisElement::dist_meet(a, b, q) }.map_err(|e| lattice(e, col));
        }
    }
    for (kw, join) in [("fdot", false), ("ḟ", false), ("f", true)] {
        if c.rest().trim_start().starts_with(kw) && c.rest().trim_start()[kw.len()..].starts_with('^') {
            c.eat(kw);
            if tag != InstanceTag::Termination {
                return Err(wrong_model(c, "a valuation basis element", model));
            }
            let col = c.column();
            let q = superscript(c)?;
            let x = subscript_state(model, c)?;
            return if join { BasisElement::val_join(x, q) } else { BasisElement::val_meet(x, q) }.map_err(|e| lattice(e, col));
        }
    }
    Err(c.err("expected co(a,b), pair(a,b), d^{c}_{a,b}, ddot^{c}_{a,b}, f^{c}_x or fdot^{c}_x"))
}

fn sub(name: &str) -> String {
    if name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("{{{name}}}")
    }
}

pub fn format_basis(model: &Model, b: &BasisElement) -> String {
    let n = |i: &usize| model.name(*i);
    match b {
        BasisElement::RelJoin { x1, x2 } => format!("co({},{})", n(x1), n(x2)),
        BasisElement::RelMeet { x1, x2 } => format!("pair({},{})", n(x1), n(x2)),
        BasisElement::DistJoin { x1, x2, c } => format!("d^{{{c}}}_{{{},{}}}", n(x1), n(x2)),
        BasisElement::DistMeet { x1, x2, c } => format!("ddot^{{{c}}}_{{{},{}}}", n(x1), n(x2)),
        BasisElement::ValJoin { x, c } => format!("f^{{{c}}}_{}", sub(n(x))),
        BasisElement::ValMeet { x, c } => format!("fdot^{{{c}}}_{}", sub(n(x))),
        BasisElement::SetJoin(p) => format!("{{{p}}}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Primal,
    Dual,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Primal => "primal",
            Mode::Dual => "dual",
        }
    }
}

/// What a claim asserts about the least fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    /// `x1 ≁ x2`.
    Apart(usize, usize),
    /// `μ(x1,x2) > c`.
    Distance(usize, usize, Rational),
    /// `μ(x) > c`.
    Probability(usize, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub mode: Mode,
    pub subject: Subject,
    /// The basis element certified; `None` for primal claims with `c = 0`,
    /// which have no join-basis element and are checked directly.
    pub basis: Option<BasisElement>,
}

impl Claim {
    pub fn text(&self, model: &Model) -> String {
        match &self.subject {
            Subject::Apart(a, b) => format!("{} !~ {}", model.name(*a), model.name(*b)),
            Subject::Distance(a, b, c) => format!("d({},{}) > {c}", model.name(*a), model.name(*b)),
            Subject::Probability(x, c) => format!("{} > {c}", model.name(*x)),
        }
    }
}

fn claim_from_subject(subject: Subject, mode: Mode) -> Result<Claim, CliError> {
    let err = |e: fixwit_core::LatticeError| CliError::syntax("claim", e.to_string(), 1);
    if let Subject::Distance(_, _, c) | Subject::Probability(_, c) = &subject {
        if !in_unit_interval(c) {
            return Err(CliError::syntax("claim", format!("constant {c} is outside [0,1]"), 1));
        }
    }
    let basis = match (&subject, mode) {
        (Subject::Apart(x1, x2), Mode::Primal) => Some(BasisElement::RelJoin { x1: *x1, x2: *x2 }),
        (Subject::Apart(x1, x2), Mode::Dual) => Some(BasisElement::RelMeet { x1: *x1, x2: *x2 }),
        (Subject::Distance(_, _, c) | Subject::Probability(_, c), Mode::Primal) if c.is_zero() => None,
        (Subject::Distance(a, b, c), Mode::Primal) => Some(BasisElement::dist_join(*a, *b, c.clone()).map_err(err)?),
        (Subject::Distance(a, b, c), Mode::Dual) => Some(BasisElement::dist_meet(*a, *b, c.clone()).map_err(err)?),
        (Subject::Probability(x, c), Mode::Primal) => Some(BasisElement::val_join(*x, c.clone()).map_err(err)?),
        (Subject::Probability(x, c), Mode::Dual) => Some(BasisElement::val_meet(*x, c.clone()).map_err(err)?),
    };
    Ok(Claim { mode, subject, basis })
}

pub fn parse_claim(model: &Model, text: &str, mode: Mode) -> Result<Claim, CliError> {
    let mut c = Cursor::new(text, "claim");
    let t = text.trim_start();
    if ["co(", "pair(", "d^", "ddot^", "f^", "fdot^", "ḋ^", "ḟ^"].iter().any(|p| t.starts_with(p)) {
        let b = parse_basis(model, text)?;
        if b.is_join() != (mode == Mode::Primal) {
            let kind = if b.is_join() { "join" } else { "meet" };
            return Err(CliError::syntax("claim", format!("{kind}-basis element given in {} mode", mode.name()), 1));
        }
        let subject = match &b {
            BasisElement::RelJoin { x1, x2 } | BasisElement::RelMeet { x1, x2 } => Subject::Apart(*x1, *x2),
            BasisElement::DistJoin { x1, x2, c } | BasisElement::DistMeet { x1, x2, c } => Subject::Distance(*x1, *x2, c.clone()),
            BasisElement::ValJoin { x, c } | BasisElement::ValMeet { x, c } => Subject::Probability(*x, c.clone()),
            BasisElement::SetJoin(_) => unreachable!("no set-lattice models"),
        };
        return Ok(Claim { mode, subject, basis: Some(b) });
    }
    let subject = if t.starts_with("d(") && model.tag() == InstanceTag::Metric {
        c.expect("d(")?;
        let a = c.state(model, &[','])?;
        c.expect(",")?;
        let b = c.state(model, &[')'])?;
        c.expect(")")?;
        c.expect(">")?;
        let q = c.rational(&[])?;
        Subject::Distance(a, b, q)
    } else {
        let a = c.state(model, &['!', '≁', '>'])?;
        if c.eat("!~") || c.eat("≁") {
            if model.tag() != InstanceTag::Bisim {
                return Err(wrong_model(&c, "an apartness claim", model));
            }
            let b = c.state(model, &[])?;
            Subject::Apart(a, b)
        } else if c.eat(">") {
            if model.tag() != InstanceTag::Termination {
                return Err(wrong_model(&c, "a termination claim `x > c`", model));
            }
            Subject::Probability(a, c.rational(&[])?)
        } else {
            return Err(c.err("expected `!~` or `>`"));
        }
    };
    c.end()?;
    if matches!(subject, Subject::Distance(..)) && model.tag() != InstanceTag::Metric {
        return Err(wrong_model(&c, "a distance claim", model));
    }
    claim_from_subject(subject, mode)
}

/// JSON form of a lattice value with state names:
/// `{"rel": [["a","b"], ...]}`, `{"dist": [["0","1/2"], ...]}`,
/// `{"val": {"x": "1/2", ...}}`.
pub fn value_json(model: &Model, v: &LatticeValue) -> Value {
    match v {
        LatticeValue::Rel(r) => json!({"rel": r.pairs().map(|(a, b)| json!([model.name(a), model.name(b)])).collect::<Vec<_>>()}),
        LatticeValue::Dist(d) => json!({"dist": (0..d.n()).map(|a| (0..d.n()).map(|b| format_rational(d.get(a, b))).collect::<Vec<_>>()).collect::<Vec<_>>()}),
        LatticeValue::Val(xs) => {
            let m: Map<String, Value> = xs.iter().enumerate().map(|(i, q)| (model.name(i).to_string(), Value::String(format_rational(q)))).collect();
            json!({"val": m})
        }
        LatticeValue::Set(s) => json!({"set": s.iter().map(|p| p.to_string()).collect::<Vec<_>>()}),
    }
}

pub fn value_text(model: &Model, v: &LatticeValue) -> String {
    match v {
        LatticeValue::Rel(r) => {
            let ps: Vec<String> = r.pairs().map(|(a, b)| format!("({},{})", model.name(a), model.name(b))).collect();
            format!("{{{}}}", ps.join(", "))
        }
        LatticeValue::Dist(d) => {
            let mut rows = Vec::new();
            for a in 0..d.n() {
                for b in a + 1..d.n() {
                    rows.push(format!("{},{}: {}", model.name(a), model.name(b), d.get(a, b)));
                }
            }
            format!("[{}]", rows.join(", "))
        }
        LatticeValue::Val(xs) => {
            let ps: Vec<String> = xs.iter().enumerate().map(|(i, q)| format!("{}: {q}", model.name(i))).collect();
            format!("[{}]", ps.join(", "))
        }
        LatticeValue::Set(_) => v.to_string(),
    }
}

fn json_err(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("malformed move: {}", msg.into()))
}

fn rational_of(v: &Value) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        other => Err(json_err(format!("expected a rational string \"p/q\", found {other}"))),
    }
}

/// Parses a lattice value for the model's carrier; `{"join": [basis, ...]}`
/// is accepted as the join of the listed elements.
pub fn parse_value(model: &Model, v: &Value) -> Result<LatticeValue, CliError> {
    let kind = model.instance().lattice();
    let n = model.names.len();
    let obj = v.as_object().filter(|o| o.len() == 1).ok_or_else(|| json_err("expected an object with one key"))?;
    let (key, body) = obj.iter().next().unwrap();
    let value = match (key.as_str(), kind) {
        ("join", _) => {
            let items = body.as_array().ok_or_else(|| json_err("`join` expects a list of basis elements"))?;
            let elems = items
                .iter()
                .map(|i| i.as_str().ok_or_else(|| json_err("basis elements are strings")).and_then(|s| parse_basis(model, s)))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(b) = elems.iter().find(|b| !b.is_join()) {
                return Err(json_err(format!("{} is not a join-basis element", format_basis(model, b))));
            }
            kind.join_basis(&elems)?
        }
        ("rel", LatticeKind::Rel { .. }) => {
            let items = body.as_array().ok_or_else(|| json_err("`rel` expects a list of pairs"))?;
            let mut r = Relation::empty(n);
            for p in items {
                let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| json_err("pairs are [a, b]"))?;
                let name = |x: &Value| x.as_str().ok_or_else(|| json_err("state names are strings")).and_then(|s| model.state(s));
                r.insert(name(&pair[0])?, name(&pair[1])?);
            }
            LatticeValue::Rel(r)
        }
        ("dist", LatticeKind::Dist { .. }) => {
            let rows = body.as_array().filter(|r| r.len() == n).ok_or_else(|| json_err(format!("`dist` expects {n} rows")))?;
            let mut entries = Vec::with_capacity(n * n);
            for row in rows {
                let row = row.as_array().filter(|r| r.len() == n).ok_or_else(|| json_err(format!("`dist` rows have {n} entries")))?;
                for q in row {
                    entries.push(rational_of(q)?);
                }
            }
            LatticeValue::Dist(DistFn::from_entries(n, entries)?)
        }
        ("val", LatticeKind::Val { .. }) => {
            let m = body.as_object().ok_or_else(|| json_err("`val` expects an object from state names to rationals"))?;
            for k in m.keys() {
                model.state(k)?;
            }
            let xs = model
                .names
                .iter()
                .map(|s| m.get(s).ok_or_else(|| json_err(format!("no value for state `{s}`"))).and_then(rational_of))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(q) = xs.iter().find(|q| !in_unit_interval(q)) {
                return Err(json_err(format!("value {q} outside [0,1]")));
            }
            LatticeValue::Val(xs)
        }
        (k, kind) => return Err(json_err(format!("`{k}` is not a value of the {kind} carrier"))),
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fixwit_core::rational::ratio;

    fn g() -> Model {
        Model::from_json(r#"{"type":"mc","states":["t","x"],"terminal":["t"],"delta":{"x":{"t":"1/2","x":"1/2"}}}"#).unwrap()
    }

    fn ts() -> Model {
        Model::from_json(r#"{"type":"ts","states":["u","v","w"],"edges":[["u","w"]]}"#).unwrap()
    }

    #[test]
    fn basis_round_trip() {
        let m = g();
        for s in ["f^{3/10}_x", "fdot^{1/2}_{t}"] {
            let b = parse_basis(&m, s).unwrap();
            assert_eq!(parse_basis(&m, &format_basis(&m, &b)).unwrap(), b);
        }
        assert_eq!(parse_basis(&m, "f^{3/10}_x").unwrap(), BasisElement::val_join(1, ratio(3, 10)).unwrap());
        let t = ts();
        assert_eq!(parse_basis(&t, "co(u, v)").unwrap(), BasisElement::RelJoin { x1: 0, x2: 1 });
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let m = g();
        match parse_basis(&m, "f^{3/x}_x") {
            Err(CliError::Syntax { column, .. }) => assert_eq!(column, 4),
            other => panic!("{other:?}"),
        }
        match parse_basis(&m, "f^{1/2}_y") {
            Err(CliError::Syntax { message, column, .. }) => {
                assert!(message.contains("unknown state `y`"));
                assert_eq!(column, 9);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_basis(&m, "co(t,x)"), Err(CliError::Syntax { .. })));
        assert!(matches!(parse_basis(&m, "f^{0}_x"), Err(CliError::Syntax { .. })));
    }

    #[test]
    fn claims() {
        let m = g();
        let c = parse_claim(&m, "x > 3/5", Mode::Primal).unwrap();
        assert_eq!(c.basis, Some(BasisElement::val_join(1, ratio(3, 5)).unwrap()));
        assert_eq!(c.text(&m), "x > 3/5");
        assert_eq!(parse_claim(&m, "x > 0", Mode::Primal).unwrap().basis, None);
        assert!(parse_claim(&m, "x > 0", Mode::Dual).unwrap().basis.is_some());
        assert!(parse_claim(&m, "x > 1", Mode::Dual).is_err());
        assert!(parse_claim(&m, "x !~ t", Mode::Primal).is_err());
        assert!(parse_claim(&m, "fdot^{1/2}_x", Mode::Primal).is_err());
        let t = ts();
        assert_eq!(parse_claim(&t, "u !~ v", Mode::Dual).unwrap().basis, Some(BasisElement::RelMeet { x1: 0, x2: 1 }));
        assert!(parse_claim(&t, "u > 1/2", Mode::Primal).is_err());
    }

    #[test]
    fn values() {
        let m = g();
        let v = parse_value(&m, &json!({"val": {"t": "1", "x": "1/2"}})).unwrap();
        assert_eq!(v, LatticeValue::Val(vec![ratio(1, 1), ratio(1, 2)]));
        assert_eq!(parse_value(&m, &value_json(&m, &v)).unwrap(), v);
        let j = parse_value(&m, &json!({"join": ["f^{1}_t", "f^{1/2}_x"]})).unwrap();
        assert_eq!(j, v);
        assert!(parse_value(&m, &json!({"rel": []})).is_err());
        let t = ts();
        let r = parse_value(&t, &json!({"rel": [["u", "u"], ["v", "w"]]})).unwrap();
        assert_eq!(parse_value(&t, &value_json(&t, &r)).unwrap(), r);
    }
}
