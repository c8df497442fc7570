//! JSON and text forms of witness payloads, with state names.
//!
//! HML: `{"op":"true"}`, `{"op":"diamond","arg":f}`, `{"op":"not","arg":f}`,
//! `{"op":"and","args":[f,...]}`.
//! Metric: `{"op":"label","label":"a"}`, `{"op":"next","arg":f}`,
//! `{"op":"oneMinus","arg":f}`, `{"op":"sub","arg":f,"q":"1/2"}`,
//! `{"op":"max","args":[f,g]}`.
//! Trees: `{"state":"x","children":[...]}`; leaves omit `children`.

use fixwit_core::bisim::HmlFormula;
use fixwit_core::metric::MetricFormula;
use fixwit_core::rational::{format_rational, parse_rational};
use fixwit_core::termination::WitnessTree;
use fixwit_core::{InstanceTag, Payload};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::model::Model;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("malformed witness payload: {}", msg.into()))
}

fn field<'a>(o: &'a Map<String, Value>, k: &str) -> Result<&'a Value, CliError> {
    o.get(k).ok_or_else(|| bad(format!("missing `{k}`")))
}

fn op_of(v: &Value) -> Result<(&Map<String, Value>, &str), CliError> {
    let o = v.as_object().ok_or_else(|| bad(format!("expected an object, found {v}")))?;
    let op = field(o, "op")?.as_str().ok_or_else(|| bad("`op` must be a string"))?;
    Ok((o, op))
}

fn args(o: &Map<String, Value>) -> Result<&Vec<Value>, CliError> {
    field(o, "args")?.as_array().ok_or_else(|| bad("`args` must be a list"))
}

fn hml(v: &Value) -> Result<HmlFormula, CliError> {
    let (o, op) = op_of(v)?;
    Ok(match op {
        "true" => HmlFormula::True,
        "diamond" => HmlFormula::Diamond(Box::new(hml(field(o, "arg")?)?)),
        "not" => HmlFormula::Not(Box::new(hml(field(o, "arg")?)?)),
        "and" => HmlFormula::And(args(o)?.iter().map(hml).collect::<Result<_, _>>()?),
        other => return Err(bad(format!("unknown HML operator `{other}`"))),
    })
}

fn metric(v: &Value) -> Result<MetricFormula, CliError> {
    let (o, op) = op_of(v)?;
    let arg = || metric(field(o, "arg")?).map(Box::new);
    Ok(match op {
        "label" => MetricFormula::LabelInd(field(o, "label")?.as_str().ok_or_else(|| bad("`label` must be a string"))?.to_string()),
        "next" => MetricFormula::Next(arg()?),
        "oneMinus" => MetricFormula::OneMinus(arg()?),
        "sub" => {
            let q = field(o, "q")?.as_str().ok_or_else(|| bad("`q` must be a string \"p/q\""))?;
            MetricFormula::SubQ(arg()?, parse_rational(q)?)
        }
        "max" => {
            let a = args(o)?;
            if a.len() != 2 {
                return Err(bad("`max` takes exactly two arguments"));
            }
            MetricFormula::Max(Box::new(metric(&a[0])?), Box::new(metric(&a[1])?))
        }
        other => return Err(bad(format!("unknown metric operator `{other}`"))),
    })
}

fn tree(model: &Model, v: &Value) -> Result<WitnessTree, CliError> {
    let o = v.as_object().ok_or_else(|| bad(format!("expected a tree node, found {v}")))?;
    if let Some(k) = o.keys().find(|k| *k != "state" && *k != "children") {
        return Err(bad(format!("unexpected key `{k}` in tree node")));
    }
    let name = field(o, "state")?.as_str().ok_or_else(|| bad("`state` must be a state name"))?;
    let x = model.state(name)?;
    match o.get("children") {
        None => Ok(WitnessTree::Leaf(x)),
        Some(cs) => {
            let cs = cs.as_array().ok_or_else(|| bad("`children` must be a list"))?;
            Ok(WitnessTree::Node(x, cs.iter().map(|c| tree(model, c)).collect::<Result<_, _>>()?))
        }
    }
}

pub fn parse_payload(model: &Model, v: &Value) -> Result<Payload, CliError> {
    Ok(match model.tag() {
        InstanceTag::Bisim => Payload::Hml(hml(v)?),
        InstanceTag::Metric => Payload::Metric(metric(v)?),
        InstanceTag::Termination => Payload::Tree(tree(model, v)?),
    })
}

fn hml_json(f: &HmlFormula) -> Value {
    match f {
        HmlFormula::True => json!({"op": "true"}),
        HmlFormula::Diamond(g) => json!({"op": "diamond", "arg": hml_json(g)}),
        HmlFormula::Not(g) => json!({"op": "not", "arg": hml_json(g)}),
        HmlFormula::And(gs) => json!({"op": "and", "args": gs.iter().map(hml_json).collect::<Vec<_>>()}),
    }
}

fn metric_json(f: &MetricFormula) -> Value {
    match f {
        MetricFormula::LabelInd(a) => json!({"op": "label", "label": a}),
        MetricFormula::Next(g) => json!({"op": "next", "arg": metric_json(g)}),
        MetricFormula::OneMinus(g) => json!({"op": "oneMinus", "arg": metric_json(g)}),
        MetricFormula::SubQ(g, q) => json!({"op": "sub", "arg": metric_json(g), "q": format_rational(q)}),
        MetricFormula::Max(g, h) => json!({"op": "max", "args": [metric_json(g), metric_json(h)]}),
    }
}

fn tree_json(model: &Model, t: &WitnessTree) -> Value {
    match t {
        WitnessTree::Leaf(x) => json!({"state": model.name(*x)}),
        WitnessTree::Node(x, cs) => {
            json!({"state": model.name(*x), "children": cs.iter().map(|c| tree_json(model, c)).collect::<Vec<_>>()})
        }
    }
}

pub fn payload_json(model: &Model, p: &Payload) -> Value {
    match p {
        Payload::Hml(f) => hml_json(f),
        Payload::Metric(f) => metric_json(f),
        Payload::Tree(t) => tree_json(model, t),
    }
}

fn tree_text(model: &Model, t: &WitnessTree) -> String {
    match t {
        WitnessTree::Leaf(x) => model.name(*x).to_string(),
        WitnessTree::Node(x, cs) if cs.len() == 1 => format!("{}→{}", model.name(*x), tree_text(model, &cs[0])),
        WitnessTree::Node(x, cs) => {
            let inner: Vec<String> = cs.iter().map(|c| tree_text(model, c)).collect();
            format!("{}→({})", model.name(*x), inner.join(", "))
        }
    }
}

/// Human-readable payload; trees use state names.
pub fn payload_text(model: &Model, p: &Payload) -> String {
    match p {
        Payload::Tree(t) => tree_text(model, t),
        other => other.to_string(),
    }
}
