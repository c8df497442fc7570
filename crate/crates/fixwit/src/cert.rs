//! Witness certificates: generation from the Kleene chain and independent
//! checking against the model.

use fixwit_core::lattice::LatticeValue;
use fixwit_core::rational::half;
use fixwit_core::termination::{term_witness, TermWitness};
use fixwit_core::witness::{dual_witness, primal_witness, verify_witness, Verdict};
use fixwit_core::{BasisElement, Degree, KleeneChain, Point, Rational, Witness, WitnessClaim};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::model::{Model, ModelInstance};
use crate::payload::{parse_payload, payload_json, payload_text};
use crate::syntax::{format_basis, parse_claim, value_json, Claim, Mode, Subject};

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Certificate {
    pub version: u32,
    pub model_hash: String,
    pub claim: ClaimRecord,
    pub witness: WitnessRecord,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ClaimRecord {
    pub mode: Mode,
    pub spec: String,
    /// `null` for primal claims with constant 0.
    pub basis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WitnessRecord {
    pub claimed_degree: usize,
    pub payload: Value,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Evidence {
    pub accepted: bool,
    pub reason: String,
    pub structural_degree: usize,
    pub semantics: String,
    pub alpha: Option<Value>,
}

/// Result of trying to certify a claim.
#[derive(Debug, Clone)]
pub enum Certified {
    Found(Box<Certificate>),
    /// The chain converged and the claim does not hold.
    Refuted(String),
    /// The iteration bound ran out before the claim was settled.
    Unknown { iterations: usize, reason: String },
}

fn pair_point(s: &Subject) -> Point {
    match s {
        Subject::Apart(a, b) | Subject::Distance(a, b, _) => Point::Pair(*a.min(b), *a.max(b)),
        Subject::Probability(x, _) => Point::State(*x),
    }
}

/// Checks a witness for a claim. Primal claims with constant 0 have no
/// basis element and are checked as `α(w) > 0` at the claimed point.
pub fn check_claim(model: &Model, claim: &Claim, w: &Witness) -> Verdict {
    let inst = model.instance();
    match (&claim.basis, claim.mode) {
        (Some(b), Mode::Primal) => verify_witness(inst, &WitnessClaim::Primal(b.clone()), w),
        (Some(b), Mode::Dual) => verify_witness(inst, &WitnessClaim::Dual(b.clone()), w),
        (None, _) => {
            // Check the payload against the weakest join element at the
            // point, then strengthen the acceptance test to `> 0`.
            let p = pair_point(&claim.subject);
            let probe = match &claim.subject {
                Subject::Distance(a, b, _) => BasisElement::dist_join(*a, *b, Rational::from_integer(1.into())),
                Subject::Probability(x, _) => BasisElement::val_join(*x, Rational::from_integer(1.into())),
                Subject::Apart(..) => unreachable!("apartness claims always have a basis element"),
            }
            .expect("constant 1 is a join constant");
            let mut v = verify_witness(inst, &WitnessClaim::Primal(probe), w);
            let Some(alpha) = v.alpha.clone() else { return v };
            if v.reason.contains("differs from structural degree") {
                return v;
            }
            let at = alpha.value_at(&p).cloned().unwrap_or_else(Rational::zero);
            v.accepted = at.is_positive();
            v.reason = if v.accepted { format!("α(w) at {p} is {at} > 0") } else { format!("α(w) at {p} is 0") };
            v
        }
    }
}

fn evidence(model: &Model, v: &Verdict) -> Evidence {
    Evidence {
        accepted: v.accepted,
        reason: v.reason.clone(),
        structural_degree: v.structural_degree,
        semantics: v.semantics.clone(),
        alpha: v.alpha.as_ref().map(|a| value_json(model, a)),
    }
}

fn value_at(v: &LatticeValue, p: &Point) -> Rational {
    v.value_at(p).cloned().unwrap_or_else(Rational::zero)
}

/// Finds a witness for `claim` from the Kleene chain, or explains why not.
pub fn certify(model: &Model, claim: &Claim, max_iter: usize) -> Result<Certified, CliError> {
    let inst = model.instance();
    let w = match (&claim.basis, claim.mode) {
        (None, _) => {
            let p = pair_point(&claim.subject);
            match (&model.instance, &claim.subject) {
                (ModelInstance::Mc(mc), Subject::Probability(x, c)) => match term_witness(mc, *x, c, max_iter)? {
                    TermWitness::Found(w) => w,
                    TermWitness::Refuted { .. } => return Ok(Certified::Refuted(format!("{} cannot reach a terminal state", model.name(*x)))),
                    TermWitness::Unknown { iterations, .. } => return Ok(unknown(iterations)),
                },
                (_, Subject::Distance(a, b, _)) => {
                    let chain = KleeneChain::compute(inst, max_iter)?;
                    let Some(first) = chain.iterates().iter().map(|v| value_at(v, &p)).find(|q| q.is_positive()) else {
                        return Ok(if chain.is_converged() {
                            Certified::Refuted(format!("d({},{}) = 0", model.name(*a), model.name(*b)))
                        } else {
                            unknown(chain.max_iter())
                        });
                    };
                    let b = BasisElement::dist_join(*a, *b, first * half())?;
                    primal_witness(inst, &chain, &b)?
                }
                _ => unreachable!("only numeric claims lack a basis element"),
            }
        }
        (Some(b), mode) => {
            let chain = KleeneChain::compute(inst, max_iter)?;
            let (deg, kind) = match mode {
                Mode::Primal => (chain.degree(b)?, "degree"),
                Mode::Dual => (chain.codegree(b)?, "co-degree"),
            };
            match deg {
                Degree::Finite(_) => match mode {
                    Mode::Primal => primal_witness(inst, &chain, b)?,
                    Mode::Dual => dual_witness(inst, &chain, b)?,
                },
                Degree::Undefined => {
                    return Ok(Certified::Refuted(format!(
                        "the {kind} of {} is undefined: the claim `{}` is false",
                        format_basis(model, b),
                        claim.text(model)
                    )))
                }
                Degree::Unknown { iterations } => return Ok(unknown(iterations)),
            }
        }
    };
    let v = check_claim(model, claim, &w);
    if !v.accepted {
        return Err(CliError::Witness(fixwit_core::WitnessError::Contract(format!("generated witness was rejected: {}", v.reason))));
    }
    Ok(Certified::Found(Box::new(Certificate {
        version: VERSION,
        model_hash: model.hash(),
        claim: ClaimRecord { mode: claim.mode, spec: claim.text(model), basis: claim.basis.as_ref().map(|b| format_basis(model, b)) },
        witness: WitnessRecord {
            claimed_degree: w.claimed_degree,
            payload: payload_json(model, &w.payload),
            display: payload_text(model, &w.payload),
        },
        evidence: evidence(model, &v),
    })))
}

fn unknown(iterations: usize) -> Certified {
    Certified::Unknown { iterations, reason: format!("unknown: not settled within {iterations} iterations (raise --max-iter)") }
}

/// Outcome of checking a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub accepted: bool,
    pub reason: String,
    pub verdict: Option<Evidence>,
}

fn reject(reason: String, verdict: Option<Evidence>) -> CheckReport {
    CheckReport { accepted: false, reason, verdict }
}

/// Re-derives everything from the model and the payload. The recorded
/// evidence must match what the checker computes.
pub fn check(model: &Model, cert: &Certificate) -> Result<CheckReport, CliError> {
    if cert.version != VERSION {
        return Ok(reject(format!("unsupported certificate version {}", cert.version), None));
    }
    let hash = model.hash();
    if cert.model_hash != hash {
        return Ok(reject(format!("model hash mismatch: certificate has {}, model is {hash}", cert.model_hash), None));
    }
    let claim = match parse_claim(model, &cert.claim.spec, cert.claim.mode) {
        Ok(c) => c,
        Err(e) => return Ok(reject(format!("claim: {e}"), None)),
    };
    let basis = claim.basis.as_ref().map(|b| format_basis(model, b));
    if basis != cert.claim.basis {
        return Ok(reject(
            format!(
                "recorded basis element {} does not match the claim `{}` ({})",
                cert.claim.basis.as_deref().unwrap_or("null"),
                cert.claim.spec,
                basis.as_deref().unwrap_or("null")
            ),
            None,
        ));
    }
    let payload = match parse_payload(model, &cert.witness.payload) {
        Ok(p) => p,
        Err(e) => return Ok(reject(format!("{e}"), None)),
    };
    let w = Witness { payload, claimed_degree: cert.witness.claimed_degree };
    let v = check_claim(model, &claim, &w);
    let ev = evidence(model, &v);
    if !v.accepted {
        return Ok(reject(v.reason.clone(), Some(ev)));
    }
    if ev != cert.evidence {
        return Ok(reject(String::from("recorded evidence does not match the recomputed verdict"), Some(ev)));
    }
    Ok(CheckReport { accepted: true, reason: v.reason.clone(), verdict: Some(ev) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: &str = r#"{"type":"mc","states":["t","x"],"terminal":["t"],"delta":{"x":{"t":"1/2","x":"1/2"}}}"#;

    fn cert_for(model: &Model, spec: &str, mode: Mode) -> Certificate {
        let claim = parse_claim(model, spec, mode).unwrap();
        match certify(model, &claim, 64).unwrap() {
            Certified::Found(c) => *c,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_and_tampering() {
        let m = Model::from_json(G).unwrap();
        let c = cert_for(&m, "x > 3/5", Mode::Primal);
        assert_eq!(c.witness.claimed_degree, 3);
        assert!(check(&m, &c).unwrap().accepted);

        let mut t = c.clone();
        t.claim.spec = String::from("x > 4/5");
        t.claim.basis = Some(String::from("f^{4/5}_x"));
        let r = check(&m, &t).unwrap();
        assert!(!r.accepted, "{r:?}");
        assert!(r.reason.contains("4/5"), "{}", r.reason);

        let mut t = c.clone();
        t.claim.spec = String::from("x > 4/5");
        assert!(!check(&m, &t).unwrap().accepted);

        let mut t = c.clone();
        t.model_hash = String::from("sha256:00");
        assert!(check(&m, &t).unwrap().reason.contains("hash"));

        let mut t = c.clone();
        t.witness.claimed_degree = 2;
        assert!(!check(&m, &t).unwrap().accepted);

        let mut t = c;
        t.evidence.structural_degree = 7;
        assert!(check(&m, &t).unwrap().reason.contains("evidence"));
    }

    #[test]
    fn zero_constants_and_duals() {
        let m = Model::from_json(G).unwrap();
        let c = cert_for(&m, "x > 0", Mode::Primal);
        assert_eq!(c.claim.basis, None);
        assert_eq!(c.witness.display, "x→t");
        assert!(check(&m, &c).unwrap().accepted);
        let d = cert_for(&m, "x > 1/2", Mode::Dual);
        assert!(check(&m, &d).unwrap().accepted);
        assert!(matches!(certify(&m, &parse_claim(&m, "x > 99/100", Mode::Dual).unwrap(), 64).unwrap(), Certified::Found(_)));

        let lmc = Model::from_json(
            r#"{"type":"lmc","states":["s","t","x1","x2"],"labels":{"s":"a","t":"b","x1":"c","x2":"c"},
                "delta":{"s":{"s":"1"},"t":{"t":"1"},"x1":{"s":"1/2","t":"1/2"},"x2":{"s":"1/3","t":"2/3"}}}"#,
        )
        .unwrap();
        let z = cert_for(&lmc, "d(x1,x2) > 0", Mode::Primal);
        assert!(check(&lmc, &z).unwrap().accepted);
        let same = parse_claim(&lmc, "d(s,s) > 0", Mode::Primal).unwrap();
        assert!(matches!(certify(&lmc, &same, 64).unwrap(), Certified::Refuted(_)));
    }

    #[test]
    fn unsettled_claims() {
        let m = Model::from_json(G).unwrap();
        let claim = parse_claim(&m, "x > 1", Mode::Primal).unwrap();
        assert!(matches!(certify(&m, &claim, 64).unwrap(), Certified::Unknown { iterations: 64, .. }));
        let ts = Model::from_json(r#"{"type":"ts","states":["u","v","w"],"edges":[["u","w"]]}"#).unwrap();
        let claim = parse_claim(&ts, "v !~ w", Mode::Primal).unwrap();
        assert!(matches!(certify(&ts, &claim, 10).unwrap(), Certified::Refuted(_)));
        let claim = parse_claim(&ts, "u !~ w", Mode::Primal).unwrap();
        assert!(matches!(certify(&ts, &claim, 10).unwrap(), Certified::Found(_)));
    }
}
