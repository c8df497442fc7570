//! One interactive game between a human and the engine.
//!
//! The engine plays the other role from the synthesized strategies. A
//! rejected human move leaves the session unchanged.

use std::collections::BTreeSet;
use std::sync::Arc;

use fixwit_core::game::{
    forall_candidates, validate_exists_move, validate_forall_move, EndReason, EngineExists, EngineForall, ExistsMove,
    ExistsPolicy, ForallPolicy, Move, MoveVerdict, Player, Position, TranscriptEntry, Variant,
};
use fixwit_core::lattice::LatticeKind;
use fixwit_core::witness::{dual_witness, primal_witness};
use fixwit_core::{BasisElement, KleeneChain};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::model::Model;
use crate::payload::{payload_json, payload_text};
use crate::syntax::{format_basis, parse_basis, parse_value, value_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Primal,
    Dual,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Primal => Variant::Primal,
            VariantArg::Dual => Variant::Dual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RoleArg {
    Exists,
    Forall,
}

impl From<RoleArg> for Player {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Exists => Player::Exists,
            RoleArg::Forall => Player::Forall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOver {
    pub winner: Player,
    pub reason: String,
}

pub struct Session {
    pub model: Arc<Model>,
    pub chain: KleeneChain,
    pub variant: Variant,
    pub human: Player,
    pub start: BasisElement,
    pub position: Position,
    pub transcript: Vec<TranscriptEntry>,
    pub over: Option<GameOver>,
    pub max_rounds: usize,
    seen: BTreeSet<BasisElement>,
}

/// Result of submitting a human move.
pub enum MoveOutcome {
    /// The move broke the game rules; the verdict names the inequality.
    Rejected(MoveVerdict),
    Accepted { verdict: MoveVerdict, engine_reply: Option<Value> },
}

fn variant_name(v: Variant) -> &'static str {
    v.name()
}

fn verdict_json(v: &MoveVerdict) -> Value {
    json!({"accepted": v.accepted, "reason": v.reason})
}

impl Session {
    pub fn new(model: Arc<Model>, variant: Variant, human: Player, start: &str, max_iter: usize) -> Result<Self, CliError> {
        let start = parse_basis(&model, start)?;
        let want_join = variant == Variant::Primal;
        if start.is_join() != want_join {
            return Err(CliError::Usage(format!(
                "the {} game starts from a {}-basis element",
                variant_name(variant),
                if want_join { "join" } else { "meet" }
            )));
        }
        let chain = KleeneChain::compute(model.instance(), max_iter)?;
        let mut s = Session {
            model,
            chain,
            variant,
            human,
            position: Position::ExistsTurn { at: start.clone(), round: 1 },
            start,
            transcript: Vec::new(),
            over: None,
            max_rounds: max_iter + 1,
            seen: BTreeSet::new(),
        };
        s.enter_exists_turn(s.start.clone(), 1);
        if s.over.is_none() && human == Player::Forall {
            s.engine_exists()?;
        }
        Ok(s)
    }

    fn finish(&mut self, winner: Player, reason: impl Into<String>) {
        self.over = Some(GameOver { winner, reason: reason.into() });
    }

    fn enter_exists_turn(&mut self, at: BasisElement, round: usize) {
        self.position = Position::ExistsTurn { at: at.clone(), round };
        if round > self.max_rounds {
            self.finish(self.variant.infinite_play_winner(), format!("round limit {} reached", self.max_rounds));
        } else if !self.seen.insert(at) {
            self.finish(self.variant.infinite_play_winner(), "position repeated: infinite play");
        }
    }

    fn record(&mut self, player: Player, mv: Move, verdict: MoveVerdict) {
        self.transcript.push(TranscriptEntry { round: self.position.round(), player, mv, verdict });
    }

    fn engine_exists(&mut self) -> Result<Option<Value>, CliError> {
        let Position::ExistsTurn { at, round } = self.position.clone() else { unreachable!("engine ∃ on ∃'s turn") };
        let mut policy = EngineExists { inst: self.model.instance(), chain: &self.chain, variant: self.variant };
        let Some(em) = policy.exists_move(&at, round)? else {
            self.finish(Player::Forall, "∃ has no valid move");
            return Ok(None);
        };
        let verdict = validate_exists_move(self.model.instance(), self.variant, &at, &em.value)?;
        let reply = self.exists_move_json(&em);
        self.record(Player::Exists, Move::Exists(em.clone()), verdict.clone());
        if !verdict.accepted {
            self.finish(Player::Forall, format!("engine ∃ move invalid: {}", verdict.reason));
            return Ok(Some(reply));
        }
        self.position = Position::ForallTurn { at, offer: em, round };
        if self.human == Player::Forall && self.candidates().is_empty() {
            self.finish(Player::Exists, "∀ has no valid reply");
        }
        Ok(Some(reply))
    }

    fn engine_forall(&mut self) -> Result<Option<Value>, CliError> {
        let Position::ForallTurn { at, offer, round } = self.position.clone() else { unreachable!("engine ∀ on ∀'s turn") };
        let mut policy = EngineForall { inst: self.model.instance(), chain: &self.chain, variant: self.variant };
        let Some(reply) = policy.forall_move(&at, &offer, round)? else {
            self.finish(Player::Exists, "∀ has no valid reply");
            return Ok(None);
        };
        let verdict = validate_forall_move(self.model.instance(), self.variant, &offer.value, &reply)?;
        self.record(Player::Forall, Move::Forall(reply.clone()), verdict.clone());
        let text = format_basis(&self.model, &reply);
        if !verdict.accepted {
            self.finish(Player::Exists, format!("engine ∀ reply invalid: {}", verdict.reason));
        } else {
            self.enter_exists_turn(reply, round + 1);
        }
        Ok(Some(json!({"player": "forall", "basis": text})))
    }

    fn exists_move_json(&self, em: &ExistsMove) -> Value {
        let mut v = json!({"player": "exists", "value": value_json(&self.model, &em.value)});
        if let Some(f) = &em.basis {
            v["basis"] = json!(f.iter().map(|b| format_basis(&self.model, b)).collect::<Vec<_>>());
        }
        v
    }

    fn candidates(&self) -> Vec<BasisElement> {
        match &self.position {
            Position::ForallTurn { offer, .. } => {
                forall_candidates(self.model.instance().lattice(), &self.chain, self.variant, &offer.value).unwrap_or_default()
            }
            Position::ExistsTurn { .. } => Vec::new(),
        }
    }

    /// Applies a human move, then lets the engine answer.
    pub fn submit(&mut self, mv: &Value) -> Result<MoveOutcome, CliError> {
        if let Some(over) = &self.over {
            return Err(CliError::Usage(format!("the game is over; {} won", over.winner.name())));
        }
        if mv.as_str() == Some("resign") {
            self.finish(self.human.opponent(), format!("{} resigned", self.human.name()));
            return Ok(MoveOutcome::Accepted { verdict: MoveVerdict { accepted: true, reason: String::from("resigned") }, engine_reply: None });
        }
        let turn = self.position.turn();
        if turn != self.human {
            return Err(CliError::Usage(format!("it is {}'s turn", turn.name())));
        }
        match self.position.clone() {
            Position::ExistsTurn { at, round } => {
                let value = parse_value(&self.model, mv)?;
                let verdict = validate_exists_move(self.model.instance(), self.variant, &at, &value)?;
                if !verdict.accepted {
                    return Ok(MoveOutcome::Rejected(verdict));
                }
                let em = ExistsMove::value(value);
                self.record(Player::Exists, Move::Exists(em.clone()), verdict.clone());
                self.position = Position::ForallTurn { at, offer: em, round };
                let engine_reply = self.engine_forall()?;
                Ok(MoveOutcome::Accepted { verdict, engine_reply })
            }
            Position::ForallTurn { offer, round, .. } => {
                let text = mv.as_str().or_else(|| mv.get("basis").and_then(Value::as_str));
                let text = text.ok_or_else(|| CliError::Usage(String::from("a ∀-move is a basis element string")))?;
                let reply = parse_basis(&self.model, text)?;
                let verdict = validate_forall_move(self.model.instance(), self.variant, &offer.value, &reply)?;
                if !verdict.accepted {
                    return Ok(MoveOutcome::Rejected(verdict));
                }
                self.record(Player::Forall, Move::Forall(reply.clone()), verdict.clone());
                self.enter_exists_turn(reply, round + 1);
                let engine_reply = if self.over.is_none() { self.engine_exists()? } else { None };
                Ok(MoveOutcome::Accepted { verdict, engine_reply })
            }
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.model.instance().lattice() {
            LatticeKind::Rel { .. } => "rel",
            LatticeKind::Dist { .. } => "dist",
            LatticeKind::Val { .. } => "val",
            LatticeKind::Set => "set",
        }
    }

    /// What the side to move may submit.
    pub fn legal_moves(&self) -> Value {
        if self.over.is_some() {
            return Value::Null;
        }
        match &self.position {
            Position::ExistsTurn { at, round } => {
                let mut policy = EngineExists { inst: self.model.instance(), chain: &self.chain, variant: self.variant };
                let suggestion = policy.exists_move(at, *round).ok().flatten().map(|em| self.exists_move_json(&em)["value"].clone());
                json!({
                    "player": "exists",
                    "kind": self.kind_name(),
                    "states": self.model.names,
                    "forms": [self.kind_name(), "join"],
                    "suggestion": suggestion,
                })
            }
            Position::ForallTurn { at, offer, round } => {
                let mut policy = EngineForall { inst: self.model.instance(), chain: &self.chain, variant: self.variant };
                let suggestion = policy.forall_move(at, offer, *round).ok().flatten().map(|b| format_basis(&self.model, &b));
                json!({
                    "player": "forall",
                    "kind": "basis",
                    "candidates": self.candidates().iter().map(|b| format_basis(&self.model, b)).collect::<Vec<_>>(),
                    "suggestion": suggestion,
                })
            }
        }
    }

    pub fn position_json(&self) -> Value {
        let mut p = json!({
            "round": self.position.round(),
            "at": format_basis(&self.model, self.position.at()),
            "turn": if self.over.is_some() { Value::Null } else { json!(self.position.turn().name()) },
        });
        if let Position::ForallTurn { offer, .. } = &self.position {
            p["offer"] = self.exists_move_json(offer)["value"].clone();
        }
        if let Some(o) = &self.over {
            p["over"] = json!({"winner": o.winner.name(), "reason": o.reason});
        }
        p
    }

    fn transcript_json(&self) -> Value {
        let entries: Vec<Value> = self
            .transcript
            .iter()
            .map(|e| {
                let mv = match &e.mv {
                    Move::Exists(em) => self.exists_move_json(em),
                    Move::Forall(b) => json!({"player": "forall", "basis": format_basis(&self.model, b)}),
                };
                json!({"round": e.round, "player": e.player.name(), "move": mv, "verdict": verdict_json(&e.verdict)})
            })
            .collect();
        Value::Array(entries)
    }

    fn witness_for(&self, b: &BasisElement) -> Option<Value> {
        let inst = self.model.instance();
        let w = match self.variant {
            Variant::Primal if self.chain.degree(b).ok()?.is_finite() => primal_witness(inst, &self.chain, b).ok()?,
            Variant::Dual if self.chain.codegree(b).ok()?.is_finite() => dual_witness(inst, &self.chain, b).ok()?,
            _ => return None,
        };
        Some(json!({
            "basis": format_basis(&self.model, b),
            "claimedDegree": w.claimed_degree,
            "payload": payload_json(&self.model, &w.payload),
            "display": payload_text(&self.model, &w.payload),
        }))
    }

    /// Witnesses for the ∃-turn positions visited so far, where one exists;
    /// the first entry certifies the start position.
    pub fn witness_so_far(&self) -> Value {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        let ats = std::iter::once(&self.start).chain(self.transcript.iter().filter_map(|e| match &e.mv {
            Move::Forall(b) if e.verdict.accepted => Some(b),
            _ => None,
        }));
        for b in ats {
            if seen.contains(b) {
                continue;
            }
            seen.push(b.clone());
            if let Some(w) = self.witness_for(b) {
                out.push(w);
            }
        }
        Value::Array(out)
    }

    pub fn state_json(&self) -> Value {
        json!({
            "variant": variant_name(self.variant),
            "humanRole": self.human.name(),
            "engineRole": self.human.opponent().name(),
            "model": {"type": self.model.tag().name(), "states": self.model.names, "hash": self.model.hash()},
            "start": format_basis(&self.model, &self.start),
            "position": self.position_json(),
            "legalMoves": self.legal_moves(),
            "transcript": self.transcript_json(),
            "witnessSoFar": self.witness_so_far(),
        })
    }
}

/// Why a game ended, as text.
pub fn end_reason_text(e: &EndReason) -> String {
    match e {
        EndReason::Stuck(p) => format!("{} has no valid move", p.name()),
        EndReason::InvalidMove(p) => format!("{} made an invalid move", p.name()),
        EndReason::RoundLimit => String::from("round limit reached"),
        EndReason::Repetition => String::from("position repeated"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: &str = r#"{"type":"mc","states":["t","x"],"terminal":["t"],"delta":{"x":{"t":"1/2","x":"1/2"}}}"#;

    fn g() -> Arc<Model> {
        Arc::new(Model::from_json(G).unwrap())
    }

    #[test]
    fn human_forall_loses_primal_on_g() {
        let mut s = Session::new(g(), Variant::Primal, Player::Forall, "f^{3/5}_x", 64).unwrap();
        assert_eq!(s.position.turn(), Player::Forall);
        while s.over.is_none() {
            let cands = s.legal_moves()["candidates"].as_array().unwrap().clone();
            let pick = cands.last().unwrap().clone();
            assert!(matches!(s.submit(&pick).unwrap(), MoveOutcome::Accepted { .. }));
        }
        assert_eq!(s.over.as_ref().unwrap().winner, Player::Exists);
        assert!(s.transcript.len() <= 6);
        assert_eq!(s.witness_so_far()[0]["display"], "x→(t, x→t)");
    }

    #[test]
    fn invalid_moves_leave_the_session_unchanged() {
        let mut s = Session::new(g(), Variant::Primal, Player::Exists, "f^{3/5}_x", 64).unwrap();
        let bad = json!({"val": {"t": "1", "x": "0"}});
        match s.submit(&bad).unwrap() {
            MoveOutcome::Rejected(v) => assert!(v.reason.contains("fails"), "{}", v.reason),
            _ => panic!("accepted"),
        }
        assert!(s.transcript.is_empty());
        let good = json!({"val": {"t": "1", "x": "1/2"}});
        assert!(matches!(s.submit(&good).unwrap(), MoveOutcome::Accepted { engine_reply: Some(_), .. }));
        assert!(s.submit(&json!("f^{1}_t")).is_err());
    }

    #[test]
    fn wrong_start_kind() {
        assert!(Session::new(g(), Variant::Dual, Player::Exists, "f^{1/2}_x", 64).is_err());
    }
}
