//! The CLI subcommands. Each returns an exit code with text and JSON output.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fixwit_core::game::{play, EngineExists, EngineForall, Move, Player, Variant};
use fixwit_core::{Degree, KleeneChain};
use serde_json::{json, Value};

use crate::cert::{certify, check, Certificate, Certified};
use crate::error::CliError;
use crate::model::Model;
use crate::server::{serve, AppState, Defaults};
use crate::session::{end_reason_text, RoleArg, VariantArg};
use crate::syntax::{format_basis, parse_basis, parse_claim, value_json, value_text, Mode};

#[derive(Debug, Parser)]
#[command(name = "fixwit", version, about = "Fixpoint games: degrees, witnesses and certificates")]
pub struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kleene iterates and the least fixpoint.
    Fixpoint {
        model: PathBuf,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Degree of a join-basis element or co-degree of a meet-basis element.
    Degree {
        model: PathBuf,
        basis: String,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Generate a witness certificate for a claim.
    Witness {
        model: PathBuf,
        claim: String,
        #[arg(long, value_enum, default_value = "primal")]
        mode: Mode,
        /// Certificate file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Check a certificate against a model.
    Check { model: PathBuf, certificate: PathBuf },
    /// Serve the game API, or play engine against engine with --simulate.
    Play {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "primal")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "exists")]
        role: RoleArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Default start position for new sessions.
        #[arg(long)]
        start: Option<String>,
        /// Play one engine-vs-engine game from --start and print the transcript.
        #[arg(long)]
        simulate: bool,
        #[arg(long)]
        max_iter: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub text: String,
    pub json: Value,
}

impl Output {
    fn new(code: i32, text: String, json: Value) -> Self {
        Output { code, text, json }
    }

    pub fn error(e: &CliError) -> Self {
        Output::new(e.exit_code(), format!("error: {e}"), json!({"error": e.to_string(), "exitCode": e.exit_code()}))
    }
}

pub fn run(cli: Cli) -> Output {
    let result = match cli.command {
        Command::Fixpoint { model, max_iter } => cmd_fixpoint(&model, max_iter),
        Command::Degree { model, basis, max_iter } => cmd_degree(&model, &basis, max_iter),
        Command::Witness { model, claim, mode, output, max_iter } => cmd_witness(&model, &claim, mode, output.as_deref(), max_iter),
        Command::Check { model, certificate } => cmd_check(&model, &certificate),
        Command::Play { model, variant, role, port, start, simulate, max_iter } => {
            if simulate {
                let Some(start) = start else {
                    return Output::error(&CliError::Usage(String::from("--simulate needs --start")));
                };
                cmd_simulate(&model, variant.into(), &start, max_iter)
            } else {
                cmd_play(&model, variant.into(), role.into(), port, start, max_iter)
            }
        }
    };
    result.unwrap_or_else(|e| Output::error(&e))
}

pub fn cmd_fixpoint(path: &Path, max_iter: Option<usize>) -> Result<Output, CliError> {
    let model = Model::load(path)?;
    let max_iter = model.max_iter(max_iter)?;
    let chain = KleeneChain::compute(model.instance(), max_iter)?;
    let mut text = String::new();
    for (i, v) in chain.iterates().iter().enumerate() {
        text.push_str(&format!("b^{i}(bot) = {}\n", value_text(&model, v)));
    }
    let converged = chain.is_converged();
    if converged {
        text.push_str(&format!("least fixpoint reached after {} steps\n", chain.last_index()));
    } else {
        text.push_str(&format!("unknown: no fixpoint within {max_iter} iterations\n"));
    }
    let json = json!({
        "converged": converged,
        "steps": chain.last_index(),
        "maxIter": max_iter,
        "iterates": chain.iterates().iter().map(|v| value_json(&model, v)).collect::<Vec<_>>(),
        "fixpoint": chain.fixpoint().map(|v| value_json(&model, v)),
    });
    Ok(Output::new(if converged { 0 } else { 1 }, text, json))
}

pub fn cmd_degree(path: &Path, spec: &str, max_iter: Option<usize>) -> Result<Output, CliError> {
    let model = Model::load(path)?;
    let b = parse_basis(&model, spec)?;
    let max_iter = model.max_iter(max_iter)?;
    let chain = KleeneChain::compute(model.instance(), max_iter)?;
    let (what, d) = if b.is_join() { ("degree", chain.degree(&b)?) } else { ("codegree", chain.codegree(&b)?) };
    let (code, value) = match d {
        Degree::Finite(k) => (0, json!(k)),
        Degree::Undefined => (0, json!("undefined")),
        Degree::Unknown { .. } => (1, json!("unknown")),
    };
    let text = match d {
        Degree::Finite(k) => format!("{k}\n"),
        Degree::Undefined => String::from("undefined\n"),
        Degree::Unknown { iterations } => format!("unknown (not reached within {iterations} iterations)\n"),
    };
    Ok(Output::new(code, text, json!({"basis": format_basis(&model, &b), "kind": what, "value": value, "maxIter": max_iter})))
}

pub fn cmd_witness(path: &Path, spec: &str, mode: Mode, out: Option<&Path>, max_iter: Option<usize>) -> Result<Output, CliError> {
    let model = Model::load(path)?;
    let claim = parse_claim(&model, spec, mode)?;
    let max_iter = model.max_iter(max_iter)?;
    match certify(&model, &claim, max_iter)? {
        Certified::Found(cert) => {
            let body = serde_json::to_string_pretty(&*cert).expect("certificate serializes");
            let json = serde_json::to_value(&*cert).expect("certificate serializes");
            let text = match out {
                Some(p) => {
                    std::fs::write(p, format!("{body}\n")).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                    format!("witness {} (degree {}) written to {}\n", cert.witness.display, cert.witness.claimed_degree, p.display())
                }
                None => format!("{body}\n"),
            };
            Ok(Output::new(0, text, json))
        }
        Certified::Refuted(reason) => Ok(Output::new(1, format!("refuted: {reason}\n"), json!({"result": "refuted", "reason": reason}))),
        Certified::Unknown { iterations, reason } => {
            Ok(Output::new(1, format!("{reason}\n"), json!({"result": "unknown", "iterations": iterations, "reason": reason})))
        }
    }
}

pub fn cmd_check(path: &Path, cert_path: &Path) -> Result<Output, CliError> {
    let model = Model::load(path)?;
    let text = std::fs::read_to_string(cert_path).map_err(|source| CliError::Io { path: cert_path.display().to_string(), source })?;
    let cert: Certificate =
        serde_json::from_str(&text).map_err(|source| CliError::Json { what: cert_path.display().to_string(), source })?;
    let report = check(&model, &cert)?;
    let verdict = if report.accepted { "accept" } else { "reject" };
    let legend: Vec<String> = model.names.iter().enumerate().map(|(i, n)| format!("{n}={i}")).collect();
    let mut text = format!("{verdict}: {} ({} mode)\n  {}\n  states: {}\n", cert.claim.spec, cert.claim.mode.name(), report.reason, legend.join(", "));
    if let Some(ev) = &report.verdict {
        text.push_str(&format!("  witness degree {}; {}\n", ev.structural_degree, ev.semantics));
    }
    let json = json!({"verdict": verdict, "reason": report.reason, "evidence": report.verdict});
    Ok(Output::new(if report.accepted { 0 } else { 1 }, text, json))
}

pub fn cmd_simulate(path: &Path, variant: Variant, start: &str, max_iter: Option<usize>) -> Result<Output, CliError> {
    let model = Model::load(path)?;
    let b = parse_basis(&model, start)?;
    let max_iter = model.max_iter(max_iter)?;
    let inst = model.instance();
    let chain = KleeneChain::compute(inst, max_iter)?;
    let mut e = EngineExists { inst, chain: &chain, variant };
    let mut f = EngineForall { inst, chain: &chain, variant };
    let outcome = play(inst, variant, &b, &mut e, &mut f, max_iter + 1)?;
    let mut text = String::new();
    let mut moves = Vec::new();
    for t in &outcome.transcript {
        let (shown, mv) = match &t.mv {
            Move::Exists(em) => (value_text(&model, &em.value), value_json(&model, &em.value)),
            Move::Forall(r) => (format_basis(&model, r), json!(format_basis(&model, r))),
        };
        text.push_str(&format!("round {} {}: {shown}\n", t.round, t.player));
        moves.push(json!({"round": t.round, "player": t.player.name(), "move": mv, "verdict": {"accepted": t.verdict.accepted, "reason": t.verdict.reason}}));
    }
    let why = end_reason_text(&outcome.end);
    let plural = if outcome.rounds == 1 { "" } else { "s" };
    text.push_str(&format!("{} wins after {} round{plural} ({why})\n", outcome.winner, outcome.rounds));
    let prover = if variant == Variant::Primal { Player::Exists } else { Player::Forall };
    let json = json!({"winner": outcome.winner.name(), "rounds": outcome.rounds, "end": why, "transcript": moves});
    Ok(Output::new(if outcome.winner == prover { 0 } else { 1 }, text, json))
}

pub fn cmd_play(path: &Path, variant: Variant, human: Player, port: u16, start: Option<String>, max_iter: Option<usize>) -> Result<Output, CliError> {
    let model = Arc::new(Model::load(path)?);
    if let Some(s) = &start {
        parse_basis(&model, s)?;
    }
    let state = AppState::new(Defaults { model: Some(model), variant, human, start, max_iter });
    let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: String::from("tokio runtime"), source })?;
    rt.block_on(serve(state, port))?;
    Ok(Output::new(0, String::new(), Value::Null))
}
