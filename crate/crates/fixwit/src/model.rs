//! JSON model files.
//!
//! ```json
//! {"type": "ts",  "states": ["u", "v", "w"], "edges": [["u", "w"]]}
//! {"type": "lmc", "states": ["s", "t"], "labels": {"s": "a", "t": "b"},
//!  "delta": {"s": {"t": "1"}, "t": {"t": "1"}}}
//! {"type": "mc",  "states": ["t", "x"], "terminal": ["t"],
//!  "delta": {"x": {"t": "1/2", "x": "1/2"}}}
//! ```
//!
//! `states` may also be a count, naming the states `0..n`.

use std::collections::BTreeMap;
use std::path::Path;

use fixwit_core::bisim::TransitionSystem;
use fixwit_core::distribution::Distribution;
use fixwit_core::instance::ModelError;
use fixwit_core::metric::LabelledMarkovChain;
use fixwit_core::rational::parse_rational;
use fixwit_core::termination::MarkovChain;
use fixwit_core::{Instance, InstanceTag};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum States {
    Count(usize),
    Names(Vec<String>),
}

impl States {
    fn names(&self) -> Vec<String> {
        match self {
            States::Count(n) => (0..*n).map(|i| i.to_string()).collect(),
            States::Names(v) => v.clone(),
        }
    }
}

type Delta = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelFile {
    Ts { states: States, edges: Vec<(String, String)> },
    Lmc { states: States, labels: BTreeMap<String, String>, delta: Delta },
    Mc { states: States, terminal: Vec<String>, delta: Delta },
}

#[derive(Debug, Clone)]
pub enum ModelInstance {
    Ts(TransitionSystem),
    Lmc(LabelledMarkovChain),
    Mc(MarkovChain),
}

#[derive(Debug, Clone)]
pub struct Model {
    pub file: ModelFile,
    pub names: Vec<String>,
    pub instance: ModelInstance,
}

impl Model {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|source| CliError::Json { what: String::from("model"), source })?;
        Self::from_file(file)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self, CliError> {
        let file: ModelFile =
            serde_json::from_value(v).map_err(|source| CliError::Json { what: String::from("model"), source })?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn from_file(file: ModelFile) -> Result<Self, CliError> {
        let states = match &file {
            ModelFile::Ts { states, .. } | ModelFile::Lmc { states, .. } | ModelFile::Mc { states, .. } => states,
        };
        let names = states.names();
        for (i, s) in names.iter().enumerate() {
            if names[..i].contains(s) {
                return Err(CliError::Usage(format!("state `{s}` is declared twice")));
            }
        }
        let idx = |s: &str| names.iter().position(|n| n == s).ok_or_else(|| CliError::UnknownState(s.to_string()));
        let n = names.len();
        let dist = |owner: usize, row: &BTreeMap<String, String>| -> Result<Distribution, CliError> {
            let entries = row.iter().map(|(y, p)| Ok((idx(y)?, parse_rational(p)?))).collect::<Result<Vec<_>, CliError>>()?;
            Ok(Distribution::new(owner, n, entries)?)
        };
        let instance = match &file {
            ModelFile::Ts { edges, .. } => {
                let e = edges.iter().map(|(a, b)| Ok((idx(a)?, idx(b)?))).collect::<Result<Vec<_>, CliError>>()?;
                ModelInstance::Ts(TransitionSystem::new(n, &e)?)
            }
            ModelFile::Lmc { labels, delta, .. } => {
                for s in labels.keys().chain(delta.keys()) {
                    idx(s)?;
                }
                let labels = names
                    .iter()
                    .map(|s| labels.get(s).cloned().ok_or_else(|| CliError::Usage(format!("state `{s}` has no label"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let delta = names
                    .iter()
                    .enumerate()
                    .map(|(i, s)| match delta.get(s) {
                        Some(row) => dist(i, row),
                        None => Err(CliError::Model(ModelError::MissingDistribution(i))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ModelInstance::Lmc(LabelledMarkovChain::new(labels, delta)?)
            }
            ModelFile::Mc { terminal, delta, .. } => {
                for s in terminal.iter().chain(delta.keys()) {
                    idx(s)?;
                }
                let term: Vec<bool> = names.iter().map(|s| terminal.contains(s)).collect();
                let delta = names
                    .iter()
                    .enumerate()
                    .map(|(i, s)| delta.get(s).map(|row| dist(i, row)).transpose())
                    .collect::<Result<Vec<_>, _>>()?;
                ModelInstance::Mc(MarkovChain::new(term, delta)?)
            }
        };
        Ok(Model { file, names, instance })
    }

    pub fn instance(&self) -> &dyn Instance {
        match &self.instance {
            ModelInstance::Ts(m) => m,
            ModelInstance::Lmc(m) => m,
            ModelInstance::Mc(m) => m,
        }
    }

    pub fn tag(&self) -> InstanceTag {
        self.instance().tag()
    }

    pub fn state(&self, name: &str) -> Result<usize, CliError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| CliError::UnknownState(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// `sha256:` over the canonical re-serialization, so formatting and key
    /// order in the source file do not matter.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(&self.file).expect("model serializes");
        format!("sha256:{}", hex::encode(Sha256::digest(canon.as_bytes())))
    }

    /// Iteration bound: `FIXWIT_MAX_ITER` if set, else the instance default.
    pub fn max_iter(&self, flag: Option<usize>) -> Result<usize, CliError> {
        if let Some(m) = flag {
            return Ok(m);
        }
        match std::env::var("FIXWIT_MAX_ITER") {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("FIXWIT_MAX_ITER={v} is not a number"))),
            Err(_) => Ok(self.instance().default_max_iter()),
        }
    }
}
