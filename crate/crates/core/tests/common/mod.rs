#![allow(dead_code)]

use fixwit_core::bisim::TransitionSystem;
use fixwit_core::distribution::Distribution;
use fixwit_core::metric::LabelledMarkovChain;
use fixwit_core::rational::{ratio, Rational};
use fixwit_core::termination::MarkovChain;
use proptest::prelude::*;

pub fn ts(max_n: usize) -> impl Strategy<Value = TransitionSystem> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.35), n * n).prop_map(move |bits| {
            let succ = (0..n).map(|x| (0..n).filter(|&y| bits[x * n + y]).collect()).collect();
            TransitionSystem::from_successors(succ).unwrap()
        })
    })
}

pub fn succ_lists(ts: &TransitionSystem) -> Vec<Vec<usize>> {
    (0..ts.n()).map(|x| ts.successors(x).to_vec()).collect()
}

/// Integer weights turned into a distribution; all-zero rows become a
/// self-loop.
pub fn dist_from_weights(owner: usize, w: &[u32]) -> Distribution {
    let total: u32 = w.iter().sum();
    if total == 0 {
        return Distribution::dirac(owner);
    }
    let entries = w.iter().enumerate().filter(|(_, &k)| k > 0).map(|(y, &k)| (y, ratio(k as i64, total as i64))).collect();
    Distribution::new(owner, w.len(), entries).unwrap()
}

pub fn lmc(max_n: usize) -> impl Strategy<Value = LabelledMarkovChain> {
    (2..=max_n).prop_flat_map(|n| {
        (proptest::collection::vec(0..2u8, n), proptest::collection::vec(0..=3u32, n * n)).prop_map(move |(ls, w)| {
            let labels = ls.iter().map(|l| if *l == 0 { "a".to_string() } else { "b".to_string() }).collect();
            let delta = (0..n).map(|x| dist_from_weights(x, &w[x * n..(x + 1) * n])).collect();
            LabelledMarkovChain::new(labels, delta).unwrap()
        })
    })
}

pub fn mc(max_n: usize) -> impl Strategy<Value = MarkovChain> {
    (2..=max_n).prop_flat_map(|n| {
        (proptest::collection::vec(proptest::bool::weighted(0.3), n), proptest::collection::vec(0..=3u32, n * n)).prop_map(
            move |(term, w)| {
                let delta = (0..n).map(|x| (!term[x]).then(|| dist_from_weights(x, &w[x * n..(x + 1) * n]))).collect();
                MarkovChain::new(term, delta).unwrap()
            },
        )
    })
}

pub fn oracle_delta(ds: impl Iterator<Item = Option<Distribution>>) -> Vec<Vec<(usize, Rational)>> {
    ds.map(|d| d.map(|d| d.entries().to_vec()).unwrap_or_default()).collect()
}

pub fn mc_oracle(mc: &MarkovChain) -> Vec<Rational> {
    let terminal: Vec<bool> = (0..mc.n()).map(|x| mc.is_terminal(x)).collect();
    let delta = oracle_delta((0..mc.n()).map(|x| mc.delta(x).cloned()));
    fixwit_oracles::termination::termination_probabilities(&terminal, &delta)
}

pub fn lmc_oracle_iterates(lmc: &LabelledMarkovChain, k: usize) -> Vec<Vec<Vec<Rational>>> {
    let labels: Vec<&str> = lmc.labels().iter().map(String::as_str).collect();
    let delta = oracle_delta((0..lmc.n()).map(|x| Some(lmc.delta(x).clone())));
    fixwit_oracles::metric::iterates(&labels, &delta, k)
}
