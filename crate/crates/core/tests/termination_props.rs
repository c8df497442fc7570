mod common;

use fixwit_core::distribution::Distribution;
use fixwit_core::fixpoint::MonotoneMap;
use fixwit_core::laws::{check_compatibility, check_galois_laws};
use fixwit_core::lattice::LatticeValue;
use fixwit_core::rational::{one_minus_pow2, ratio, zero};
use fixwit_core::termination::{pt, term_witness, MarkovChain, TermWitness, WitnessTree};
use fixwit_core::{BasisElement, Instance, KleeneChain, Payload};
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn random_tree(mc: &MarkovChain, x: usize, depth: usize, rng: &mut SmallRng) -> Option<WitnessTree> {
    if mc.is_terminal(x) {
        return Some(WitnessTree::Leaf(x));
    }
    if depth == 0 {
        return None;
    }
    let mut succ: Vec<usize> = mc.delta(x).unwrap().support().collect();
    succ.shuffle(rng);
    let mut children = Vec::new();
    for y in succ {
        if rng.gen_bool(0.7) {
            children.extend(random_tree(mc, y, depth - 1, rng));
        }
    }
    (!children.is_empty()).then_some(WitnessTree::Node(x, children))
}

fn trees(mc: &MarkovChain, seed: u64, count: usize) -> Vec<WitnessTree> {
    let mut rng = SmallRng::seed_from_u64(seed);
    (0..count * 4)
        .filter_map(|_| {
            let x = rng.gen_range(0..mc.n());
            let d = rng.gen_range(1..6);
            random_tree(mc, x, d, &mut rng)
        })
        .take(count)
        .collect()
}

/// t = 0 terminal, x = 1 with δ(x) = {t: 1/2, x: 1/2}.
fn g() -> MarkovChain {
    MarkovChain::new(vec![true, false], vec![None, Some(Distribution::new(1, 2, vec![(0, ratio(1, 2)), (1, ratio(1, 2))]).unwrap())]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn trees_under_approximate(mc in common::mc(6), seed in any::<u64>()) {
        let oracle = common::mc_oracle(&mc);
        for t in trees(&mc, seed, 8) {
            prop_assert!(pt(&mc, &t).unwrap() <= oracle[t.root()], "{}", t);
        }
    }

    #[test]
    fn galois_and_compatibility_laws(mc in common::mc(4), seed in any::<u64>()) {
        let ts = trees(&mc, seed, 9);
        let samples: Vec<Vec<Payload>> = ts.chunks(3).map(|c| c.iter().cloned().map(Payload::Tree).collect()).collect();
        let g = check_galois_laws(&mc, &samples, &[LatticeValue::Val(common::mc_oracle(&mc))]).unwrap();
        prop_assert!(g.passed(), "{:?}", g.violations);
        let c = check_compatibility(&mc, &samples).unwrap();
        prop_assert!(c.passed(), "{:?}", c.violations);
    }

    #[test]
    fn strategies_are_valid(mc in common::mc(5)) {
        let chain = KleeneChain::compute(&mc, 10).unwrap();
        let kind = mc.lattice();
        let last = chain.last().as_val().unwrap().to_vec();
        for (x, v) in last.iter().enumerate() {
            if *v == zero() || mc.is_terminal(x) {
                continue;
            }
            let b = BasisElement::val_join(x, v * ratio(4, 5)).unwrap();
            let f = mc.primal_strategy(&chain, &b).unwrap();
            let img = mc.apply(&kind.join_basis(&f).unwrap()).unwrap();
            prop_assert!(kind.way_below(&b.to_value(kind).unwrap(), &img).unwrap());
        }
    }

    #[test]
    fn witnesses_exist_below_one_on_g(num in 0i64..1000) {
        let c = ratio(num, 1000);
        let TermWitness::Found(w) = term_witness(&g(), 1, &c, 64).unwrap() else { panic!("no witness for {c}") };
        let Payload::Tree(t) = &w.payload else { unreachable!() };
        prop_assert!(pt(&g(), t).unwrap() > c);
    }
}

#[test]
fn canonical_witness_heights_on_g() {
    // leaves have height 1, so a height-k tree certifies 1 − 2^{−(k−1)}
    for k in 2..=8usize {
        let c = one_minus_pow2(k as u32 - 2);
        let TermWitness::Found(w) = term_witness(&g(), 1, &c, 64).unwrap() else { panic!() };
        let Payload::Tree(t) = &w.payload else { unreachable!() };
        assert_eq!(t.height(), k);
        assert_eq!(pt(&g(), t).unwrap(), one_minus_pow2(k as u32 - 1));
    }
}

#[test]
fn unreachable_states_are_refuted() {
    // 0 terminal, 1 ↺
    let mc = MarkovChain::new(vec![true, false], vec![None, Some(Distribution::dirac(1))]).unwrap();
    assert_eq!(term_witness(&mc, 1, &ratio(1, 2), 64).unwrap(), TermWitness::Refuted { fixpoint: zero() });
    assert_eq!(term_witness(&mc, 1, &zero(), 64).unwrap(), TermWitness::Refuted { fixpoint: zero() });
}
