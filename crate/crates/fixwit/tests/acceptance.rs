//! Acceptance criteria. Each criterion prints one PASS/FAIL line. The test
//! fails unless exactly the criteria listed in `KNOWN_FAILURES` fail.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use fixwit::cert::{certify, Certified};
use fixwit::model::Model;
use fixwit::payload::parse_payload;
use fixwit::syntax::{parse_claim, Mode};
use fixwit_core::bisim::{bisimilarity, HmlFormula, TransitionSystem};
use fixwit_core::distribution::Distribution;
use fixwit_core::fixpoint::MonotoneMap;
use fixwit_core::game::{forall_candidates, play, validate_exists_move, validate_forall_move, EngineExists, EngineForall, Player, Variant};
use fixwit_core::lattice::{LatticeValue, Relation};
use fixwit_core::laws::{check_compatibility, check_galois_laws};
use fixwit_core::metric::transport::solve;
use fixwit_core::metric::{LabelledMarkovChain, MetricFormula};
use fixwit_core::rational::{one_minus_pow2, ratio, Rational};
use fixwit_core::termination::{pt, termination_oracle, MarkovChain, WitnessTree};
use fixwit_core::witness::{
    dual_witness, dual_witness_from_strategy, primal_witness, primal_witness_continue, primal_witness_from_strategy,
    primal_witness_move, synthesize_dual, synthesize_primal, verify_witness,
};
use fixwit_core::{BasisElement, Degree, Instance, KleeneChain, Payload, Witness, WitnessClaim};
use fixwit_oracles::games::BisimGames;
use rand::rngs::SmallRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// Criteria expected to fail, with the reason recorded alongside the code.
/// On G a height-(k+1) witness has pt = 1 − 2^{−k}; the criterion also asks
/// for pt = 1 − 2^{−(k+1)}, which no tree of that height attains.
const KNOWN_FAILURES: &[&str] = &["termination"];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let t = Instant::now();
    let r = f();
    let el = t.elapsed();
    let r = match (r, limit) {
        (Ok(_), Some(l)) if el > l => Err(format!("took {el:.2?}, limit {l:?}")),
        (r, _) => r,
    };
    match &r {
        Ok(detail) => println!("PASS {name} ({el:.2?}): {detail}"),
        Err(detail) => println!("FAIL {name} ({el:.2?}): {detail}"),
    }
    r.is_ok()
}

// ---------- generators ----------

fn random_ts(rng: &mut SmallRng, max_n: usize) -> Vec<Vec<usize>> {
    let n = rng.gen_range(1..=max_n);
    (0..n)
        .map(|_| {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            let k = rng.gen_range(0..=3.min(n));
            let mut s = all[..k].to_vec();
            s.sort();
            s
        })
        .collect()
}

fn ts_model(succ: &[Vec<usize>]) -> Model {
    let edges: Vec<[String; 2]> =
        succ.iter().enumerate().flat_map(|(x, ys)| ys.iter().map(move |y| [x.to_string(), y.to_string()])).collect();
    Model::from_value(serde_json::json!({"type": "ts", "states": succ.len(), "edges": edges})).unwrap()
}

fn ts_of(model: &Model) -> &TransitionSystem {
    match &model.instance {
        fixwit::model::ModelInstance::Ts(t) => t,
        _ => unreachable!(),
    }
}

fn weights_dist(owner: usize, w: &[u32]) -> Distribution {
    let total: u32 = w.iter().sum();
    if total == 0 {
        return Distribution::dirac(owner);
    }
    let e = w.iter().enumerate().filter(|(_, k)| **k > 0).map(|(y, k)| (y, ratio(*k as i64, total as i64))).collect();
    Distribution::new(owner, w.len(), e).unwrap()
}

fn random_lmc(rng: &mut SmallRng, max_n: usize) -> LabelledMarkovChain {
    let n = rng.gen_range(2..=max_n);
    let labels = (0..n).map(|_| if rng.gen_bool(0.5) { "a" } else { "b" }.to_string()).collect();
    let delta = (0..n).map(|x| weights_dist(x, &(0..n).map(|_| rng.gen_range(0..=3)).collect::<Vec<_>>())).collect();
    LabelledMarkovChain::new(labels, delta).unwrap()
}

fn random_mc(rng: &mut SmallRng, max_n: usize) -> MarkovChain {
    let n = rng.gen_range(2..=max_n);
    let term: Vec<bool> = (0..n).map(|i| i == 0 || rng.gen_bool(0.2)).collect();
    let delta = (0..n)
        .map(|x| (!term[x]).then(|| weights_dist(x, &(0..n).map(|_| rng.gen_range(0..=3)).collect::<Vec<_>>())))
        .collect();
    MarkovChain::new(term, delta).unwrap()
}

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

fn random_hml(rng: &mut SmallRng, depth: usize) -> HmlFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return HmlFormula::True;
    }
    match rng.gen_range(0..3) {
        0 => HmlFormula::diamond(random_hml(rng, depth - 1)),
        1 => HmlFormula::Not(Box::new(random_hml(rng, depth - 1))),
        _ => HmlFormula::And((0..rng.gen_range(1..3)).map(|_| random_hml(rng, depth - 1)).collect()),
    }
}

fn random_metric(rng: &mut SmallRng, depth: usize) -> MetricFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return MetricFormula::label(if rng.gen_bool(0.5) { "a" } else { "b" });
    }
    match rng.gen_range(0..4) {
        0 => MetricFormula::next(random_metric(rng, depth - 1)),
        1 => MetricFormula::one_minus(random_metric(rng, depth - 1)),
        2 => {
            let d = rng.gen_range(1..=6);
            MetricFormula::sub(random_metric(rng, depth - 1), ratio(rng.gen_range(0..=d), d))
        }
        _ => MetricFormula::max(random_metric(rng, depth - 1), random_metric(rng, depth - 1)),
    }
}

/// `len ≤ 5` positive masses with common denominator `≤ 6`.
fn masses(rng: &mut SmallRng) -> Vec<Rational> {
    let d = rng.gen_range(1..=6i64);
    let len = rng.gen_range(1..=d.min(5)) as usize;
    let mut units = vec![1i64; len];
    for _ in 0..(d as usize - len) {
        units[rng.gen_range(0..len)] += 1;
    }
    units.into_iter().map(|k| ratio(k, d)).collect()
}

fn q6(rng: &mut SmallRng) -> Rational {
    let d = rng.gen_range(1..=6);
    ratio(rng.gen_range(0..=d), d)
}

// ---------- exhaustive ∀ against a witness-driven ∃ ----------

/// ∃ plays from `w` at `at`; every maximal ∀-reply is explored. Returns the
/// number of rounds ∃ needs in the worst case, or an error if some branch
/// escapes.
fn witness_beats_every_forall<I: Instance>(inst: &I, chain: &KleeneChain, at: &BasisElement, w: &Witness, budget: usize) -> Result<usize, String> {
    if budget == 0 {
        return Err(format!("round budget exhausted at {at}"));
    }
    let (value, subs) = primal_witness_move(inst, w).map_err(|e| e.to_string())?;
    let v = validate_exists_move(inst, Variant::Primal, at, &value).map_err(|e| e.to_string())?;
    if !v.accepted {
        return Err(format!("witness move rejected at {at}: {}", v.reason));
    }
    let mut worst = 1;
    for r in forall_candidates(inst.lattice(), chain, Variant::Primal, &value).map_err(|e| e.to_string())? {
        let ok = validate_forall_move(inst, Variant::Primal, &value, &r).map_err(|e| e.to_string())?;
        if !ok.accepted {
            continue;
        }
        let next = primal_witness_continue(inst, &r, &subs).map_err(|e| e.to_string())?;
        worst = worst.max(1 + witness_beats_every_forall(inst, chain, &r, &next, budget - 1)?);
    }
    Ok(worst)
}

#[derive(Default)]
struct RoundTrips {
    primal: usize,
    dual: usize,
}

fn round_trip<I: Instance>(inst: &I, chain: &KleeneChain, b: &BasisElement, tally: &mut RoundTrips) -> Result<(), String> {
    if b.is_join() {
        let Degree::Finite(k) = chain.degree(b).unwrap() else { return Ok(()) };
        let w = primal_witness(inst, chain, b).map_err(|e| format!("{b}: {e}"))?;
        ensure(verify_witness(inst, &WitnessClaim::Primal(b.clone()), &w).accepted, || format!("{b}: primal witness rejected"))?;
        let rounds = witness_beats_every_forall(inst, chain, b, &w, w.claimed_degree)?;
        ensure(rounds <= w.claimed_degree, || format!("{b}: {rounds} rounds > {}", w.claimed_degree))?;
        let s = synthesize_primal(inst, chain, b).map_err(|e| format!("{b}: {e}"))?;
        let w2 = primal_witness_from_strategy(inst, b, &s).map_err(|e| format!("{b}: {e}"))?;
        ensure(verify_witness(inst, &WitnessClaim::Primal(b.clone()), &w2).accepted, || format!("{b}: wit(b) rejected"))?;
        ensure(w2.payload.degree() <= k, || format!("{b}: deg(wit(b)) {} > deg(b) {k}", w2.payload.degree()))?;
        tally.primal += 1;
    } else {
        let Degree::Finite(k) = chain.codegree(b).unwrap() else { return Ok(()) };
        let s = synthesize_dual(inst, chain, b).map_err(|e| format!("{b}: {e}"))?;
        let w = dual_witness_from_strategy(inst, b, &s).map_err(|e| format!("{b}: {e}"))?;
        ensure(verify_witness(inst, &WitnessClaim::Dual(b.clone()), &w).accepted, || format!("{b}: wit(ḃ) rejected"))?;
        ensure(w.payload.degree() <= k, || format!("{b}: deg(wit(ḃ)) {} > codeg(ḃ) {k}", w.payload.degree()))?;
        let w1 = dual_witness(inst, chain, b).map_err(|e| format!("{b}: {e}"))?;
        let mut e = EngineExists { inst, chain, variant: Variant::Dual };
        let mut f = fixwit_core::game::dual_strategy_from_witness(inst, w1.clone());
        let o = play(inst, Variant::Dual, b, &mut e, &mut f, w1.claimed_degree + 1).map_err(|e| e.to_string())?;
        ensure(o.winner == Player::Forall && o.rounds <= w1.claimed_degree, || format!("{b}: dual witness lost: {:?}", o.end))?;
        tally.dual += 1;
    }
    Ok(())
}

// ---------- criteria ----------

fn small_instances() -> Vec<Vec<Vec<usize>>> {
    let mut rng = SmallRng::seed_from_u64(0xb15);
    (0..200).map(|_| random_ts(&mut rng, 8)).collect()
}

fn bisim_criterion(instances: &[Vec<Vec<usize>>]) -> Check {
    let (mut pairs, mut witnesses, mut searched) = (0, 0, 0);
    for succ in instances {
        let model = ts_model(succ);
        let ts = ts_of(&model);
        let n = succ.len();
        let engine = bisimilarity(ts);
        let blocks = fixwit_oracles::partition::bisim_blocks(succ);
        let chain = KleeneChain::compute(ts, ts.default_max_iter()).unwrap();
        for x in 0..n {
            for y in 0..n {
                pairs += 1;
                let bis = blocks[x] == blocks[y];
                ensure(engine.contains(x, y) == bis, || format!("{succ:?}: engine and partition refinement differ on ({x},{y})"))?;
                if bis {
                    if n <= 4 {
                        searched += 1;
                        ensure(!fixwit_oracles::hml::distinguishable(succ, x, y, 4), || format!("{succ:?}: ({x},{y}) distinguished"))?;
                    }
                    continue;
                }
                for mode in [Mode::Primal, Mode::Dual] {
                    let claim = parse_claim(&model, &format!("{x} !~ {y}"), mode).unwrap();
                    let b = claim.basis.clone().unwrap();
                    let Certified::Found(cert) = certify(&model, &claim, ts.default_max_iter()).unwrap() else {
                        return Err(format!("{succ:?}: no {} witness for {x} !~ {y}", mode.name()));
                    };
                    let w = Witness { payload: parse_payload(&model, &cert.witness.payload).unwrap(), claimed_degree: cert.witness.claimed_degree };
                    let (wc, deg) = match mode {
                        Mode::Primal => (WitnessClaim::Primal(b.clone()), chain.degree(&b).unwrap()),
                        Mode::Dual => (WitnessClaim::Dual(b.clone()), chain.codegree(&b).unwrap()),
                    };
                    let v = verify_witness(ts, &wc, &w);
                    ensure(v.accepted, || format!("{succ:?}: {} rejected: {}", cert.witness.display, v.reason))?;
                    let Payload::Hml(f) = &w.payload else { unreachable!() };
                    ensure(deg.finite().is_some_and(|k| f.modal_depth() <= k), || format!("{succ:?}: depth {} vs {deg}", f.modal_depth()))?;
                    witnesses += 1;
                }
            }
        }
    }
    Ok(format!("{} systems, {pairs} pairs, {witnesses} witnesses verified, {searched} bisimilar pairs searched to depth 4", instances.len()))
}

fn determinacy_criterion(instances: &[Vec<Vec<usize>>]) -> Check {
    let (mut systems, mut elements) = (0, 0);
    for succ in instances.iter().filter(|s| s.len() <= 4) {
        systems += 1;
        let ts = TransitionSystem::from_successors(succ.clone()).unwrap();
        let kind = ts.lattice();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        let mu = chain.fixpoint().unwrap().clone();
        let games = BisimGames::new(succ);
        let (pw, dw) = (games.primal_exists_wins(), games.dual_forall_wins());
        let n = succ.len();
        for x in 0..n {
            for y in 0..n {
                elements += 2;
                let i = games.index(x, y);
                let bj = BasisElement::RelJoin { x1: x, x2: y };
                let below = kind.way_below(&bj.to_value(kind).unwrap(), &mu).unwrap();
                ensure(pw[i].is_some() == below, || format!("{succ:?}: ∃ wins primal at {bj} is {}, b ≪ μ is {below}", pw[i].is_some()))?;
                ensure(pw[i] == chain.degree(&bj).unwrap().finite(), || format!("{succ:?}: attractor layer ≠ degree at {bj}"))?;
                let bm = BasisElement::RelMeet { x1: x, x2: y };
                let escapes = !kind.leq(&mu, &bm.to_value(kind).unwrap()).unwrap();
                ensure(dw[i].is_some() == escapes, || format!("{succ:?}: ∀ wins dual at {bm} is {}, μ ⋢ ḃ is {escapes}", dw[i].is_some()))?;
                ensure(dw[i] == chain.codegree(&bm).unwrap().finite(), || format!("{succ:?}: attractor layer ≠ codegree at {bm}"))?;
                for (b, variant, expect) in [(&bj, Variant::Primal, below), (&bm, Variant::Dual, escapes)] {
                    let mut e = EngineExists { inst: &ts, chain: &chain, variant };
                    let mut f = EngineForall { inst: &ts, chain: &chain, variant };
                    let o = play(&ts, variant, b, &mut e, &mut f, n * n + 2).unwrap();
                    let prover = if variant == Variant::Primal { Player::Exists } else { Player::Forall };
                    ensure((o.winner == prover) == expect, || format!("{succ:?}: engine game at {b} won by {}", o.winner))?;
                }
            }
        }
    }
    Ok(format!("{systems} systems with n ≤ 4, {elements} basis elements"))
}

fn round_trip_criterion(instances: &[Vec<Vec<usize>>]) -> Check {
    let mut tally = RoundTrips::default();
    for succ in instances.iter().filter(|s| s.len() <= 4) {
        let ts = TransitionSystem::from_successors(succ.clone()).unwrap();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        for x in 0..succ.len() {
            for y in 0..succ.len() {
                round_trip(&ts, &chain, &BasisElement::RelJoin { x1: x, x2: y }, &mut tally)?;
                round_trip(&ts, &chain, &BasisElement::RelMeet { x1: x, x2: y }, &mut tally)?;
            }
        }
    }
    let mut rng = SmallRng::seed_from_u64(0x3e7);
    for _ in 0..30 {
        let lmc = random_lmc(&mut rng, 3);
        let chain = KleeneChain::compute(&lmc, 5).unwrap();
        let n = lmc.n();
        for a in 0..n {
            for b in a + 1..n {
                let vals: BTreeSet<Rational> = chain.iterates().iter().map(|v| v.as_dist().unwrap().get(a, b).clone()).collect();
                for c in vals.iter().chain([ratio(1, 4), ratio(1, 2)].iter()) {
                    let lo = if c > &ratio(0, 1) { c * ratio(9, 10) } else { ratio(1, 100) };
                    round_trip(&lmc, &chain, &BasisElement::dist_join(a, b, lo).unwrap(), &mut tally)?;
                    if c < &ratio(1, 1) {
                        round_trip(&lmc, &chain, &BasisElement::dist_meet(a, b, c.clone()).unwrap(), &mut tally)?;
                    }
                }
            }
        }
    }
    for _ in 0..30 {
        let mc = random_mc(&mut rng, 4);
        let chain = KleeneChain::compute(&mc, 6).unwrap();
        for x in 0..mc.n() {
            let vals: BTreeSet<Rational> = chain.iterates().iter().map(|v| v.as_val().unwrap()[x].clone()).collect();
            for c in vals.iter().chain([ratio(1, 3)].iter()) {
                let lo = if c > &ratio(0, 1) { c * ratio(9, 10) } else { ratio(1, 100) };
                round_trip(&mc, &chain, &BasisElement::val_join(x, lo).unwrap(), &mut tally)?;
                if c < &ratio(1, 1) {
                    round_trip(&mc, &chain, &BasisElement::val_meet(x, c.clone()).unwrap(), &mut tally)?;
                }
            }
        }
    }
    Ok(format!("{} primal witnesses beat exhaustive ∀; {} dual strategies reconstructed", tally.primal, tally.dual))
}

fn m0() -> LabelledMarkovChain {
    let labels = ["a", "b", "c", "c"].map(String::from).to_vec();
    let delta = vec![
        Distribution::dirac(0),
        Distribution::dirac(1),
        Distribution::new(2, 4, vec![(0, ratio(1, 2)), (1, ratio(1, 2))]).unwrap(),
        Distribution::new(3, 4, vec![(0, ratio(1, 3)), (1, ratio(2, 3))]).unwrap(),
    ];
    LabelledMarkovChain::new(labels, delta).unwrap()
}

fn metric_criterion() -> Check {
    let m = m0();
    let chain = KleeneChain::compute(&m, 4).unwrap();
    let d2 = chain.iterate(2).unwrap().as_dist().unwrap().get(2, 3).clone();
    ensure(d2 == ratio(1, 6), || format!("b²(⊥)(x1,x2) = {d2}"))?;
    let w = Witness::new(Payload::Metric(MetricFormula::next(MetricFormula::label("a"))));
    let mut below = vec![ratio(0, 1)];
    for q in 1..=60i64 {
        below.extend((0..q).map(|p| ratio(p, q)).filter(|c| c < &ratio(1, 6)));
    }
    for k in 1..=40u32 {
        below.push(ratio(1, 6) - ratio(1, 10).pow(k as i32));
    }
    let mut accepted = 0;
    for c in below.iter().filter(|c| **c > ratio(0, 1)) {
        let b = BasisElement::dist_join(2, 3, c.clone()).unwrap();
        let v = verify_witness(&m, &WitnessClaim::Primal(b), &w);
        ensure(v.accepted, || format!("rejected for c = {c}: {}", v.reason))?;
        accepted += 1;
    }
    // c = 0 is the claim d > 0, checked directly
    let model = Model::from_json(
        r#"{"type":"lmc","states":["s","t","x1","x2"],"labels":{"s":"a","t":"b","x1":"c","x2":"c"},
            "delta":{"s":{"s":"1"},"t":{"t":"1"},"x1":{"s":"1/2","t":"1/2"},"x2":{"s":"1/3","t":"2/3"}}}"#,
    )
    .unwrap();
    let zero = parse_claim(&model, "d(x1,x2) > 0", Mode::Primal).unwrap();
    ensure(fixwit::cert::check_claim(&model, &zero, &w).accepted, || String::from("rejected for c = 0"))?;
    let b = BasisElement::dist_join(2, 3, ratio(1, 6)).unwrap();
    ensure(!verify_witness(&m, &WitnessClaim::Primal(b), &w).accepted, || String::from("accepted for c = 1/6"))?;

    let mut rng = SmallRng::seed_from_u64(0x51);
    for i in 0..100 {
        let (s, t) = (masses(&mut rng), masses(&mut rng));
        let cost: Vec<Vec<Rational>> = (0..s.len()).map(|_| (0..t.len()).map(|_| q6(&mut rng)).collect()).collect();
        let sol = solve(&s, &t, &cost).map_err(|e| format!("instance {i}: {e}"))?;
        let oracle = fixwit_oracles::transport::transport_value(&s, &t, &cost);
        ensure(sol.cost == oracle, || format!("instance {i}: simplex {} vs vertex enumeration {oracle}", sol.cost))?;
    }
    Ok(format!("b²(⊥)(x1,x2) = 1/6; ○[a] accepted for {} constants c < 1/6 and c = 0, rejected at 1/6; 100 transport instances exact", accepted))
}

fn g() -> MarkovChain {
    MarkovChain::new(vec![true, false], vec![None, Some(Distribution::new(1, 2, vec![(0, ratio(1, 2)), (1, ratio(1, 2))]).unwrap())]).unwrap()
}

fn termination_criterion() -> Check {
    let mc = g();
    let chain = KleeneChain::compute(&mc, 16).unwrap();
    let mut problems = Vec::new();
    for k in 1..=6u32 {
        let eps = ratio(1, 2).pow(k as i32 + 6);
        let c = one_minus_pow2(k) - eps;
        let b = BasisElement::val_join(1, c.clone()).unwrap();
        let w = primal_witness(&mc, &chain, &b).map_err(|e| format!("k = {k}: {e}"))?;
        ensure(verify_witness(&mc, &WitnessClaim::Primal(b), &w).accepted, || format!("k = {k}: witness rejected"))?;
        let Payload::Tree(t) = &w.payload else { unreachable!() };
        let p = pt(&mc, t).unwrap();
        ensure(p > c, || format!("k = {k}: pt {p} ≤ c"))?;
        if t.height() != k as usize + 1 {
            problems.push(format!("k = {k}: height {} ≠ {}", t.height(), k + 1));
        }
        if p != one_minus_pow2(k + 1) {
            problems.push(format!("k = {k}: pt = {p}, expected {}", one_minus_pow2(k + 1)));
        }
    }
    let mut rng = SmallRng::seed_from_u64(0x7e);
    let mut trees = 0;
    while trees < 500 {
        let mc = random_mc(&mut rng, 6);
        let oracle = termination_oracle(&mc);
        let terminal: Vec<bool> = (0..mc.n()).map(|x| mc.is_terminal(x)).collect();
        let delta: Vec<Vec<(usize, Rational)>> = (0..mc.n()).map(|x| mc.delta(x).map(|d| d.entries().to_vec()).unwrap_or_default()).collect();
        let independent = fixwit_oracles::termination::termination_probabilities(&terminal, &delta);
        ensure(oracle == independent, || String::from("termination oracles disagree"))?;
        for _ in 0..10 {
            let x = rng.gen_range(0..mc.n());
            let depth = rng.gen_range(1..6);
            if let Some(t) = random_tree(&mc, x, depth, &mut rng) {
                let p = pt(&mc, &t).map_err(|e| e.to_string())?;
                ensure(p <= oracle[x], || format!("pt({t}) = {p} > {}", oracle[x]))?;
                trees += 1;
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("k = 1..6 heights and pt exact; {trees} random trees under the oracle"))
    } else {
        Err(format!("{}; heights are k+1 and pt > c for all k; {trees} random trees under the oracle", problems.join("; ")))
    }
}

fn laws_criterion() -> Check {
    let mut rng = SmallRng::seed_from_u64(0x1a3);
    let mut counts = [0usize; 3];
    let mut pairs = 0;
    let degree_checks = |inst: &dyn Instance, chain: &KleeneChain, rng: &mut SmallRng, pairs: &mut usize| -> Result<(), String> {
        let k = inst.lattice();
        let rank = |d: Degree| d.finite().unwrap_or(usize::MAX);
        for _ in 0..25 {
            let a = k.random_value(rng).unwrap();
            let b = k.random_value(rng).unwrap();
            let (da, db) = (rank(chain.degree_of(&a).unwrap()), rank(chain.degree_of(&b).unwrap()));
            let lo = k.meet(&[a.clone(), b.clone()]).unwrap();
            ensure(rank(chain.degree_of(&lo).unwrap()) <= da, || format!("degree not monotone: {lo} ⊑ {a}"))?;
            ensure(rank(chain.codegree_of(&lo).unwrap()) <= rank(chain.codegree_of(&a).unwrap()), || format!("codegree not monotone at {a}"))?;
            let hi = k.join(&[a.clone(), b.clone()]).unwrap();
            ensure(rank(chain.degree_of(&hi).unwrap()) == da.max(db), || format!("deg({a} ⊔ {b}) ≠ max"))?;
            let fa = inst.apply(&a).unwrap();
            if k.way_below(&lo, &fa).unwrap() {
                ensure(da == usize::MAX || rank(chain.degree_of(&lo).unwrap()) <= da + 1, || format!("successor bound fails at {a}"))?;
            }
            *pairs += 1;
        }
        Ok(())
    };
    for _ in 0..25 {
        let succ = random_ts(&mut rng, 5);
        let ts = TransitionSystem::from_successors(succ).unwrap();
        let samples: Vec<Vec<Payload>> =
            (0..4).map(|_| (0..rng.gen_range(0..4)).map(|_| Payload::Hml(random_hml(&mut rng, 3))).collect()).collect();
        let n = ts.n();
        let rels: Vec<LatticeValue> =
            (0..4).map(|_| LatticeValue::Rel(Relation::from_pairs(n, (0..n * n).filter(|_| rng.gen_bool(0.6)).map(|i| (i / n, i % n))))).collect();
        let g = check_galois_laws(&ts, &samples, &rels).map_err(|e| e.to_string())?;
        let c = check_compatibility(&ts, &samples).map_err(|e| e.to_string())?;
        ensure(g.passed() && c.passed(), || format!("bisim: {:?} {:?}", g.violations, c.violations))?;
        counts[0] += samples.len();
        let chain = KleeneChain::compute(&ts, ts.default_max_iter()).unwrap();
        degree_checks(&ts, &chain, &mut rng, &mut pairs)?;
    }
    for _ in 0..25 {
        let lmc = random_lmc(&mut rng, 3);
        let samples: Vec<Vec<Payload>> = (0..4)
            .map(|_| (0..rng.gen_range(1..3)).map(|_| Payload::Metric(MetricFormula::next(random_metric(&mut rng, 3)))).collect())
            .collect();
        let g = check_galois_laws(&lmc, &samples, &[]).map_err(|e| e.to_string())?;
        let c = check_compatibility(&lmc, &samples).map_err(|e| e.to_string())?;
        ensure(g.passed() && c.passed(), || format!("metric: {:?} {:?}", g.violations, c.violations))?;
        counts[1] += samples.len();
        let chain = KleeneChain::compute(&lmc, 5).unwrap();
        degree_checks(&lmc, &chain, &mut rng, &mut pairs)?;
    }
    for _ in 0..25 {
        let mc = random_mc(&mut rng, 4);
        let mut samples = Vec::new();
        while samples.len() < 4 {
            let set: Vec<Payload> = (0..3)
                .filter_map(|_| {
                    let x = rng.gen_range(0..mc.n());
                    random_tree(&mc, x, 4, &mut rng).map(Payload::Tree)
                })
                .collect();
            samples.push(set);
        }
        let g = check_galois_laws(&mc, &samples, &[LatticeValue::Val(termination_oracle(&mc))]).map_err(|e| e.to_string())?;
        let c = check_compatibility(&mc, &samples).map_err(|e| e.to_string())?;
        ensure(g.passed() && c.passed(), || format!("termination: {:?} {:?}", g.violations, c.violations))?;
        counts[2] += samples.len();
        let chain = KleeneChain::compute(&mc, 16).unwrap();
        degree_checks(&mc, &chain, &mut rng, &mut pairs)?;
    }
    ensure(counts.iter().all(|c| *c >= 100) && pairs >= 1000, || format!("too few samples: {counts:?}, {pairs} pairs"))?;
    Ok(format!("law samples bisim/metric/termination = {counts:?}; {pairs} degree-property pairs"))
}

#[test]
fn acceptance() {
    let instances = small_instances();
    let secs = Duration::from_secs;
    let results = [
        ("bisimilarity", run("bisimilarity", Some(secs(30)), || bisim_criterion(&instances))),
        ("determinacy", run("determinacy", Some(secs(60)), || determinacy_criterion(&instances))),
        ("round-trip", run("round-trip", None, || round_trip_criterion(&instances))),
        ("metric", run("metric", Some(secs(30)), metric_criterion)),
        ("termination", run("termination", Some(secs(15)), termination_criterion)),
        ("laws", run("laws", None, laws_criterion)),
    ];
    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    println!("acceptance: {} of {} criteria pass; known failures: {KNOWN_FAILURES:?}", results.len() - failed.len(), results.len());
    assert_eq!(failed, KNOWN_FAILURES, "unexpected acceptance outcome");
}
