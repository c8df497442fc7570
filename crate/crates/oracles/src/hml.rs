//! Semantics of bounded-depth modal formulas as state masks.
//!
//! Every formula of modal depth at most `d` denotes one of the masks in
//! `definable(succ, d)`: depth-0 formulas are boolean combinations of
//! `true`, and depth `d+1` formulas are boolean combinations of `◇φ` for
//! `φ` of depth `d` (plus the depth-`d` masks themselves).

use std::collections::BTreeSet;

fn diamond(succ: &[Vec<usize>], m: u32) -> u32 {
    (0..succ.len()).filter(|&x| succ[x].iter().any(|&y| m >> y & 1 == 1)).fold(0, |acc, x| acc | 1 << x)
}

fn boolean_closure(n: usize, gens: &BTreeSet<u32>) -> BTreeSet<u32> {
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut out: BTreeSet<u32> = gens.clone();
    out.insert(full);
    loop {
        let cur: Vec<u32> = out.iter().copied().collect();
        let mut grew = false;
        for &a in &cur {
            grew |= out.insert(!a & full);
            for &b in &cur {
                grew |= out.insert(a & b);
            }
        }
        if !grew {
            return out;
        }
    }
}

/// All masks denoted by formulas of modal depth `≤ depth`.
pub fn definable(succ: &[Vec<usize>], depth: usize) -> BTreeSet<u32> {
    let n = succ.len();
    assert!(n <= 16, "mask oracle supports at most 16 states");
    let mut level = boolean_closure(n, &BTreeSet::new());
    for _ in 0..depth {
        let mut gens = level.clone();
        gens.extend(level.iter().map(|&m| diamond(succ, m)));
        level = boolean_closure(n, &gens);
    }
    level
}

/// Whether some formula of depth `≤ depth` holds at exactly one of `x, y`.
pub fn distinguishable(succ: &[Vec<usize>], x: usize, y: usize, depth: usize) -> bool {
    definable(succ, depth).iter().any(|m| (m >> x & 1) != (m >> y & 1))
}
