//! Bisimilarity by naive partition refinement.

use std::collections::{BTreeMap, BTreeSet};

/// Block index of every state in the coarsest bisimulation.
pub fn bisim_blocks(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut block = vec![0usize; n];
    loop {
        let mut ids: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|x| {
                let sig = (block[x], succ[x].iter().map(|&y| block[y]).collect());
                let k = ids.len();
                *ids.entry(sig).or_insert(k)
            })
            .collect();
        let before = block.iter().collect::<BTreeSet<_>>().len();
        if ids.len() == before {
            return next;
        }
        block = next;
    }
}

pub fn bisimilar(succ: &[Vec<usize>], x: usize, y: usize) -> bool {
    let b = bisim_blocks(succ);
    b[x] == b[y]
}
