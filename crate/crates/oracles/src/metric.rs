//! Iterates of the Kantorovich lifting, with every transport problem solved
//! by vertex enumeration.

use num_traits::{One, Zero};

use crate::transport::transport_value;
use crate::Q;

/// `d_0 = 0`, `d_{i+1}(x,y) = 1` on different labels, else the optimal
/// transport of `delta[x]` to `delta[y]` under cost `d_i`.
pub fn iterates(labels: &[&str], delta: &[Vec<(usize, Q)>], k: usize) -> Vec<Vec<Vec<Q>>> {
    let n = labels.len();
    let mut out = vec![vec![vec![Q::zero(); n]; n]];
    for _ in 0..k {
        let d = out.last().unwrap();
        let next = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        if labels[x] != labels[y] {
                            return Q::one();
                        }
                        let s: Vec<Q> = delta[x].iter().map(|(_, p)| p.clone()).collect();
                        let t: Vec<Q> = delta[y].iter().map(|(_, p)| p.clone()).collect();
                        let c: Vec<Vec<Q>> =
                            delta[x].iter().map(|(a, _)| delta[y].iter().map(|(b, _)| d[*a][*b].clone()).collect()).collect();
                        transport_value(&s, &t, &c)
                    })
                    .collect()
            })
            .collect();
        out.push(next);
    }
    out
}
