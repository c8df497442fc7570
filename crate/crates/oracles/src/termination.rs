//! Termination probabilities by backward reachability and Gaussian
//! elimination over exact rationals.

use num_traits::{One, Zero};

use crate::Q;

/// `delta[x]` lists `(successor, probability)`; terminal states have no
/// transitions.
pub fn termination_probabilities(terminal: &[bool], delta: &[Vec<(usize, Q)>]) -> Vec<Q> {
    let n = terminal.len();
    let mut reach = terminal.to_vec();
    loop {
        let mut grew = false;
        for x in 0..n {
            if !reach[x] && delta[x].iter().any(|(y, p)| reach[*y] && !p.is_zero()) {
                reach[x] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&x| reach[x] && !terminal[x]).collect();
    let col = |x: usize| unknown.iter().position(|&u| u == x);
    let m = unknown.len();
    let mut a = vec![vec![Q::zero(); m + 1]; m];
    for (i, &x) in unknown.iter().enumerate() {
        a[i][i] = Q::one();
        for (y, p) in &delta[x] {
            if terminal[*y] {
                a[i][m] += p;
            } else if let Some(j) = col(*y) {
                a[i][j] -= p;
            }
        }
    }
    for c in 0..m {
        let piv = (c..m).find(|&r| !a[r][c].is_zero()).expect("reachable system is regular");
        a.swap(c, piv);
        let inv = Q::one() / &a[c][c];
        for k in c..=m {
            a[c][k] = &a[c][k] * &inv;
        }
        for r in 0..m {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in c..=m {
                    let v = &a[c][k] * &f;
                    a[r][k] -= v;
                }
            }
        }
    }
    (0..n)
        .map(|x| {
            if terminal[x] {
                Q::one()
            } else if let Some(i) = col(x) {
                a[i][m].clone()
            } else {
                Q::zero()
            }
        })
        .collect()
}
