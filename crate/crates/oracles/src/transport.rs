//! Optimal transport by enumerating the vertices of the transportation
//! polytope. Vertices are the basic feasible solutions, one per spanning
//! tree of the complete bipartite graph rows × columns whose tree solution
//! is nonnegative.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::Q;

fn lcm_all<'a>(xs: impl Iterator<Item = &'a BigInt>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x))
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
}

fn to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("oracle instance too large for i128 scaling")
}

/// Tree solution for the chosen cells, or `None` if some flow is negative.
fn tree_flow(m: usize, k: usize, cells: &[usize], supply: &[i128], demand: &[i128]) -> Option<Vec<i128>> {
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();
    let mut flow = vec![0i128; cells.len()];
    let mut done = vec![false; cells.len()];
    let mut deg = vec![0usize; m + k];
    for &c in cells {
        deg[c / k] += 1;
        deg[m + c % k] += 1;
    }
    for _ in 0..cells.len() {
        // peel a leaf: a row or column with exactly one open cell
        let (i, node) = cells
            .iter()
            .enumerate()
            .filter(|(i, _)| !done[*i])
            .find_map(|(i, &c)| {
                if deg[c / k] == 1 {
                    Some((i, c / k))
                } else if deg[m + c % k] == 1 {
                    Some((i, m + c % k))
                } else {
                    None
                }
            })?;
        let c = cells[i];
        let (r, col) = (c / k, c % k);
        let f = if node < m { rem_s[r] } else { rem_d[col] };
        if f < 0 {
            return None;
        }
        flow[i] = f;
        rem_s[r] -= f;
        rem_d[col] -= f;
        deg[r] -= 1;
        deg[m + col] -= 1;
        done[i] = true;
    }
    if rem_s.iter().chain(&rem_d).any(|v| *v != 0) || flow.iter().any(|f| *f < 0) {
        return None;
    }
    Some(flow)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    m: usize,
    k: usize,
    next: usize,
    chosen: &mut Vec<usize>,
    dsu: &Dsu,
    supply: &[i128],
    demand: &[i128],
    cost: &[i128],
    best: &mut Option<i128>,
) {
    let need = m + k - 1;
    if chosen.len() == need {
        if let Some(flow) = tree_flow(m, k, chosen, supply, demand) {
            let c: i128 = chosen.iter().zip(&flow).map(|(&cell, f)| cost[cell] * f).sum();
            if best.is_none_or(|b| c < b) {
                *best = Some(c);
            }
        }
        return;
    }
    if m * k - next < need - chosen.len() {
        return;
    }
    let (a, b) = (next / k, m + next % k);
    let mut d = Dsu(dsu.0.clone());
    let (ra, rb) = (d.find(a), d.find(b));
    if ra != rb {
        d.0[ra] = rb;
        chosen.push(next);
        enumerate(m, k, next + 1, chosen, &d, supply, demand, cost, best);
        chosen.pop();
    }
    enumerate(m, k, next + 1, chosen, dsu, supply, demand, cost, best);
}

/// Minimal `Σ C(i,j)·cost[i][j]` over couplings of `supply` and `demand`.
pub fn transport_value(supply: &[Q], demand: &[Q], cost: &[Vec<Q>]) -> Q {
    let (m, k) = (supply.len(), demand.len());
    let mass_scale = lcm_all(supply.iter().chain(demand).map(|x| x.denom()));
    let cost_scale = lcm_all(cost.iter().flatten().map(|x| x.denom()));
    let scale = |x: &Q, s: &BigInt| to_i128(&(x * Q::from(s.clone())).to_integer());
    let s: Vec<i128> = supply.iter().map(|x| scale(x, &mass_scale)).collect();
    let d: Vec<i128> = demand.iter().map(|x| scale(x, &mass_scale)).collect();
    let c: Vec<i128> = cost.iter().flatten().map(|x| scale(x, &cost_scale)).collect();
    let mut best = None;
    enumerate(m, k, 0, &mut Vec::new(), &Dsu((0..m + k).collect()), &s, &d, &c, &mut best);
    let best = best.expect("balanced problems have a vertex");
    Q::new(BigInt::from(best), mass_scale * cost_scale)
}
