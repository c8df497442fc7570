//! Exact transportation simplex: northwest-corner start, MODI potentials,
//! Bland's rule for entering and leaving cells.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("supply and demand must be non-empty and strictly positive")]
    EmptyOrNonPositive,
    #[error("total supply {supply} differs from total demand {demand}")]
    Unbalanced { supply: String, demand: String },
    #[error("cost matrix has the wrong shape")]
    Shape,
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
}

/// An optimal plan with a dual certificate: `u_i + v_j <= cost_ij` everywhere
/// and equality on every cell carrying flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportSolution {
    pub cost: Rational,
    pub flow: Vec<Vec<Rational>>,
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
    pub pivots: usize,
}

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
}

impl Basis {
    /// Solves `u_i + v_j = c_ij` over the spanning tree with `u_0 = 0`.
    fn potentials(&self, cost: &[Vec<Rational>]) -> (Vec<Rational>, Vec<Rational>) {
        let (m, n) = (self.m, self.n);
        let mut u: Vec<Option<Rational>> = vec![None; m];
        let mut v: Vec<Option<Rational>> = vec![None; n];
        u[0] = Some(Rational::zero());
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(i, j) in &self.cells {
                if node < m && i == node && v[j].is_none() {
                    v[j] = Some(&cost[i][j] - u[i].as_ref().unwrap());
                    queue.push_back(m + j);
                } else if node >= m && j == node - m && u[i].is_none() {
                    u[i] = Some(&cost[i][j] - v[j].as_ref().unwrap());
                    queue.push_back(i);
                }
            }
        }
        (
            u.into_iter().map(|x| x.expect("basis spans all rows")).collect(),
            v.into_iter().map(|x| x.expect("basis spans all columns")).collect(),
        )
    }

    /// Basis cells on the tree path from row `i` to column `j`.
    fn path(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let m = self.m;
        let total = m + self.n;
        let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == m + j {
                break;
            }
            for &(r, c) in &self.cells {
                let other = if node < m && r == node {
                    m + c
                } else if node >= m && c == node - m {
                    r
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some((node, (r, c)));
                    queue.push_back(other);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = m + j;
        while node != i {
            let (prev, cell) = parent[node].expect("basis is a spanning tree");
            out.push(cell);
            node = prev;
        }
        out.reverse();
        out
    }
}

/// Minimises `Σ cost_ij·flow_ij` subject to row sums `supply` and column
/// sums `demand`.
pub fn solve(supply: &[Rational], demand: &[Rational], cost: &[Vec<Rational>]) -> Result<TransportSolution, TransportError> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || supply.iter().chain(demand).any(|x| !x.is_positive()) {
        return Err(TransportError::EmptyOrNonPositive);
    }
    let (ts, td): (Rational, Rational) = (supply.iter().sum(), demand.iter().sum());
    if ts != td {
        return Err(TransportError::Unbalanced { supply: format!("{ts}"), demand: format!("{td}") });
    }
    if cost.len() != m || cost.iter().any(|row| row.len() != n) {
        return Err(TransportError::Shape);
    }

    // northwest corner; one index advances per step, so m+n-1 cells
    let mut flow = vec![vec![Rational::zero(); n]; m];
    let mut basic = vec![vec![false; n]; m];
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = if a[i] < b[j] { a[i].clone() } else { b[j].clone() };
        a[i] -= &x;
        b[j] -= &x;
        flow[i][j] = x;
        basic[i][j] = true;
        cells.push((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (a[i].is_zero() && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut basis = Basis { m, n, cells };

    let limit = 64 * (m * n + 1) * (m + n);
    let mut pivots = 0;
    loop {
        let (u, v) = basis.potentials(cost);
        let entering = (0..m * n)
            .map(|k| (k / n, k % n))
            .find(|&(r, c)| !basic[r][c] && (&cost[r][c] - &u[r] - &v[c]).is_negative());
        let Some((ei, ej)) = entering else {
            let total = (0..m).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| &cost[r][c] * &flow[r][c]).sum();
            return Ok(TransportSolution { cost: total, flow, u, v, pivots });
        };
        if pivots == limit {
            return Err(TransportError::PivotLimit(limit));
        }
        pivots += 1;
        let path = basis.path(ei, ej);
        // path cells alternate −,+,−,...; the last one is in column ej
        let minus: Vec<(usize, usize)> = path.iter().step_by(2).copied().collect();
        let plus: Vec<(usize, usize)> = path.iter().skip(1).step_by(2).copied().collect();
        let theta = minus.iter().map(|&(r, c)| flow[r][c].clone()).min().expect("cycle has a − cell");
        let leaving = *minus.iter().filter(|&&(r, c)| flow[r][c] == theta).min().expect("minimum exists");
        for &(r, c) in &minus {
            flow[r][c] -= &theta;
        }
        for &(r, c) in &plus {
            flow[r][c] += &theta;
        }
        flow[ei][ej] = theta;
        basic[leaving.0][leaving.1] = false;
        basic[ei][ej] = true;
        basis.cells.retain(|&cell| cell != leaving);
        basis.cells.push((ei, ej));
    }
}
