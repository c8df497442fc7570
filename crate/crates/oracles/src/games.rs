//! Exhaustive solution of the primal and dual fixpoint games for the
//! bisimulation functional on relations over at most four states.
//!
//! Relations are `u16` masks with bit `x·n + y` for the pair `(x, y)`.
//! Primal game at a co-singleton `p`: ∃ names any relation `d` with
//! `p ∉ 𝕓(d)`, ∀ answers with a pair outside `d`. Dual game at a singleton
//! `p`: ∃ names any `d` with `p ∈ 𝕓(d)`, ∀ answers with a pair inside `d`.
//! A stuck player loses; infinite plays go to ∀ (primal) resp. ∃ (dual).

pub struct BisimGames {
    n: usize,
    table: Vec<u16>,
}

impl BisimGames {
    pub fn new(succ: &[Vec<usize>]) -> Self {
        let n = succ.len();
        assert!(n <= 4, "exhaustive games support at most four states");
        let bit = |x: usize, y: usize| 1u16 << (x * n + y);
        let table = (0..1u32 << (n * n))
            .map(|r| {
                let r = r as u16;
                let mut out = 0u16;
                for x in 0..n {
                    for y in 0..n {
                        let fwd = succ[x].iter().all(|&a| succ[y].iter().any(|&b| r & bit(a, b) != 0));
                        let bwd = succ[y].iter().all(|&b| succ[x].iter().any(|&a| r & bit(a, b) != 0));
                        if fwd && bwd {
                            out |= bit(x, y);
                        }
                    }
                }
                out
            })
            .collect();
        BisimGames { n, table }
    }

    fn pairs(&self) -> usize {
        self.n * self.n
    }

    fn all(&self) -> u16 {
        ((1u32 << self.pairs()) - 1) as u16
    }

    /// Pairs (as a mask) from which ∃ wins the primal game, with the round
    /// count of the attractor layer.
    pub fn primal_exists_wins(&self) -> Vec<Option<usize>> {
        let mut rank = vec![None; self.pairs()];
        let mut win = 0u16;
        for layer in 1.. {
            let mut next = win;
            for p in 0..self.pairs() {
                if win >> p & 1 == 1 {
                    continue;
                }
                // ∃ needs d with p ∉ 𝕓(d) and every pair outside d already winning
                let ok = (0..=self.all()).any(|d| self.table[d as usize] >> p & 1 == 0 && !d & self.all() & !win == 0);
                if ok {
                    next |= 1 << p;
                    rank[p] = Some(layer);
                }
            }
            if next == win {
                break;
            }
            win = next;
        }
        rank
    }

    /// Pairs from which ∀ wins the dual game, with the attractor layer.
    pub fn dual_forall_wins(&self) -> Vec<Option<usize>> {
        let mut rank = vec![None; self.pairs()];
        let mut win = 0u16;
        for layer in 1.. {
            let mut next = win;
            for p in 0..self.pairs() {
                if win >> p & 1 == 1 {
                    continue;
                }
                // every ∃-move d with p ∈ 𝕓(d) contains a pair already winning for ∀
                let ok = (0..=self.all()).all(|d| self.table[d as usize] >> p & 1 == 0 || d & win != 0);
                if ok {
                    next |= 1 << p;
                    rank[p] = Some(layer);
                }
            }
            if next == win {
                break;
            }
            win = next;
        }
        rank
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.n + y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadlock_pair() {
        // 0 → 1, 1 stuck: (0,1) is won by ∃ in one round, (0,0) never
        let g = BisimGames::new(&[vec![1], vec![]]);
        let p = g.primal_exists_wins();
        assert_eq!(p[g.index(0, 1)], Some(1));
        assert_eq!(p[g.index(0, 0)], None);
        let d = g.dual_forall_wins();
        assert_eq!(d[g.index(1, 0)], Some(1));
        assert_eq!(d[g.index(1, 1)], None);
    }
}
