//! Exact pairing solvers for distances between simultaneously diagonalized
//! representations.
//!
//! When both representations are direct sums of characters (abelian case),
//! the conjugation problem reduces to pairing up diagonal entries:
//!
//! * operator metric: the objective separates per pair, so the optimum is a
//!   bottleneck assignment, solved exactly by bisecting over the finite set
//!   of pairwise costs with a bipartite matching test;
//! * arclength metric: each group element couples all pairs through
//!   `sqrt(sum of squared angle differences)`, so permutations are
//!   enumerated with branch-and-bound (the partial objective is monotone,
//!   which makes pruning sound). Enumeration is capped; larger instances
//!   fall back to the Riemannian optimizer.

/// Largest dimension enumerated exactly by the arclength assignment.
pub(crate) const ARCLENGTH_ENUM_CAP: usize = 10;

/// Try to extend a partial matching with an augmenting path (Kuhn).
fn try_augment(
    i: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
    match_right: &mut [Option<usize>],
    visited: &mut [bool],
    n: usize,
) -> bool {
    for j in 0..n {
        if allowed(i, j) && !visited[j] {
            visited[j] = true;
            if match_right[j].is_none()
                || try_augment(match_right[j].unwrap(), allowed, match_right, visited, n)
            {
                match_right[j] = Some(i);
                return true;
            }
        }
    }
    false
}

fn has_perfect_matching(n: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(i, allowed, &mut match_right, &mut visited, n) {
            return None;
        }
    }
    let mut perm = vec![0usize; n];
    for (j, m) in match_right.iter().enumerate() {
        perm[m.unwrap()] = j;
    }
    Some(perm)
}

/// Minimize `max_i cost[i][perm[i]]` over permutations. Exact: the optimum
/// is one of the finitely many cost entries, found by binary search with a
/// matching test. Returns `(value, perm)`.
pub(crate) fn min_bottleneck_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut values: Vec<f64> = cost.iter().flatten().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    let feasible = |t: f64| -> Option<Vec<usize>> {
        has_perfect_matching(n, &|i, j| cost[i][j] <= t)
    };
    let mut lo = 0usize;
    let mut hi = values.len() - 1;
    // The largest threshold always admits the identity-free full graph.
    debug_assert!(feasible(values[hi]).is_some());
    if let Some(perm) = feasible(values[lo]) {
        return (values[lo], perm);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let perm = feasible(values[hi]).expect("bisection invariant");
    (values[hi], perm)
}

/// Minimize `max_e sqrt(sum_i sq[i][perm[i]][e]) * inv_l[e]` over
/// permutations, by branch-and-bound enumeration. `sq[i][j][e]` is the
/// squared angle difference of pairing row `i` with column `j` at support
/// element `e`. Returns `None` when the dimension exceeds the enumeration
/// cap.
pub(crate) fn min_arclength_assignment(
    sq: &[Vec<Vec<f64>>],
    inv_l: &[f64],
) -> Option<(f64, Vec<usize>)> {
    let n = sq.len();
    if n > ARCLENGTH_ENUM_CAP {
        return None;
    }
    if n == 0 {
        return Some((0.0, Vec::new()));
    }
    let ne = inv_l.len();

    struct Dfs<'a> {
        sq: &'a [Vec<Vec<f64>>],
        inv_l: &'a [f64],
        n: usize,
        used: Vec<bool>,
        cur: Vec<usize>,
        acc: Vec<f64>,
        best: f64,
        best_perm: Vec<usize>,
    }
    impl Dfs<'_> {
        fn value(&self) -> f64 {
            self.acc
                .iter()
                .zip(self.inv_l)
                .map(|(s, w)| s.sqrt() * w)
                .fold(0.0, f64::max)
        }
        fn run(&mut self, i: usize) {
            // The accumulated objective only grows, so prune on it.
            if self.value() >= self.best {
                return;
            }
            if i == self.n {
                let v = self.value();
                if v < self.best {
                    self.best = v;
                    self.best_perm = self.cur.clone();
                }
                return;
            }
            for j in 0..self.n {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.cur.push(j);
                for (e, s) in self.sq[i][j].iter().enumerate() {
                    self.acc[e] += s;
                }
                self.run(i + 1);
                for (e, s) in self.sq[i][j].iter().enumerate() {
                    self.acc[e] -= s;
                }
                self.cur.pop();
                self.used[j] = false;
            }
        }
    }

    let mut dfs = Dfs {
        sq,
        inv_l,
        n,
        used: vec![false; n],
        cur: Vec::with_capacity(n),
        acc: vec![0.0; ne],
        best: f64::INFINITY,
        best_perm: Vec::new(),
    };
    dfs.run(0);
    Some((dfs.best, dfs.best_perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&x| if x >= pos { x + 1 } else { x }).collect();
                q.push(pos);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn bottleneck_matches_brute_force() {
        let mut rng = crate::linalg::rng_for(21, 0);
        for n in [2usize, 3, 4, 5] {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
                    .collect();
                let (got, perm) = min_bottleneck_assignment(&cost);
                // Verify the returned permutation achieves the value.
                let achieved = (0..n).map(|i| cost[i][perm[i]]).fold(0.0, f64::max);
                assert!((achieved - got).abs() < 1e-12);
                // Brute force.
                let best = all_perms(n)
                    .into_iter()
                    .map(|p| (0..n).map(|i| cost[i][p[i]]).fold(0.0, f64::max))
                    .fold(f64::INFINITY, f64::min);
                assert!((got - best).abs() < 1e-12, "n={n}: {got} vs {best}");
            }
        }
    }

    #[test]
    fn arclength_assignment_matches_brute_force() {
        let mut rng = crate::linalg::rng_for(22, 0);
        for n in [2usize, 3, 4] {
            let ne = 3;
            for _ in 0..20 {
                let sq: Vec<Vec<Vec<f64>>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| (0..ne).map(|_| rng.gen_range(0.0..9.0)).collect())
                            .collect()
                    })
                    .collect();
                let inv_l: Vec<f64> = (0..ne).map(|_| rng.gen_range(0.1..2.0)).collect();
                let (got, perm) = min_arclength_assignment(&sq, &inv_l).unwrap();
                let eval = |p: &[usize]| -> f64 {
                    (0..ne)
                        .map(|e| {
                            (0..n)
                                .map(|i| sq[i][p[i]][e])
                                .sum::<f64>()
                                .sqrt()
                                * inv_l[e]
                        })
                        .fold(0.0, f64::max)
                };
                assert!((eval(&perm) - got).abs() < 1e-12);
                let best = all_perms(n)
                    .into_iter()
                    .map(|p| eval(&p))
                    .fold(f64::INFINITY, f64::min);
                assert!((got - best).abs() < 1e-12, "n={n}: {got} vs {best}");
            }
        }
    }

    #[test]
    fn arclength_assignment_respects_cap() {
        let n = ARCLENGTH_ENUM_CAP + 1;
        let sq = vec![vec![vec![0.0]; n]; n];
        assert!(min_arclength_assignment(&sq, &[1.0]).is_none());
    }
}
