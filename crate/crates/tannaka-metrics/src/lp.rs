//! Small dense two-phase simplex solver.
//!
//! Solves `min c.x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`, `x >= 0`.
//! Bland's pivoting rule guarantees termination; problem sizes here are tiny
//! (tens of variables, at most a few thousand rows), so a dense tableau is
//! plenty.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
// Feasibility cutoff for the phase-1 objective. Tight on purpose: the
// bisection in the double-dual solver may otherwise accept targets slightly
// beyond the true supremum (the constraint-violation slope near the boundary
// is of order delta/t), and downstream assertions check the supremum against
// an upper bound at 1e-9 resolution. Genuinely feasible systems reach a
// phase-1 optimum at roundoff level (~1e-14) on the problem sizes used here.
const FEAS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows x cols, last column is the right-hand side.
    a: Vec<Vec<f64>>,
    /// reduced-cost row (same width as `a` rows)
    cost: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        for x in self.a[row].iter_mut() {
            *x /= piv;
        }
        let pivot_row = self.a[row].clone();
        for (r, arow) in self.a.iter_mut().enumerate() {
            if r != row {
                let f = arow[col];
                if f != 0.0 {
                    for (x, p) in arow.iter_mut().zip(&pivot_row) {
                        *x -= f * p;
                    }
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (x, p) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        self.basis[row] = col;
    }

    /// Run simplex iterations with Bland's rule until optimal or unbounded.
    /// `active` marks the columns eligible to enter.
    fn run(&mut self, active: &[bool]) -> Result<bool> {
        let rhs = self.ncols;
        for _ in 0..100_000 {
            // Entering column: lowest index with negative reduced cost.
            let mut entering = None;
            for j in 0..self.ncols {
                if active[j] && self.cost[j] < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true); // optimal
            };
            // Ratio test; ties broken by smallest basis index (Bland).
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                let a = self.a[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.a[r][rhs] / a;
                    let better = match leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio < lratio + PIVOT_TOL
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(false); // unbounded
            };
            self.pivot(row, col);
        }
        Err(Error::Internal("simplex iteration limit exceeded".into()))
    }
}

/// Minimize `objective . x` over `x >= 0` with equality rows `eq` and
/// upper-bound rows `ub` (each row is `(coefficients, rhs)`).
pub(crate) fn solve(
    objective: &[f64],
    eq: &[(Vec<f64>, f64)],
    ub: &[(Vec<f64>, f64)],
) -> Result<LpOutcome> {
    let n = objective.len();
    let me = eq.len();
    let mu = ub.len();
    let rows = me + mu;
    // Columns: n structural, mu slacks, up to `rows` artificials, 1 rhs.
    let slack0 = n;
    let art0 = n + mu;
    let ncols = n + mu + rows;
    let rhs = ncols;

    let mut a = vec![vec![0.0; ncols + 1]; rows];
    let mut negated = vec![false; rows];
    for (r, (coeffs, b)) in eq.iter().chain(ub.iter()).enumerate() {
        if coeffs.len() != n {
            return Err(Error::Internal(format!(
                "lp row has {} coefficients, expected {n}",
                coeffs.len()
            )));
        }
        for (j, &c) in coeffs.iter().enumerate() {
            a[r][j] = c;
        }
        a[r][rhs] = *b;
        if r >= me {
            a[r][slack0 + (r - me)] = 1.0;
        }
        if a[r][rhs] < 0.0 {
            for x in a[r].iter_mut() {
                *x = -*x;
            }
            negated[r] = true;
        }
    }

    // Starting basis: slacks where possible, artificials elsewhere.
    let mut basis = vec![usize::MAX; rows];
    let mut n_art = 0;
    for r in 0..rows {
        if r >= me && !negated[r] {
            basis[r] = slack0 + (r - me);
        } else {
            let art = art0 + n_art;
            a[r][art] = 1.0;
            basis[r] = art;
            n_art += 1;
        }
    }
    let used_cols = art0 + n_art;

    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![0.0; ncols + 1];
    for j in art0..used_cols {
        cost[j] = 1.0;
    }
    // Make reduced costs consistent with the basis.
    for r in 0..rows {
        if basis[r] >= art0 {
            for j in 0..=ncols {
                cost[j] -= a[r][j];
            }
        }
    }
    let mut t = Tableau { a, cost, basis, ncols };
    let mut active = vec![false; ncols];
    for j in 0..used_cols {
        active[j] = true;
    }
    let optimal = t.run(&active)?;
    debug_assert!(optimal, "phase 1 is bounded below by 0");
    if -t.cost[rhs] > FEAS_TOL {
        return Ok(LpOutcome::Infeasible);
    }
    // Pivot remaining artificials out of the basis where possible.
    for r in 0..rows {
        if t.basis[r] >= art0 {
            if let Some(col) = (0..art0).find(|&j| t.a[r][j].abs() > PIVOT_TOL) {
                t.pivot(r, col);
            }
            // Otherwise the row is redundant; the artificial stays basic at
            // zero and its column stays inactive in phase 2.
        }
    }

    // Phase 2: minimize the real objective.
    let mut cost = vec![0.0; ncols + 1];
    cost[..n].copy_from_slice(objective);
    for r in 0..rows {
        let b = t.basis[r];
        let cb = if b < n { objective[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=ncols {
                cost[j] -= cb * t.a[r][j];
            }
        }
    }
    t.cost = cost;
    for j in 0..ncols {
        active[j] = j < art0;
    }
    let optimal = t.run(&active)?;
    if !optimal {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for r in 0..rows {
        if t.basis[r] < n {
            x[t.basis[r]] = t.a[r][rhs];
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, value })
}

/// Convenience wrapper: is the system `A_eq x = b_eq`, `A_ub x <= b_ub`,
/// `x >= 0` feasible?
pub(crate) fn feasible(eq: &[(Vec<f64>, f64)], ub: &[(Vec<f64>, f64)]) -> Result<bool> {
    let n = eq
        .first()
        .map(|(c, _)| c.len())
        .or_else(|| ub.first().map(|(c, _)| c.len()))
        .unwrap_or(0);
    let zero = vec![0.0; n];
    Ok(!matches!(solve(&zero, eq, ub)?, LpOutcome::Infeasible))
}
