//! Smoothed-minimax optimization over a conjugating unitary.
//!
//! Minimizes `max_g d(a_g, u b_g u*) / l(g)` over `u` in U(n) by Riemannian
//! gradient descent on the softmax surrogate
//! `F_beta(u) = (1/beta) log sum_g exp(beta f_g(u))`, with an increasing
//! `beta` schedule and a final polishing stage that line-searches the exact
//! maximum. Restarts are seeded independently, so the reduction over
//! restarts is deterministic no matter how they are scheduled.
//!
//! Gradient: for `w = a* u b u*` with eigenpair `(exp(i theta_j), v_j)` and
//! `q_j = a v_j`, the derivative of `theta_j` along `u <- exp(s X) u` is
//! `Im tr(X (q_j q_j* - v_j v_j*))`, so the Riemannian gradient of a
//! function of the angles is a weighted sum of `i (q_j q_j* - v_j v_j*)`.

use crate::linalg::{
    expm_skew_hermitian, haar_unitary, polar_unitary, rng_for, unitarity_defect, unitary_eigen,
    CMatrix, C,
};
use crate::unitary::MetricChoice;

/// Options controlling `dreps` and its optimizer.
#[derive(Debug, Clone)]
pub struct DrepsOptions {
    /// Extra padding above the larger dimension (0 = pad to the max only).
    pub slack: usize,
    /// Number of optimizer restarts.
    pub restarts: usize,
    /// Iteration budget per smoothing stage.
    pub max_iters: usize,
    /// Base seed for the restart generators.
    pub seed: u64,
    /// Stop a stage once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Softmax sharpness schedule.
    pub betas: Vec<f64>,
}

impl Default for DrepsOptions {
    fn default() -> Self {
        DrepsOptions {
            slack: 0,
            restarts: 16,
            max_iters: 150,
            seed: 0,
            grad_tol: 1e-8,
            betas: vec![10.0, 100.0, 1000.0],
        }
    }
}

/// Diagnostics from the minimax optimizer.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OptimizerDiagnostics {
    pub restarts: usize,
    pub total_iterations: usize,
    pub best_restart: usize,
    pub best_value: f64,
    pub worst_value: f64,
    pub converged: bool,
}

pub(crate) struct MinimaxProblem {
    /// Matrices of the two representations at the support elements.
    pub a: Vec<CMatrix>,
    pub b: Vec<CMatrix>,
    /// `1 / l(g)` for each support element.
    pub inv_l: Vec<f64>,
    pub metric: MetricChoice,
    pub dim: usize,
}

struct ElementEigen {
    value: f64,
    /// (coefficient, projector direction pair) per eigen-angle contributing
    /// to the gradient: coefficient * i (q q* - v v*).
    terms: Vec<(f64, CMatrix)>,
}

impl MinimaxProblem {
    fn element_values(&self, u: &CMatrix) -> Vec<f64> {
        let uh = u.adjoint();
        self.a
            .iter()
            .zip(&self.b)
            .zip(&self.inv_l)
            .map(|((a, b), &w)| {
                let c = u * b * &uh;
                let prod = a.adjoint() * c;
                let angles = crate::linalg::unitary_angles(&prod);
                crate::unitary::distance_from_angles(self.metric, &angles) * w
            })
            .collect()
    }

    /// Exact objective `max_g f_g(u)`.
    pub(crate) fn exact_value(&self, u: &CMatrix) -> f64 {
        self.element_values(u).into_iter().fold(0.0, f64::max)
    }

    fn element_eigen(&self, u: &CMatrix) -> Vec<ElementEigen> {
        let uh = u.adjoint();
        self.a
            .iter()
            .zip(&self.b)
            .zip(&self.inv_l)
            .map(|((a, b), &w)| {
                let c = u * b * &uh;
                let prod = a.adjoint() * c;
                let pairs = unitary_eigen(&prod);
                let angles: Vec<f64> = pairs.iter().map(|p| p.angle).collect();
                let value =
                    crate::unitary::distance_from_angles(self.metric, &angles) * w;
                // d f / d theta_j, including the 1/l weight.
                let coeffs: Vec<f64> = match self.metric {
                    MetricChoice::Arclength => {
                        let d: f64 = angles.iter().map(|t| t * t).sum::<f64>().sqrt();
                        if d < 1e-14 {
                            vec![0.0; angles.len()]
                        } else {
                            angles.iter().map(|t| w * t / d).collect()
                        }
                    }
                    MetricChoice::Operator => {
                        let s: Vec<f64> =
                            angles.iter().map(|t| 2.0 * (t / 2.0).sin().abs()).collect();
                        let smax = s.iter().copied().fold(0.0, f64::max);
                        let ties: Vec<usize> = (0..s.len())
                            .filter(|&j| s[j] >= smax - 1e-12)
                            .collect();
                        let share = 1.0 / ties.len() as f64;
                        (0..angles.len())
                            .map(|j| {
                                if smax < 1e-14 || !ties.contains(&j) {
                                    0.0
                                } else {
                                    let t = angles[j];
                                    w * share * t.signum() * (t / 2.0).cos()
                                }
                            })
                            .collect()
                    }
                };
                let terms = pairs
                    .iter()
                    .zip(&coeffs)
                    .filter(|(_, &cf)| cf != 0.0)
                    .map(|(p, &cf)| {
                        let q = a * &p.vector;
                        let proj = &q * q.adjoint() - &p.vector * p.vector.adjoint();
                        (cf, proj)
                    })
                    .collect();
                ElementEigen { value, terms }
            })
            .collect()
    }

    /// Softmax value and Riemannian gradient (a skew-Hermitian matrix for
    /// the update `u <- exp(-t G) u`), plus the exact max.
    fn value_and_grad(&self, u: &CMatrix, beta: f64) -> (f64, CMatrix, f64) {
        let elems = self.element_eigen(u);
        let fmax = elems.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = elems
            .iter()
            .map(|e| (beta * (e.value - fmax)).exp())
            .collect();
        let wsum: f64 = weights.iter().sum();
        let fbeta = fmax + (wsum.ln()) / beta;
        let mut grad = CMatrix::zeros(self.dim, self.dim);
        for (e, wgt) in elems.iter().zip(&weights) {
            let sigma = wgt / wsum;
            if sigma < 1e-300 {
                continue;
            }
            for (cf, proj) in &e.terms {
                // i * proj is skew-Hermitian.
                grad += proj * C::new(0.0, sigma * cf);
            }
        }
        (fbeta, grad, fmax)
    }
}

fn grad_norm(g: &CMatrix) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct StageOutcome {
    iterations: usize,
    hit_iteration_limit: bool,
}

/// One descent stage. When `exact` is set, the line search accepts on the
/// exact max objective (final polish); otherwise on the softmax surrogate.
fn descend_stage(
    problem: &MinimaxProblem,
    u: &mut CMatrix,
    beta: f64,
    max_iters: usize,
    grad_tol: f64,
    exact: bool,
) -> StageOutcome {
    let mut step = 1.0f64;
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let (fbeta, grad, fexact) = problem.value_and_grad(u, beta);
        let gn = grad_norm(&grad);
        if gn < grad_tol {
            return StageOutcome { iterations, hit_iteration_limit: false };
        }
        let reference = if exact { fexact } else { fbeta };
        let mut t = step;
        let mut accepted = false;
        for _ in 0..30 {
            let dir = &grad * C::new(-t, 0.0);
            let cand = expm_skew_hermitian(&dir) * &*u;
            let cand_val = if exact {
                problem.exact_value(&cand)
            } else {
                problem.value_and_grad(&cand, beta).0
            };
            if cand_val <= reference - 1e-4 * t * gn * gn {
                *u = cand;
                step = (t * 2.0).min(1.0);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Stuck at a kink or stationary point of this stage.
            return StageOutcome { iterations, hit_iteration_limit: false };
        }
        if iterations % 32 == 0 && unitarity_defect(u) > 1e-11 {
            *u = polar_unitary(u);
        }
    }
    StageOutcome { iterations, hit_iteration_limit: true }
}

struct RestartResult {
    value: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(problem: &MinimaxProblem, u0: CMatrix, opts: &DrepsOptions) -> RestartResult {
    let mut u = u0;
    let mut iterations = 0;
    for &beta in &opts.betas {
        let out = descend_stage(problem, &mut u, beta, opts.max_iters, opts.grad_tol, false);
        iterations += out.iterations;
    }
    // Polish on the exact objective with a sharp surrogate gradient.
    let beta_polish = opts.betas.last().copied().unwrap_or(1000.0) * 4.0;
    let out = descend_stage(problem, &mut u, beta_polish, opts.max_iters, opts.grad_tol, true);
    iterations += out.iterations;
    RestartResult {
        value: problem.exact_value(&u),
        iterations,
        converged: !out.hit_iteration_limit,
    }
}

/// Minimize over U(n) with restarts. `warm_starts` are used for the first
/// restarts; remaining restarts draw Haar-random starting points from the
/// seeded generator. Returns the best value with diagnostics; the reduction
/// over restarts is by (value, restart index), so the outcome is
/// deterministic for fixed options.
pub(crate) fn minimize(
    problem: &MinimaxProblem,
    warm_starts: Vec<CMatrix>,
    opts: &DrepsOptions,
) -> (f64, OptimizerDiagnostics) {
    use rayon::prelude::*;
    let restarts = opts.restarts.max(1);
    let results: Vec<RestartResult> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let u0 = if r < warm_starts.len() {
                warm_starts[r].clone()
            } else {
                haar_unitary(problem.dim, &mut rng_for(opts.seed, 0x0D0E_0000 + r as u64))
            };
            run_restart(problem, u0, opts)
        })
        .collect();
    let mut best = 0usize;
    for r in 1..results.len() {
        if results[r].value < results[best].value {
            best = r;
        }
    }
    let worst = results
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let diag = OptimizerDiagnostics {
        restarts,
        total_iterations: results.iter().map(|r| r.iterations).sum(),
        best_restart: best,
        best_value: results[best].value,
        worst_value: worst,
        converged: results[best].converged,
    };
    (results[best].value, diag)
}
