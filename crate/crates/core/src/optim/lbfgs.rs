use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::line_search::strong_wolfe;
use super::{all_finite, dot, early_stop, norm, AcceptedStep, Objective, OptimTrace, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    /// Number of curvature pairs kept.
    pub history: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    /// Stop once the gradient norm drops below this.
    pub grad_tol: f64,
    /// Evaluation budget of one line search.
    pub max_linesearch: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            history: 10,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            grad_tol: 1e-14,
            max_linesearch: 25,
        }
    }
}

impl LbfgsConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }
}

struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `-H g` by the two-loop recursion, with `H0 = (s'y / y'y) I` from the
/// newest pair.
fn search_direction(history: &VecDeque<CurvaturePair>, grad: &[f64]) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * dot(&pair.s, &q);
        for (qi, yi) in q.iter_mut().zip(&pair.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(newest) = history.back() {
        let gamma = dot(&newest.s, &newest.y) / dot(&newest.y, &newest.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (pair, a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = pair.rho * dot(&pair.y, &q);
        for (qi, si) in q.iter_mut().zip(&pair.s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// L-BFGS with a strong-Wolfe line search.
///
/// Every accepted step satisfies both Wolfe conditions, so accepted losses
/// never increase. A failed line search clears the history and retries along
/// steepest descent; a second consecutive failure ends the run.
pub fn run_lbfgs<O: Objective + ?Sized>(obj: &mut O, x0: &[f64], cfg: &LbfgsConfig) -> OptimTrace {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut loss = obj.evaluate(&x, &mut grad);
    let mut evaluations = 1;
    let mut losses = Vec::with_capacity(cfg.max_iters.min(1 << 16));
    let mut steps = Vec::new();
    let mut history: VecDeque<CurvaturePair> = VecDeque::with_capacity(cfg.history);

    let mut termination = Termination::MaxIters;
    if !loss.is_finite() || !all_finite(&grad) {
        termination = Termination::NonFinite;
    } else if norm(&grad) <= cfg.grad_tol {
        termination = Termination::GradTol;
    }

    let mut iter = 0;
    while termination == Termination::MaxIters && iter < cfg.max_iters {
        iter += 1;
        losses.push(loss);
        if let Some(stop) = early_stop(&losses) {
            termination = stop;
            break;
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let mut direction = search_direction(&history, &grad);
            let mut slope = dot(&grad, &direction);
            if attempt == 1 || slope.is_nan() || slope >= 0.0 {
                history.clear();
                direction = grad.iter().map(|g| -g).collect();
                slope = -dot(&grad, &grad);
            }
            let initial_step = if history.is_empty() {
                (1.0 / grad.iter().map(|g| g.abs()).sum::<f64>()).min(1.0)
            } else {
                1.0
            };
            let out = strong_wolfe(
                obj,
                &x,
                loss,
                &grad,
                &direction,
                initial_step,
                cfg.wolfe_c1,
                cfg.wolfe_c2,
                cfg.max_linesearch,
            );
            evaluations += out.evaluations;
            if out.converged {
                accepted = Some((direction, slope, out));
                break;
            }
            if attempt == 1 {
                break;
            }
        }

        let Some((direction, slope, out)) = accepted else {
            termination = Termination::LineSearchFail;
            break;
        };
        if !all_finite(&out.grad) {
            termination = Termination::NonFinite;
            break;
        }

        steps.push(AcceptedStep {
            step: out.step,
            loss_before: loss,
            slope_before: slope,
            loss_after: out.loss,
            slope_after: out.slope,
        });
        let s: Vec<f64> = direction.iter().map(|d| out.step * d).collect();
        let y: Vec<f64> = out.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm(&s) * norm(&y) {
            if history.len() == cfg.history {
                history.pop_front();
            }
            history.push_back(CurvaturePair {
                s,
                y,
                rho: 1.0 / sy,
            });
        }
        loss = out.loss;
        grad = out.grad;

        if norm(&grad) <= cfg.grad_tol {
            termination = Termination::GradTol;
        }
    }

    OptimTrace {
        losses,
        params: x,
        final_loss: loss,
        termination,
        evaluations,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_start_stops_immediately() {
        let mut obj = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 4.0 * (x[1] + 1.0);
            (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2)
        };
        let trace = run_lbfgs(&mut obj, &[3.0, -1.0], &LbfgsConfig::default());
        assert_eq!(trace.termination, Termination::GradTol);
        assert_eq!(trace.params, vec![3.0, -1.0]);
        assert!(trace.losses.is_empty());
    }

    #[test]
    fn two_loop_without_history_is_steepest_descent() {
        let d = search_direction(&VecDeque::new(), &[1.0, -2.0]);
        assert_eq!(d, vec![-1.0, 2.0]);
    }

    #[test]
    fn respects_iteration_budget() {
        let mut obj = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let trace = run_lbfgs(&mut obj, &[-1.2, 1.0], &LbfgsConfig::with_iters(5));
        assert!(trace.losses.len() <= 5);
        assert_eq!(trace.termination, Termination::MaxIters);
    }
}
