//! Strong-Wolfe line search: bracketing followed by zoom, with safeguarded
//! cubic interpolation (Nocedal & Wright, algorithms 3.5 and 3.6).

use super::{dot, Objective};

/// Result of one line search along `direction` from `x`.
#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Directional derivative at the returned point.
    pub slope: f64,
    pub evaluations: usize,
    /// Whether the returned point satisfies both strong Wolfe conditions.
    pub converged: bool,
}

struct Trial {
    step: f64,
    loss: f64,
    grad: Vec<f64>,
    slope: f64,
}

struct Probe<'a, O: ?Sized> {
    obj: &'a mut O,
    x: &'a [f64],
    direction: &'a [f64],
    scratch: Vec<f64>,
    evaluations: usize,
}

impl<O: Objective + ?Sized> Probe<'_, O> {
    fn at(&mut self, step: f64) -> Trial {
        for ((s, &xi), &di) in self.scratch.iter_mut().zip(self.x).zip(self.direction) {
            *s = xi + step * di;
        }
        let mut grad = vec![0.0; self.x.len()];
        let loss = self.obj.evaluate(&self.scratch, &mut grad);
        self.evaluations += 1;
        let slope = dot(&grad, self.direction);
        Trial {
            step,
            loss,
            grad,
            slope,
        }
    }
}

/// Minimizer of the cubic matching values and slopes at two steps, clamped
/// to `bounds`. Falls back to the bisection point when the cubic has no real
/// minimizer.
pub(crate) fn cubic_minimizer(
    (t1, f1, g1): (f64, f64, f64),
    (t2, f2, g2): (f64, f64, f64),
    bounds: (f64, f64),
) -> f64 {
    let (lo, hi) = bounds;
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (t1 - t2);
    let disc = d1 * d1 - g1 * g2;
    if disc >= 0.0 {
        let d2 = disc.sqrt();
        let t = if t1 <= t2 {
            t2 - (t2 - t1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            t1 - (t1 - t2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if t.is_finite() {
            return t.clamp(lo, hi);
        }
    }
    (lo + hi) / 2.0
}

/// Searches for a step satisfying
/// `f(x + t d) <= f(x) + c1 t g.d` and `|g(x + t d).d| <= c2 |g.d|`
/// using at most `max_evals` objective evaluations.
///
/// `slope0` must be negative. When the budget runs out the lowest point that
/// satisfies sufficient decrease is returned with `converged == false`; if no
/// trial decreased the loss, the step is zero.
#[allow(clippy::too_many_arguments)]
pub fn strong_wolfe<O: Objective + ?Sized>(
    obj: &mut O,
    x: &[f64],
    loss0: f64,
    grad0: &[f64],
    direction: &[f64],
    initial_step: f64,
    c1: f64,
    c2: f64,
    max_evals: usize,
) -> LineSearchOutcome {
    let slope0 = dot(grad0, direction);
    debug_assert!(slope0 < 0.0, "line search needs a descent direction");
    let mut probe = Probe {
        obj,
        x,
        direction,
        scratch: vec![0.0; x.len()],
        evaluations: 0,
    };
    let origin = Trial {
        step: 0.0,
        loss: loss0,
        grad: grad0.to_vec(),
        slope: slope0,
    };
    let armijo = |t: &Trial| t.loss <= loss0 + c1 * t.step * slope0 && t.loss.is_finite();
    let curvature = |t: &Trial| t.slope.abs() <= -c2 * slope0;

    let finish = |t: Trial, evaluations: usize, converged: bool| LineSearchOutcome {
        step: t.step,
        loss: t.loss,
        grad: t.grad,
        slope: t.slope,
        evaluations,
        converged,
    };

    // Bracketing phase.
    let mut prev = origin;
    let mut cur = probe.at(initial_step);
    let (mut lo, mut hi);
    let mut iter = 1;
    loop {
        if !cur.loss.is_finite() || !armijo(&cur) || (iter > 1 && cur.loss >= prev.loss) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature(&cur) {
            return finish(cur, probe.evaluations, true);
        }
        if cur.slope >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        if iter >= max_evals {
            return finish(cur, probe.evaluations, false);
        }
        let min_step = cur.step + 0.01 * (cur.step - prev.step);
        let max_step = cur.step * 10.0;
        let next = cubic_minimizer(
            (prev.step, prev.loss, prev.slope),
            (cur.step, cur.loss, cur.slope),
            (min_step, max_step),
        );
        prev = cur;
        cur = probe.at(next);
        iter += 1;
    }

    // Zoom phase: `lo` satisfies sufficient decrease and has the lower loss,
    // and the slope at `lo` points toward `hi`.
    let mut insufficient_progress = false;
    while iter < max_evals {
        // bracket narrower than the step's own resolution
        if (hi.step - lo.step).abs() <= f64::EPSILON * lo.step.abs().max(hi.step.abs()) {
            break;
        }
        let (a, b) = if lo.step < hi.step {
            (lo.step, hi.step)
        } else {
            (hi.step, lo.step)
        };
        let mut t = if hi.loss.is_finite() {
            cubic_minimizer(
                (lo.step, lo.loss, lo.slope),
                (hi.step, hi.loss, hi.slope),
                (a, b),
            )
        } else {
            (a + b) / 2.0
        };
        // keep the trial away from the bracket ends
        let margin = 0.1 * (b - a);
        if (b - t).min(t - a) < margin {
            if insufficient_progress || t >= b || t <= a {
                t = if (t - b).abs() < (t - a).abs() {
                    b - margin
                } else {
                    a + margin
                };
                insufficient_progress = false;
            } else {
                insufficient_progress = true;
            }
        } else {
            insufficient_progress = false;
        }

        let trial = probe.at(t);
        iter += 1;
        if !armijo(&trial) || trial.loss >= lo.loss {
            hi = trial;
        } else {
            if curvature(&trial) {
                return finish(trial, probe.evaluations, true);
            }
            if trial.slope * (hi.step - lo.step) >= 0.0 {
                hi = std::mem::replace(&mut lo, trial);
            } else {
                lo = trial;
            }
        }
    }
    let evaluations = probe.evaluations;
    finish(lo, evaluations, false)
}
