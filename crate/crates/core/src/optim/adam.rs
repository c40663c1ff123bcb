use serde::{Deserialize, Serialize};

use super::{all_finite, early_stop, Objective, OptimTrace, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub epochs: usize,
    pub lr0: f64,
    pub decay_factor: f64,
    /// Epochs between learning-rate decays.
    pub decay_interval: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            epochs: 5000,
            lr0: 0.01,
            decay_factor: 0.97,
            decay_interval: 100,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_epochs(epochs: usize) -> Self {
        Self {
            epochs,
            ..Self::default()
        }
    }
}

/// Step-decayed learning rate `lr0 * decay^floor(epoch / interval)`.
pub fn lr_at_epoch(cfg: &AdamConfig, epoch: usize) -> f64 {
    let decays = (epoch / cfg.decay_interval.max(1)) as i32;
    cfg.lr0 * cfg.decay_factor.powi(decays)
}

/// Full-batch Adam with bias correction, one step per epoch.
pub fn run_adam<O: Objective + ?Sized>(obj: &mut O, x0: &[f64], cfg: &AdamConfig) -> OptimTrace {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, x.clone());
    let mut evaluations = 0;
    let mut termination = Termination::MaxIters;
    let (mut pow1, mut pow2) = (1.0, 1.0);

    for epoch in 0..cfg.epochs {
        let loss = obj.evaluate(&x, &mut grad);
        evaluations += 1;
        if !loss.is_finite() || !all_finite(&grad) {
            termination = Termination::NonFinite;
            break;
        }
        losses.push(loss);
        if loss < best.0 {
            best.0 = loss;
            best.1.copy_from_slice(&x);
        }
        if let Some(stop) = early_stop(&losses) {
            termination = stop;
            break;
        }

        let lr = lr_at_epoch(cfg, epoch);
        pow1 *= cfg.beta1;
        pow2 *= cfg.beta2;
        for i in 0..n {
            let g = grad[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[i] / (1.0 - pow1);
            let v_hat = v[i] / (1.0 - pow2);
            x[i] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }

    let (params, final_loss) = match termination {
        Termination::NonFinite => (best.1, best.0),
        // the early-stop tests fire before the step, so x is the iterate they judged
        Termination::LossFloor | Termination::LossStagnation => {
            let last = *losses.last().expect("at least one loss");
            (x, last)
        }
        _ => {
            let loss = obj.evaluate(&x, &mut grad);
            evaluations += 1;
            if loss.is_finite() && all_finite(&grad) {
                (x, loss)
            } else {
                termination = Termination::NonFinite;
                (best.1, best.0)
            }
        }
    };

    OptimTrace {
        losses,
        params,
        final_loss,
        termination,
        evaluations,
        steps: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_schedule() {
        let cfg = AdamConfig::default();
        assert_eq!(lr_at_epoch(&cfg, 0), 0.01);
        assert_eq!(lr_at_epoch(&cfg, 99), 0.01);
        assert!((lr_at_epoch(&cfg, 250) - 0.009409).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut obj = |_: &[f64], g: &mut [f64]| {
            g.fill(0.0);
            1.0
        };
        let x0 = [0.3, -2.0, 7.5];
        // stagnation stops it after the window, with params untouched
        let trace = run_adam(&mut obj, &x0, &AdamConfig::with_epochs(50));
        assert_eq!(trace.params, x0.to_vec());
        assert_eq!(trace.termination, Termination::MaxIters);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut obj = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        };
        let trace = run_adam(&mut obj, &[1.0], &AdamConfig::with_epochs(1));
        // m_hat / sqrt(v_hat) = 2 / (2 + 1e-8)
        let expected = 1.0 - 0.01 * 2.0 / (2.0 + 1e-8);
        assert!((trace.params[0] - expected).abs() < 1e-15);
        assert!((trace.params[0] - 0.99).abs() < 1e-9);
    }

    #[test]
    fn non_finite_gradient_returns_best() {
        let mut calls = 0;
        let mut obj = |x: &[f64], g: &mut [f64]| {
            calls += 1;
            g[0] = if calls > 3 { f64::NAN } else { 2.0 * x[0] };
            x[0] * x[0]
        };
        let trace = run_adam(&mut obj, &[1.0], &AdamConfig::with_epochs(10));
        assert_eq!(trace.termination, Termination::NonFinite);
        assert!(trace.params[0].is_finite());
        assert_eq!(trace.losses.len(), 3);
    }
}
