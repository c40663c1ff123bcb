//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use cfnn::network::{init_params, CfnnArchitecture, MseObjective, PreparedInputs};
use cfnn::optim::Objective;
use cfnn::rng::SeededRng;
use ndarray::{Array1, Array2};

pub const GRAD_CHECK_FLOOR: f64 = 1e-2;

/// Chebyshev polynomial T_n(x) by the three-term recurrence.
pub fn chebyshev_recurrence(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Largest relative error between backprop and central differences over
/// every parameter of a randomly perturbed network.
///
/// Relative error is `|g - fd| / max(|g|, |fd|, GRAD_CHECK_FLOOR)`. Central
/// differences carry about 1e-10 of rounding noise at h = 1e-6, so entries
/// that are zero up to rounding are compared absolutely.
pub fn gradient_check(arch: &CfnnArchitecture, seed: u64, h: f64) -> f64 {
    let mut rng = SeededRng::new(seed);
    let n = 20;
    let points = Array2::from_shape_fn((n, arch.input_dim), |_| rng.uniform_range(-0.95, 0.95));
    let targets = Array1::from_shape_fn(n, |_| rng.normal(0.0, 1.0));
    let inputs = PreparedInputs::new(&points).unwrap();
    let mut obj = MseObjective::new(arch, &inputs, &targets).unwrap();

    // nonzero biases and non-integer frequencies so every term is exercised
    let mut x = init_params(arch, 1.0, 0.5, seed).flatten();
    for v in x.iter_mut() {
        *v += rng.normal(0.0, 0.1);
    }
    let mut grad = vec![0.0; x.len()];
    obj.evaluate(&x, &mut grad);

    let mut scratch = vec![0.0; x.len()];
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let up = obj.evaluate(&x, &mut scratch);
        x[i] = orig - h;
        let down = obj.evaluate(&x, &mut scratch);
        x[i] = orig;
        let fd = (up - down) / (2.0 * h);
        let denom = grad[i].abs().max(fd.abs()).max(GRAD_CHECK_FLOOR);
        worst = worst.max((grad[i] - fd).abs() / denom);
    }
    worst
}

/// `0.5 (x - c)'A(x - c)` with A symmetric positive definite, so the minimum
/// value is zero (the optimizers treat losses below 1e-32 as converged).
pub struct Quadratic {
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl Quadratic {
    /// Random SPD matrix `Q diag(eig) Q'` with eigenvalues spread over
    /// `[1, cond]`; Q from Gram-Schmidt on a random matrix.
    pub fn random(n: usize, cond: f64, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let mut q: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.normal(0.0, 1.0)).collect())
            .collect();
        for i in 0..n {
            for j in 0..i {
                let d: f64 = (0..n).map(|k| q[i][k] * q[j][k]).sum();
                let qj = q[j].clone();
                for (a, b) in q[i].iter_mut().zip(&qj) {
                    *a -= d * b;
                }
            }
            let norm = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            q[i].iter_mut().for_each(|v| *v /= norm);
        }
        let eig: Vec<f64> = (0..n)
            .map(|i| {
                if n == 1 {
                    1.0
                } else {
                    1.0 + (cond - 1.0) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        let a = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| (0..n).map(|k| q[k][r] * eig[k] * q[k][c]).sum())
                    .collect()
            })
            .collect();
        let c = (0..n).map(|_| rng.normal(0.0, 1.0)).collect();
        Self { a, c }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let e: Vec<f64> = x.iter().zip(&self.c).map(|(x, c)| x - c).collect();
        let ae = self.matvec(&e);
        grad.copy_from_slice(&ae);
        0.5 * e.iter().zip(&ae).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Loss sequence of dense BFGS (H0 = I) with exact line searches.
    pub fn dense_bfgs_losses(&self, x0: &[f64], iters: usize) -> Vec<f64> {
        let n = x0.len();
        let mut h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut x = x0.to_vec();
        let mut g = vec![0.0; n];
        let mut losses = Vec::new();
        for _ in 0..iters {
            losses.push(self.value_grad(&x, &mut g));
            let d: Vec<f64> = h
                .iter()
                .map(|row| -row.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let ad = self.matvec(&d);
            let dad: f64 = d.iter().zip(&ad).map(|(a, b)| a * b).sum();
            if dad <= 0.0 {
                break;
            }
            let alpha = -g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / dad;
            let s: Vec<f64> = d.iter().map(|v| alpha * v).collect();
            let y: Vec<f64> = ad.iter().map(|v| alpha * v).collect();
            for i in 0..n {
                x[i] += s[i];
            }
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            if sy <= 1e-300 {
                break;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h
                .iter()
                .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        losses
    }
}

pub fn rosenbrock(x: &[f64], grad: &mut [f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    grad[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
    grad[1] = 200.0 * (b - a * a);
    (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
}

/// `sum_i c_i (x_i - t_i)^2` with curvatures between 1 and 10.
pub fn adam_quadratic(x: &[f64], grad: &mut [f64]) -> f64 {
    let mut loss = 0.0;
    for (i, (xi, gi)) in x.iter().zip(grad.iter_mut()).enumerate() {
        let c = 1.0 + 9.0 * i as f64 / 4.0;
        let t = 0.5 - 0.2 * i as f64;
        *gi = 2.0 * c * (xi - t);
        loss += c * (xi - t).powi(2);
    }
    loss
}

/// A small three-stage model of f4, trained in well under a second.
pub fn small_composed_model(
    seed: u64,
) -> (cfnn::multistage::MultistageRun, cfnn::targets::Dataset) {
    use cfnn::multistage::{train_multistage, MultistageOptions, StageSchedule, TrainConfig};
    use cfnn::targets::{make_equidistant_dataset, FunctionId, TargetFunction};

    let f = TargetFunction::benchmark(FunctionId::F4, 1, seed).unwrap();
    let train = make_equidistant_dataset(&f, 200).unwrap();
    let schedule = StageSchedule::frequency_escalating;
    let opts = MultistageOptions {
        arch: CfnnArchitecture::new(1, 3, 10).unwrap(),
        stages: 3,
        train: TrainConfig::new(100, 100),
        schedule: &schedule,
        seed,
    };
    (train_multistage(&train, None, &opts).unwrap(), train)
}

pub fn grid(n: usize) -> Array2<f64> {
    cfnn::targets::equidistant_points(n)
}
