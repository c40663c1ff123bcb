//! Adam with the stepped learning-rate decay, then L-BFGS, on the Rosenbrock
//! function. This is the same pairing each training stage uses.
//!
//!     cargo run --example optimizers

use cfnn::optim::{lr_at_epoch, run_adam, run_lbfgs, AdamConfig, LbfgsConfig};

fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
    g[1] = 200.0 * (b - a * a);
    (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
}

fn main() {
    let adam_cfg = AdamConfig::with_epochs(2000);
    println!(
        "Adam learning rate: epoch 0 {:.4}, epoch 1000 {:.4}, epoch 1999 {:.4}",
        lr_at_epoch(&adam_cfg, 0),
        lr_at_epoch(&adam_cfg, 1000),
        lr_at_epoch(&adam_cfg, 1999)
    );

    let adam = run_adam(&mut rosenbrock, &[-1.2, 1.0], &adam_cfg);
    println!(
        "Adam:   loss {:.3e} at ({:.6}, {:.6}) after {} epochs",
        adam.final_loss,
        adam.params[0],
        adam.params[1],
        adam.iterations()
    );

    let lbfgs = run_lbfgs(&mut rosenbrock, &adam.params, &LbfgsConfig::with_iters(200));
    println!(
        "L-BFGS: loss {:.3e} at ({:.12}, {:.12}) after {} iterations, {} evaluations ({:?})",
        lbfgs.final_loss,
        lbfgs.params[0],
        lbfgs.params[1],
        lbfgs.iterations(),
        lbfgs.evaluations,
        lbfgs.termination
    );

    let wolfe_ok = lbfgs
        .steps
        .iter()
        .all(|s| s.satisfies_strong_wolfe(1e-4, 0.9));
    println!("every accepted step satisfies the strong Wolfe conditions: {wolfe_ok}");
}
