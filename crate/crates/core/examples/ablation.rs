//! The two ablations on f4 next to the full method:
//! case 1 replaces the Chebyshev first layer by a tanh layer,
//! case 2 trains a single wide network (width 160) instead of several stages.
//!
//!     cargo run --release --example ablation [adam_epochs] [lbfgs_iters]

use cfnn::experiment::{run_cell, ExperimentConfig, Scale, Suite};
use cfnn::targets::FunctionId;

fn main() -> cfnn::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer budget"));
    let adam = args.next().unwrap_or(300);
    let lbfgs = args.next().unwrap_or(1000);

    for (label, suite) in [
        ("multi-stage CFNN", Suite::OneD),
        ("case 1: tanh first layer", Suite::Ablation1),
        ("case 2: one wide stage", Suite::Ablation2),
    ] {
        let mut cfg = ExperimentConfig::new(suite, Scale::Desk, 1);
        cfg.adam_epochs = adam;
        cfg.lbfgs_iters = lbfgs;
        let (report, _) = run_cell(&cfg, FunctionId::F4, 1)?;
        let last = report.final_stage();
        println!(
            "{label:<26} stages {}  width {:>3}  max train error {:.3e}  train RMSE {:.3e}",
            report.stages.len(),
            cfg.width,
            last.train_max_error,
            last.train_rmse
        );
    }
    Ok(())
}
