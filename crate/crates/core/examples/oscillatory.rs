//! f4(x) = (1 - x^2/2) cos(30(x + 0.5x^3)): a high-frequency target where the
//! frequency-escalating initialization matters. Later stages start their
//! first-layer frequencies at 2, 10, 50, ... so they can resolve the
//! oscillatory residual. Writes the trained model to `f4_model.json`.
//!
//!     cargo run --release --example oscillatory [adam_epochs] [lbfgs_iters]

use cfnn::experiment::{run_cell, ExperimentConfig, Scale, Suite};
use cfnn::io::{serialize_model, write_atomic, RunMetadata};
use cfnn::multistage::StageSchedule;
use cfnn::targets::FunctionId;

fn main() -> cfnn::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer budget"));
    let mut cfg = ExperimentConfig::new(Suite::OneD, Scale::Desk, 1);
    cfg.adam_epochs = args.next().unwrap_or(500);
    cfg.lbfgs_iters = args.next().unwrap_or(1500);

    for s in 0..cfg.stages {
        let sched = StageSchedule::frequency_escalating(s);
        println!(
            "stage {s}: W_cf ~ {} + Exp(rate {})",
            sched.shift, sched.lambda_rate
        );
    }

    let (report, model) = run_cell(&cfg, FunctionId::F4, 1)?;
    for r in &report.stages {
        println!(
            "stage {}: train RMSE {:.3e}, max error {:.3e}",
            r.stage, r.train_rmse, r.train_max_error
        );
    }

    let meta = RunMetadata::new(
        Some("f4".into()),
        1,
        cfg.seed,
        Some("desk".into()),
        cfg.adam_epochs,
        cfg.lbfgs_iters,
    );
    let bytes = serialize_model(&model, &meta);
    write_atomic("f4_model.json".as_ref(), |w| w.write_all(&bytes))?;
    println!(
        "wrote f4_model.json ({} bytes), {:.0}s",
        bytes.len(),
        report.wall_seconds
    );
    Ok(())
}
