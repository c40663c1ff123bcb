//! Multi-stage training in d dimensions on scattered uniform data: the linear
//! sum f7, the Gaussian peak f8 or the ten-mode mixture f9.
//!
//!     cargo run --release --example multidim [f7|f8|f9] [dim] [stages]

use cfnn::experiment::{run_cell, ExperimentConfig, Scale, Suite};
use cfnn::targets::FunctionId;

fn main() -> cfnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let function: FunctionId = args.first().map_or("f8", String::as_str).parse()?;
    let dim = args
        .get(1)
        .map_or(2, |a| a.parse().expect("integer dimension"));

    let mut cfg = ExperimentConfig::new(Suite::MultiDim, Scale::Desk, 1);
    cfg.stages = args
        .get(2)
        .map_or(3, |a| a.parse().expect("integer stage count"));
    cfg.train_points = 2000;
    cfg.adam_epochs = 300;
    cfg.lbfgs_iters = 700;

    let (report, _) = run_cell(&cfg, function, dim)?;
    println!(
        "{function}, d = {dim}, {} training points",
        cfg.train_points
    );
    println!("stage  train RMSE  test RMSE");
    for r in &report.stages {
        println!(
            "{:>5}  {:.3e}   {:.3e}",
            r.stage,
            r.train_rmse,
            r.test_rmse.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
