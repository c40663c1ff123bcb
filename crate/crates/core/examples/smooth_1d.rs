//! Multi-stage training on f2(x) = sin(2x + 1) + 0.2 exp(1.3x).
//!
//! Each stage fits the RMS-normalized residual left by the stages before it,
//! so the training error drops by orders of magnitude per stage.
//!
//!     cargo run --release --example smooth_1d [adam_epochs] [lbfgs_iters]

use cfnn::multistage::{train_multistage, MultistageOptions, StageSchedule, TrainConfig};
use cfnn::network::CfnnArchitecture;
use cfnn::targets::{make_equidistant_dataset, FunctionId, TargetFunction};

fn main() -> cfnn::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer budget"));
    let adam = args.next().unwrap_or(500);
    let lbfgs = args.next().unwrap_or(1500);

    let f = TargetFunction::benchmark(FunctionId::F2, 1, 0)?;
    let train = make_equidistant_dataset(&f, 3000)?;
    let test = make_equidistant_dataset(&f, 10_000)?;

    let schedule = StageSchedule::frequency_escalating;
    let opts = MultistageOptions {
        arch: CfnnArchitecture::new(1, 3, 40)?,
        stages: 4,
        train: TrainConfig::new(adam, lbfgs),
        schedule: &schedule,
        seed: 1,
    };
    let run = train_multistage(&train, Some(&test), &opts)?;

    println!("stage  epsilon     train RMSE  test RMSE   max error");
    for r in &run.reports {
        println!(
            "{:>5}  {:<10}  {:.3e}   {:.3e}   {:.3e}",
            r.stage,
            r.epsilon.map_or("-".into(), |e| format!("{e:.3e}")),
            r.train_rmse,
            r.test_rmse.unwrap_or(f64::NAN),
            r.train_max_error
        );
    }
    println!("{:?}", run.status);
    Ok(())
}
