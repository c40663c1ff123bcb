//! Command-line front end: `train`, `eval`, `suite`, `losscurve`.
//!
//! Settings resolve as command-line flags over `--config` file values over the
//! built-in defaults for the chosen scale. Exit codes: 0 success, 1 usage
//! error, 2 runtime or training failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::Deserialize;

use crate::error::{CfnnError, Result};
use crate::experiment::{run_cell, run_suite, ExperimentConfig, Scale, Suite};
use crate::io::{
    config_hash, deserialize_model, provenance_line, read_points_csv, serialize_model,
    write_atomic, write_predictions_csv, write_suite_outputs, RunMetadata,
};
use crate::multistage::write_reports_csv;
use crate::network::PreparedInputs;
use crate::targets::{equidistant_points, FunctionId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cfnn",
    version,
    about = "Chebyshev feature networks with multi-stage training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a multi-stage model for one benchmark function.
    Train(TrainArgs),
    /// Evaluate a saved model on a grid or on points from a CSV file.
    Eval(EvalArgs),
    /// Run a benchmark suite (oned, multidim, ablation1, ablation2).
    Suite(SuiteArgs),
    /// Train like `train` and write every optimizer loss history.
    Losscurve(TrainArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// paper or desk
    #[arg(long)]
    scale: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSON file of setting overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct BudgetArgs {
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    adam_epochs: Option<usize>,
    #[arg(long)]
    lbfgs_iters: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    hidden_layers: Option<usize>,
    #[arg(long)]
    train_points: Option<usize>,
    #[arg(long)]
    test_points: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Function id, f1..f9.
    #[arg(long = "fn")]
    function: String,
    /// Input dimension (f7-f9 only).
    #[arg(long)]
    dim: Option<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Points per axis of an equidistant tensor grid on [-1, 1]^d.
    #[arg(long, conflicts_with = "points")]
    grid: Option<usize>,
    /// CSV of points (`x1,...,xd` columns).
    #[arg(long)]
    points: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long)]
    name: String,
    /// Worker threads for independent cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated dimensions (multidim only).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated function ids.
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<String>>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    common: CommonArgs,
}

/// Overrides accepted from a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    scale: Option<Scale>,
    stages: Option<usize>,
    adam_epochs: Option<usize>,
    lbfgs_iters: Option<usize>,
    width: Option<usize>,
    hidden_layers: Option<usize>,
    train_points: Option<usize>,
    test_points: Option<usize>,
    dims: Option<Vec<usize>>,
    functions: Option<Vec<FunctionId>>,
    jobs: Option<usize>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CfnnError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CfnnError::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

fn resolve_scale(flag: Option<&str>, file: &ConfigFile) -> Result<Scale> {
    match flag {
        Some(s) => s.parse(),
        None => Ok(file.scale.unwrap_or_default()),
    }
}

/// Defaults for `suite` and `scale`, then file values, then flags.
fn resolve_config(
    suite: Suite,
    common: &CommonArgs,
    budget: &BudgetArgs,
) -> Result<(ExperimentConfig, ConfigFile)> {
    let file = ConfigFile::load(common.config.as_deref())?;
    let scale = resolve_scale(common.scale.as_deref(), &file)?;
    let seed = common.seed.or(file.seed).unwrap_or(1);
    let mut cfg = ExperimentConfig::new(suite, scale, seed);
    macro_rules! layer {
        ($($field:ident),*) => {
            $(if let Some(v) = budget.$field.or(file.$field) { cfg.$field = v; })*
        };
    }
    layer!(
        stages,
        adam_epochs,
        lbfgs_iters,
        width,
        hidden_layers,
        train_points,
        test_points
    );
    if let Some(jobs) = file.jobs {
        cfg.jobs = jobs;
    }
    Ok((cfg, file))
}

fn train_config(args: &TrainArgs) -> Result<(ExperimentConfig, FunctionId, usize)> {
    let function: FunctionId = args.function.parse()?;
    let dim = if function.is_one_dimensional() {
        match args.dim {
            Some(d) if d != 1 => {
                return Err(CfnnError::InvalidArgument(format!(
                    "{function} is one-dimensional"
                )))
            }
            _ => 1,
        }
    } else {
        args.dim.unwrap_or(2)
    };
    let suite = if function.is_one_dimensional() {
        Suite::OneD
    } else {
        Suite::MultiDim
    };
    let (mut cfg, _) = resolve_config(suite, &args.common, &args.budget)?;
    cfg.functions = vec![function];
    cfg.dims = vec![dim];
    Ok((cfg, function, dim))
}

fn run_label(cfg: &ExperimentConfig, function: FunctionId, dim: usize) -> String {
    format!("{function}_d{dim}_{}_seed{}", cfg.scale, cfg.seed)
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, function, dim) = train_config(args)?;
    let (report, model) = run_cell(&cfg, function, dim)?;
    let label = run_label(&cfg, function, dim);
    let dir = &args.common.out;

    let meta = RunMetadata::new(
        Some(function.to_string()),
        dim,
        cfg.seed,
        Some(cfg.scale.to_string()),
        cfg.adam_epochs,
        cfg.lbfgs_iters,
    );
    let model_path = dir.join(format!("model_{label}.json"));
    let bytes = serialize_model(&model, &meta);
    write_atomic(&model_path, |w| w.write_all(&bytes))?;

    let csv_path = dir.join(format!("stages_{label}.csv"));
    let header = provenance_line(cfg.seed, &config_hash(&cfg));
    write_atomic(&csv_path, |w| {
        writeln!(w, "{header}")?;
        write_reports_csv(&report.stages, w)
    })?;

    let last = report.final_stage();
    let _ = writeln!(
        out,
        "{function} d={dim}: {} stages, train RMSE {:.3e}, test RMSE {:.3e} ({:?})",
        report.stages.len(),
        last.train_rmse,
        last.test_rmse.unwrap_or(f64::NAN),
        report.status
    );
    let _ = writeln!(
        out,
        "wrote {} and {}",
        model_path.display(),
        csv_path.display()
    );
    Ok(())
}

fn cmd_losscurve(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, function, dim) = train_config(args)?;
    let (report, _) = run_cell(&cfg, function, dim)?;
    let label = run_label(&cfg, function, dim);
    let header = provenance_line(cfg.seed, &config_hash(&cfg));
    let path = args.common.out.join(format!("losscurve_{label}.csv"));
    write_atomic(&path, |w| {
        writeln!(w, "{header}")?;
        writeln!(w, "stage,iter,loss")?;
        for r in &report.stages {
            for (i, loss) in r.loss_history.iter().enumerate() {
                writeln!(w, "{},{i},{}", r.stage, crate::io::fmt_f64(*loss))?;
            }
        }
        Ok(())
    })?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn tensor_grid(n: usize, dim: usize) -> Result<Array2<f64>> {
    if n < 2 {
        return Err(CfnnError::InvalidArgument(
            "--grid needs at least 2 points per axis".into(),
        ));
    }
    let axis = equidistant_points(n).column(0).to_vec();
    let total = n
        .checked_pow(dim as u32)
        .filter(|&t| t <= 10_000_000)
        .ok_or_else(|| {
            CfnnError::InvalidArgument(format!("grid of {n}^{dim} points is too large"))
        })?;
    Ok(Array2::from_shape_fn((total, dim), |(row, col)| {
        let idx = row / n.pow((dim - 1 - col) as u32) % n;
        axis[idx]
    }))
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = fs::read(&args.model).map_err(|e| CfnnError::io(&args.model, e))?;
    let (model, meta) = deserialize_model(&bytes)?;
    let dim = model.arch.input_dim;
    let points = match (&args.points, args.grid) {
        (Some(path), _) => {
            let file = fs::File::open(path).map_err(|e| CfnnError::io(path, e))?;
            read_points_csv(std::io::BufReader::new(file))?
        }
        (None, grid) => tensor_grid(grid.unwrap_or(1000), dim)?,
    };
    if points.ncols() != dim {
        return Err(CfnnError::DimensionMismatch {
            expected: dim,
            got: points.ncols(),
        });
    }
    // validates the domain before anything is written
    let inputs = PreparedInputs::new(&points)?;
    let predictions = model.predict_prepared(&inputs)?;
    let stem = args
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let path = args.common.out.join(format!("predictions_{stem}.csv"));
    let header = provenance_line(args.common.seed.unwrap_or(meta.seed), &config_hash(&meta));
    write_atomic(&path, |w| {
        write_predictions_csv(w, &header, &points, &predictions)
    })?;
    let _ = writeln!(out, "wrote {} ({} points)", path.display(), points.nrows());
    Ok(())
}

fn cmd_suite(args: &SuiteArgs, out: &mut dyn Write) -> Result<()> {
    let suite: Suite = args.name.parse()?;
    let (mut cfg, file) = resolve_config(suite, &args.common, &args.budget)?;
    if let Some(functions) = &args.functions {
        cfg.functions = functions.iter().map(|f| f.parse()).collect::<Result<_>>()?;
    } else if let Some(functions) = file.functions {
        cfg.functions = functions;
    }
    if let Some(dims) = args.dims.clone().or(file.dims) {
        cfg.dims = dims;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    let report = run_suite(&cfg)?;
    let outputs = write_suite_outputs(&args.common.out, &report)?;
    for cell in &report.cells {
        let last = cell.final_stage();
        let _ = writeln!(
            out,
            "{} d={}: train RMSE {:.3e}, max error {:.3e}, test RMSE {:.3e}",
            cell.function,
            cell.dim,
            last.train_rmse,
            last.train_max_error,
            last.test_rmse.unwrap_or(f64::NAN)
        );
    }
    let _ = writeln!(
        out,
        "wrote {} CSVs and {}",
        outputs.cell_csvs.len() + 1,
        outputs.summary.display()
    );
    Ok(())
}

fn exit_code(err: &CfnnError) -> i32 {
    match err {
        CfnnError::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Runs the CLI with `argv` (program name first), writing progress to `out`
/// and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Suite(a) => cmd_suite(a, out),
        Command::Losscurve(a) => cmd_losscurve(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "cfnn: {e}");
            exit_code(&e)
        }
    }
}

/// Process entry point.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_grid_covers_corners() {
        let g = tensor_grid(3, 2).unwrap();
        assert_eq!(g.nrows(), 9);
        assert_eq!(g.row(0).to_vec(), vec![-1.0, -1.0]);
        assert_eq!(g.row(1).to_vec(), vec![-1.0, 0.0]);
        assert_eq!(g.row(8).to_vec(), vec![1.0, 1.0]);
        assert!(tensor_grid(1, 1).is_err());
        assert!(tensor_grid(1000, 5).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["cfnn", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        let code = run(
            ["cfnn", "train", "--fn", "f42", "--out", "/nonexistent"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_USAGE);
        assert!(String::from_utf8_lossy(&err).contains("unknown function id"));
        assert_eq!(run(["cfnn", "--help"], &mut out, &mut err), EXIT_OK);
    }

    #[test]
    fn one_d_function_rejects_other_dims() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            ["cfnn", "train", "--fn", "f2", "--dim", "3"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_USAGE);
    }
}
