//! Benchmark suites: the one-dimensional functions, the multi-dimensional
//! functions, and two ablations on the oscillatory function, each at a full
//! ("paper") or reduced ("desk") scale.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{CfnnError, Result};
use crate::multistage::{
    train_multistage, ComposedModel, MultistageOptions, RunStatus, StageReport, StageSchedule,
    TrainConfig,
};
use crate::network::{CfnnArchitecture, FeatureLayer};
use crate::targets::{
    make_equidistant_dataset, make_uniform_dataset, Dataset, FunctionId, TargetFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    OneD,
    MultiDim,
    /// Multi-stage training with a `tanh` first layer instead of Chebyshev features.
    Ablation1,
    /// A single wide Chebyshev network trained in one stage.
    Ablation2,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::OneD => "oned",
            Suite::MultiDim => "multidim",
            Suite::Ablation1 => "ablation1",
            Suite::Ablation2 => "ablation2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CfnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oned" | "1d" => Ok(Suite::OneD),
            "multidim" | "nd" => Ok(Suite::MultiDim),
            "ablation1" => Ok(Suite::Ablation1),
            "ablation2" => Ok(Suite::Ablation2),
            other => Err(CfnnError::InvalidArgument(format!(
                "unknown suite `{other}` (expected oned, multidim, ablation1, ablation2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Paper,
    #[default]
    Desk,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = CfnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(CfnnError::InvalidArgument(format!(
                "unknown scale `{other}` (expected paper or desk)"
            ))),
        }
    }
}

/// How the Chebyshev frequencies of each stage are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `Exp(5) ` at stage 0, then `Exp(5^(1-s)) + 2 * 5^(s-1)`.
    FrequencyEscalating,
    /// `Exp(rate) + shift` at every stage.
    Constant { rate: f64, shift: f64 },
}

impl ScheduleKind {
    pub fn schedule(&self) -> Box<dyn Fn(usize) -> StageSchedule + Send + Sync> {
        match *self {
            ScheduleKind::FrequencyEscalating => Box::new(StageSchedule::frequency_escalating),
            ScheduleKind::Constant { rate, shift } => {
                Box::new(StageSchedule::constant(rate, shift))
            }
        }
    }
}

/// Everything needed to reproduce one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub scale: Scale,
    /// Hidden layers, the feature layer included.
    pub hidden_layers: usize,
    pub width: usize,
    pub feature: FeatureLayer,
    pub schedule: ScheduleKind,
    pub stages: usize,
    pub train_points: usize,
    pub test_points: usize,
    pub adam_epochs: usize,
    /// L-BFGS budget, counted in iterations (each runs its own line search).
    pub lbfgs_iters: usize,
    pub functions: Vec<FunctionId>,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Worker threads for independent cells.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(suite: Suite, scale: Scale, seed: u64) -> Self {
        let paper = scale == Scale::Paper;
        let one_d = ExperimentConfig {
            suite,
            scale,
            hidden_layers: 3,
            width: 40,
            feature: FeatureLayer::Chebyshev,
            schedule: ScheduleKind::FrequencyEscalating,
            stages: 4,
            train_points: 3000,
            test_points: 10_000,
            adam_epochs: if paper { 5000 } else { 2000 },
            lbfgs_iters: if paper { 20_000 } else { 5000 },
            functions: FunctionId::ONE_D.to_vec(),
            dims: vec![1],
            seed,
            jobs: 1,
        };
        match suite {
            Suite::OneD => one_d,
            Suite::MultiDim => ExperimentConfig {
                hidden_layers: 4,
                stages: if paper { 20 } else { 6 },
                train_points: if paper { 20_000 } else { 5000 },
                test_points: if paper { 10_000 } else { 2000 },
                adam_epochs: if paper { 5000 } else { 1000 },
                lbfgs_iters: if paper { 20_000 } else { 2000 },
                functions: FunctionId::MULTI_D.to_vec(),
                dims: if paper {
                    vec![2, 5, 10, 20]
                } else {
                    vec![2, 5]
                },
                ..one_d
            },
            Suite::Ablation1 => ExperimentConfig {
                feature: FeatureLayer::Tanh,
                functions: vec![FunctionId::F4],
                ..one_d
            },
            Suite::Ablation2 => ExperimentConfig {
                width: 160,
                stages: 1,
                schedule: ScheduleKind::Constant {
                    rate: 5f64.powi(-3),
                    shift: 0.0,
                },
                adam_epochs: if paper { 5000 } else { 1000 },
                lbfgs_iters: if paper { 5000 } else { 2000 },
                functions: vec![FunctionId::F4],
                ..one_d
            },
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig::new(self.adam_epochs, self.lbfgs_iters)
    }

    pub fn arch(&self, dim: usize) -> Result<CfnnArchitecture> {
        CfnnArchitecture::with_feature(dim, self.hidden_layers, self.width, self.feature)
    }

    /// Every `(function, dimension)` pair the suite runs.
    pub fn cells(&self) -> Vec<(FunctionId, usize)> {
        self.functions
            .iter()
            .flat_map(|&f| {
                let dims: Vec<usize> = if f.is_one_dimensional() {
                    vec![1]
                } else {
                    self.dims.clone()
                };
                dims.into_iter().map(move |d| (f, d))
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CfnnError::InvalidArgument(msg));
        if self.stages == 0 || self.jobs == 0 || self.train_points == 0 || self.test_points == 0 {
            return bad("stages, jobs and point counts must be positive".into());
        }
        if self.functions.is_empty() {
            return bad("no functions selected".into());
        }
        match self.suite {
            Suite::OneD | Suite::Ablation1 | Suite::Ablation2 => {
                if let Some(f) = self.functions.iter().find(|f| !f.is_one_dimensional()) {
                    return bad(format!("{f} is not a one-dimensional function"));
                }
                if self.train_points < 2 || self.test_points < 2 {
                    return bad("equidistant grids need at least 2 points".into());
                }
            }
            Suite::MultiDim => {
                if self.dims.is_empty() || self.dims.contains(&0) {
                    return bad("multi-dimensional suite needs positive dimensions".into());
                }
            }
        }
        if matches!(self.suite, Suite::Ablation1 | Suite::Ablation2)
            && self.functions != [FunctionId::F4]
        {
            return bad("ablations run on f4 only".into());
        }
        Ok(())
    }
}

/// `sqrt(mean((p - t)^2))`
pub fn rmse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    crate::network::mse_loss(predictions, truth).map(f64::sqrt)
}

/// One trained `(function, dimension)` cell of a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub function: FunctionId,
    pub dim: usize,
    pub seed: u64,
    pub scale: Scale,
    pub status: RunStatus,
    pub stages: Vec<StageReport>,
    pub wall_seconds: f64,
}

impl CellReport {
    pub fn final_stage(&self) -> &StageReport {
        self.stages.last().expect("a run has at least one stage")
    }

    pub fn train_rmse_by_stage(&self) -> Vec<f64> {
        self.stages.iter().map(|r| r.train_rmse).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellReport>,
    pub wall_seconds: f64,
}

impl SuiteReport {
    pub fn cell(&self, function: FunctionId, dim: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.function == function && c.dim == dim)
    }
}

/// Seed for a derived random stream, so that streams for different cells and
/// purposes never coincide.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 finalizer folded over the parts
    let mix = |mut z: u64| {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    parts.iter().fold(mix(seed), |acc, &p| {
        mix(acc.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(p)))
    })
}

const TRAIN_TAG: u64 = 1;
const TEST_TAG: u64 = 2;
const PARAMS_TAG: u64 = 3;

/// Target and datasets of one cell.
pub fn cell_data(
    cfg: &ExperimentConfig,
    function: FunctionId,
    dim: usize,
) -> Result<(TargetFunction, Dataset, Dataset)> {
    let cell = [function as u64, dim as u64];
    let f = TargetFunction::benchmark(
        function,
        dim,
        derive_seed(cfg.seed, &[cell[0], cell[1], PARAMS_TAG]),
    )?;
    let (train, test) = if dim == 1 && cfg.suite != Suite::MultiDim {
        (
            make_equidistant_dataset(&f, cfg.train_points)?,
            make_equidistant_dataset(&f, cfg.test_points)?,
        )
    } else {
        (
            make_uniform_dataset(
                &f,
                cfg.train_points,
                derive_seed(cfg.seed, &[cell[0], cell[1], TRAIN_TAG]),
            )?,
            make_uniform_dataset(
                &f,
                cfg.test_points,
                derive_seed(cfg.seed, &[cell[0], cell[1], TEST_TAG]),
            )?,
        )
    };
    Ok((f, train, test))
}

/// Trains one cell and returns its report and model.
pub fn run_cell(
    cfg: &ExperimentConfig,
    function: FunctionId,
    dim: usize,
) -> Result<(CellReport, ComposedModel)> {
    let start = Instant::now();
    let wrap = |e: CfnnError| CfnnError::Function {
        function: format!("{function} (d={dim})"),
        source: Box::new(e),
    };
    let (_, train, test) = cell_data(cfg, function, dim).map_err(wrap)?;
    let schedule = cfg.schedule.schedule();
    let opts = MultistageOptions {
        arch: cfg.arch(dim)?,
        stages: cfg.stages,
        train: cfg.train_config(),
        schedule: &*schedule,
        seed: cfg.seed,
    };
    let run = train_multistage(&train, Some(&test), &opts).map_err(wrap)?;
    let report = CellReport {
        function,
        dim,
        seed: cfg.seed,
        scale: cfg.scale,
        status: run.status,
        stages: run.reports,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, run.model))
}

/// Runs every cell on up to `cfg.jobs` worker threads. Cells are independent
/// and deterministically seeded, so the worker count never changes results.
fn run_cells(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let start = Instant::now();
    let cells = cfg.cells();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CellReport>>>> =
        Mutex::new(cells.iter().map(|_| None).collect());
    let workers = cfg.jobs.min(cells.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(f, d)) = cells.get(i) else { break };
                let out = run_cell(cfg, f, d).map(|(report, _)| report);
                results.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    let cells = results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        config: cfg.clone(),
        cells,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn expect_suite(cfg: &ExperimentConfig, allowed: &[Suite]) -> Result<()> {
    if allowed.contains(&cfg.suite) {
        Ok(())
    } else {
        Err(CfnnError::InvalidArgument(format!(
            "suite {} cannot run here (expected one of {:?})",
            cfg.suite, allowed
        )))
    }
}

pub fn run_1d_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    expect_suite(cfg, &[Suite::OneD])?;
    run_cells(cfg)
}

pub fn run_multidim_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    expect_suite(cfg, &[Suite::MultiDim])?;
    run_cells(cfg)
}

pub fn run_ablation(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    expect_suite(cfg, &[Suite::Ablation1, Suite::Ablation2])?;
    run_cells(cfg)
}

/// Dispatches on `cfg.suite`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    match cfg.suite {
        Suite::OneD => run_1d_suite(cfg),
        Suite::MultiDim => run_multidim_suite(cfg),
        Suite::Ablation1 | Suite::Ablation2 => run_ablation(cfg),
    }
}
