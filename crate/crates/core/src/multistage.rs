//! Multi-stage residual training.
//!
//! Stage 0 fits the target. Stage `s >= 1` fits `E_s / eps_s`, where
//! `E_s = f - f_hat^(s-1)` is the training residual of the networks so far and
//! `eps_s` its RMS, and the composed predictor becomes
//! `f_hat^(s) = N^(0) + sum_s eps_s N^(s)`.

use std::io::Write;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{CfnnError, Result};
use crate::network::{
    init_params, predict, CfnnArchitecture, CfnnParams, MseObjective, PreparedInputs,
};
use crate::optim::{run_adam, run_lbfgs, AdamConfig, LbfgsConfig, OptimTrace, Termination};
use crate::targets::Dataset;

/// Residual RMS below which further stages would only fit rounding noise.
pub const EPSILON_FLOOR: f64 = 1e-15;
/// Seed offset for the single retry of a failed stage.
pub const RETRY_SEED_OFFSET: u64 = 1000;

/// Exponential initialization of one stage's Chebyshev frequencies:
/// `W_cf ~ shift + Exp(lambda_rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSchedule {
    pub stage: usize,
    pub lambda_rate: f64,
    pub shift: f64,
}

impl StageSchedule {
    /// `(5, 0)` for stage 0, then `(5^(1-s), 2 * 5^(s-1))`: later stages start
    /// at higher and more widely spread frequencies.
    pub fn frequency_escalating(stage: usize) -> Self {
        if stage == 0 {
            return Self {
                stage,
                lambda_rate: 5.0,
                shift: 0.0,
            };
        }
        let s = stage as i32;
        Self {
            stage,
            lambda_rate: 5f64.powi(1 - s),
            shift: 2.0 * 5f64.powi(s - 1),
        }
    }

    /// The same distribution at every stage.
    pub fn constant(lambda_rate: f64, shift: f64) -> impl Fn(usize) -> StageSchedule {
        move |stage| StageSchedule {
            stage,
            lambda_rate,
            shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub lbfgs: LbfgsConfig,
}

impl TrainConfig {
    pub fn new(adam_epochs: usize, lbfgs_iters: usize) -> Self {
        Self {
            adam: AdamConfig::with_epochs(adam_epochs),
            lbfgs: LbfgsConfig::with_iters(lbfgs_iters),
        }
    }
}

/// A trained stage network and how it was initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct StageModel {
    pub params: CfnnParams,
    pub schedule: StageSchedule,
    /// Seed the parameters were initialized from (after any retry).
    pub seed: u64,
}

/// A stage network together with its optimizer histories.
#[derive(Debug, Clone)]
pub struct StageTraining {
    pub model: StageModel,
    pub adam: OptimTrace,
    pub lbfgs: OptimTrace,
    pub retries: usize,
}

impl StageTraining {
    pub fn final_loss(&self) -> f64 {
        self.lbfgs.final_loss
    }

    /// Adam losses followed by L-BFGS losses.
    pub fn loss_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.adam.losses.iter().chain(&self.lbfgs.losses).copied()
    }
}

/// `N^(0) + sum_s eps_s N^(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedModel {
    pub arch: CfnnArchitecture,
    pub stage0: StageModel,
    /// `(eps_s, N^(s))` for `s = 1..S-1`, in order.
    pub tail: Vec<(f64, StageModel)>,
}

impl ComposedModel {
    pub fn single(arch: CfnnArchitecture, stage0: StageModel) -> Self {
        Self {
            arch,
            stage0,
            tail: Vec::new(),
        }
    }

    pub fn num_stages(&self) -> usize {
        1 + self.tail.len()
    }

    pub fn stages(&self) -> impl Iterator<Item = (Option<f64>, &StageModel)> {
        std::iter::once((None, &self.stage0)).chain(self.tail.iter().map(|(e, m)| (Some(*e), m)))
    }

    pub fn predict(&self, points: &Array2<f64>) -> Result<Array1<f64>> {
        self.predict_prepared(&PreparedInputs::new(points)?)
    }

    /// Stage outputs summed in stage order.
    pub fn predict_prepared(&self, inputs: &PreparedInputs) -> Result<Array1<f64>> {
        let mut acc = predict(&self.stage0.params, inputs)?;
        for (epsilon, stage) in &self.tail {
            let out = predict(&stage.params, inputs)?;
            accumulate(&mut acc, *epsilon, &out);
        }
        Ok(acc)
    }
}

/// Free-function form of [`ComposedModel::predict`].
pub fn predict_composed(model: &ComposedModel, points: &Array2<f64>) -> Result<Array1<f64>> {
    model.predict(points)
}

fn accumulate(acc: &mut Array1<f64>, epsilon: f64, stage_out: &Array1<f64>) {
    acc.zip_mut_with(stage_out, |a, &o| *a += epsilon * o);
}

/// RMS of the residuals, `sqrt(mean(r^2))`.
pub fn residual_normalizer(residuals: &[f64]) -> f64 {
    if residuals.is_empty() {
        return 0.0;
    }
    (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
}

fn mean_square(values: &Array1<f64>) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Initializes one network from `schedule` and trains it with Adam followed by
/// L-BFGS on the mean squared error against `targets`.
pub fn train_stage(
    arch: &CfnnArchitecture,
    inputs: &PreparedInputs,
    targets: &Array1<f64>,
    schedule: StageSchedule,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<StageTraining> {
    let init = init_params(arch, schedule.lambda_rate, schedule.shift, seed);
    let mut objective = MseObjective::new(arch, inputs, targets)?;
    let adam = run_adam(&mut objective, &init.flatten(), &cfg.adam);
    let lbfgs = run_lbfgs(&mut objective, &adam.params, &cfg.lbfgs);
    let params = CfnnParams::unflatten(arch, &lbfgs.params)?;
    if !params.is_finite() {
        return Err(CfnnError::InvalidArgument(
            "training produced non-finite parameters".into(),
        ));
    }
    Ok(StageTraining {
        model: StageModel {
            params,
            schedule,
            seed,
        },
        adam,
        lbfgs,
        retries: 0,
    })
}

/// Per-stage summary of a multi-stage run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    /// Normalizer the stage was trained under; absent for stage 0.
    pub epsilon: Option<f64>,
    /// RMSE of the composed model after this stage, on the training set.
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    /// Max pointwise training error of the composed model after this stage.
    pub train_max_error: f64,
    pub adam_final_loss: f64,
    pub lbfgs_final_loss: f64,
    pub adam_termination: Termination,
    pub lbfgs_termination: Termination,
    pub lbfgs_iterations: usize,
    pub retries: usize,
    pub seed: u64,
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

/// `stage,epsilon,train_rmse,test_rmse,adam_final_loss,lbfgs_final_loss,retries`
pub fn write_reports_csv<W: Write>(reports: &[StageReport], mut w: W) -> std::io::Result<()> {
    use crate::io::fmt_f64;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    writeln!(
        w,
        "stage,epsilon,train_rmse,test_rmse,adam_final_loss,lbfgs_final_loss,retries"
    )?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.stage,
            opt(r.epsilon),
            fmt_f64(r.train_rmse),
            opt(r.test_rmse),
            fmt_f64(r.adam_final_loss),
            fmt_f64(r.lbfgs_final_loss),
            r.retries
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    /// All requested stages trained.
    Completed,
    /// The residual vanished exactly before `stage`.
    PerfectFit { stage: usize },
    /// The residual RMS fell below [`EPSILON_FLOOR`] before `stage`.
    BelowFloor { stage: usize, epsilon: f64 },
    /// `stage` did not beat the zero predictor even after a retry and was dropped.
    StageFailed { stage: usize },
}

#[derive(Debug, Clone)]
pub struct MultistageRun {
    pub model: ComposedModel,
    pub reports: Vec<StageReport>,
    pub status: RunStatus,
}

impl MultistageRun {
    pub fn final_train_rmse(&self) -> f64 {
        self.reports
            .last()
            .map(|r| r.train_rmse)
            .unwrap_or(f64::NAN)
    }
}

/// Options for [`train_multistage`].
pub struct MultistageOptions<'a> {
    pub arch: CfnnArchitecture,
    /// Total number of networks, stage 0 included.
    pub stages: usize,
    pub train: TrainConfig,
    pub schedule: &'a dyn Fn(usize) -> StageSchedule,
    /// Stage `s` is initialized from `seed + s`.
    pub seed: u64,
}

/// Trains a stage network, retrying once with a shifted seed when it fails to
/// beat the zero predictor. `None` if both attempts fail.
fn train_accepted_stage(
    opts: &MultistageOptions<'_>,
    inputs: &PreparedInputs,
    targets: &Array1<f64>,
    stage: usize,
) -> Result<Option<StageTraining>> {
    let baseline = mean_square(targets);
    let seed = opts.seed.wrapping_add(stage as u64);
    let schedule = (opts.schedule)(stage);
    for (retries, seed) in [seed, seed.wrapping_add(RETRY_SEED_OFFSET)]
        .into_iter()
        .enumerate()
    {
        let mut trained = train_stage(&opts.arch, inputs, targets, schedule, &opts.train, seed)
            .map_err(|e| CfnnError::Stage {
                stage,
                source: Box::new(e),
            })?;
        if trained.final_loss() < baseline {
            trained.retries = retries;
            return Ok(Some(trained));
        }
    }
    Ok(None)
}

fn rmse_and_max(truth: &Array1<f64>, prediction: &Array1<f64>) -> (f64, f64) {
    let residual: Vec<f64> = truth.iter().zip(prediction).map(|(t, p)| t - p).collect();
    let max = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    (residual_normalizer(&residual), max)
}

/// Runs up to `opts.stages` stages of residual training on `train`.
///
/// Residuals and normalizers come from the training set only; `test`, when
/// given, is evaluated for the reports and nothing else.
pub fn train_multistage(
    train: &Dataset,
    test: Option<&Dataset>,
    opts: &MultistageOptions<'_>,
) -> Result<MultistageRun> {
    if opts.stages == 0 {
        return Err(CfnnError::InvalidArgument("need at least one stage".into()));
    }
    if train.dim() != opts.arch.input_dim {
        return Err(CfnnError::DimensionMismatch {
            expected: opts.arch.input_dim,
            got: train.dim(),
        });
    }
    let inputs = PreparedInputs::new(&train.points)?;
    let test_inputs = test.map(|t| PreparedInputs::new(&t.points)).transpose()?;

    let report = |stage: usize,
                  epsilon: Option<f64>,
                  trained: &StageTraining,
                  composite: &Array1<f64>,
                  test_composite: Option<&Array1<f64>>| {
        let (train_rmse, train_max_error) = rmse_and_max(&train.values, composite);
        StageReport {
            stage,
            epsilon,
            train_rmse,
            test_rmse: test
                .zip(test_composite)
                .map(|(t, p)| rmse_and_max(&t.values, p).0),
            train_max_error,
            adam_final_loss: trained.adam.final_loss,
            lbfgs_final_loss: trained.lbfgs.final_loss,
            adam_termination: trained.adam.termination,
            lbfgs_termination: trained.lbfgs.termination,
            lbfgs_iterations: trained.lbfgs.iterations(),
            retries: trained.retries,
            seed: trained.model.seed,
            loss_history: trained.loss_history().collect(),
        }
    };

    let Some(first) = train_accepted_stage(opts, &inputs, &train.values, 0)? else {
        return Err(CfnnError::Stage {
            stage: 0,
            source: Box::new(CfnnError::InvalidArgument(
                "stage 0 did not improve on the zero predictor".into(),
            )),
        });
    };
    let mut composite = predict(&first.model.params, &inputs)?;
    let mut test_composite = test_inputs
        .as_ref()
        .map(|ti| predict(&first.model.params, ti))
        .transpose()?;
    let mut reports = vec![report(0, None, &first, &composite, test_composite.as_ref())];
    let mut model = ComposedModel::single(opts.arch, first.model);
    let mut status = RunStatus::Completed;

    for stage in 1..opts.stages {
        let residual = &train.values - &composite;
        let epsilon = residual_normalizer(residual.as_slice().expect("contiguous"));
        if epsilon == 0.0 {
            status = RunStatus::PerfectFit { stage };
            break;
        }
        if epsilon < EPSILON_FLOOR {
            status = RunStatus::BelowFloor { stage, epsilon };
            break;
        }
        let scaled = residual.mapv(|r| r / epsilon);
        let Some(trained) = train_accepted_stage(opts, &inputs, &scaled, stage)? else {
            status = RunStatus::StageFailed { stage };
            break;
        };
        accumulate(
            &mut composite,
            epsilon,
            &predict(&trained.model.params, &inputs)?,
        );
        if let (Some(acc), Some(ti)) = (test_composite.as_mut(), test_inputs.as_ref()) {
            accumulate(acc, epsilon, &predict(&trained.model.params, ti)?);
        }
        reports.push(report(
            stage,
            Some(epsilon),
            &trained,
            &composite,
            test_composite.as_ref(),
        ));
        model.tail.push((epsilon, trained.model));
    }

    Ok(MultistageRun {
        model,
        reports,
        status,
    })
}
