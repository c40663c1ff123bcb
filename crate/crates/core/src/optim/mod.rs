//! Full-batch optimizers over a flat parameter vector.

mod adam;
mod lbfgs;
mod line_search;

pub use adam::{lr_at_epoch, run_adam, AdamConfig};
pub use lbfgs::{run_lbfgs, LbfgsConfig};
pub use line_search::{strong_wolfe, LineSearchOutcome};

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Losses below this are treated as converged.
pub const LOSS_FLOOR: f64 = 1e-32;
/// Window (in iterations) for the stagnation test.
pub const STAGNATION_WINDOW: usize = 200;
/// Relative loss change over the window below which a run is stagnant.
pub const STAGNATION_RTOL: f64 = 1e-16;

/// A differentiable scalar objective.
///
/// `evaluate` writes the gradient into `grad` (same length as `x`) and returns
/// the loss. It must be deterministic.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxIters,
    GradTol,
    LineSearchFail,
    LossStagnation,
    /// Loss fell below [`LOSS_FLOOR`].
    LossFloor,
    /// A non-finite loss or gradient appeared; the best earlier iterate is kept.
    NonFinite,
}

/// One accepted L-BFGS step, kept so the Wolfe conditions can be audited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptedStep {
    pub step: f64,
    pub loss_before: f64,
    pub slope_before: f64,
    pub loss_after: f64,
    pub slope_after: f64,
}

impl AcceptedStep {
    pub fn satisfies_strong_wolfe(&self, c1: f64, c2: f64) -> bool {
        self.loss_after <= self.loss_before + c1 * self.step * self.slope_before
            && self.slope_after.abs() <= c2 * self.slope_before.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimTrace {
    /// Loss at the start of each iteration.
    pub losses: Vec<f64>,
    pub params: Vec<f64>,
    /// Loss at `params`.
    pub final_loss: f64,
    pub termination: Termination,
    /// Objective evaluations, line-search trials included.
    pub evaluations: usize,
    /// Empty for Adam.
    pub steps: Vec<AcceptedStep>,
}

impl OptimTrace {
    pub fn iterations(&self) -> usize {
        self.losses.len()
    }

    /// `iter,loss` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,loss")?;
        for (i, loss) in self.losses.iter().enumerate() {
            writeln!(w, "{i},{}", crate::io::fmt_f64(*loss))?;
        }
        Ok(())
    }
}

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Early-stop test shared by both optimizers, applied to the loss history.
pub(crate) fn early_stop(losses: &[f64]) -> Option<Termination> {
    let last = *losses.last()?;
    if last < LOSS_FLOOR {
        return Some(Termination::LossFloor);
    }
    if losses.len() > STAGNATION_WINDOW {
        let then = losses[losses.len() - 1 - STAGNATION_WINDOW];
        if (then - last).abs() <= STAGNATION_RTOL * then.abs() {
            return Some(Termination::LossStagnation);
        }
    }
    None
}
