//! Chebyshev feature neural networks for high-accuracy function approximation.
//!
//! A [`network`] maps `x` in `[-1, 1]^d` through a layer of generalized
//! Chebyshev features `cos(W arccos x)` with learnable real frequencies, then
//! through dense `tanh` layers to a linear output. [`multistage`] fits a
//! sequence of such networks, each one to the normalized training residual of
//! the sum of its predecessors, drawing the initial frequencies of later stages
//! from progressively wider exponential distributions.
//!
//! [`experiment`] packages the benchmark suites (one-dimensional functions,
//! multi-dimensional functions, and two ablations) at a full and a reduced
//! "desk" scale, and [`io`] handles model files and reports.

pub mod error;
pub mod experiment;
pub mod io;
pub mod multistage;
pub mod network;
pub mod optim;
pub mod rng;
pub mod targets;

#[doc(hidden)]
pub mod cli;

pub use error::{CfnnError, Result};
