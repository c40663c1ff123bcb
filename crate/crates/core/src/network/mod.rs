//! The Chebyshev feature network.
//!
//! The first hidden layer maps an input `x` in `[-1, 1]^d` to
//! `cos(W_cf · arccos(x))`, one generalized Chebyshev feature per neuron with a
//! learnable real frequency vector and no bias. The remaining hidden layers are
//! dense `tanh` layers and the output layer is linear.

mod init;
mod pass;

pub use init::{init_params, xavier_std};
pub use pass::{backward, forward, predict, ForwardCache, MseObjective, PreparedInputs};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{CfnnError, Result};

/// Activation used by the first hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum FeatureLayer {
    /// `cos(W arccos(x))`, no bias.
    #[default]
    Chebyshev,
    /// `tanh(W x + b)` with Xavier initialization; the plain-network baseline.
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CfnnArchitecture {
    pub input_dim: usize,
    /// Hidden layers including the feature layer.
    pub hidden_layers: usize,
    pub width: usize,
    #[serde(default)]
    pub feature: FeatureLayer,
}

impl CfnnArchitecture {
    pub fn new(input_dim: usize, hidden_layers: usize, width: usize) -> Result<Self> {
        Self::with_feature(input_dim, hidden_layers, width, FeatureLayer::Chebyshev)
    }

    pub fn with_feature(
        input_dim: usize,
        hidden_layers: usize,
        width: usize,
        feature: FeatureLayer,
    ) -> Result<Self> {
        if input_dim == 0 || width == 0 {
            return Err(CfnnError::InvalidArgument(
                "input dimension and width must be positive".into(),
            ));
        }
        if hidden_layers < 2 {
            return Err(CfnnError::InvalidArgument(format!(
                "need a feature layer and at least one tanh layer, got {hidden_layers} hidden layers"
            )));
        }
        Ok(Self {
            input_dim,
            hidden_layers,
            width,
            feature,
        })
    }

    /// Number of dense `tanh` layers after the feature layer.
    pub fn dense_layers(&self) -> usize {
        self.hidden_layers - 1
    }

    pub fn num_params(&self) -> usize {
        let k = self.width;
        let feature_bias = match self.feature {
            FeatureLayer::Chebyshev => 0,
            FeatureLayer::Tanh => k,
        };
        k * self.input_dim + feature_bias + self.dense_layers() * (k * k + k) + k + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out x in`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Every learnable parameter of one network.
///
/// The flat layout is `w_cf` (row-major), the feature bias when present, each
/// dense layer's weights (row-major) then bias, `w_out`, and `b_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfnnParams {
    /// `width x input_dim`; row `k` holds the frequencies of feature `k`.
    pub w_cf: Array2<f64>,
    /// Present only for a `tanh` feature layer.
    pub feature_bias: Option<Array1<f64>>,
    pub hidden: Vec<DenseLayer>,
    pub w_out: Array1<f64>,
    pub b_out: f64,
}

impl CfnnParams {
    pub fn zeros(arch: &CfnnArchitecture) -> Self {
        let k = arch.width;
        Self {
            w_cf: Array2::zeros((k, arch.input_dim)),
            feature_bias: match arch.feature {
                FeatureLayer::Chebyshev => None,
                FeatureLayer::Tanh => Some(Array1::zeros(k)),
            },
            hidden: (0..arch.dense_layers())
                .map(|_| DenseLayer {
                    weights: Array2::zeros((k, k)),
                    bias: Array1::zeros(k),
                })
                .collect(),
            w_out: Array1::zeros(k),
            b_out: 0.0,
        }
    }

    pub fn arch(&self) -> CfnnArchitecture {
        CfnnArchitecture {
            input_dim: self.w_cf.ncols(),
            hidden_layers: self.hidden.len() + 1,
            width: self.w_cf.nrows(),
            feature: if self.feature_bias.is_some() {
                FeatureLayer::Tanh
            } else {
                FeatureLayer::Chebyshev
            },
        }
    }

    pub fn num_params(&self) -> usize {
        self.arch().num_params()
    }

    pub fn is_finite(&self) -> bool {
        self.w_cf.iter().all(|v| v.is_finite())
            && self
                .feature_bias
                .iter()
                .all(|b| b.iter().all(|v| v.is_finite()))
            && self.hidden.iter().all(|l| {
                l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite())
            })
            && self.w_out.iter().all(|v| v.is_finite())
            && self.b_out.is_finite()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.flatten_into(&mut out);
        out
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.w_cf.iter());
        if let Some(b) = &self.feature_bias {
            out.extend(b.iter());
        }
        for layer in &self.hidden {
            out.extend(layer.weights.iter());
            out.extend(layer.bias.iter());
        }
        out.extend(self.w_out.iter());
        out.push(self.b_out);
    }

    pub fn unflatten(arch: &CfnnArchitecture, flat: &[f64]) -> Result<Self> {
        if flat.len() != arch.num_params() {
            return Err(CfnnError::Shape(format!(
                "expected {} parameters, got {}",
                arch.num_params(),
                flat.len()
            )));
        }
        let mut params = Self::zeros(arch);
        params.assign_flat(flat);
        Ok(params)
    }

    /// Overwrites every entry from `flat`, which must have the right length.
    pub(crate) fn assign_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        let mut fill = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[offset..offset + dst.len()]);
            offset += dst.len();
        };
        fill(self.w_cf.as_slice_mut().expect("standard layout"));
        if let Some(b) = &mut self.feature_bias {
            fill(b.as_slice_mut().expect("standard layout"));
        }
        for layer in &mut self.hidden {
            fill(layer.weights.as_slice_mut().expect("standard layout"));
            fill(layer.bias.as_slice_mut().expect("standard layout"));
        }
        fill(self.w_out.as_slice_mut().expect("standard layout"));
        fill(std::slice::from_mut(&mut self.b_out));
    }
}

/// Generalized Chebyshev feature `T_alpha(x) = cos(alpha arccos x)`.
pub fn chebyshev_feature(alpha: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(CfnnError::Domain { value: x });
    }
    Ok((alpha * x.acos()).cos())
}

/// `(1/N) sum (targets - predictions)^2`
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(CfnnError::DimensionMismatch {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(CfnnError::InvalidArgument(
            "loss over an empty batch".into(),
        ));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (t - p) * (t - p))
        .sum();
    Ok(sum / targets.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Classical Chebyshev values by the three-term recurrence.
    fn recurrence(n: usize, x: f64) -> f64 {
        let (mut prev, mut cur) = (1.0, x);
        if n == 0 {
            return prev;
        }
        for _ in 1..n {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_feature(0.0, 0.3).unwrap(), 1.0);
        assert!((chebyshev_feature(1.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((chebyshev_feature(3.0, 0.5).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            chebyshev_feature(1.0, 1.01),
            Err(CfnnError::Domain { .. })
        ));
    }

    #[test]
    fn chebyshev_matches_recurrence_for_integer_degree() {
        for n in 0..=10 {
            for i in 0..=100 {
                let x = -1.0 + 2.0 * i as f64 / 100.0;
                let got = chebyshev_feature(n as f64, x).unwrap();
                assert!((got - recurrence(n, x)).abs() <= 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert!((mse_loss(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 14.0 / 3.0).abs() < 1e-15);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn architecture_requires_two_hidden_layers() {
        assert!(CfnnArchitecture::new(1, 1, 8).is_err());
        let arch = CfnnArchitecture::new(1, 3, 40).unwrap();
        assert_eq!(arch.num_params(), 40 + 2 * (1600 + 40) + 41);
    }

    proptest! {
        #[test]
        fn chebyshev_even_in_alpha(alpha in -50.0f64..50.0, x in -1.0f64..=1.0) {
            let a = chebyshev_feature(alpha, x).unwrap();
            let b = chebyshev_feature(-alpha, x).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn flatten_round_trip(
            seed in any::<u64>(),
            d in 1usize..4,
            layers in 2usize..5,
            k in 1usize..6,
            tanh_first in any::<bool>(),
        ) {
            let feature = if tanh_first { FeatureLayer::Tanh } else { FeatureLayer::Chebyshev };
            let arch = CfnnArchitecture::with_feature(d, layers, k, feature).unwrap();
            let mut rng = crate::rng::SeededRng::new(seed);
            let flat: Vec<f64> = (0..arch.num_params()).map(|_| rng.normal(0.0, 3.0)).collect();
            let params = CfnnParams::unflatten(&arch, &flat).unwrap();
            let back = params.flatten();
            prop_assert!(flat.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(params.arch(), arch);
        }
    }
}
