use ndarray::{Array1, Array2};

use super::{CfnnArchitecture, CfnnParams, DenseLayer, FeatureLayer};
use crate::rng::SeededRng;

/// Xavier normal standard deviation `sqrt(2 / (fan_in + fan_out))`.
pub fn xavier_std(fan_in: usize, fan_out: usize) -> f64 {
    (2.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Random initial parameters for one stage network.
///
/// Chebyshev frequencies are `shift + Exp(lambda_rate)` (rate, so mean
/// `1 / lambda_rate`); a `tanh` feature layer and every later weight matrix get
/// Xavier normal weights. All biases start at zero. Draw order is `w_cf`, the
/// dense layers in order, then `w_out`, each row-major.
pub fn init_params(arch: &CfnnArchitecture, lambda_rate: f64, shift: f64, seed: u64) -> CfnnParams {
    assert!(lambda_rate > 0.0, "exponential rate must be positive");
    let mut rng = SeededRng::new(seed);
    let k = arch.width;
    let d = arch.input_dim;

    let (w_cf, feature_bias) = match arch.feature {
        FeatureLayer::Chebyshev => (
            Array2::from_shape_simple_fn((k, d), || shift + rng.exponential(lambda_rate)),
            None,
        ),
        FeatureLayer::Tanh => {
            let std = xavier_std(d, k);
            (
                Array2::from_shape_simple_fn((k, d), || rng.normal(0.0, std)),
                Some(Array1::zeros(k)),
            )
        }
    };

    let std = xavier_std(k, k);
    let hidden = (0..arch.dense_layers())
        .map(|_| DenseLayer {
            weights: Array2::from_shape_simple_fn((k, k), || rng.normal(0.0, std)),
            bias: Array1::zeros(k),
        })
        .collect();

    let std = xavier_std(k, 1);
    let w_out = Array1::from_shape_simple_fn(k, || rng.normal(0.0, std));

    CfnnParams {
        w_cf,
        feature_bias,
        hidden,
        w_out,
        b_out: 0.0,
    }
}
