use ndarray::{Array1, Array2, Axis};

use super::{CfnnArchitecture, CfnnParams, DenseLayer, FeatureLayer};
use crate::error::{CfnnError, Result};
use crate::optim::Objective;

/// A validated batch of inputs with `arccos` precomputed.
///
/// Training evaluates the same batch thousands of times, so the domain check
/// and the `arccos` are paid once here.
#[derive(Debug, Clone)]
pub struct PreparedInputs {
    points: Array2<f64>,
    angles: Array2<f64>,
}

impl PreparedInputs {
    pub fn new(points: &Array2<f64>) -> Result<Self> {
        if let Some(&value) = points.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(CfnnError::Domain { value });
        }
        Ok(Self {
            points: points.clone(),
            angles: points.mapv(f64::acos),
        })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    fn layer_input(&self, feature: FeatureLayer) -> &Array2<f64> {
        match feature {
            FeatureLayer::Chebyshev => &self.angles,
            FeatureLayer::Tanh => &self.points,
        }
    }
}

/// Intermediates of one forward pass, consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Feature-layer input: `arccos(x)` for a Chebyshev layer, `x` otherwise. `N x d`.
    pub u: Array2<f64>,
    /// Feature-layer pre-activation, `N x K`.
    pub z1: Array2<f64>,
    /// Outputs of hidden layers 1..=L, each `N x K`.
    pub activations: Vec<Array2<f64>>,
    pub predictions: Array1<f64>,
}

fn check_dim(params: &CfnnParams, inputs: &PreparedInputs) -> Result<()> {
    if inputs.dim() != params.w_cf.ncols() {
        return Err(CfnnError::DimensionMismatch {
            expected: params.w_cf.ncols(),
            got: inputs.dim(),
        });
    }
    Ok(())
}

pub(crate) fn forward_prepared(
    params: &CfnnParams,
    inputs: &PreparedInputs,
) -> Result<ForwardCache> {
    check_dim(params, inputs)?;
    let feature = params.arch().feature;
    let u = inputs.layer_input(feature);
    let mut z1 = u.dot(&params.w_cf.t());
    let a1 = match &params.feature_bias {
        None => z1.mapv(f64::cos),
        Some(bias) => {
            z1 += bias;
            z1.mapv(f64::tanh)
        }
    };
    let mut activations = Vec::with_capacity(params.hidden.len() + 1);
    activations.push(a1);
    for layer in &params.hidden {
        let prev = activations.last().expect("feature layer output");
        let mut z = prev.dot(&layer.weights.t());
        z += &layer.bias;
        z.mapv_inplace(f64::tanh);
        activations.push(z);
    }
    let last = activations.last().expect("at least one hidden layer");
    let predictions = last.dot(&params.w_out) + params.b_out;
    Ok(ForwardCache {
        u: u.clone(),
        z1,
        activations,
        predictions,
    })
}

/// Evaluates the network on `points` and keeps the intermediates for backprop.
pub fn forward(params: &CfnnParams, points: &Array2<f64>) -> Result<(Array1<f64>, ForwardCache)> {
    let inputs = PreparedInputs::new(points)?;
    let cache = forward_prepared(params, &inputs)?;
    Ok((cache.predictions.clone(), cache))
}

/// Network output only.
pub fn predict(params: &CfnnParams, inputs: &PreparedInputs) -> Result<Array1<f64>> {
    forward_prepared(params, inputs).map(|c| c.predictions)
}

/// Reverse pass: given `dLoss/dprediction` per sample, returns `dLoss/dtheta`
/// laid out like the parameters.
pub fn backward(
    params: &CfnnParams,
    cache: &ForwardCache,
    loss_grad: &Array1<f64>,
) -> Result<CfnnParams> {
    let arch = params.arch();
    let n = cache.predictions.len();
    if loss_grad.len() != n {
        return Err(CfnnError::Shape(format!(
            "loss gradient has {} entries for a batch of {n}",
            loss_grad.len()
        )));
    }
    if cache.activations.len() != arch.hidden_layers
        || cache.z1.dim() != (n, arch.width)
        || cache.u.dim() != (n, arch.input_dim)
    {
        return Err(CfnnError::Shape(
            "forward cache does not match the parameters".into(),
        ));
    }

    let last = cache.activations.last().expect("hidden activations");
    let w_out = last.t().dot(loss_grad);
    let b_out = loss_grad.sum();

    // dLoss/dA for the current layer
    let mut delta = outer(loss_grad, &params.w_out);
    let mut hidden = Vec::with_capacity(params.hidden.len());
    for (i, layer) in params.hidden.iter().enumerate().rev() {
        let out = &cache.activations[i + 1];
        delta.zip_mut_with(out, |d, &a| *d *= 1.0 - a * a);
        let prev = &cache.activations[i];
        hidden.push(DenseLayer {
            weights: delta.t().dot(prev),
            bias: delta.sum_axis(Axis(0)),
        });
        delta = delta.dot(&layer.weights);
    }
    hidden.reverse();

    let feature_bias = match arch.feature {
        FeatureLayer::Chebyshev => {
            delta.zip_mut_with(&cache.z1, |d, &z| *d *= -z.sin());
            None
        }
        FeatureLayer::Tanh => {
            delta.zip_mut_with(&cache.activations[0], |d, &a| *d *= 1.0 - a * a);
            Some(delta.sum_axis(Axis(0)))
        }
    };
    let w_cf = delta.t().dot(&cache.u);

    Ok(CfnnParams {
        w_cf,
        feature_bias,
        hidden,
        w_out,
        b_out,
    })
}

fn outer(column: &Array1<f64>, row: &Array1<f64>) -> Array2<f64> {
    Array2::from_shape_fn((column.len(), row.len()), |(i, j)| column[i] * row[j])
}

/// Mean squared error of a network over a fixed batch, as an optimizer
/// objective on the flat parameter vector.
pub struct MseObjective<'a> {
    inputs: &'a PreparedInputs,
    targets: &'a Array1<f64>,
    scratch: CfnnParams,
    flat_grad: Vec<f64>,
}

impl<'a> MseObjective<'a> {
    pub fn new(
        arch: &CfnnArchitecture,
        inputs: &'a PreparedInputs,
        targets: &'a Array1<f64>,
    ) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(CfnnError::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        if inputs.dim() != arch.input_dim {
            return Err(CfnnError::DimensionMismatch {
                expected: arch.input_dim,
                got: inputs.dim(),
            });
        }
        Ok(Self {
            inputs,
            targets,
            scratch: CfnnParams::zeros(arch),
            flat_grad: Vec::with_capacity(arch.num_params()),
        })
    }
}

impl Objective for MseObjective<'_> {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.scratch.assign_flat(x);
        let cache =
            forward_prepared(&self.scratch, self.inputs).expect("shapes checked at construction");
        let n = self.targets.len() as f64;
        let residual = self.targets - &cache.predictions;
        let loss = residual.iter().map(|r| r * r).sum::<f64>() / n;
        let loss_grad = residual.mapv(|r| -2.0 * r / n);
        let g = backward(&self.scratch, &cache, &loss_grad).expect("cache matches parameters");
        g.flatten_into(&mut self.flat_grad);
        grad.copy_from_slice(&self.flat_grad);
        loss
    }
}
