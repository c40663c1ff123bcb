//! Benchmark target functions and the datasets sampled from them.
//!
//! All functions live on `[-1, 1]^d`. `F1`..`F6` are one-dimensional; `F7`..`F9`
//! take any dimension.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{CfnnError, Result};
use crate::rng::SeededRng;

/// Oscillation parameter of `F4` used throughout the benchmarks.
pub const DEFAULT_PERIODIC_M: f64 = 30.0;
/// Number of Gaussian modes in a sampled `F9` instance.
pub const MULTIMODAL_MODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
}

impl FunctionId {
    pub const ONE_D: [FunctionId; 6] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5, Self::F6];
    pub const MULTI_D: [FunctionId; 3] = [Self::F7, Self::F8, Self::F9];

    pub fn is_one_dimensional(self) -> bool {
        Self::ONE_D.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
            Self::F6 => "f6",
            Self::F7 => "f7",
            Self::F8 => "f8",
            Self::F9 => "f9",
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = CfnnError;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.to_ascii_lowercase().as_str() {
            "f1" => Self::F1,
            "f2" => Self::F2,
            "f3" => Self::F3,
            "f4" => Self::F4,
            "f5" => Self::F5,
            "f6" => Self::F6,
            "f7" => Self::F7,
            "f8" => Self::F8,
            "f9" => Self::F9,
            other => {
                return Err(CfnnError::InvalidArgument(format!(
                    "unknown function id `{other}` (expected f1..f9)"
                )))
            }
        };
        Ok(id)
    }
}

/// One benchmark function together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetFunction {
    /// `x`
    Linear,
    /// `sin(2x + 1) + 0.2 e^{1.3x}`
    SmoothNonlinear,
    /// `|sin(pi x)|^2`
    SineSquare,
    /// `(1 - x^2/2) cos(m (x + 0.5 x^3))`
    Periodic { m: f64 },
    /// `|x|`
    Abs,
    /// `sign(x)`, with `sign(0) = 0`
    Sign,
    /// `sum_i x_i`
    LinearSum { dim: usize },
    /// `exp(-sum_i sigma_i^2 ((x_i + 1)/2 - omega_i)^2)`
    Gaussian { sigma: Vec<f64>, omega: Vec<f64> },
    /// `sum_i alpha_i exp(-sum_j sigma_ij^2 ((x_j + 1)/2 - omega_ij)^2)`.
    /// `sigma` and `omega` are `modes x dim`.
    MultiModal {
        alpha: Vec<f64>,
        sigma: Array2<f64>,
        omega: Array2<f64>,
    },
}

impl TargetFunction {
    /// Builds the benchmark instance for `id` in dimension `dim`.
    ///
    /// `seed` is only consumed by `F9`, whose mode parameters are random.
    pub fn benchmark(id: FunctionId, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(CfnnError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if id.is_one_dimensional() && dim != 1 {
            return Err(CfnnError::DimensionMismatch {
                expected: 1,
                got: dim,
            });
        }
        Ok(match id {
            FunctionId::F1 => Self::Linear,
            FunctionId::F2 => Self::SmoothNonlinear,
            FunctionId::F3 => Self::SineSquare,
            FunctionId::F4 => Self::Periodic {
                m: DEFAULT_PERIODIC_M,
            },
            FunctionId::F5 => Self::Abs,
            FunctionId::F6 => Self::Sign,
            FunctionId::F7 => Self::LinearSum { dim },
            FunctionId::F8 => Self::gaussian_peak(dim),
            FunctionId::F9 => Self::sample_multimodal(dim, seed),
        })
    }

    /// Gaussian peak with unit widths centred at the upper corner.
    pub fn gaussian_peak(dim: usize) -> Self {
        Self::Gaussian {
            sigma: vec![1.0; dim],
            omega: vec![1.0; dim],
        }
    }

    /// Random multi-modal instance: ten modes, unit widths, centres uniform on
    /// `[-1, 1]` and amplitudes uniform on `[-10, 10]`.
    pub fn sample_multimodal(dim: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let alpha: Vec<f64> = (0..MULTIMODAL_MODES)
            .map(|_| rng.uniform_range(-10.0, 10.0))
            .collect();
        let omega =
            Array2::from_shape_simple_fn((MULTIMODAL_MODES, dim), || rng.uniform_range(-1.0, 1.0));
        Self::MultiModal {
            alpha,
            sigma: Array2::ones((MULTIMODAL_MODES, dim)),
            omega,
        }
    }

    pub fn id(&self) -> FunctionId {
        match self {
            Self::Linear => FunctionId::F1,
            Self::SmoothNonlinear => FunctionId::F2,
            Self::SineSquare => FunctionId::F3,
            Self::Periodic { .. } => FunctionId::F4,
            Self::Abs => FunctionId::F5,
            Self::Sign => FunctionId::F6,
            Self::LinearSum { .. } => FunctionId::F7,
            Self::Gaussian { .. } => FunctionId::F8,
            Self::MultiModal { .. } => FunctionId::F9,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::LinearSum { dim } => *dim,
            Self::Gaussian { sigma, .. } => sigma.len(),
            Self::MultiModal { sigma, .. } => sigma.ncols(),
            _ => 1,
        }
    }

    /// Evaluates the function at one point.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(CfnnError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Some(&value) = x.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(CfnnError::Domain { value });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: ArrayView1<'_, f64>) -> f64 {
        let gauss = |sigma: ArrayView1<'_, f64>, omega: ArrayView1<'_, f64>| {
            let exponent: f64 = x
                .iter()
                .zip(sigma)
                .zip(omega)
                .map(|((&xi, &s), &w)| s * s * ((xi + 1.0) / 2.0 - w).powi(2))
                .sum();
            (-exponent).exp()
        };
        match self {
            Self::Linear => x[0],
            Self::SmoothNonlinear => (2.0 * x[0] + 1.0).sin() + 0.2 * (1.3 * x[0]).exp(),
            Self::SineSquare => (std::f64::consts::PI * x[0]).sin().abs().powi(2),
            Self::Periodic { m } => {
                let t = x[0];
                (1.0 - t * t / 2.0) * (m * (t + 0.5 * t * t * t)).cos()
            }
            Self::Abs => x[0].abs(),
            Self::Sign => {
                if x[0] > 0.0 {
                    1.0
                } else if x[0] < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::LinearSum { .. } => x.sum(),
            Self::Gaussian { sigma, omega } => gauss(
                ArrayView1::from(sigma.as_slice()),
                ArrayView1::from(omega.as_slice()),
            ),
            Self::MultiModal {
                alpha,
                sigma,
                omega,
            } => alpha
                .iter()
                .zip(sigma.rows())
                .zip(omega.rows())
                .map(|((&a, s), w)| a * gauss(s, w))
                .sum(),
        }
    }
}

/// Free-function form of [`TargetFunction::eval`].
pub fn eval_target(f: &TargetFunction, x: &[f64]) -> Result<f64> {
    f.eval(ArrayView1::from(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Equidistant,
    UniformRandom { seed: u64 },
}

/// Sample points in `[-1, 1]^d` and the target values at them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Array2<f64>,
    pub values: Array1<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Same points, different targets.
    pub fn with_values(&self, values: Array1<f64>) -> Self {
        assert_eq!(values.len(), self.len());
        Self {
            points: self.points.clone(),
            values,
            provenance: self.provenance,
        }
    }

    /// Writes `x1,...,xd,f` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim())
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("f".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (row, value) in self.points.rows().into_iter().zip(&self.values) {
            let fields: Vec<String> = row
                .iter()
                .chain(std::iter::once(value))
                .map(|v| crate::io::fmt_f64(*v))
                .collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

fn fill_values(f: &TargetFunction, points: &Array2<f64>) -> Array1<f64> {
    points
        .rows()
        .into_iter()
        .map(|x| f.eval_unchecked(x))
        .collect()
}

/// `n` equally spaced points on `[-1, 1]`, endpoints included.
pub fn equidistant_points(n: usize) -> Array2<f64> {
    let step = 2.0 / (n - 1) as f64;
    Array2::from_shape_fn((n, 1), |(i, _)| {
        if i == n - 1 {
            1.0
        } else {
            -1.0 + i as f64 * step
        }
    })
}

pub fn make_equidistant_dataset(f: &TargetFunction, n: usize) -> Result<Dataset> {
    if f.dim() != 1 {
        return Err(CfnnError::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    if n < 2 {
        return Err(CfnnError::InvalidArgument(format!(
            "equidistant grid needs at least 2 points, got {n}"
        )));
    }
    let points = equidistant_points(n);
    let values = fill_values(f, &points);
    Ok(Dataset {
        points,
        values,
        provenance: Provenance::Equidistant,
    })
}

/// `n` i.i.d. uniform points on `[-1, 1]^d`, drawn row by row from `seed`.
pub fn make_uniform_dataset(f: &TargetFunction, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(CfnnError::InvalidArgument(
            "dataset needs at least one point".into(),
        ));
    }
    let mut rng = SeededRng::new(seed);
    let points = Array2::from_shape_simple_fn((n, f.dim()), || rng.uniform_range(-1.0, 1.0));
    let values = fill_values(f, &points);
    Ok(Dataset {
        points,
        values,
        provenance: Provenance::UniformRandom { seed },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn one(f: &TargetFunction, x: f64) -> f64 {
        eval_target(f, &[x]).unwrap()
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(one(&TargetFunction::Linear, 0.7), 0.7);
        assert_eq!(one(&TargetFunction::Periodic { m: 30.0 }, 0.0), 1.0);
        // sin(1) + 0.2, from a 20-digit reference
        assert!(close(
            one(&TargetFunction::SmoothNonlinear, 0.0),
            1.041_470_984_807_896_5,
            1e-15
        ));
        let f7 = TargetFunction::LinearSum { dim: 3 };
        assert_eq!(eval_target(&f7, &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(one(&TargetFunction::Sign, 0.0), 0.0);
    }

    #[test]
    fn eval_rejects_wrong_dimension_and_domain() {
        let f7 = TargetFunction::LinearSum { dim: 3 };
        assert!(matches!(
            eval_target(&f7, &[0.0, 0.0]),
            Err(CfnnError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
        assert!(matches!(
            eval_target(&TargetFunction::Abs, &[1.5]),
            Err(CfnnError::Domain { .. })
        ));
    }

    #[test]
    fn benchmark_rejects_multi_dim_for_one_d_functions() {
        assert!(TargetFunction::benchmark(FunctionId::F2, 3, 0).is_err());
        assert_eq!(
            TargetFunction::benchmark(FunctionId::F8, 4, 0)
                .unwrap()
                .dim(),
            4
        );
    }

    #[test]
    fn equidistant_examples() {
        let ds = make_equidistant_dataset(&TargetFunction::Linear, 3).unwrap();
        assert_eq!(ds.points.column(0).to_vec(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(ds.values.to_vec(), vec![-1.0, 0.0, 1.0]);
        let ds = make_equidistant_dataset(&TargetFunction::Abs, 3).unwrap();
        assert_eq!(ds.values.to_vec(), vec![1.0, 0.0, 1.0]);

        let ds = make_equidistant_dataset(&TargetFunction::SmoothNonlinear, 3000).unwrap();
        assert_eq!(ds.len(), 3000);
        let col = ds.points.column(0);
        assert_eq!(col[0], -1.0);
        assert_eq!(col[2999], 1.0);
        for w in col.to_vec().windows(2) {
            assert!(close(w[1] - w[0], 2.0 / 2999.0, 1e-15));
        }
    }

    #[test]
    fn equidistant_rejects_bad_input() {
        assert!(make_equidistant_dataset(&TargetFunction::Linear, 1).is_err());
        let f7 = TargetFunction::LinearSum { dim: 2 };
        assert!(make_equidistant_dataset(&f7, 10).is_err());
    }

    #[test]
    fn uniform_dataset_shape_range_and_determinism() {
        let f7 = TargetFunction::LinearSum { dim: 2 };
        let ds = make_uniform_dataset(&f7, 20_000, 42).unwrap();
        assert_eq!(ds.points.dim(), (20_000, 2));
        assert!(ds.points.iter().all(|v| (-1.0..=1.0).contains(v)));

        let a = make_uniform_dataset(&f7, 5, 7).unwrap();
        let b = make_uniform_dataset(&f7, 5, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_dataset_coordinate_means_near_zero() {
        let f8 = TargetFunction::gaussian_peak(10);
        let ds = make_uniform_dataset(&f8, 10_000, 1).unwrap();
        for col in ds.points.columns() {
            assert!(col.mean().unwrap().abs() < 0.05);
        }
    }

    #[test]
    fn multimodal_params() {
        let f = TargetFunction::sample_multimodal(5, 3);
        match &f {
            TargetFunction::MultiModal {
                alpha,
                sigma,
                omega,
            } => {
                assert_eq!(alpha.len(), 10);
                assert!(sigma.iter().all(|&s| s == 1.0));
                assert_eq!(omega.dim(), (10, 5));
            }
            _ => unreachable!(),
        }
        let a = TargetFunction::sample_multimodal(2, 3);
        assert_eq!(a, TargetFunction::sample_multimodal(2, 3));
        if let TargetFunction::MultiModal { alpha, omega, .. } = a {
            assert!(omega.iter().all(|w| (-1.0..=1.0).contains(w)));
            assert!(alpha.iter().all(|a| (-10.0..=10.0).contains(a)));
        }
    }

    #[test]
    fn multimodal_matches_reference_double_loop() {
        let d = 3;
        let f = TargetFunction::sample_multimodal(d, 17);
        let TargetFunction::MultiModal {
            alpha,
            sigma,
            omega,
        } = &f
        else {
            unreachable!()
        };
        let mut rng = SeededRng::new(2);
        for _ in 0..50 {
            let x: Vec<f64> = (0..d).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            let mut expected = 0.0;
            for i in 0..MULTIMODAL_MODES {
                let mut e = 0.0;
                for j in 0..d {
                    let t = (x[j] + 1.0) / 2.0 - omega[[i, j]];
                    e += sigma[[i, j]] * sigma[[i, j]] * t * t;
                }
                expected += alpha[i] * (-e).exp();
            }
            let got = eval_target(&f, &x).unwrap();
            assert!(close(got, expected, 1e-12 * expected.abs().max(1.0)));
        }
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let ds = make_equidistant_dataset(&TargetFunction::SmoothNonlinear, 4).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,f"));
        for (line, (x, v)) in lines.zip(ds.points.column(0).iter().zip(&ds.values)) {
            let parts: Vec<f64> = line.split(',').map(|p| p.parse().unwrap()).collect();
            assert_eq!(parts[0].to_bits(), x.to_bits());
            assert_eq!(parts[1].to_bits(), v.to_bits());
        }
    }

    proptest! {
        #[test]
        fn sign_is_odd(x in -1.0f64..=1.0) {
            prop_assume!(x != 0.0);
            prop_assert_eq!(one(&TargetFunction::Sign, x), -one(&TargetFunction::Sign, -x));
        }

        #[test]
        fn sine_square_nonnegative(x in -1.0f64..=1.0) {
            prop_assert!(one(&TargetFunction::SineSquare, x) >= 0.0);
        }

        #[test]
        fn gaussian_peak_in_unit_interval(x in proptest::collection::vec(-1.0f64..=1.0, 1..8)) {
            let f = TargetFunction::gaussian_peak(x.len());
            let v = eval_target(&f, &x).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn sine_square_integer_zeros() {
        for k in [-1.0, 0.0, 1.0] {
            assert!(one(&TargetFunction::SineSquare, k) < 1e-30);
        }
    }
}
