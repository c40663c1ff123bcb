//! Backpropagation against central finite differences on a small CFNN.
//!
//!     cargo run --example gradient_check

use cfnn::network::{init_params, CfnnArchitecture, MseObjective, PreparedInputs};
use cfnn::optim::Objective;
use cfnn::rng::SeededRng;
use ndarray::{Array1, Array2};

fn main() -> cfnn::Result<()> {
    let arch = CfnnArchitecture::new(2, 3, 6)?;
    let mut rng = SeededRng::new(4);
    let points = Array2::from_shape_fn((32, 2), |_| rng.uniform_range(-1.0, 1.0));
    let targets = Array1::from_shape_fn(32, |i| (3.0 * points[[i, 0]]).sin() * points[[i, 1]]);
    let inputs = PreparedInputs::new(&points)?;
    let mut objective = MseObjective::new(&arch, &inputs, &targets)?;

    let mut x = init_params(&arch, 1.0, 0.0, 4).flatten();
    let mut grad = vec![0.0; x.len()];
    let loss = objective.evaluate(&x, &mut grad);
    println!("{} parameters, loss {loss:.6}", x.len());

    let h = 1e-6;
    let mut scratch = vec![0.0; x.len()];
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let up = objective.evaluate(&x, &mut scratch);
        x[i] = orig - h;
        let down = objective.evaluate(&x, &mut scratch);
        x[i] = orig;
        let fd = (up - down) / (2.0 * h);
        let err = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-2);
        worst = worst.max(err);
        if i < 6 {
            println!(
                "  param {i:>3}: backprop {:>+.10e}  finite diff {fd:>+.10e}",
                grad[i]
            );
        }
    }
    println!("max relative error over all parameters: {worst:.2e}");
    Ok(())
}
