//! The first-layer feature cos(alpha * arccos x): a Chebyshev polynomial for
//! integer alpha and a smooth interpolant between them otherwise.
//!
//!     cargo run --example chebyshev_features

use cfnn::network::chebyshev_feature;

fn main() -> cfnn::Result<()> {
    let xs = [-1.0, -0.5, 0.0, 0.3, 0.9, 1.0];

    println!(
        "{:>6} {}",
        "alpha",
        xs.map(|x| format!("{x:>9.2}")).join("")
    );
    for alpha in [0.0, 1.0, 2.0, 2.5, 3.0, 7.3, 30.0] {
        let row: Vec<String> = xs
            .iter()
            .map(|&x| chebyshev_feature(alpha, x).map(|v| format!("{v:>9.4}")))
            .collect::<cfnn::Result<_>>()?;
        println!("{alpha:>6} {}", row.join(""));
    }

    // T_3(x) = 4x^3 - 3x
    let x = 0.3;
    println!(
        "\nT_3(0.3) = {:.15}, 4x^3 - 3x = {:.15}",
        chebyshev_feature(3.0, x)?,
        4.0 * x * x * x - 3.0 * x
    );

    match chebyshev_feature(2.0, 1.5) {
        Ok(_) => unreachable!(),
        Err(e) => println!("outside [-1, 1]: {e}"),
    }
    Ok(())
}
