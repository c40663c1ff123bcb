//! Save a trained model, load it back and check the predictions agree bit for
//! bit. Floats are stored as 17-significant-digit strings.
//!
//!     cargo run --example model_roundtrip

use cfnn::io::{deserialize_model, serialize_model, RunMetadata};
use cfnn::multistage::{train_multistage, MultistageOptions, StageSchedule, TrainConfig};
use cfnn::network::CfnnArchitecture;
use cfnn::targets::{equidistant_points, make_equidistant_dataset, FunctionId, TargetFunction};

fn main() -> cfnn::Result<()> {
    let f = TargetFunction::benchmark(FunctionId::F3, 1, 0)?;
    let train = make_equidistant_dataset(&f, 300)?;
    let schedule = StageSchedule::frequency_escalating;
    let opts = MultistageOptions {
        arch: CfnnArchitecture::new(1, 3, 12)?,
        stages: 2,
        train: TrainConfig::new(200, 300),
        schedule: &schedule,
        seed: 2,
    };
    let run = train_multistage(&train, None, &opts)?;

    let meta = RunMetadata::new(Some("f3".into()), 1, 2, None, 200, 300);
    let bytes = serialize_model(&run.model, &meta);
    let (loaded, loaded_meta) = deserialize_model(&bytes)?;

    let grid = equidistant_points(1000);
    let before = run.model.predict(&grid)?;
    let after = loaded.predict(&grid)?;
    let identical = before
        .iter()
        .zip(&after)
        .all(|(a, b)| a.to_bits() == b.to_bits());

    println!(
        "{} stages, {} bytes of JSON",
        loaded.num_stages(),
        bytes.len()
    );
    println!("metadata survives: {}", loaded_meta == meta);
    println!("predictions on 1000 points bit-identical: {identical}");
    println!(
        "re-serialized bytes identical: {}",
        serialize_model(&loaded, &loaded_meta) == bytes
    );
    Ok(())
}
