use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &[&str] = &[
    "--stages",
    "2",
    "--adam-epochs",
    "20",
    "--lbfgs-iters",
    "20",
    "--train-points",
    "100",
    "--test-points",
    "100",
    "--width",
    "8",
];

fn cfnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfnn"))
        .args(args)
        .output()
        .unwrap()
}

fn train_tiny(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--fn",
        "f4",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(TINY);
    args.extend_from_slice(extra);
    cfnn(&args)
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn train_is_reproducible_and_eval_reads_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(train_tiny(&a, &[]).status.success());
    assert!(train_tiny(&b, &[]).status.success());
    assert_eq!(
        files(&a),
        ["model_f4_d1_desk_seed3.json", "stages_f4_d1_desk_seed3.csv"]
    );
    for name in files(&a) {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name}"
        );
    }
    let csv = fs::read_to_string(a.join("stages_f4_d1_desk_seed3.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# cfnn "));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("stage,epsilon,train_rmse"));
    assert_eq!(lines.count(), 2);

    let model = a.join("model_f4_d1_desk_seed3.json");
    let out = cfnn(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--grid",
        "50",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let preds = fs::read_to_string(a.join("predictions_model_f4_d1_desk_seed3.csv")).unwrap();
    let mut lines = preds.lines();
    assert!(lines.next().unwrap().starts_with("# cfnn "));
    assert_eq!(lines.next().unwrap(), "x1,prediction");
    assert_eq!(lines.count(), 50);
}

#[test]
fn eval_outside_domain_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(train_tiny(dir.path(), &[]).status.success());
    let points = dir.path().join("points.csv");
    fs::write(&points, "x1\n0.5\n1.5\n").unwrap();
    let out_dir = dir.path().join("eval");
    let model = dir.path().join("model_f4_d1_desk_seed3.json");
    let out = cfnn(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(!out_dir
        .join("predictions_model_f4_d1_desk_seed3.csv")
        .exists());
}

#[test]
fn usage_errors() {
    assert_eq!(cfnn(&["train", "--fn", "f10"]).status.code(), Some(1));
    assert_eq!(
        cfnn(&["suite", "--name", "everything"]).status.code(),
        Some(1)
    );
    assert_eq!(cfnn(&["train"]).status.code(), Some(1));
    assert_eq!(
        cfnn(&["train", "--fn", "f2", "--scale", "huge"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cfnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"stages": 1, "seed": 3}"#).unwrap();
    let mut args = vec!["train", "--fn", "f4", "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(&TINY[2..]);
    args.extend_from_slice(&["--config", config.to_str().unwrap()]);
    assert!(cfnn(&args).status.success());
    let csv = fs::read_to_string(dir.path().join("stages_f4_d1_desk_seed3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    args.extend_from_slice(&["--stages", "2"]);
    assert!(cfnn(&args).status.success());
    let csv = fs::read_to_string(dir.path().join("stages_f4_d1_desk_seed3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    fs::write(&config, r#"{"stagez": 1}"#).unwrap();
    assert_eq!(cfnn(&args).status.code(), Some(1));
}

#[test]
fn suite_and_losscurve_write_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec![
        "suite",
        "--name",
        "multidim",
        "--dims",
        "2",
        "--functions",
        "f7,f8",
        "--out",
        out,
    ];
    args.extend_from_slice(TINY);
    let res = cfnn(&args);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let names = files(dir.path());
    assert!(
        names.contains(&"multidim_desk_seed1_f7_d2.csv".to_string()),
        "{names:?}"
    );
    assert!(names.contains(&"multidim_desk_seed1_f8_d2.csv".to_string()));
    assert!(names.contains(&"multidim_desk_seed1_stages.csv".to_string()));
    assert!(names.contains(&"multidim_desk_seed1_summary.json".to_string()));
    for name in names.iter().filter(|n| n.ends_with(".csv")) {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("# cfnn "), "{name}");
    }

    let mut args = vec!["losscurve", "--fn", "f2", "--out", out];
    args.extend_from_slice(TINY);
    assert!(cfnn(&args).status.success());
    let text = fs::read_to_string(dir.path().join("losscurve_f2_d1_desk_seed1.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert!(text.lines().nth(1) == Some("stage,iter,loss"));
    assert!(rows.len() > 40 && rows[0].starts_with("0,0,"));
}
