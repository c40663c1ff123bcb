use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{fmt_f64, write_atomic, TOOL_VERSION};
use crate::error::{CfnnError, Result};
use crate::experiment::{ExperimentConfig, SuiteReport};
use crate::multistage::write_reports_csv;

/// First 16 hex digits of the SHA-256 of the JSON form of `config`.
pub fn config_hash<T: Serialize + ?Sized>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes)[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Comment line that heads every CSV the tool writes.
pub fn provenance_line(seed: u64, config_hash: &str) -> String {
    format!("# cfnn {TOOL_VERSION} seed={seed} config={config_hash}")
}

fn file_prefix(cfg: &ExperimentConfig) -> String {
    format!("{}_{}_seed{}", cfg.suite, cfg.scale, cfg.seed)
}

#[derive(Serialize)]
struct CellSummary<'a> {
    function: String,
    dim: usize,
    seed: u64,
    scale: String,
    status: &'a crate::multistage::RunStatus,
    final_train_rmse: f64,
    final_test_rmse: Option<f64>,
    final_train_max_error: f64,
    wall_seconds: f64,
    stages: &'a [crate::multistage::StageReport],
}

#[derive(Serialize)]
struct Summary<'a> {
    tool_version: &'a str,
    config_hash: String,
    config: &'a ExperimentConfig,
    wall_seconds: f64,
    cells: Vec<CellSummary<'a>>,
}

/// JSON summary of a suite run; keys appear in a fixed order.
pub fn summary_json(report: &SuiteReport) -> String {
    let summary = Summary {
        tool_version: TOOL_VERSION,
        config_hash: config_hash(&report.config),
        config: &report.config,
        wall_seconds: report.wall_seconds,
        cells: report
            .cells
            .iter()
            .map(|c| {
                let last = c.final_stage();
                CellSummary {
                    function: c.function.to_string(),
                    dim: c.dim,
                    seed: c.seed,
                    scale: c.scale.to_string(),
                    status: &c.status,
                    final_train_rmse: last.train_rmse,
                    final_test_rmse: last.test_rmse,
                    final_train_max_error: last.train_max_error,
                    wall_seconds: c.wall_seconds,
                    stages: &c.stages,
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Files written by [`write_suite_outputs`].
#[derive(Debug, Clone)]
pub struct SuiteOutputs {
    /// One stage-report CSV per `(function, dimension)` cell.
    pub cell_csvs: Vec<PathBuf>,
    /// All cells in one CSV, one row per function, dimension and stage.
    pub combined_csv: PathBuf,
    pub summary: PathBuf,
}

/// Writes per-cell CSVs, a combined CSV and the JSON summary into `out_dir`.
/// File names embed the suite, scale and seed.
pub fn write_suite_outputs(out_dir: &Path, report: &SuiteReport) -> Result<SuiteOutputs> {
    let cfg = &report.config;
    let prefix = file_prefix(cfg);
    let header = provenance_line(cfg.seed, &config_hash(cfg));

    let mut cell_csvs = Vec::new();
    for cell in &report.cells {
        let path = out_dir.join(format!("{prefix}_{}_d{}.csv", cell.function, cell.dim));
        write_atomic(&path, |w| {
            writeln!(w, "{header}")?;
            write_reports_csv(&cell.stages, w)
        })?;
        cell_csvs.push(path);
    }

    let combined_csv = out_dir.join(format!("{prefix}_stages.csv"));
    write_atomic(&combined_csv, |w| {
        writeln!(w, "{header}")?;
        writeln!(
            w,
            "function,dim,stage,epsilon,train_rmse,test_rmse,train_max_error,adam_final_loss,lbfgs_final_loss,retries"
        )?;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for cell in &report.cells {
            for r in &cell.stages {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    cell.function,
                    cell.dim,
                    r.stage,
                    opt(r.epsilon),
                    fmt_f64(r.train_rmse),
                    opt(r.test_rmse),
                    fmt_f64(r.train_max_error),
                    fmt_f64(r.adam_final_loss),
                    fmt_f64(r.lbfgs_final_loss),
                    r.retries
                )?;
            }
        }
        Ok(())
    })?;

    let summary = out_dir.join(format!("{prefix}_summary.json"));
    let json = summary_json(report);
    write_atomic(&summary, |w| w.write_all(json.as_bytes()))?;

    Ok(SuiteOutputs {
        cell_csvs,
        combined_csv,
        summary,
    })
}

/// `x1,...,xd,prediction` rows.
pub fn write_predictions_csv<W: Write>(
    mut w: W,
    header: &str,
    points: &Array2<f64>,
    predictions: &Array1<f64>,
) -> std::io::Result<()> {
    writeln!(w, "{header}")?;
    let cols: Vec<String> = (1..=points.ncols()).map(|i| format!("x{i}")).collect();
    writeln!(w, "{},prediction", cols.join(","))?;
    for (row, p) in points.rows().into_iter().zip(predictions) {
        let fields: Vec<String> = row
            .iter()
            .chain(std::iter::once(p))
            .map(|v| fmt_f64(*v))
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Reads a point CSV. Lines starting with `#` are skipped. With a header row
/// only the `x*` columns are used (so dataset CSVs load directly); without one
/// every column is a coordinate.
pub fn read_points_csv<R: BufRead>(reader: R) -> Result<Array2<f64>> {
    let mut columns: Option<Vec<usize>> = None;
    let mut data = Vec::new();
    let mut ncols = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CfnnError::io("<points>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if ncols.is_none() && columns.is_none() && fields.iter().any(|f| f.parse::<f64>().is_err())
        {
            columns = Some(
                fields
                    .iter()
                    .enumerate()
                    .filter(|(_, name)| name.starts_with('x'))
                    .map(|(i, _)| i)
                    .collect(),
            );
            continue;
        }
        let picked: Vec<&str> = match &columns {
            Some(idx) => idx.iter().filter_map(|&i| fields.get(i).copied()).collect(),
            None => fields,
        };
        let row = picked
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    CfnnError::Format(format!("line {}: `{f}` is not a number", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(CfnnError::Format(format!(
                    "line {}: expected {n} coordinates, got {}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        data.extend(row);
    }
    let ncols = ncols
        .filter(|&n| n > 0)
        .ok_or_else(|| CfnnError::Format("no points found".into()))?;
    Array2::from_shape_vec((data.len() / ncols, ncols), data)
        .map_err(|e| CfnnError::Format(e.to_string()))
}
