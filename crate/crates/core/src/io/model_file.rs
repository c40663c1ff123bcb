//! Versioned, human-readable model files.
//!
//! A model is a JSON document. Every float (schedule constants, normalizers,
//! parameters) is stored as a decimal string with 17 significant digits so that
//! loading reproduces the exact bits and files diff cleanly.

use serde::{Deserialize, Serialize};

use super::{fmt_f64, TOOL_VERSION};
use crate::error::{CfnnError, Result};
use crate::multistage::{ComposedModel, StageModel, StageSchedule};
use crate::network::{CfnnArchitecture, CfnnParams};

pub const MODEL_FORMAT: &str = "cfnn-model";
pub const MODEL_VERSION: u32 = 1;

/// Provenance recorded alongside a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RunMetadata {
    pub function: Option<String>,
    pub dim: usize,
    pub seed: u64,
    pub scale: Option<String>,
    pub adam_epochs: usize,
    pub lbfgs_iters: usize,
    /// What one unit of `lbfgs_iters` counts.
    pub lbfgs_budget_unit: String,
}

impl RunMetadata {
    pub fn new(
        function: Option<String>,
        dim: usize,
        seed: u64,
        scale: Option<String>,
        adam_epochs: usize,
        lbfgs_iters: usize,
    ) -> Self {
        Self {
            function,
            dim,
            seed,
            scale,
            adam_epochs,
            lbfgs_iters,
            lbfgs_budget_unit: "iterations".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StageRecord {
    stage: usize,
    lambda_rate: String,
    shift: String,
    /// Absent for stage 0.
    epsilon: Option<String>,
    seed: u64,
    params: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    tool_version: String,
    architecture: CfnnArchitecture,
    stage_count: usize,
    stages: Vec<StageRecord>,
    metadata: RunMetadata,
}

fn parse_f64(field: &str, text: &str) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| CfnnError::Format(format!("{field}: `{text}` is not a number")))
}

fn stage_record(epsilon: Option<f64>, stage: &StageModel) -> StageRecord {
    StageRecord {
        stage: stage.schedule.stage,
        lambda_rate: fmt_f64(stage.schedule.lambda_rate),
        shift: fmt_f64(stage.schedule.shift),
        epsilon: epsilon.map(fmt_f64),
        seed: stage.seed,
        params: stage.params.flatten().into_iter().map(fmt_f64).collect(),
    }
}

/// Deterministic UTF-8 bytes for `model`.
pub fn serialize_model(model: &ComposedModel, metadata: &RunMetadata) -> Vec<u8> {
    let doc = ModelDocument {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        tool_version: TOOL_VERSION.into(),
        architecture: model.arch,
        stage_count: model.num_stages(),
        stages: model
            .stages()
            .map(|(eps, stage)| stage_record(eps, stage))
            .collect(),
        metadata: metadata.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("model document serializes");
    bytes.push(b'\n');
    bytes
}

pub fn deserialize_model(bytes: &[u8]) -> Result<(ComposedModel, RunMetadata)> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| CfnnError::Format(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(CfnnError::Format("not a cfnn model file".into()));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CfnnError::Format("missing version".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(CfnnError::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_VERSION,
        });
    }
    let doc: ModelDocument =
        serde_json::from_value(value).map_err(|e| CfnnError::Format(e.to_string()))?;
    let arch = CfnnArchitecture::with_feature(
        doc.architecture.input_dim,
        doc.architecture.hidden_layers,
        doc.architecture.width,
        doc.architecture.feature,
    )?;
    if doc.stages.is_empty() || doc.stages.len() != doc.stage_count {
        return Err(CfnnError::Format(format!(
            "stage_count {} but {} stages present",
            doc.stage_count,
            doc.stages.len()
        )));
    }

    let mut stages = Vec::with_capacity(doc.stages.len());
    for (i, rec) in doc.stages.into_iter().enumerate() {
        let flat = rec
            .params
            .iter()
            .map(|p| parse_f64("params", p))
            .collect::<Result<Vec<f64>>>()?;
        let params = CfnnParams::unflatten(&arch, &flat)?;
        let epsilon = rec
            .epsilon
            .as_deref()
            .map(|e| parse_f64("epsilon", e))
            .transpose()?;
        match (i, epsilon) {
            (0, None) => {}
            (0, Some(_)) => return Err(CfnnError::Format("stage 0 carries no epsilon".into())),
            (_, None) => return Err(CfnnError::Format(format!("stage {i} is missing epsilon"))),
            (_, Some(e)) if e.is_nan() || e <= 0.0 => {
                return Err(CfnnError::Format(format!(
                    "stage {i} has non-positive epsilon"
                )))
            }
            _ => {}
        }
        let model = StageModel {
            params,
            schedule: StageSchedule {
                stage: rec.stage,
                lambda_rate: parse_f64("lambda_rate", &rec.lambda_rate)?,
                shift: parse_f64("shift", &rec.shift)?,
            },
            seed: rec.seed,
        };
        stages.push((epsilon, model));
    }
    let mut iter = stages.into_iter();
    let (_, stage0) = iter.next().expect("checked non-empty");
    let tail = iter.map(|(e, m)| (e.expect("checked above"), m)).collect();
    Ok((ComposedModel { arch, stage0, tail }, doc.metadata))
}
