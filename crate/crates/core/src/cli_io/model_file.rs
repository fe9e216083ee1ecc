//! JSON persistence of [`FairModel`].
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "mode": "nonparametric" | "parametric",
//!   "epsilon": 0.0,
//!   "jitter": {"magnitude": 0.0, "seed": 0},
//!   "weights": {"A": 0.5, "B": 0.5},
//!   "per_group_values": {"A": [0.0, 2.0], "B": [1.0, 3.0]},
//!   "pooled_fair_values": [0.5, 0.5, 2.5, 2.5],
//!   "parametric": {"family": "gaussian", "theta": [0.0, 1.0], "support_transform": null} | null,
//!   "generator": "dpfair 0.1.0"
//! }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! loaded model transforms bit-for-bit like the one that was saved.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::barycenter::{BarycenterModel, GroupWeights};
use crate::empirical::{EmpiricalDistribution, JitterSpec};
use crate::error::{FairError, Result};
use crate::fair_predictor::{FairMode, FairModel, ModelMetadata, MODEL_FORMAT_VERSION};
use crate::parametric::{FamilyKind, ParametricFamily, ParametricModel, SupportTransform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricSpec {
    pub family: FamilyKind,
    pub theta: Vec<f64>,
    pub support_transform: Option<SupportTransform>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub mode: FairMode,
    pub epsilon: f64,
    pub jitter: JitterSpec,
    pub weights: BTreeMap<String, f64>,
    pub per_group_values: BTreeMap<String, Vec<f64>>,
    pub pooled_fair_values: Vec<f64>,
    pub parametric: Option<ParametricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

impl From<&FairModel> for ModelFile {
    fn from(model: &FairModel) -> Self {
        let bary = model.barycenter();
        Self {
            format_version: model.metadata().format_version,
            mode: model.mode(),
            epsilon: model.epsilon(),
            jitter: model.jitter(),
            weights: bary.weights().as_map().clone(),
            per_group_values: bary
                .per_group()
                .iter()
                .map(|(s, d)| (s.clone(), d.values().to_vec()))
                .collect(),
            pooled_fair_values: bary.pooled_fair().values().to_vec(),
            parametric: model.parametric().map(|m| ParametricSpec {
                family: m.family().kind,
                theta: m.theta().to_vec(),
                support_transform: m.family().support,
            }),
            generator: Some(model.metadata().generator.clone()),
        }
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<FairModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(FairError::Parse(format!(
                "unsupported model format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let parametric = match (self.mode, self.parametric) {
            (FairMode::Nonparametric, None) => None,
            (FairMode::Parametric, Some(spec)) => {
                let family = ParametricFamily { kind: spec.family, support: spec.support_transform };
                Some(ParametricModel::new(family, spec.theta)?)
            }
            (FairMode::Parametric, None) => {
                return Err(FairError::Parse("mode is `parametric` but `parametric` is null".into()))
            }
            (FairMode::Nonparametric, Some(_)) => {
                return Err(FairError::Parse("mode is `nonparametric` but `parametric` is set".into()))
            }
        };
        let weights = GroupWeights::from_stored(self.weights)?;
        let mut per_group = BTreeMap::new();
        for (s, values) in self.per_group_values {
            let dist = EmpiricalDistribution::from_sorted(values)
                .map_err(|e| FairError::Parse(format!("per_group_values[{s}]: {e}")))?;
            per_group.insert(s, dist);
        }
        let expected: usize = per_group.values().map(|d| d.len()).sum();
        if self.pooled_fair_values.len() != expected {
            return Err(FairError::Parse(format!(
                "pooled_fair_values has {} entries, expected {expected}",
                self.pooled_fair_values.len()
            )));
        }
        let pooled = EmpiricalDistribution::from_sorted(self.pooled_fair_values)
            .map_err(|e| FairError::Parse(format!("pooled_fair_values: {e}")))?;
        let jitter = JitterSpec::new(self.jitter.magnitude, self.jitter.seed)?;
        let barycenter = BarycenterModel::from_stored(weights, per_group, pooled)?;
        let metadata = ModelMetadata {
            format_version: self.format_version,
            generator: self.generator.unwrap_or_default(),
        };
        Ok(FairModel::new(barycenter, parametric, self.epsilon, jitter)?.with_metadata(metadata))
    }
}

pub fn model_to_json(model: &FairModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from(model))?)
}

pub fn model_from_json(json: &str) -> Result<FairModel> {
    serde_json::from_str::<ModelFile>(json)
        .map_err(|e| FairError::Parse(format!("model file: {e}")))?
        .into_model()
}

pub fn save_model(model: &FairModel, path: &Path) -> Result<()> {
    let mut json = model_to_json(model)?;
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<FairModel> {
    model_from_json(&fs::read_to_string(path)?)
}
