//! Evaluation quantities: distributional unfairness (max group-to-pooled
//! `W_1`), squared-error risk, budget deviation (mean shift), the empirical
//! excess risk of exact fairness, and F1 for thresholded scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::barycenter::{BarycenterModel, GroupWeights, GroupedScores};
use crate::empirical::{EmpiricalDistribution, JitterSpec};
use crate::error::{FairError, Result};
use crate::parallel;
use crate::wasserstein::{wasserstein_empirical, WassersteinOrder};

pub const DEFAULT_F1_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub unfairness: f64,
    pub per_group_w1: BTreeMap<String, f64>,
    pub risk_mse: Option<f64>,
    pub budget_deviation: f64,
    pub excess_risk_fair: Option<f64>,
    pub f1: Option<f64>,
}

/// Optional reference data for a [`MetricReport`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ReportInputs<'a> {
    /// Targets for the risk (held-out labels or a known regression function).
    pub reference: Option<&'a [f64]>,
    pub labels: Option<&'a [bool]>,
    pub threshold: Option<f64>,
}

impl MetricReport {
    /// Metrics of `transformed` scores against the `raw` scores they came from.
    pub fn evaluate<S: AsRef<str> + Sync>(
        transformed: &[f64],
        raw: &[f64],
        groups: &[S],
        inputs: ReportInputs<'_>,
    ) -> Result<Self> {
        let (unfairness, per_group_w1) = group_unfairness(transformed, groups)?;
        let budget_deviation = budget_deviation(transformed, raw)?;
        let risk_mse = inputs.reference.map(|r| risk_mse(transformed, r)).transpose()?;
        let f1 = inputs
            .labels
            .map(|l| f1_score(transformed, l, inputs.threshold.unwrap_or(DEFAULT_F1_THRESHOLD)))
            .transpose()?;
        Ok(Self { unfairness, per_group_w1, risk_mse, budget_deviation, excess_risk_fair: None, f1 })
    }
}

/// `max_s W_1(pooled, group s)` over the groups that occur in `groups`,
/// together with the per-group distances.
pub fn group_unfairness<S: AsRef<str> + Sync>(
    scores: &[f64],
    groups: &[S],
) -> Result<(f64, BTreeMap<String, f64>)> {
    if scores.len() != groups.len() {
        return Err(FairError::SizeMismatch { left: scores.len(), right: groups.len() });
    }
    let pooled = EmpiricalDistribution::from_values(scores, JitterSpec::disabled())?;
    let mut split: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (x, s) in scores.iter().zip(groups) {
        split.entry(s.as_ref()).or_default().push(*x);
    }
    if let Some((s, v)) = split.iter().find(|(_, v)| v.len() < 2) {
        return Err(FairError::DegenerateGroup { group: s.to_string(), count: v.len() });
    }
    let entries: Vec<(&str, Vec<f64>)> = split.into_iter().collect();
    let distances = parallel::map_slice(&entries, |(_, values)| {
        EmpiricalDistribution::from_values(values, JitterSpec::disabled())
            .map(|d| wasserstein_empirical(&pooled, &d, WassersteinOrder::W1))
    });
    let mut per_group = BTreeMap::new();
    for ((s, _), d) in entries.iter().zip(distances) {
        per_group.insert(s.to_string(), d?);
    }
    let max = per_group.values().copied().fold(0.0, f64::max);
    Ok((max, per_group))
}

/// Unfairness of `scores`, requiring the observed groups to match `weights`.
pub fn unfairness<S: AsRef<str> + Sync>(
    scores: &[f64],
    groups: &[S],
    weights: &GroupWeights,
) -> Result<(f64, BTreeMap<String, f64>)> {
    if let Some(s) = groups.iter().find(|s| weights.get(s.as_ref()).is_none()) {
        return Err(FairError::UnknownGroup { group: s.as_ref().to_string(), index: None });
    }
    if let Some(s) = weights.groups().find(|w| !groups.iter().any(|g| g.as_ref() == *w)) {
        return Err(FairError::DegenerateGroup { group: s.to_string(), count: 0 });
    }
    group_unfairness(scores, groups)
}

/// `mean(transformed) − mean(raw)`.
pub fn budget_deviation(transformed: &[f64], raw: &[f64]) -> Result<f64> {
    if transformed.len() != raw.len() {
        return Err(FairError::SizeMismatch { left: transformed.len(), right: raw.len() });
    }
    if raw.is_empty() {
        return Err(FairError::EmptySample);
    }
    let n = raw.len() as f64;
    Ok(transformed.iter().sum::<f64>() / n - raw.iter().sum::<f64>() / n)
}

pub fn risk_mse(predicted: &[f64], reference: &[f64]) -> Result<f64> {
    if predicted.len() != reference.len() {
        return Err(FairError::SizeMismatch { left: predicted.len(), right: reference.len() });
    }
    if predicted.is_empty() {
        return Err(FairError::EmptySample);
    }
    Ok(predicted.iter().zip(reference).map(|(p, r)| (p - r).powi(2)).sum::<f64>() / predicted.len() as f64)
}

/// `Σ_s p_s W_2²(group s of data, pooled fair distribution)`.
pub fn empirical_excess_risk_fair(data: &GroupedScores, bary: &BarycenterModel) -> Result<f64> {
    let grouped = data.by_group();
    if let Some(s) = grouped.keys().find(|s| bary.weights().get(s).is_none()) {
        return Err(FairError::UnknownGroup { group: s.to_string(), index: None });
    }
    if let Some(s) = bary.weights().groups().find(|s| !grouped.contains_key(s)) {
        return Err(FairError::UnknownGroup { group: s.to_string(), index: None });
    }
    let mut total = 0.0;
    for (s, values) in grouped {
        let d = EmpiricalDistribution::from_values(&values, JitterSpec::disabled())?;
        let w2 = wasserstein_empirical(&d, bary.pooled_fair(), WassersteinOrder::W2);
        total += bary.weights().get(s).expect("checked") * w2 * w2;
    }
    Ok(total)
}

/// F1 of the decisions `score >= threshold`; 0 when precision + recall = 0.
pub fn f1_score(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(FairError::SizeMismatch { left: scores.len(), right: labels.len() });
    }
    if !threshold.is_finite() {
        return Err(FairError::InvalidParameter(format!("threshold must be finite, got {threshold}")));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&x, &y) in scores.iter().zip(labels) {
        match (x >= threshold, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}
