//! The calibrated fair predictor.
//!
//! A [`FairModel`] maps a raw score `x` of group `s` to
//! `(1 − ε)·fair(x, s) + ε·x`, where `fair` is the barycenter transport
//! (nonparametric mode) or the transport onto the fitted parametric
//! distribution (parametric mode). `ε = 0` is exact demographic parity on the
//! calibration sample and `ε = 1` returns the raw score.

use serde::{Deserialize, Serialize};

use crate::barycenter::{fit_barycenter_with_weights, BarycenterModel, GroupWeights, GroupedScores};
use crate::empirical::JitterSpec;
use crate::error::{FairError, Result};
use crate::metrics::{MetricReport, ReportInputs};
use crate::parallel;
use crate::parametric::{mewe_fit, parametric_transport, FamilyKind, MeweConfig, MeweFit, ParametricFamily, ParametricModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FairMode {
    Nonparametric,
    Parametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub format_version: u32,
    pub generator: String,
}

impl Default for ModelMetadata {
    fn default() -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            generator: concat!("dpfair ", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairModel {
    barycenter: BarycenterModel,
    parametric: Option<ParametricModel>,
    epsilon: f64,
    jitter: JitterSpec,
    metadata: ModelMetadata,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(FairError::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")))
    }
}

impl FairModel {
    pub fn new(
        barycenter: BarycenterModel,
        parametric: Option<ParametricModel>,
        epsilon: f64,
        jitter: JitterSpec,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { barycenter, parametric, epsilon, jitter, metadata: ModelMetadata::default() })
    }

    pub(crate) fn with_metadata(mut self, metadata: ModelMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn mode(&self) -> FairMode {
        if self.parametric.is_some() {
            FairMode::Parametric
        } else {
            FairMode::Nonparametric
        }
    }

    pub fn barycenter(&self) -> &BarycenterModel {
        &self.barycenter
    }

    pub fn parametric(&self) -> Option<&ParametricModel> {
        self.parametric.as_ref()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn jitter(&self) -> JitterSpec {
        self.jitter
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    /// Same model with a different calibration-time ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, ..self.clone() })
    }

    /// The exactly fair score (the ε = 0 endpoint).
    pub fn fair_part(&self, x: f64, s: &str) -> Result<f64> {
        match &self.parametric {
            None => self.barycenter.apply(x, s),
            Some(m) => parametric_transport(m, &self.barycenter, x, s),
        }
    }

    pub fn transform(&self, x: f64, s: &str) -> Result<f64> {
        self.transform_with_epsilon(x, s, self.epsilon)
    }

    /// As [`Self::transform`] with a per-call ε.
    pub fn transform_with_epsilon(&self, x: f64, s: &str, epsilon: f64) -> Result<f64> {
        check_epsilon(epsilon)?;
        Ok(interpolate(self.fair_part(x, s)?, x, epsilon))
    }

    pub fn transform_batch(&self, data: &GroupedScores) -> Result<Vec<f64>> {
        self.transform_batch_with_epsilon(data, self.epsilon)
    }

    /// Elementwise transform; the first row with an unknown group aborts.
    pub fn transform_batch_with_epsilon(&self, data: &GroupedScores, epsilon: f64) -> Result<Vec<f64>> {
        check_epsilon(epsilon)?;
        let fair = self.fair_parts(data)?;
        Ok(fair.iter().zip(data.scores()).map(|(&f, &x)| interpolate(f, x, epsilon)).collect())
    }

    /// Fair parts of a whole batch, in input order.
    pub fn fair_parts(&self, data: &GroupedScores) -> Result<Vec<f64>> {
        if let Some((index, s)) = data
            .groups()
            .iter()
            .enumerate()
            .find(|(_, s)| self.barycenter.per_group().get(s.as_str()).is_none())
        {
            return Err(FairError::UnknownGroup { group: s.clone(), index: Some(index) });
        }
        let scores = data.scores();
        let groups = data.groups();
        parallel::map_indexed(data.len(), |i| self.fair_part(scores[i], &groups[i]))
            .into_iter()
            .collect()
    }
}

#[inline]
fn interpolate(fair: f64, raw: f64, epsilon: f64) -> f64 {
    (1.0 - epsilon) * fair + epsilon * raw
}

/// Settings for [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub epsilon: f64,
    pub jitter: JitterSpec,
    /// Population group weights; sample frequencies when absent.
    pub weights: Option<GroupWeights>,
    /// Parametric family for the fair output; nonparametric when absent.
    pub family: Option<FamilyKind>,
    pub mewe: MeweConfig,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { epsilon: 0.0, jitter: JitterSpec::disabled(), weights: None, family: None, mewe: MeweConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub model: FairModel,
    pub fit: Option<MeweFit>,
}

/// Builds a [`FairModel`] from calibration scores: group weights and
/// distributions, the barycenter map, and (with a family) the parametric fit
/// of the barycenter sample.
pub fn calibrate(data: &GroupedScores, config: &CalibrationConfig) -> Result<Calibration> {
    check_epsilon(config.epsilon)?;
    let barycenter = fit_barycenter_with_weights(data, config.jitter, config.weights.clone())?;
    let fit = match config.family {
        None => None,
        Some(kind) => {
            let target = barycenter.pooled_fair();
            let family = ParametricFamily::for_target(kind, target)?;
            Some(mewe_fit(target, family, &config.mewe)?)
        }
    };
    let parametric = fit.as_ref().map(|f| f.model.clone());
    let model = FairModel::new(barycenter, parametric, config.epsilon, config.jitter)?;
    Ok(Calibration { model, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    #[serde(flatten)]
    pub report: MetricReport,
}

/// Metrics of the transformed batch for each ε in `eps_list`.
pub fn epsilon_sweep(
    model: &FairModel,
    data: &GroupedScores,
    eps_list: &[f64],
    inputs: ReportInputs<'_>,
) -> Result<Vec<SweepRow>> {
    for &e in eps_list {
        check_epsilon(e)?;
    }
    let fair = model.fair_parts(data)?;
    let raw = data.scores();
    let rows = parallel::map_slice(eps_list, |&epsilon| {
        let transformed: Vec<f64> = fair.iter().zip(raw).map(|(&f, &x)| interpolate(f, x, epsilon)).collect();
        MetricReport::evaluate(&transformed, raw, data.groups(), inputs).map(|report| SweepRow { epsilon, report })
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barycenter::fit_barycenter;
    use crate::metrics::{budget_deviation, group_unfairness, risk_mse};

    fn toy_data() -> GroupedScores {
        GroupedScores::from_pairs([(0.0, "A"), (2.0, "A"), (1.0, "B"), (3.0, "B")]).unwrap()
    }

    fn toy(epsilon: f64) -> FairModel {
        let bary = fit_barycenter(&toy_data(), JitterSpec::disabled()).unwrap();
        FairModel::new(bary, None, epsilon, JitterSpec::disabled()).unwrap()
    }

    #[test]
    fn transform_examples() {
        assert_eq!(toy(1.0).transform(7.3, "A").unwrap(), 7.3);
        assert_eq!(toy(0.0).transform(0.0, "A").unwrap(), 0.5);
        assert_eq!(toy(0.5).transform(0.0, "A").unwrap(), 0.25);
        assert_eq!(toy(0.0).transform_with_epsilon(0.0, "A", 0.5).unwrap(), 0.25);
        assert!(matches!(toy(0.0).transform(0.0, "Q"), Err(FairError::UnknownGroup { .. })));
        assert!(toy(0.0).transform_with_epsilon(0.0, "A", 1.5).is_err());
        assert!(FairModel::new(toy(0.0).barycenter().clone(), None, -0.1, JitterSpec::disabled()).is_err());
    }

    #[test]
    fn batch_examples() {
        let m = toy(0.0);
        assert_eq!(m.transform_batch(&toy_data()).unwrap(), vec![0.5, 2.5, 0.5, 2.5]);
        let single = GroupedScores::from_pairs([(2.0, "A")]).unwrap();
        assert_eq!(m.transform_batch(&single).unwrap(), vec![m.transform(2.0, "A").unwrap()]);
        let permuted = GroupedScores::from_pairs([(3.0, "B"), (0.0, "A"), (1.0, "B"), (2.0, "A")]).unwrap();
        assert_eq!(m.transform_batch(&permuted).unwrap(), vec![2.5, 0.5, 0.5, 2.5]);
        let bad = GroupedScores::from_pairs([(0.0, "A"), (1.0, "C"), (1.0, "D")]).unwrap();
        match m.transform_batch(&bad) {
            Err(FairError::UnknownGroup { group, index }) => {
                assert_eq!(group, "C");
                assert_eq!(index, Some(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_endpoints_and_identities() {
        let data = toy_data();
        let m = toy(0.0);
        let rows = epsilon_sweep(&m, &data, &[0.0, 0.25, 1.0], ReportInputs { reference: Some(data.scores()), ..Default::default() }).unwrap();
        let (raw_u, _) = group_unfairness(data.scores(), data.groups()).unwrap();
        assert_eq!(rows[2].report.unfairness, raw_u);
        assert_eq!(rows[0].report.unfairness, 0.0);
        let r0 = rows[0].report.risk_mse.unwrap();
        assert!((rows[1].report.risk_mse.unwrap() - 0.75f64.powi(2) * r0).abs() < 1e-12);
        assert_eq!(rows[2].report.risk_mse.unwrap(), 0.0);
        assert!(epsilon_sweep(&m, &data, &[2.0], ReportInputs::default()).is_err());
    }

    #[test]
    fn interpolation_laws_on_random_data() {
        let a = ParametricModel::gaussian(0.0, 1.0).unwrap().sample(300, 1);
        let b = ParametricModel::gaussian(2.0, 0.5).unwrap().sample(200, 2);
        let data = GroupedScores::from_pairs(a.into_iter().map(|x| (x, "A")).chain(b.into_iter().map(|x| (x, "B")))).unwrap();
        let model = calibrate(&data, &CalibrationConfig::default()).unwrap().model;
        let h0 = model.transform_batch_with_epsilon(&data, 0.0).unwrap();
        let mse0 = risk_mse(&h0, data.scores()).unwrap();
        let d0 = budget_deviation(&h0, data.scores()).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let h = model.transform_batch_with_epsilon(&data, eps).unwrap();
            let mse = risk_mse(&h, data.scores()).unwrap();
            assert!((mse - (1.0 - eps).powi(2) * mse0).abs() < 1e-12);
            let d = budget_deviation(&h, data.scores()).unwrap();
            assert!((d - (1.0 - eps) * d0).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrate_parametric_mode() {
        let a = ParametricModel::gaussian(0.0, 1.0).unwrap().sample(1_000, 1);
        let b = ParametricModel::gaussian(1.0, 1.0).unwrap().sample(1_000, 2);
        let data = GroupedScores::from_pairs(a.into_iter().map(|x| (x, "A")).chain(b.into_iter().map(|x| (x, "B")))).unwrap();
        let cfg = CalibrationConfig {
            family: Some(FamilyKind::Gaussian),
            mewe: MeweConfig { mc_samples: 1_000, replicates: 2, restarts: 2, ..Default::default() },
            ..Default::default()
        };
        let cal = calibrate(&data, &cfg).unwrap();
        assert_eq!(cal.model.mode(), FairMode::Parametric);
        let theta = cal.fit.as_ref().unwrap().model.theta().to_vec();
        assert!((theta[0] - 0.5).abs() < 0.1 && (theta[1] - 1.0).abs() < 0.1, "{theta:?}");
        let out = cal.model.transform_batch(&data).unwrap();
        assert!(out.iter().all(|x| x.is_finite()));
        assert_eq!(cal.model.with_epsilon(1.0).unwrap().transform(0.123, "B").unwrap(), 0.123);
    }
}
