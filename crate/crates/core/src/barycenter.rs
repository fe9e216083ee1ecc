//! Group weights, per-group empirical distributions and the closed-form
//! transport map onto their Wasserstein barycenter.
//!
//! On the line the barycenter's quantile function is the weighted average of
//! the group quantile functions, so the map for group `s` is
//! `x ↦ Σ_{s'} p_{s'} Q_{s'}(F_s(x))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::empirical::{EmpiricalDistribution, JitterSpec};
use crate::error::{FairError, Result};
use crate::parallel;

/// Paired (score, group) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedScores {
    scores: Vec<f64>,
    groups: Vec<String>,
}

impl GroupedScores {
    pub fn new(scores: Vec<f64>, groups: Vec<String>) -> Result<Self> {
        if scores.len() != groups.len() {
            return Err(FairError::SizeMismatch { left: scores.len(), right: groups.len() });
        }
        if let Some((index, &value)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FairError::InvalidScore { index, value });
        }
        Ok(Self { scores, groups })
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, S)>,
        S: Into<String>,
    {
        let (scores, groups): (Vec<f64>, Vec<String>) =
            pairs.into_iter().map(|(x, s)| (x, s.into())).unzip();
        Self::new(scores, groups)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores split by group, in input order within each group.
    pub fn by_group(&self) -> BTreeMap<&str, Vec<f64>> {
        let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for (x, s) in self.scores.iter().zip(&self.groups) {
            out.entry(s.as_str()).or_default().push(*x);
        }
        out
    }

    /// Fails with `DegenerateGroup` if any group has fewer than two observations.
    pub fn check_groups(&self) -> Result<()> {
        if self.is_empty() {
            return Err(FairError::EmptySample);
        }
        for (group, values) in self.by_group() {
            if values.len() < 2 {
                return Err(FairError::DegenerateGroup { group: group.to_string(), count: values.len() });
            }
        }
        Ok(())
    }
}

/// Group probabilities `p_s`, all positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupWeights(BTreeMap<String, f64>);

impl GroupWeights {
    pub fn from_frequencies(data: &GroupedScores) -> Result<Self> {
        if data.is_empty() {
            return Err(FairError::EmptySample);
        }
        let n = data.len() as f64;
        let map = data
            .by_group()
            .into_iter()
            .map(|(s, v)| (s.to_string(), v.len() as f64 / n))
            .collect();
        Ok(Self(map))
    }

    /// User-supplied weights; must be positive and sum to one within 1e-9
    /// (they are renormalized afterwards).
    pub fn from_map(map: BTreeMap<String, f64>) -> Result<Self> {
        if map.is_empty() {
            return Err(FairError::InvalidParameter("no group weights given".into()));
        }
        if let Some((s, p)) = map.iter().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(FairError::InvalidParameter(format!("weight for group `{s}` must be positive, got {p}")));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FairError::InvalidParameter(format!("group weights sum to {total}, expected 1")));
        }
        Ok(Self(map.into_iter().map(|(s, p)| (s, p / total)).collect()))
    }

    /// Weights read back from storage: validated but not renormalized, so a
    /// save/load cycle preserves every bit.
    pub(crate) fn from_stored(map: BTreeMap<String, f64>) -> Result<Self> {
        if map.is_empty() {
            return Err(FairError::InvalidParameter("no group weights given".into()));
        }
        if let Some((s, p)) = map.iter().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(FairError::InvalidParameter(format!("weight for group `{s}` must be positive, got {p}")));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FairError::InvalidParameter(format!("group weights sum to {total}, expected 1")));
        }
        Ok(Self(map))
    }

    pub fn get(&self, group: &str) -> Option<f64> {
        self.0.get(group).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(s, p)| (s.as_str(), *p))
    }

    pub fn groups(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterModel {
    weights: GroupWeights,
    per_group: BTreeMap<String, EmpiricalDistribution>,
    /// The calibration scores pushed through their group's transport map.
    pooled_fair: EmpiricalDistribution,
}

/// Estimates group weights, group distributions and the barycenter of the
/// calibration scores. Weights are the group frequencies.
pub fn fit_barycenter(data: &GroupedScores, jitter: JitterSpec) -> Result<BarycenterModel> {
    fit_barycenter_with_weights(data, jitter, None)
}

/// As [`fit_barycenter`], with optional population weights replacing the
/// sample frequencies.
pub fn fit_barycenter_with_weights(
    data: &GroupedScores,
    jitter: JitterSpec,
    weights: Option<GroupWeights>,
) -> Result<BarycenterModel> {
    data.check_groups()?;
    let grouped = data.by_group();
    let weights = match weights {
        Some(w) => {
            if let Some(s) = grouped.keys().find(|s| w.get(s).is_none()) {
                return Err(FairError::UnknownGroup { group: s.to_string(), index: None });
            }
            if let Some(s) = w.groups().find(|s| !grouped.contains_key(s)) {
                return Err(FairError::InvalidParameter(format!(
                    "weight given for group `{s}` which has no calibration data"
                )));
            }
            w
        }
        None => GroupWeights::from_frequencies(data)?,
    };
    let mut per_group = BTreeMap::new();
    for (offset, (group, values)) in grouped.into_iter().enumerate() {
        let dist = EmpiricalDistribution::from_values(&values, jitter.with_seed_offset(offset as u64))?;
        per_group.insert(group.to_string(), dist);
    }
    BarycenterModel::from_parts(weights, per_group)
}

impl BarycenterModel {
    /// Assembles a model from weights and per-group distributions, recomputing
    /// the pooled fair sample.
    pub fn from_parts(
        weights: GroupWeights,
        per_group: BTreeMap<String, EmpiricalDistribution>,
    ) -> Result<Self> {
        if per_group.is_empty() {
            return Err(FairError::EmptySample);
        }
        if weights.len() != per_group.len() || weights.groups().any(|s| !per_group.contains_key(s)) {
            return Err(FairError::InvalidParameter(
                "group weights and group distributions name different groups".into(),
            ));
        }
        let mut model = Self {
            weights,
            per_group,
            pooled_fair: EmpiricalDistribution::from_sorted(vec![0.0])?,
        };
        let mut pooled = Vec::with_capacity(model.per_group.values().map(|d| d.len()).sum());
        for (group, dist) in &model.per_group {
            let mapped = parallel::map_indexed(dist.len(), |i| model.map_rank(group, i + 1));
            pooled.extend(mapped);
        }
        pooled.sort_by(f64::total_cmp);
        model.pooled_fair = EmpiricalDistribution::from_sorted(pooled)?;
        Ok(model)
    }

    /// Rebuilds a model from persisted parts without recomputing the pooled sample.
    pub(crate) fn from_stored(
        weights: GroupWeights,
        per_group: BTreeMap<String, EmpiricalDistribution>,
        pooled_fair: EmpiricalDistribution,
    ) -> Result<Self> {
        if weights.len() != per_group.len() || weights.groups().any(|s| !per_group.contains_key(s)) {
            return Err(FairError::InvalidParameter(
                "group weights and group distributions name different groups".into(),
            ));
        }
        Ok(Self { weights, per_group, pooled_fair })
    }

    pub fn weights(&self) -> &GroupWeights {
        &self.weights
    }

    pub fn per_group(&self) -> &BTreeMap<String, EmpiricalDistribution> {
        &self.per_group
    }

    pub fn group(&self, s: &str) -> Result<&EmpiricalDistribution> {
        self.per_group
            .get(s)
            .ok_or_else(|| FairError::UnknownGroup { group: s.to_string(), index: None })
    }

    pub fn pooled_fair(&self) -> &EmpiricalDistribution {
        &self.pooled_fair
    }

    /// Transport of score `x` from group `s` onto the barycenter.
    ///
    /// `F_s(x)` is clamped to `[1/n_s, 1]`, so inputs outside the observed
    /// support map to the barycenter's extreme values.
    pub fn apply(&self, x: f64, s: &str) -> Result<f64> {
        let dist = self.group(s)?;
        let rank = dist.rank(x).max(1);
        Ok(self.map_rank(s, rank))
    }

    /// `Σ_{s'} p_{s'} Q_{s'}(rank / n_s)` for a rank in `1..=n_s`.
    fn map_rank(&self, s: &str, rank: usize) -> f64 {
        let n_s = self.per_group[s].len();
        let v = rank as f64 / n_s as f64;
        self.per_group
            .iter()
            .map(|(other, dist)| {
                let q = if dist.len() == n_s {
                    dist.values()[rank - 1]
                } else {
                    dist.values()[dist.quantile_index(v)]
                };
                self.weights.0[other] * q
            })
            .sum()
    }

    /// Barycenter quantile `Σ_s p_s Q_s(v)`.
    pub fn barycenter_quantile(&self, v: f64) -> Result<f64> {
        self.per_group
            .iter()
            .map(|(s, d)| Ok(self.weights.0[s] * d.quantile(v)?))
            .sum()
    }
}

/// Free-function form of [`BarycenterModel::apply`].
pub fn apply_barycenter(model: &BarycenterModel, x: f64, s: &str) -> Result<f64> {
    model.apply(x, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> GroupedScores {
        GroupedScores::from_pairs([(0.0, "A"), (2.0, "A"), (1.0, "B"), (3.0, "B")]).unwrap()
    }

    #[test]
    fn frequency_weights() {
        let m = fit_barycenter(&toy(), JitterSpec::disabled()).unwrap();
        assert_eq!(m.weights().get("A"), Some(0.5));
        assert_eq!(m.weights().get("B"), Some(0.5));
    }

    #[test]
    fn toy_pooled_fair() {
        let m = fit_barycenter(&toy(), JitterSpec::disabled()).unwrap();
        assert_eq!(m.pooled_fair().values(), &[0.5, 0.5, 2.5, 2.5]);
        assert_eq!(m.apply(2.0, "A").unwrap(), 2.5);
        assert_eq!(m.apply(1.0, "B").unwrap(), 0.5);
        assert_eq!(m.apply(0.0, "A").unwrap(), 0.5);
    }

    #[test]
    fn single_group_is_identity_on_support() {
        let data = GroupedScores::from_pairs([(3.0, "A"), (1.0, "A"), (2.0, "A")]).unwrap();
        let m = fit_barycenter(&data, JitterSpec::disabled()).unwrap();
        assert_eq!(m.pooled_fair().values(), m.group("A").unwrap().values());
        for x in [1.0, 2.0, 3.0] {
            assert_eq!(m.apply(x, "A").unwrap(), x);
        }
        // Q_s(F_s(x)) snaps off-support points onto observed values.
        assert_eq!(m.apply(2.5, "A").unwrap(), 2.0);
        assert_eq!(m.apply(-10.0, "A").unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let m = fit_barycenter(&toy(), JitterSpec::disabled()).unwrap();
        assert!(matches!(m.apply(0.0, "C"), Err(FairError::UnknownGroup { .. })));
        let degenerate = GroupedScores::from_pairs([(0.0, "A"), (2.0, "A"), (1.0, "B")]).unwrap();
        assert!(matches!(
            fit_barycenter(&degenerate, JitterSpec::disabled()),
            Err(FairError::DegenerateGroup { count: 1, .. })
        ));
        assert!(matches!(
            GroupedScores::new(vec![1.0], vec![]),
            Err(FairError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn weight_override() {
        let w = GroupWeights::from_map(BTreeMap::from([("A".into(), 0.25), ("B".into(), 0.75)])).unwrap();
        let m = fit_barycenter_with_weights(&toy(), JitterSpec::disabled(), Some(w)).unwrap();
        assert_eq!(m.apply(0.0, "A").unwrap(), 0.75);
        let bad = GroupWeights::from_map(BTreeMap::from([("A".into(), 0.5), ("B".into(), 0.6)]));
        assert!(bad.is_err());
        let missing = GroupWeights::from_map(BTreeMap::from([("A".into(), 1.0)])).unwrap();
        assert!(fit_barycenter_with_weights(&toy(), JitterSpec::disabled(), Some(missing)).is_err());
    }

    fn two_groups() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-20.0f64..20.0, 2..30),
            prop::collection::vec(-20.0f64..20.0, 2..30),
        )
    }

    proptest! {
        #[test]
        fn monotone_per_group((a, b) in two_groups(), x1 in -25.0f64..25.0, x2 in -25.0f64..25.0) {
            let data = GroupedScores::from_pairs(
                a.iter().map(|&x| (x, "A")).chain(b.iter().map(|&x| (x, "B")))).unwrap();
            let m = fit_barycenter(&data, JitterSpec::disabled()).unwrap();
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            for s in ["A", "B"] {
                prop_assert!(m.apply(lo, s).unwrap() <= m.apply(hi, s).unwrap());
            }
        }

        #[test]
        fn group_blind_on_quantiles((a, b) in two_groups(), v in 0.001f64..=1.0) {
            let data = GroupedScores::from_pairs(
                a.iter().map(|&x| (x, "A")).chain(b.iter().map(|&x| (x, "B")))).unwrap();
            let m = fit_barycenter(&data, JitterSpec::new(1e-6, 9).unwrap()).unwrap();
            // Jittered samples are tie-free, so F_s(Q_s(v)) = ceil(v n_s)/n_s.
            let target_a = {
                let d = m.group("A").unwrap();
                let r = d.quantile_index(v) + 1;
                m.barycenter_quantile(r as f64 / d.len() as f64).unwrap()
            };
            let qa = m.group("A").unwrap().quantile(v).unwrap();
            prop_assert!((m.apply(qa, "A").unwrap() - target_a).abs() <= 1e-9);
            if a.len() == b.len() {
                let qb = m.group("B").unwrap().quantile(v).unwrap();
                prop_assert!((m.apply(qa, "A").unwrap() - m.apply(qb, "B").unwrap()).abs() <= 1e-9);
            }
        }

        #[test]
        fn mean_preservation((a, b) in two_groups()) {
            let data = GroupedScores::from_pairs(
                a.iter().map(|&x| (x, "A")).chain(b.iter().map(|&x| (x, "B")))).unwrap();
            let m = fit_barycenter(&data, JitterSpec::disabled()).unwrap();
            let raw_mean = data.scores().iter().sum::<f64>() / data.len() as f64;
            let weighted: f64 = m.weights().iter()
                .map(|(s, p)| p * m.group(s).unwrap().mean()).sum();
            prop_assert!((raw_mean - weighted).abs() <= 1e-9 * 40.0);
            let range = 40.0;
            let n = data.len() as f64;
            prop_assert!((m.pooled_fair().mean() - raw_mean).abs() <= 4.0 * range / n.min(a.len().min(b.len()) as f64));
        }
    }
}
