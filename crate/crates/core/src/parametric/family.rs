//! Gaussian, Beta and Gumbel score distributions with exact CDF/quantile
//! pairs and inverse-transform sampling.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::empirical::EmpiricalDistribution;
use crate::error::{FairError, Result};

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Fraction of the unit interval left free at each end when fitting a Beta
/// support around observed data.
pub const BETA_SUPPORT_MARGIN: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Gaussian,
    Beta,
    Gumbel,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Beta => "beta",
            Self::Gumbel => "gumbel",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = FairError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "beta" => Ok(Self::Beta),
            "gumbel" => Ok(Self::Gumbel),
            other => Err(FairError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// Affine map `x = offset + scale * u` from the unit interval to score units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportTransform {
    pub offset: f64,
    pub scale: f64,
}

impl SupportTransform {
    pub fn new(offset: f64, scale: f64) -> Result<Self> {
        if !offset.is_finite() || !scale.is_finite() || scale <= 0.0 {
            return Err(FairError::InvalidParameter(format!(
                "support transform needs finite offset and positive scale, got ({offset}, {scale})"
            )));
        }
        Ok(Self { offset, scale })
    }

    /// Places `[min, max]` of the data at `[0.001, 0.999]` of the unit interval.
    pub fn covering(target: &EmpiricalDistribution) -> Result<Self> {
        let (lo, hi) = (target.min(), target.max());
        if hi <= lo {
            return Err(FairError::SupportViolation(
                "cannot fit a Beta support to a sample with a single distinct value".into(),
            ));
        }
        let scale = (hi - lo) / (1.0 - 2.0 * BETA_SUPPORT_MARGIN);
        Self::new(lo - BETA_SUPPORT_MARGIN * scale, scale)
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.offset + self.scale * u
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.offset..=self.offset + self.scale).contains(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricFamily {
    pub kind: FamilyKind,
    pub support: Option<SupportTransform>,
}

impl ParametricFamily {
    pub fn gaussian() -> Self {
        Self { kind: FamilyKind::Gaussian, support: None }
    }

    pub fn gumbel() -> Self {
        Self { kind: FamilyKind::Gumbel, support: None }
    }

    pub fn beta(support: SupportTransform) -> Self {
        Self { kind: FamilyKind::Beta, support: Some(support) }
    }

    /// Beta family whose support covers `target` with small margins.
    pub fn beta_covering(target: &EmpiricalDistribution) -> Result<Self> {
        Ok(Self::beta(SupportTransform::covering(target)?))
    }

    /// Family of the given kind ready to be fitted to `target`.
    pub fn for_target(kind: FamilyKind, target: &EmpiricalDistribution) -> Result<Self> {
        match kind {
            FamilyKind::Gaussian => Ok(Self::gaussian()),
            FamilyKind::Gumbel => Ok(Self::gumbel()),
            FamilyKind::Beta => Self::beta_covering(target),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.support) {
            (FamilyKind::Beta, None) => Err(FairError::InvalidParameter(
                "Beta family requires a support transform".into(),
            )),
            (FamilyKind::Gaussian | FamilyKind::Gumbel, Some(_)) => Err(FairError::InvalidParameter(
                format!("{} family uses the identity support", self.kind),
            )),
            _ => Ok(()),
        }
    }

    pub fn parameter_count(&self) -> usize {
        2
    }
}

/// A member of a parametric family. `theta` is
/// `[mean, std]` (Gaussian), `[alpha, beta]` (Beta) or `[location, scale]` (Gumbel).
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricModel {
    family: ParametricFamily,
    theta: Vec<f64>,
    ln_beta: f64,
}

impl ParametricModel {
    pub fn new(family: ParametricFamily, theta: Vec<f64>) -> Result<Self> {
        family.validate()?;
        if theta.len() != family.parameter_count() {
            return Err(FairError::InvalidParameter(format!(
                "{} family takes {} parameters, got {}",
                family.kind,
                family.parameter_count(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(FairError::InvalidParameter(format!("non-finite parameters {theta:?}")));
        }
        let positive = match family.kind {
            FamilyKind::Gaussian | FamilyKind::Gumbel => &theta[1..],
            FamilyKind::Beta => &theta[..],
        };
        if positive.iter().any(|&t| t <= 0.0) {
            return Err(FairError::InvalidParameter(format!(
                "{} parameters out of domain: {theta:?}",
                family.kind
            )));
        }
        let ln_beta = match family.kind {
            FamilyKind::Beta => ln_gamma(theta[0]) + ln_gamma(theta[1]) - ln_gamma(theta[0] + theta[1]),
            _ => 0.0,
        };
        Ok(Self { family, theta, ln_beta })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Self::new(ParametricFamily::gaussian(), vec![mean, std])
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::new(ParametricFamily::gumbel(), vec![location, scale])
    }

    pub fn beta(alpha: f64, beta: f64, support: SupportTransform) -> Result<Self> {
        Self::new(ParametricFamily::beta(support), vec![alpha, beta])
    }

    pub fn family(&self) -> &ParametricFamily {
        &self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Quantile function on the open interval (0, 1).
    pub fn quantile(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v < 1.0) {
            return Err(FairError::InvalidProbability(v));
        }
        Ok(self.quantile_unchecked(v))
    }

    pub(crate) fn quantile_unchecked(&self, v: f64) -> f64 {
        let (a, b) = (self.theta[0], self.theta[1]);
        match self.family.kind {
            FamilyKind::Gaussian => a + b * standard_normal_quantile(v),
            FamilyKind::Gumbel => a - b * (-v.ln()).ln(),
            FamilyKind::Beta => {
                let support = self.family.support.expect("validated");
                support.from_unit(self.beta_unit_quantile(v, None))
            }
        }
    }

    /// Quantiles of an ascending sequence of probabilities. Equivalent to
    /// mapping [`Self::quantile`], but Beta inversions warm-start from the
    /// previous root.
    pub fn quantiles_ascending(&self, probabilities: &[f64]) -> Vec<f64> {
        match self.family.kind {
            FamilyKind::Beta => {
                let support = self.family.support.expect("validated");
                let mut previous = None;
                probabilities
                    .iter()
                    .map(|&v| {
                        let u = self.beta_unit_quantile(v, previous);
                        previous = Some(u);
                        support.from_unit(u)
                    })
                    .collect()
            }
            _ => probabilities.iter().map(|&v| self.quantile_unchecked(v)).collect(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = (self.theta[0], self.theta[1]);
        match self.family.kind {
            FamilyKind::Gaussian => standard_normal_cdf((x - a) / b),
            FamilyKind::Gumbel => (-(-(x - a) / b).exp()).exp(),
            FamilyKind::Beta => {
                let u = self.family.support.expect("validated").to_unit(x);
                self.beta_unit_cdf(u)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        let (a, b) = (self.theta[0], self.theta[1]);
        match self.family.kind {
            FamilyKind::Gaussian => a,
            FamilyKind::Gumbel => a + EULER_MASCHERONI * b,
            FamilyKind::Beta => self.family.support.expect("validated").from_unit(a / (a + b)),
        }
    }

    /// `n` inverse-transform draws; deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        open_uniforms(n, seed).into_iter().map(|u| self.quantile_unchecked(u)).collect()
    }

    /// Parameters in an unconstrained space (log of positive parameters).
    pub(crate) fn to_unconstrained(&self) -> Vec<f64> {
        let t = &self.theta;
        match self.family.kind {
            FamilyKind::Gaussian | FamilyKind::Gumbel => vec![t[0], t[1].ln()],
            FamilyKind::Beta => vec![t[0].ln(), t[1].ln()],
        }
    }

    pub(crate) fn from_unconstrained(family: ParametricFamily, z: &[f64]) -> Result<Self> {
        let theta = match family.kind {
            FamilyKind::Gaussian | FamilyKind::Gumbel => vec![z[0], z[1].exp()],
            FamilyKind::Beta => vec![z[0].exp(), z[1].exp()],
        };
        Self::new(family, theta)
    }

    /// Method-of-moments estimate from a target sample.
    pub fn method_of_moments(family: ParametricFamily, target: &EmpiricalDistribution) -> Result<Self> {
        let (mean, std) = (target.mean(), target.std());
        if std <= 0.0 {
            return Err(FairError::InvalidParameter("target sample has zero spread".into()));
        }
        match family.kind {
            FamilyKind::Gaussian => Self::new(family, vec![mean, std]),
            FamilyKind::Gumbel => {
                let scale = std * 6f64.sqrt() / PI;
                Self::new(family, vec![mean - EULER_MASCHERONI * scale, scale])
            }
            FamilyKind::Beta => {
                let support = family.support.ok_or_else(|| {
                    FairError::InvalidParameter("Beta family requires a support transform".into())
                })?;
                let m = support.to_unit(mean);
                let var = (std / support.scale).powi(2);
                let common = m * (1.0 - m) / var - 1.0;
                let theta = if m > 0.0 && m < 1.0 && common > 0.0 {
                    vec![m * common, (1.0 - m) * common]
                } else {
                    vec![1.0, 1.0]
                };
                Self::new(family, theta)
            }
        }
    }

    fn beta_unit_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            checked_beta_reg(self.theta[0], self.theta[1], u).unwrap_or(f64::NAN)
        }
    }

    fn beta_unit_pdf(&self, u: f64) -> f64 {
        let (a, b) = (self.theta[0], self.theta[1]);
        ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - self.ln_beta).exp()
    }

    /// Safeguarded Newton inversion of the regularized incomplete beta function.
    fn beta_unit_quantile(&self, v: f64, start: Option<f64>) -> f64 {
        let (a, b) = (self.theta[0], self.theta[1]);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x = match start {
            Some(s) if s > 0.0 && s < 1.0 => s,
            _ => {
                // Tail approximations: I_x(a,b) ≈ x^a / (a B) near 0, symmetric near 1.
                let lower = (v.ln() + a.ln() + self.ln_beta) / a;
                let upper = ((-v).ln_1p() + b.ln() + self.ln_beta) / b;
                let mean = a / (a + b);
                let guess = if v <= self.beta_unit_cdf(mean) { lower.exp() } else { 1.0 - upper.exp() };
                if guess > 0.0 && guess < 1.0 { guess } else { mean }
            }
        };
        for _ in 0..200 {
            let f = self.beta_unit_cdf(x) - v;
            if f == 0.0 {
                return x;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let pdf = self.beta_unit_pdf(x);
            let mut next = x - f / pdf;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
                return next;
            }
            x = next;
        }
        x
    }
}

/// `n` draws from Uniform(0, 1) excluding both endpoints; 53-bit resolution.
pub(crate) fn open_uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64))
        .collect()
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn standard_normal_quantile(v: f64) -> f64 {
    let z = -SQRT_2 * erfc_inv(2.0 * v);
    if !z.is_finite() {
        return z;
    }
    // One Halley step against the CDF.
    let err = standard_normal_cdf(z) - v;
    let pdf = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    if pdf <= 0.0 {
        return z;
    }
    let r = err / pdf;
    z - r / (1.0 + 0.5 * z * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> SupportTransform {
        SupportTransform::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(ParametricModel::gaussian(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.0);
        let g = ParametricModel::gumbel(0.0, 1.0).unwrap();
        assert!(g.quantile((-1.0f64).exp()).unwrap().abs() < 1e-15);
        let b = ParametricModel::beta(2.0, 2.0, unit()).unwrap();
        assert!((b.quantile(0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn known_values() {
        let n = ParametricModel::gaussian(0.0, 1.0).unwrap();
        assert!((n.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((n.cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
        // Beta(1,1) is uniform; Beta(2,1) has CDF u².
        let u = ParametricModel::beta(1.0, 1.0, unit()).unwrap();
        assert!((u.quantile(0.3).unwrap() - 0.3).abs() < 1e-12);
        let b21 = ParametricModel::beta(2.0, 1.0, unit()).unwrap();
        assert!((b21.quantile(0.25).unwrap() - 0.5).abs() < 1e-12);
        let scaled = ParametricModel::beta(2.0, 1.0, SupportTransform::new(10.0, 4.0).unwrap()).unwrap();
        assert!((scaled.quantile(0.25).unwrap() - 12.0).abs() < 1e-11);
        assert!((scaled.cdf(12.0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(ParametricModel::gaussian(0.0, 0.0).is_err());
        assert!(ParametricModel::gumbel(0.0, -1.0).is_err());
        assert!(ParametricModel::beta(0.0, 1.0, unit()).is_err());
        assert!(ParametricModel::new(ParametricFamily::gaussian(), vec![1.0]).is_err());
        assert!(ParametricModel::new(ParametricFamily { kind: FamilyKind::Beta, support: None }, vec![1.0, 1.0]).is_err());
        let n = ParametricModel::gaussian(0.0, 1.0).unwrap();
        for v in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(n.quantile(v), Err(FairError::InvalidProbability(_))));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = ParametricModel::gumbel(1.0, 0.5).unwrap();
        assert_eq!(g.sample(100, 7), g.sample(100, 7));
        assert_ne!(g.sample(100, 7), g.sample(100, 8));
        let m = g.sample(200_000, 3).iter().sum::<f64>() / 200_000.0;
        assert!((m - g.mean()).abs() < 0.01);
    }

    #[test]
    fn ascending_quantiles_match_pointwise() {
        let b = ParametricModel::beta(0.7, 3.5, unit()).unwrap();
        let mut u = open_uniforms(500, 11);
        u.sort_by(f64::total_cmp);
        let warm = b.quantiles_ascending(&u);
        for (v, w) in u.iter().zip(&warm) {
            assert!((b.quantile(*v).unwrap() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn method_of_moments_recovers_parameters() {
        let truth = ParametricModel::gumbel(1.0, 0.5).unwrap();
        let target = EmpiricalDistribution::from_values(&truth.sample(50_000, 1), Default::default()).unwrap();
        let mom = ParametricModel::method_of_moments(ParametricFamily::gumbel(), &target).unwrap();
        assert!((mom.theta()[0] - 1.0).abs() < 0.03 && (mom.theta()[1] - 0.5).abs() < 0.03);
    }

    #[test]
    fn family_names_parse() {
        for k in [FamilyKind::Gaussian, FamilyKind::Beta, FamilyKind::Gumbel] {
            assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
        }
        assert!("cauchy".parse::<FamilyKind>().is_err());
    }

    proptest! {
        #[test]
        fn quantile_cdf_inverse(
            v in 0.001f64..0.999,
            a in -5.0f64..5.0,
            s in 0.1f64..5.0,
            alpha in 0.3f64..20.0,
            beta in 0.3f64..20.0,
        ) {
            let models = [
                ParametricModel::gaussian(a, s).unwrap(),
                ParametricModel::gumbel(a, s).unwrap(),
                ParametricModel::beta(alpha, beta, SupportTransform::new(a, s).unwrap()).unwrap(),
            ];
            for m in &models {
                let x = m.quantile(v).unwrap();
                prop_assert!(x.is_finite());
                prop_assert!((m.cdf(x) - v).abs() <= 1e-9, "{:?} v={} x={} cdf={}", m, v, x, m.cdf(x));
            }
        }
    }
}
