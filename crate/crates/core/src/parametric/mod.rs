//! Parametric output families and their fit to the empirical barycenter.

mod family;
mod mewe;

pub use family::{
    standard_normal_cdf, standard_normal_quantile, FamilyKind, ParametricFamily, ParametricModel,
    SupportTransform, BETA_SUPPORT_MARGIN,
};
pub use mewe::{mewe_fit, mewe_objective, MeweConfig, MeweFit, MeweObjective, RestartOutcome};

use crate::barycenter::BarycenterModel;
use crate::error::Result;

/// Pushes a raw score onto the fitted parametric distribution:
/// `Q_θ(F_bary(T_s(x)))`, with the barycenter CDF clamped to
/// `[1/(2n), 1 − 1/(2n)]` so the parametric quantile stays finite.
pub fn parametric_transport(model: &ParametricModel, bary: &BarycenterModel, x: f64, s: &str) -> Result<f64> {
    let fair = bary.apply(x, s)?;
    let pooled = bary.pooled_fair();
    let half_step = 0.5 / pooled.len() as f64;
    let v = pooled.cdf(fair).clamp(half_step, 1.0 - half_step);
    Ok(model.quantile_unchecked(v))
}
