//! Minimum expected Wasserstein estimation.
//!
//! The objective for parameters `θ` is the average, over `replicates`
//! independent Monte Carlo samples of size `mc_samples` drawn from the model,
//! of the exact `W_2` distance between the target and the model sample. The
//! uniforms behind each replicate are drawn once per fit, so the objective is
//! a deterministic, smooth function of `θ`. Positive parameters are optimized
//! on the log scale with Nelder–Mead from a method-of-moments start plus
//! randomly perturbed restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::{open_uniforms, FamilyKind, ParametricFamily, ParametricModel};
use crate::empirical::EmpiricalDistribution;
use crate::error::{FairError, Result};
use crate::optim::{nelder_mead, SimplexSettings};
use crate::parallel;
use crate::wasserstein::{wasserstein_pow_sorted, WassersteinOrder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeweConfig {
    pub mc_samples: usize,
    pub replicates: usize,
    pub seed: u64,
    pub optimizer: SimplexSettings,
    pub restarts: usize,
}

impl Default for MeweConfig {
    fn default() -> Self {
        Self {
            mc_samples: 10_000,
            replicates: 4,
            seed: 0,
            optimizer: SimplexSettings::default(),
            restarts: 5,
        }
    }
}

impl MeweConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples < 100 {
            return Err(FairError::InvalidParameter(format!(
                "mc_samples must be at least 100, got {}",
                self.mc_samples
            )));
        }
        if self.replicates == 0 || self.restarts == 0 {
            return Err(FairError::InvalidParameter("replicates and restarts must be positive".into()));
        }
        let o = &self.optimizer;
        if !(o.x_tol > 0.0 && o.f_tol > 0.0) || o.max_iters == 0 {
            return Err(FairError::InvalidParameter("optimizer tolerances and max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Seeds of the Monte Carlo replicates, derived from `seed`.
    pub fn replicate_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.replicates).map(|_| rng.random()).collect()
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeweFit {
    pub model: ParametricModel,
    pub objective: f64,
    /// False when no restart met the simplex tolerances within `max_iters`.
    pub converged: bool,
    pub restarts: Vec<RestartOutcome>,
}

impl MeweFit {
    /// Turns a non-converged fit into `ConvergenceFailure`.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(FairError::ConvergenceFailure {
                restarts: self.restarts.len(),
                best_objective: self.objective,
            })
        }
    }
}

/// The Monte Carlo objective `J(θ)` with its uniforms fixed.
pub struct MeweObjective<'a> {
    target: &'a EmpiricalDistribution,
    /// Sorted uniforms, one vector per replicate.
    uniforms: Vec<Vec<f64>>,
}

impl<'a> MeweObjective<'a> {
    pub fn new(target: &'a EmpiricalDistribution, cfg: &MeweConfig) -> Self {
        let uniforms = cfg
            .replicate_seeds()
            .into_iter()
            .map(|seed| {
                let mut u = open_uniforms(cfg.mc_samples, seed);
                u.sort_by(f64::total_cmp);
                u
            })
            .collect();
        Self { target, uniforms }
    }

    /// Average `W_2(target, sample(θ, m, seed_k))` over replicates.
    ///
    /// The quantile function is increasing, so mapping sorted uniforms gives
    /// the sorted model sample directly.
    pub fn evaluate(&self, model: &ParametricModel) -> f64 {
        let total: f64 = self
            .uniforms
            .iter()
            .map(|u| {
                let sample = model.quantiles_ascending(u);
                if sample.iter().any(|x| !x.is_finite()) {
                    return f64::INFINITY;
                }
                wasserstein_pow_sorted(self.target.values(), &sample, WassersteinOrder::W2).sqrt()
            })
            .sum();
        total / self.uniforms.len() as f64
    }
}

/// `J(θ)` for a single model; see [`MeweObjective`].
pub fn mewe_objective(target: &EmpiricalDistribution, model: &ParametricModel, cfg: &MeweConfig) -> f64 {
    MeweObjective::new(target, cfg).evaluate(model)
}

/// Fits `family` to `target` by minimum expected Wasserstein estimation.
///
/// A fit whose restarts all stop at `max_iters` is still returned, with
/// `converged == false`; use [`MeweFit::require_converged`] to make that an error.
pub fn mewe_fit(target: &EmpiricalDistribution, family: ParametricFamily, cfg: &MeweConfig) -> Result<MeweFit> {
    cfg.validate()?;
    family.validate()?;
    if target.max() <= target.min() {
        return Err(FairError::InvalidParameter(
            "target must contain at least two distinct values".into(),
        ));
    }
    if let Some(support) = family.support {
        if !(support.contains(target.min()) && support.contains(target.max())) {
            return Err(FairError::SupportViolation(format!(
                "target range [{}, {}] lies outside the Beta support [{}, {}]",
                target.min(),
                target.max(),
                support.offset,
                support.offset + support.scale
            )));
        }
    }

    let objective = MeweObjective::new(target, cfg);
    let start = ParametricModel::method_of_moments(family, target)?;
    let z0 = start.to_unconstrained();
    let scales = coordinate_scales(family.kind, target);
    let step: Vec<f64> = scales.iter().map(|s| 0.25 * s).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5DEE_CE66_D1CE_5EED);
    let starts: Vec<Vec<f64>> = (0..cfg.restarts)
        .map(|r| {
            if r == 0 {
                z0.clone()
            } else {
                z0.iter()
                    .zip(&scales)
                    .map(|(z, s)| z + 0.5 * s * rng.random_range(-1.0..1.0))
                    .collect()
            }
        })
        .collect();

    let runs = parallel::map_slice(&starts, |z_start| {
        let f = |z: &[f64]| match ParametricModel::from_unconstrained(family, z) {
            Ok(m) => objective.evaluate(&m),
            Err(_) => f64::INFINITY,
        };
        nelder_mead(f, z_start, &step, &cfg.optimizer)
    });

    let mut outcomes = Vec::with_capacity(runs.len());
    for run in runs {
        let model = ParametricModel::from_unconstrained(family, &run.x)?;
        outcomes.push(RestartOutcome {
            theta: model.theta().to_vec(),
            objective: run.value,
            iterations: run.iterations,
            converged: run.converged,
        });
    }

    let best = outcomes
        .iter()
        .filter(|o| o.objective.is_finite())
        .min_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then_with(|| norm(&a.theta).total_cmp(&norm(&b.theta)))
        })
        .ok_or_else(|| FairError::NumericalDomain("objective was not finite at any restart".into()))?;

    Ok(MeweFit {
        model: ParametricModel::new(family, best.theta.clone())?,
        objective: best.objective,
        converged: outcomes.iter().any(|o| o.converged),
        restarts: outcomes,
    })
}

fn coordinate_scales(kind: FamilyKind, target: &EmpiricalDistribution) -> Vec<f64> {
    match kind {
        FamilyKind::Gaussian | FamilyKind::Gumbel => vec![target.std(), 1.0],
        FamilyKind::Beta => vec![1.0, 1.0],
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
