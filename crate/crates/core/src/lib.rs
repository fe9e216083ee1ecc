//! Demographic-parity post-processing for real-valued scores.
//!
//! Raw scores from any model are mapped group by group onto the Wasserstein
//! barycenter of the group score distributions, optionally pushed onto a
//! parametric family (Gaussian, Beta, Gumbel) fitted by minimum expected
//! Wasserstein estimation, and relaxed towards the raw scores along the W₂
//! geodesic with a relative-improvement parameter `ε ∈ [0, 1]`.
//!
//! ```
//! use dpfair::{calibrate, CalibrationConfig, GroupedScores};
//!
//! let data = GroupedScores::from_pairs([(0.0, "A"), (2.0, "A"), (1.0, "B"), (3.0, "B")])?;
//! let model = calibrate(&data, &CalibrationConfig::default())?.model;
//! assert_eq!(model.transform(0.0, "A")?, 0.5);
//! assert_eq!(model.transform_with_epsilon(0.0, "A", 0.5)?, 0.25);
//! # Ok::<(), dpfair::FairError>(())
//! ```

pub mod barycenter;
pub mod cli_io;
pub mod empirical;
pub mod error;
pub mod fair_predictor;
pub mod metrics;
pub mod optim;
pub mod parallel;
pub mod parametric;
pub mod wasserstein;

pub use barycenter::{apply_barycenter, fit_barycenter, fit_barycenter_with_weights, BarycenterModel, GroupWeights, GroupedScores};
pub use empirical::{EmpiricalDistribution, JitterSpec};
pub use error::{FairError, Result};
pub use fair_predictor::{calibrate, epsilon_sweep, Calibration, CalibrationConfig, FairMode, FairModel, SweepRow};
pub use metrics::{budget_deviation, empirical_excess_risk_fair, f1_score, group_unfairness, risk_mse, unfairness, MetricReport, ReportInputs};
pub use parametric::{mewe_fit, parametric_transport, FamilyKind, MeweConfig, MeweFit, ParametricFamily, ParametricModel, SupportTransform};
pub use wasserstein::{wasserstein_empirical, wasserstein_mixed, WassersteinOrder};
