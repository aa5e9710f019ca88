//! Perturbation-bootstrap inference for the Lasso under heteroscedastic
//! errors, with residual/paired/naive comparison schemes, a sampler for the
//! limiting law of the Lasso, and a Monte Carlo coverage harness.
//!
//! ```
//! use lassoboot::*;
//!
//! // a small regression sample
//! let x1: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
//! let x2: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).cos()).collect();
//! let y: Vec<f64> = (0..40)
//!     .map(|i| 2.0 * x1[i] - 0.5 * x2[i] + 0.1 * (i as f64 * 2.9).sin())
//!     .collect();
//! let data = Dataset::from_cols(vec![x1, x2], y)?;
//!
//! // fit, threshold, bootstrap, and build a two-sided 90% interval
//! let opts = SolverOptions::default();
//! let fit = fit_lasso(&data, 0.5, None, &opts)?;
//! assert!(fit.kkt_gap <= opts.kkt_tol);
//!
//! let est = threshold_estimate(&fit, default_threshold(data.n(), 1.0)?)?;
//! let draws = perturbation_bootstrap(
//!     &data, &fit, &est, &WeightDistribution::default(), 200, 7, &opts,
//! )?;
//! let interval = percentile_interval(&draws, &fit, 0, 0.9, Side::TwoSided)?;
//! assert!(interval.lower <= fit.beta[0] && fit.beta[0] <= interval.upper);
//! # Ok::<(), lassoboot::Error>(())
//! ```

pub mod bootstrap;
pub mod dataset;
pub mod error;
pub mod inference;
pub mod lasso;
pub mod limit;
pub mod linalg;
pub mod rng;
pub mod sim;

pub use bootstrap::{
    default_threshold, draw_weights, naive_perturbation_bootstrap, paired_bootstrap,
    perturbation_bootstrap, pseudo_responses, residual_bootstrap, run_scheme, threshold_estimate,
    BootstrapDraws, Scheme, ThresholdedEstimate, WeightDistribution, WeightFamily,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use inference::{
    coverage_tally, empirical_coverage_ratio, percentile_interval, percentile_interval_with,
    sup_norm_region, CoefCoverage, CoverageReport, EcrValue, IntervalEstimate, PivotConvention,
    RegionCoverage, RegionEstimate, Side,
};
pub use lasso::{
    cross_validate_lambda, default_lambda_grid, fit_lasso, fit_lasso_weighted, kkt_gap,
    lambda_max, soft_threshold, LassoFit, SolverOptions, DEFAULT_CV_FOLDS,
};
pub use limit::{estimate_limit_matrices, sample_limit_argmin, LimitMatrices, LimitObjective};
pub use sim::{
    gen_design, gen_errors, run_coverage_experiment, run_single_replicate, true_beta, DesignMode,
    ErrorCase, ReplicateContribution, ScenarioDraw, SimulationScenario,
};
