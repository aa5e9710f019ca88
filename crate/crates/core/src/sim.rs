//! Data-generating process and Monte Carlo coverage experiments.
//!
//! Covariate rows are i.i.d. mean-zero Gaussian with covariance
//!
//! ```text
//!     Cov(X_j, X_k) = 1(j = k) + 0.3^{|j-k|} 1(j <= p0) 1(k <= p0) 1(j != k)
//! ```
//!
//! (1-based indices), the true coefficients are `beta_j = 3/4 + j/4` for the
//! first `p0` coordinates and zero after, and the errors are `eps_i = s_i
//! eta_i` with `s_i^2 = p^{-1} sum_j |X_ij|^5` and `eta` either centered
//! chi-squared with two degrees of freedom (case I) or standard normal
//! (case II). A scenario runs `m` Monte Carlo datasets; on each one the
//! penalty is chosen once by cross-validation and then held fixed for every
//! bootstrap computation on that dataset.

use crate::bootstrap::{
    default_threshold, run_scheme, threshold_estimate, Scheme, WeightDistribution,
};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::inference::{
    coverage_tally, percentile_interval, sup_norm_region, CoverageReport, IntervalEstimate,
    RegionCoverage, Side,
};
use crate::lasso::{
    cross_validate_lambda, default_lambda_grid, fit_lasso, SolverOptions, DEFAULT_CV_FOLDS,
};
use crate::linalg::Mat;
use crate::rng::{derive_seed, domain, substream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Whether the design matrix is drawn once per scenario or once per
/// Monte Carlo replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    Fixed,
    Random,
}

/// Error law for `eta = eps / s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCase {
    /// Case I: centered chi-squared(2), variance 4.
    #[serde(rename = "chi2")]
    ChiSquared,
    /// Case II: standard normal.
    #[serde(rename = "normal")]
    Normal,
}

/// Full description of one coverage experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationScenario {
    pub n: usize,
    pub p: usize,
    pub p0: usize,
    pub design_mode: DesignMode,
    pub error_case: ErrorCase,
    /// Monte Carlo datasets.
    pub m: usize,
    /// Bootstrap replicates per dataset.
    pub b: usize,
    /// Confidence level for intervals and the region.
    pub level: f64,
    pub seed: u64,
    /// Replace the heteroscedastic scales by `s_i = 1` (used to check that
    /// the schemes agree when the errors are homoscedastic).
    #[serde(default)]
    pub homoscedastic: bool,
}

impl SimulationScenario {
    pub fn validate(&self) -> Result<()> {
        if self.p0 > self.p {
            return Err(invalid("p0 must not exceed p"));
        }
        if self.n <= self.p {
            return Err(invalid("need n > p"));
        }
        if self.m == 0 || self.b == 0 {
            return Err(invalid("m and b must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("level must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Short tag used to label reports.
    pub fn tag(&self) -> String {
        format!(
            "n{}_p{}_p0{}_{}_{}{}",
            self.n,
            self.p,
            self.p0,
            match self.design_mode {
                DesignMode::Fixed => "fixed",
                DesignMode::Random => "random",
            },
            match self.error_case {
                ErrorCase::ChiSquared => "chi2",
                ErrorCase::Normal => "normal",
            },
            if self.homoscedastic { "_homo" } else { "" }
        )
    }
}

/// One generated dataset along with the quantities that produced it.
#[derive(Debug, Clone)]
pub struct ScenarioDraw {
    pub dataset: Dataset,
    pub beta_true: Vec<f64>,
    /// Heteroscedasticity scales `s_i`.
    pub s: Vec<f64>,
    /// Realized errors `eps_i`.
    pub epsilon: Vec<f64>,
}

/// True coefficient vector: `3/4 + j/4` for `j = 1..p0`, then zeros.
pub fn true_beta(p: usize, p0: usize) -> Result<Vec<f64>> {
    if p0 > p {
        return Err(invalid("p0 must not exceed p"));
    }
    Ok((0..p)
        .map(|j| {
            if j < p0 {
                0.75 + 0.25 * (j + 1) as f64
            } else {
                0.0
            }
        })
        .collect())
}

/// Design covariance matrix for the scenario.
pub fn design_covariance(p: usize, p0: usize) -> Mat {
    let mut gamma = Mat::identity(p);
    for j in 0..p0 {
        for k in 0..p0 {
            if j != k {
                gamma.set(j, k, 0.3f64.powi((j as isize - k as isize).unsigned_abs() as i32));
            }
        }
    }
    gamma
}

/// Draw the `n x p` design as column vectors.
pub fn gen_design(scenario: &SimulationScenario, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    scenario.validate()?;
    let (n, p) = (scenario.n, scenario.p);
    let gamma = design_covariance(p, scenario.p0);
    let chol = gamma
        .cholesky()
        .expect("scenario covariance is positive definite by construction");
    let mut cols = vec![vec![0.0; n]; p];
    let mut z = vec![0.0; p];
    for i in 0..n {
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        for j in 0..p {
            // row of L times z
            let mut v = 0.0;
            for k in 0..=j {
                v += chol.get(j, k) * z[k];
            }
            cols[j][i] = v;
        }
    }
    Ok(cols)
}

/// Draw errors for a realized design: `s_i^2 = p^{-1} sum_j |X_ij|^5` and
/// `eps_i = s_i eta_i` (or `s_i = 1` in the homoscedastic variant).
pub fn gen_errors(
    scenario: &SimulationScenario,
    cols: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = cols.first().map(|c| c.len()).unwrap_or(0);
    let p = cols.len();
    if p == 0 || n == 0 {
        return Err(invalid("empty design"));
    }
    let mut s = vec![0.0; n];
    for i in 0..n {
        if scenario.homoscedastic {
            s[i] = 1.0;
            continue;
        }
        let mut acc = 0.0;
        for col in cols {
            acc += col[i].abs().powi(5);
        }
        let s2 = acc / p as f64;
        if !(s2 > 0.0) {
            return Err(invalid(format!(
                "heteroscedasticity scale vanished at row {i}"
            )));
        }
        s[i] = s2.sqrt();
    }
    let eps = (0..n)
        .map(|i| {
            let eta = match scenario.error_case {
                ErrorCase::ChiSquared => {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    a * a + b * b - 2.0
                }
                ErrorCase::Normal => rng.sample(StandardNormal),
            };
            s[i] * eta
        })
        .collect();
    Ok((eps, s))
}

/// Assemble one full dataset draw for Monte Carlo replicate `rep`.
pub fn scenario_draw(
    scenario: &SimulationScenario,
    fixed_cols: Option<&[Vec<f64>]>,
    rep: u64,
) -> Result<ScenarioDraw> {
    let beta_true = true_beta(scenario.p, scenario.p0)?;
    let cols: Vec<Vec<f64>> = match (scenario.design_mode, fixed_cols) {
        (DesignMode::Fixed, Some(c)) => c.to_vec(),
        (DesignMode::Fixed, None) => {
            gen_design(scenario, &mut substream(scenario.seed, domain::DESIGN, 0))?
        }
        (DesignMode::Random, _) => gen_design(
            scenario,
            &mut substream(scenario.seed, domain::DESIGN, 1 + rep),
        )?,
    };
    let (epsilon, s) = gen_errors(
        scenario,
        &cols,
        &mut substream(scenario.seed, domain::ERRORS, rep),
    )?;
    let n = scenario.n;
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut v = epsilon[i];
            for (j, col) in cols.iter().enumerate() {
                v += col[i] * beta_true[j];
            }
            v
        })
        .collect();
    let dataset = Dataset::from_cols(cols, y)?;
    Ok(ScenarioDraw {
        dataset,
        beta_true,
        s,
        epsilon,
    })
}

/// Coverage contribution of one Monte Carlo replicate for one scheme.
#[derive(Debug, Clone)]
pub struct ReplicateContribution {
    pub scheme: Scheme,
    pub intervals: Vec<IntervalEstimate>,
    pub region_hit: bool,
}

/// Run one Monte Carlo replicate in isolation: everything it consumes is
/// derived from `(scenario.seed, rep)`, so re-running a single replicate
/// reproduces its contribution to the experiment exactly.
pub fn run_single_replicate(
    scenario: &SimulationScenario,
    methods: &[Scheme],
    rep: u64,
) -> Result<Vec<ReplicateContribution>> {
    let opts = SolverOptions::default();
    let dist = WeightDistribution::default();
    run_replicate(scenario, methods, None, rep, &opts, &dist)
}

fn run_replicate(
    scenario: &SimulationScenario,
    methods: &[Scheme],
    fixed_cols: Option<&[Vec<f64>]>,
    rep: u64,
    opts: &SolverOptions,
    dist: &WeightDistribution,
) -> Result<Vec<ReplicateContribution>> {
    let draw = scenario_draw(scenario, fixed_cols, rep)?;
    let data = &draw.dataset;

    let grid = default_lambda_grid(data, 50, 1e-3);
    let folds = DEFAULT_CV_FOLDS.min(data.n());
    let lambda = cross_validate_lambda(
        data,
        &grid,
        folds,
        &mut substream(scenario.seed, domain::CV_FOLDS, rep),
        opts,
    )?;
    let fit = fit_lasso(data, lambda, None, opts)?;
    let a_n = default_threshold(scenario.n, 1.0)?;
    let est = threshold_estimate(&fit, a_n)?;

    let mut per_scheme = Vec::with_capacity(methods.len());
    for &scheme in methods {
        let scheme_seed = derive_seed(
            scenario.seed,
            domain::SCHEME_SEED.wrapping_add(scheme as u64),
            rep,
        );
        let draws = run_scheme(scheme, data, &fit, &est, dist, scenario.b, scheme_seed, opts)?;
        let mut intervals = Vec::with_capacity(2 * scenario.p);
        for j in 0..scenario.p {
            intervals.push(percentile_interval(
                &draws,
                &fit,
                j,
                scenario.level,
                Side::TwoSided,
            )?);
            intervals.push(percentile_interval(
                &draws,
                &fit,
                j,
                scenario.level,
                Side::RightSided,
            )?);
        }
        let region = sup_norm_region(&draws, &fit, scenario.level)?;
        per_scheme.push(ReplicateContribution {
            scheme,
            region_hit: region.contains(&draw.beta_true),
            intervals,
        });
    }
    Ok(per_scheme)
}

/// Run the full coverage experiment: `m` Monte Carlo datasets, each with a
/// cross-validated penalty, a thresholded fit, `b` bootstrap replicates per
/// requested scheme, two-sided and right-sided intervals plus the sup-norm
/// region at the scenario level, tallied against the true coefficients.
///
/// The result is a pure function of the scenario; Monte Carlo replicates
/// run in parallel on isolated substreams. Replicate-level failures are
/// skipped, and the experiment fails once more than 2% of them fail.
pub fn run_coverage_experiment(
    scenario: &SimulationScenario,
    methods: &[Scheme],
) -> Result<BTreeMap<Scheme, CoverageReport>> {
    scenario.validate()?;
    if methods.is_empty() {
        return Err(invalid("need at least one bootstrap scheme"));
    }
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();

    let opts = SolverOptions::default();
    let dist = WeightDistribution::default();
    let fixed_cols = match scenario.design_mode {
        DesignMode::Fixed => Some(gen_design(
            scenario,
            &mut substream(scenario.seed, domain::DESIGN, 0),
        )?),
        DesignMode::Random => None,
    };

    let outcomes: Vec<Result<Vec<ReplicateContribution>>> = (0..scenario.m as u64)
        .into_par_iter()
        .map(|rep| run_replicate(scenario, &methods, fixed_cols.as_deref(), rep, &opts, &dist))
        .collect();

    let total = outcomes.len();
    let mut successes = Vec::with_capacity(total);
    let mut first_failure: Option<String> = None;
    let mut failed = 0usize;
    for o in outcomes {
        match o {
            Ok(v) => successes.push(v),
            Err(e) => {
                failed += 1;
                if first_failure.is_none() {
                    first_failure = Some(e.to_string());
                }
            }
        }
    }
    if (failed as f64) > 0.02 * total as f64 {
        return Err(Error::TooManyReplicateFailures {
            failed,
            total,
            first: first_failure.unwrap_or_default(),
        });
    }

    let truth = true_beta(scenario.p, scenario.p0)?;
    let mut out = BTreeMap::new();
    for (s_idx, &scheme) in methods.iter().enumerate() {
        let intervals: Vec<IntervalEstimate> = successes
            .iter()
            .flat_map(|o| o[s_idx].intervals.iter().cloned())
            .collect();
        let mut report = coverage_tally(&intervals, &truth)?;
        report.method = scheme.name().to_string();
        report.scenario = scenario.tag();
        report.m = successes.len();
        let hits = successes.iter().filter(|o| o[s_idx].region_hit).count();
        report.region = Some(RegionCoverage {
            hits,
            count: successes.len(),
        });
        out.insert(scheme, report);
    }
    Ok(out)
}
