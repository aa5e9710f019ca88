//! Bootstrap replicate generators for the Lasso.
//!
//! Four schemes produce replicate statistics `T*_b = sqrt(n) (beta*_b -
//! beta~)` centered at the hard-thresholded estimator `beta~`:
//!
//! * **perturbation** — the modified perturbation bootstrap. Each replicate
//!   reweights the loss with i.i.d. nonnegative weights `G_i` constrained to
//!   `Var(G) = (E G)^2` and is computed by running the ordinary Lasso on
//!   pseudo-responses `z_i = ytilde_i + eps~_i (G_i - mu) / mu`, which has
//!   the same minimizer as the reweighted two-term objective.
//! * **naive** — the uncorrected perturbation scheme (weighted Lasso on the
//!   raw responses). Kept as a diagnostic: its score is not centered and the
//!   replicate mean drifts away from the modified scheme's.
//! * **residual** — resampling of centered residuals added back onto fitted
//!   values; valid under homoscedastic errors only.
//! * **paired** — plain row resampling (random-design comparator).
//!
//! Replicates draw from substreams derived from `(seed, replicate index)`,
//! so a run is reproducible regardless of thread count, and the penalty is
//! held at the original fit's lambda across all replicates.

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::lasso::{fit_lasso, fit_lasso_weighted, LassoFit, SolverOptions};
use crate::rng::{domain, substream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Identifies which resampling scheme produced a set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Perturbation,
    #[serde(rename = "naive")]
    NaivePerturbation,
    Residual,
    Paired,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Perturbation,
        Scheme::NaivePerturbation,
        Scheme::Residual,
        Scheme::Paired,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Perturbation => "perturbation",
            Scheme::NaivePerturbation => "naive",
            Scheme::Residual => "residual",
            Scheme::Paired => "paired",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perturbation" => Ok(Scheme::Perturbation),
            "naive" => Ok(Scheme::NaivePerturbation),
            "residual" => Ok(Scheme::Residual),
            "paired" => Ok(Scheme::Paired),
            other => Err(invalid(format!("unknown bootstrap scheme `{other}`"))),
        }
    }
}

/// Supported weight families.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightFamily {
    Exponential { rate: f64 },
    Beta { alpha: f64, beta: f64 },
}

/// Law of the perturbation weights `G_i`: nonnegative, non-degenerate, with
/// the variance pinned to the squared mean.
#[derive(Debug, Clone, Copy)]
pub struct WeightDistribution {
    family: WeightFamily,
    mu: f64,
    sigma2: f64,
}

impl Serialize for WeightDistribution {
    fn serialize<S>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error>
    where
        S: serde::Serializer,
    {
        // mu and sigma2 are derived; the family is the whole state
        self.family.serialize(serializer)
    }
}

impl WeightDistribution {
    /// Exponential(rate) weights; the mean/variance constraint holds for
    /// every rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid("exponential rate must be positive and finite"));
        }
        let mu = 1.0 / rate;
        Ok(WeightDistribution {
            family: WeightFamily::Exponential { rate },
            mu,
            sigma2: mu * mu,
        })
    }

    /// Beta weights with the second parameter forced to
    /// `alpha (1 + alpha) / (1 - alpha)`, the unique choice that makes the
    /// variance equal the squared mean. Requires `0 < alpha < 1`.
    pub fn beta(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("beta weights need 0 < alpha < 1"));
        }
        let beta = alpha * (1.0 + alpha) / (1.0 - alpha);
        Self::from_family(WeightFamily::Beta { alpha, beta })
    }

    /// Validate an explicit family description.
    pub fn from_family(family: WeightFamily) -> Result<Self> {
        match family {
            WeightFamily::Exponential { rate } => Self::exponential(rate),
            WeightFamily::Beta { alpha, beta } => {
                if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0) || !beta.is_finite() {
                    return Err(invalid("beta weights need 0 < alpha < 1 and beta > 0"));
                }
                let expect = alpha * (1.0 + alpha) / (1.0 - alpha);
                if (beta - expect).abs() > 1e-9 * expect.max(1.0) {
                    return Err(invalid(format!(
                        "beta parameter {beta} breaks the variance constraint; \
                         alpha = {alpha} requires beta = {expect}"
                    )));
                }
                let mu = alpha / (alpha + beta);
                let sigma2 = alpha * beta / ((alpha + beta).powi(2) * (alpha + beta + 1.0));
                let dist = WeightDistribution {
                    family: WeightFamily::Beta { alpha, beta },
                    mu,
                    sigma2,
                };
                dist.check_constraint()?;
                Ok(dist)
            }
        }
    }

    fn check_constraint(&self) -> Result<()> {
        let rel = (self.sigma2 - self.mu * self.mu).abs() / (self.mu * self.mu);
        if rel > 1e-12 {
            return Err(invalid(format!(
                "weight law violates sigma^2 = mu^2 (relative error {rel:e})"
            )));
        }
        Ok(())
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

impl Default for WeightDistribution {
    /// Exp(1): the law used in the simulation study.
    fn default() -> Self {
        WeightDistribution::exponential(1.0).unwrap()
    }
}

impl<'de> Deserialize<'de> for WeightDistribution {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let family = WeightFamily::deserialize(deserializer)?;
        WeightDistribution::from_family(family).map_err(serde::de::Error::custom)
    }
}

/// `n` i.i.d. weights from `dist`, deterministic given the generator state.
pub fn draw_weights(dist: &WeightDistribution, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match dist.family {
        WeightFamily::Exponential { rate } => {
            let d = Exp::new(rate).expect("validated at construction");
            (0..n).map(|_| d.sample(rng)).collect()
        }
        WeightFamily::Beta { alpha, beta } => {
            let d = Beta::new(alpha, beta).expect("validated at construction");
            (0..n).map(|_| d.sample(rng)).collect()
        }
    }
}

/// Hard-thresholded Lasso estimate: the bootstrap's centering point.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdedEstimate {
    pub beta_tilde: Vec<f64>,
    pub a_n: f64,
    /// Indices with a surviving (nonzero) coefficient.
    pub support: Vec<usize>,
    /// Signs of the surviving coefficients, aligned with `support`.
    pub signs: Vec<i8>,
}

/// Default threshold sequence `scale * n^{-1/4}`.
///
/// This goes to zero while `n^{-1/2} log n / a_n = n^{-1/4} log n / scale`
/// also goes to zero, the two-sided rate the thresholding step needs.
pub fn default_threshold(n: usize, scale: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("threshold needs n >= 2"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("threshold scale must be positive and finite"));
    }
    Ok(scale * (n as f64).powf(-0.25))
}

/// Zero out every coefficient with `|beta_j| <= a_n` (strictly greater
/// survives).
pub fn threshold_estimate(fit: &LassoFit, a_n: f64) -> Result<ThresholdedEstimate> {
    if !(a_n > 0.0) || !a_n.is_finite() {
        return Err(invalid("threshold a_n must be positive and finite"));
    }
    let beta_tilde: Vec<f64> = fit
        .beta
        .iter()
        .map(|&b| if b.abs() > a_n { b } else { 0.0 })
        .collect();
    let support: Vec<usize> = beta_tilde
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    let signs = support
        .iter()
        .map(|&j| if beta_tilde[j] > 0.0 { 1 } else { -1 })
        .collect();
    Ok(ThresholdedEstimate {
        beta_tilde,
        a_n,
        support,
        signs,
    })
}

/// Matrix of replicate statistics for one scheme on one dataset.
#[derive(Debug, Clone)]
pub struct BootstrapDraws {
    pub scheme: Scheme,
    /// Row `b` holds `sqrt(n) (beta*_b - center)`.
    pub t_star: Vec<Vec<f64>>,
    /// The centering vector `beta~`.
    pub center: Vec<f64>,
    pub lambda: f64,
    pub n: usize,
    pub b: usize,
    pub seed: u64,
    /// Replicates whose solver did not certify convergence.
    pub flagged: usize,
}

impl BootstrapDraws {
    pub fn p(&self) -> usize {
        self.center.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.t_star.iter().map(|row| row[j]).collect()
    }

    /// Column means of the replicate statistics.
    pub fn column_means(&self) -> Vec<f64> {
        let p = self.p();
        let mut m = vec![0.0; p];
        for row in &self.t_star {
            for j in 0..p {
                m[j] += row[j];
            }
        }
        for v in &mut m {
            *v /= self.b as f64;
        }
        m
    }
}

/// Pseudo-responses of the modified scheme:
/// `z_i = ytilde_i + eps~_i (G_i - mu) / mu` with `ytilde = X beta~` and
/// `eps~ = y - ytilde`. Conditionally on the data, `E z = ytilde` exactly.
pub fn pseudo_responses(
    data: &Dataset,
    est: &ThresholdedEstimate,
    weights: &[f64],
    mu: f64,
) -> Result<Vec<f64>> {
    if weights.len() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            got: weights.len(),
            what: "weights length",
        });
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(invalid("mu must be positive and finite"));
    }
    let fitted = data.predict(&est.beta_tilde);
    Ok((0..data.n())
        .map(|i| {
            let eps = data.y()[i] - fitted[i];
            fitted[i] + eps * (weights[i] - mu) / mu
        })
        .collect())
}

/// One modified-perturbation replicate with explicit weights: the Lasso fit
/// to the pseudo-responses at the original penalty.
pub fn perturbation_replicate(
    data: &Dataset,
    est: &ThresholdedEstimate,
    lambda: f64,
    weights: &[f64],
    mu: f64,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    let z = pseudo_responses(data, est, weights, mu)?;
    let boot_data = data.with_response(z)?;
    fit_lasso(&boot_data, lambda, Some(&est.beta_tilde), opts)
}

/// One naive replicate with explicit weights: weighted Lasso on the raw
/// responses.
pub fn naive_replicate(
    data: &Dataset,
    est: &ThresholdedEstimate,
    lambda: f64,
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<LassoFit> {
    fit_lasso_weighted(data, weights, lambda, Some(&est.beta_tilde), opts)
}

/// One paired replicate with explicit resampling indices.
pub fn paired_replicate(
    data: &Dataset,
    est: &ThresholdedEstimate,
    lambda: f64,
    idx: &[usize],
    opts: &SolverOptions,
) -> Result<LassoFit> {
    let resampled = data.subset(idx)?;
    fit_lasso(&resampled, lambda, Some(&est.beta_tilde), opts)
}

fn scaled_difference(n: usize, beta_star: &[f64], center: &[f64]) -> Vec<f64> {
    let root_n = (n as f64).sqrt();
    beta_star
        .iter()
        .zip(center)
        .map(|(b, c)| root_n * (b - c))
        .collect()
}

fn assemble(
    scheme: Scheme,
    rows: Vec<(Vec<f64>, bool)>,
    center: &[f64],
    lambda: f64,
    n: usize,
    seed: u64,
) -> Result<BootstrapDraws> {
    let b = rows.len();
    let flagged = rows.iter().filter(|(_, ok)| !ok).count();
    if (flagged as f64) > 0.01 * b as f64 {
        return Err(Error::TooManyFlagged { flagged, total: b });
    }
    let t_star: Vec<Vec<f64>> = rows.into_iter().map(|(r, _)| r).collect();
    if t_star
        .iter()
        .any(|row| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite("bootstrap replicate statistic"));
    }
    Ok(BootstrapDraws {
        scheme,
        t_star,
        center: center.to_vec(),
        lambda,
        n,
        b,
        seed,
        flagged,
    })
}

fn validate_common(fit: &LassoFit, est: &ThresholdedEstimate, data: &Dataset, b: usize) -> Result<()> {
    if b == 0 {
        return Err(invalid("need at least one bootstrap replicate"));
    }
    if fit.beta.len() != data.p() || est.beta_tilde.len() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            got: fit.beta.len(),
            what: "fit/estimate dimension",
        });
    }
    Ok(())
}

/// Modified perturbation bootstrap (the corrected scheme).
pub fn perturbation_bootstrap(
    data: &Dataset,
    fit: &LassoFit,
    est: &ThresholdedEstimate,
    dist: &WeightDistribution,
    b: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<BootstrapDraws> {
    validate_common(fit, est, data, b)?;
    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, domain::PERTURB, rep as u64);
            let weights = draw_weights(dist, data.n(), &mut rng);
            let boot = perturbation_replicate(data, est, fit.lambda, &weights, dist.mu(), opts)?;
            Ok((
                scaled_difference(data.n(), &boot.beta, &est.beta_tilde),
                boot.converged,
            ))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    assemble(Scheme::Perturbation, rows, &est.beta_tilde, fit.lambda, data.n(), seed)
}

/// Naive perturbation bootstrap (diagnostic; known mis-centering).
pub fn naive_perturbation_bootstrap(
    data: &Dataset,
    fit: &LassoFit,
    est: &ThresholdedEstimate,
    dist: &WeightDistribution,
    b: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<BootstrapDraws> {
    validate_common(fit, est, data, b)?;
    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, domain::NAIVE, rep as u64);
            let weights = draw_weights(dist, data.n(), &mut rng);
            let boot = naive_replicate(data, est, fit.lambda, &weights, opts)?;
            Ok((
                scaled_difference(data.n(), &boot.beta, &est.beta_tilde),
                boot.converged,
            ))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    assemble(
        Scheme::NaivePerturbation,
        rows,
        &est.beta_tilde,
        fit.lambda,
        data.n(),
        seed,
    )
}

/// Residual bootstrap: resample centered residuals `eps~_i - mean(eps~)`
/// with replacement and rebuild responses on the thresholded fit.
pub fn residual_bootstrap(
    data: &Dataset,
    fit: &LassoFit,
    est: &ThresholdedEstimate,
    b: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<BootstrapDraws> {
    validate_common(fit, est, data, b)?;
    let n = data.n();
    let fitted = data.predict(&est.beta_tilde);
    let resid: Vec<f64> = (0..n).map(|i| data.y()[i] - fitted[i]).collect();
    let mean = resid.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = resid.iter().map(|e| e - mean).collect();

    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, domain::RESIDUAL, rep as u64);
            let y_star: Vec<f64> = (0..n)
                .map(|i| fitted[i] + centered[rng.random_range(0..n)])
                .collect();
            let boot_data = data.with_response(y_star)?;
            let boot = fit_lasso(&boot_data, fit.lambda, Some(&est.beta_tilde), opts)?;
            Ok((
                scaled_difference(n, &boot.beta, &est.beta_tilde),
                boot.converged,
            ))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    assemble(Scheme::Residual, rows, &est.beta_tilde, fit.lambda, n, seed)
}

/// Paired bootstrap: resample `(X_i, y_i)` rows with replacement.
///
/// A resample whose design has a zero-norm column is redrawn (at most ten
/// times); if every attempt degenerates the replicate falls back to the
/// identity resample and is flagged.
pub fn paired_bootstrap(
    data: &Dataset,
    fit: &LassoFit,
    est: &ThresholdedEstimate,
    b: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<BootstrapDraws> {
    validate_common(fit, est, data, b)?;
    let n = data.n();
    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, domain::PAIRED, rep as u64);
            let mut chosen: Option<Dataset> = None;
            let mut degenerate = false;
            for attempt in 0..10 {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                match data.subset(&idx) {
                    Ok(d) => {
                        chosen = Some(d);
                        break;
                    }
                    Err(_) if attempt < 9 => continue,
                    Err(_) => degenerate = true,
                }
            }
            let resampled = match chosen {
                Some(d) => d,
                None => {
                    debug_assert!(degenerate);
                    data.clone()
                }
            };
            let boot = fit_lasso(&resampled, fit.lambda, Some(&est.beta_tilde), opts)?;
            Ok((
                scaled_difference(n, &boot.beta, &est.beta_tilde),
                boot.converged && !degenerate,
            ))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    assemble(Scheme::Paired, rows, &est.beta_tilde, fit.lambda, n, seed)
}

/// Dispatch on the scheme tag. Residual and paired ignore the weight law.
pub fn run_scheme(
    scheme: Scheme,
    data: &Dataset,
    fit: &LassoFit,
    est: &ThresholdedEstimate,
    dist: &WeightDistribution,
    b: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<BootstrapDraws> {
    match scheme {
        Scheme::Perturbation => perturbation_bootstrap(data, fit, est, dist, b, seed, opts),
        Scheme::NaivePerturbation => {
            naive_perturbation_bootstrap(data, fit, est, dist, b, seed, opts)
        }
        Scheme::Residual => residual_bootstrap(data, fit, est, b, seed, opts),
        Scheme::Paired => paired_bootstrap(data, fit, est, b, seed, opts),
    }
}
