//! Confidence intervals, regions, coverage tallies and coverage ratios
//! built from bootstrap replicate statistics.
//!
//! Intervals are *basic* (reflected) bootstrap intervals by default: the law
//! of `sqrt(n)(betahat - beta)` is approximated by the replicate statistics
//! `T*`, so a two-sided interval at level `l` is
//!
//! ```text
//!     [ betahat_j - q_{(1+l)/2} / sqrt(n),  betahat_j - q_{(1-l)/2} / sqrt(n) ]
//! ```
//!
//! with `q` the empirical type-7 quantile of column `j` of `T*`. One-sided
//! intervals are right-sided upper bounds `(-inf, betahat_j - q_{1-l}/sqrt(n)]`.
//! A percentile-style construction is available behind a flag.

use crate::bootstrap::BootstrapDraws;
use crate::error::{invalid, Error, Result};
use crate::lasso::LassoFit;
use serde::{Deserialize, Serialize};

/// Interval sidedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    TwoSided,
    RightSided,
}

/// Which bootstrap interval convention to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotConvention {
    /// Reflected quantiles around the point estimate.
    #[default]
    Basic,
    /// Raw quantiles of the bootstrap estimates around the centering point.
    Percentile,
}

/// A confidence interval for one coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalEstimate {
    pub coef_index: usize,
    pub level: f64,
    pub side: Side,
    pub lower: f64,
    pub upper: f64,
    /// Present for two-sided intervals only.
    pub width: Option<f64>,
}

impl IntervalEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// A sup-norm confidence ball for the whole coefficient vector.
#[derive(Debug, Clone, Serialize)]
pub struct RegionEstimate {
    pub center: Vec<f64>,
    pub radius: f64,
    pub level: f64,
}

impl RegionEstimate {
    pub fn contains(&self, beta: &[f64]) -> bool {
        beta.len() == self.center.len()
            && beta
                .iter()
                .zip(&self.center)
                .all(|(b, c)| (b - c).abs() <= self.radius)
    }
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub fn quantile_type7(sorted: &[f64], alpha: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&alpha));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted_column(draws: &BootstrapDraws, j: usize) -> Vec<f64> {
    let mut col = draws.column(j);
    col.sort_by(f64::total_cmp);
    col
}

/// Bootstrap confidence interval for coefficient `j` using the basic pivot.
pub fn percentile_interval(
    draws: &BootstrapDraws,
    fit: &LassoFit,
    j: usize,
    level: f64,
    side: Side,
) -> Result<IntervalEstimate> {
    percentile_interval_with(draws, fit, j, level, side, PivotConvention::Basic)
}

/// Same, with an explicit pivot convention.
pub fn percentile_interval_with(
    draws: &BootstrapDraws,
    fit: &LassoFit,
    j: usize,
    level: f64,
    side: Side,
    pivot: PivotConvention,
) -> Result<IntervalEstimate> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("confidence level must lie in (0, 1)"));
    }
    if draws.b < 20 {
        return Err(invalid(format!(
            "need at least 20 bootstrap replicates, got {}",
            draws.b
        )));
    }
    if j >= draws.p() || j >= fit.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: draws.p(),
            got: j,
            what: "coefficient index",
        });
    }
    let root_n = (draws.n as f64).sqrt();
    let col = sorted_column(draws, j);
    let est = match pivot {
        PivotConvention::Basic => match side {
            Side::TwoSided => {
                let q_hi = quantile_type7(&col, (1.0 + level) / 2.0);
                let q_lo = quantile_type7(&col, (1.0 - level) / 2.0);
                let lower = fit.beta[j] - q_hi / root_n;
                let upper = fit.beta[j] - q_lo / root_n;
                IntervalEstimate {
                    coef_index: j,
                    level,
                    side,
                    lower,
                    upper,
                    width: Some(upper - lower),
                }
            }
            Side::RightSided => {
                let q = quantile_type7(&col, 1.0 - level);
                IntervalEstimate {
                    coef_index: j,
                    level,
                    side,
                    lower: f64::NEG_INFINITY,
                    upper: fit.beta[j] - q / root_n,
                    width: None,
                }
            }
        },
        PivotConvention::Percentile => match side {
            Side::TwoSided => {
                let q_hi = quantile_type7(&col, (1.0 + level) / 2.0);
                let q_lo = quantile_type7(&col, (1.0 - level) / 2.0);
                let lower = draws.center[j] + q_lo / root_n;
                let upper = draws.center[j] + q_hi / root_n;
                IntervalEstimate {
                    coef_index: j,
                    level,
                    side,
                    lower,
                    upper,
                    width: Some(upper - lower),
                }
            }
            Side::RightSided => {
                let q = quantile_type7(&col, level);
                IntervalEstimate {
                    coef_index: j,
                    level,
                    side,
                    lower: f64::NEG_INFINITY,
                    upper: draws.center[j] + q / root_n,
                    width: None,
                }
            }
        },
    };
    debug_assert!(est.lower <= est.upper);
    Ok(est)
}

/// Sup-norm confidence ball: the level-quantile of `max_j |T*_{b,j}|`,
/// rescaled by `1/sqrt(n)`, around the Lasso estimate.
pub fn sup_norm_region(draws: &BootstrapDraws, fit: &LassoFit, level: f64) -> Result<RegionEstimate> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("confidence level must lie in (0, 1)"));
    }
    if fit.beta.len() != draws.p() {
        return Err(Error::DimensionMismatch {
            expected: draws.p(),
            got: fit.beta.len(),
            what: "fit dimension",
        });
    }
    let mut maxima: Vec<f64> = draws
        .t_star
        .iter()
        .map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    maxima.sort_by(f64::total_cmp);
    let radius = quantile_type7(&maxima, level) / (draws.n as f64).sqrt();
    Ok(RegionEstimate {
        center: fit.beta.clone(),
        radius,
        level,
    })
}

/// Per-coefficient coverage bookkeeping for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefCoverage {
    pub index: usize,
    pub truth: f64,
    pub two_sided_hits: usize,
    pub two_sided_count: usize,
    pub two_sided_width_sum: f64,
    pub one_sided_hits: usize,
    pub one_sided_count: usize,
}

impl CoefCoverage {
    pub fn two_sided_coverage(&self) -> f64 {
        self.two_sided_hits as f64 / self.two_sided_count.max(1) as f64
    }

    pub fn one_sided_coverage(&self) -> f64 {
        self.one_sided_hits as f64 / self.one_sided_count.max(1) as f64
    }

    pub fn avg_width(&self) -> f64 {
        self.two_sided_width_sum / self.two_sided_count.max(1) as f64
    }
}

/// Region coverage bookkeeping.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegionCoverage {
    pub hits: usize,
    pub count: usize,
}

impl RegionCoverage {
    pub fn coverage(&self) -> f64 {
        self.hits as f64 / self.count.max(1) as f64
    }
}

/// Coverage results for one method over a set of Monte Carlo datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub method: String,
    pub scenario: String,
    /// Datasets tallied.
    pub m: usize,
    pub coefficients: Vec<CoefCoverage>,
    pub region: Option<RegionCoverage>,
}

/// Tally a flat list of intervals (possibly spanning many datasets and both
/// sidednesses) against the true coefficient vector.
pub fn coverage_tally(intervals: &[IntervalEstimate], truth: &[f64]) -> Result<CoverageReport> {
    let p = truth.len();
    let mut coefficients: Vec<CoefCoverage> = (0..p)
        .map(|j| CoefCoverage {
            index: j,
            truth: truth[j],
            two_sided_hits: 0,
            two_sided_count: 0,
            two_sided_width_sum: 0.0,
            one_sided_hits: 0,
            one_sided_count: 0,
        })
        .collect();
    for iv in intervals {
        if iv.coef_index >= p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: iv.coef_index,
                what: "interval coefficient index",
            });
        }
        let c = &mut coefficients[iv.coef_index];
        let hit = iv.contains(truth[iv.coef_index]);
        match iv.side {
            Side::TwoSided => {
                c.two_sided_count += 1;
                c.two_sided_hits += hit as usize;
                c.two_sided_width_sum += iv.width.unwrap_or(0.0);
            }
            Side::RightSided => {
                c.one_sided_count += 1;
                c.one_sided_hits += hit as usize;
            }
        }
    }
    let m = coefficients
        .iter()
        .map(|c| c.two_sided_count.max(c.one_sided_count))
        .max()
        .unwrap_or(0);
    Ok(CoverageReport {
        method: String::new(),
        scenario: String::new(),
        m,
        coefficients,
        region: None,
    })
}

/// One coefficient's empirical coverage ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EcrValue {
    pub index: usize,
    pub ratio: f64,
    /// Set when the competitor's coverage is zero (ratio is the +inf
    /// sentinel).
    pub undefined: bool,
}

/// Empirical Coverage Ratio: perturbation-bootstrap coverage divided by a
/// competitor's, coefficient by coefficient, for the requested sidedness.
pub fn empirical_coverage_ratio(
    pb: &CoverageReport,
    other: &CoverageReport,
    side: Side,
) -> Result<Vec<EcrValue>> {
    if pb.coefficients.len() != other.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: pb.coefficients.len(),
            got: other.coefficients.len(),
            what: "coefficient count",
        });
    }
    pb.coefficients
        .iter()
        .zip(&other.coefficients)
        .map(|(a, b)| {
            if a.index != b.index || a.truth != b.truth {
                return Err(invalid(format!(
                    "reports disagree on coefficient {} (truth {} vs {})",
                    a.index, a.truth, b.truth
                )));
            }
            let (num, den) = match side {
                Side::TwoSided => (a.two_sided_coverage(), b.two_sided_coverage()),
                Side::RightSided => (a.one_sided_coverage(), b.one_sided_coverage()),
            };
            Ok(if den == 0.0 {
                EcrValue {
                    index: a.index,
                    ratio: f64::INFINITY,
                    undefined: true,
                }
            } else {
                EcrValue {
                    index: a.index,
                    ratio: num / den,
                    undefined: false,
                }
            })
        })
        .collect()
}
