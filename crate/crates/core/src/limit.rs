//! Sampler for the limiting law of the scaled Lasso error.
//!
//! `sqrt(n)(betahat - beta)` converges to `argmin_v Z(v)` with
//!
//! ```text
//!     Z(v) = v'Cv - 2 v'W + lambda0 ( sum_{j <= p0} sgn(beta_j) v_j
//!                                     + sum_{j > p0} |v_j| )
//! ```
//!
//! where `W ~ N(0, Sigma)`, `C` is the design limit, `Sigma` the score
//! covariance, and the active coordinates occupy the leading positions.
//! Under the (misspecified) residual-bootstrap limit, `W ~ N(0, s^2 C)`
//! instead. Sampling a draw means drawing `W` through a Cholesky-type
//! factor and minimizing the convex `Z` by cyclic coordinate descent:
//! active coordinates get a shifted linear update, zero coordinates a
//! soft-threshold update.

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::lasso::soft_threshold_unchecked;
use crate::linalg::Mat;
use crate::rng::{domain, substream};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Sample analogues of the limit parameters, computed from one dataset.
#[derive(Debug, Clone)]
pub struct LimitMatrices {
    /// `n^{-1} sum X_i X_i'`.
    pub c: Mat,
    /// `n^{-1} sum X_i X_i' eps_i^2`.
    pub sigma: Mat,
    /// `n^{-1} sum eps_i^2`.
    pub s2: f64,
    /// Smallest eigenvalue of `c`; a value below 1e-8 means the design
    /// limit is degenerate in sample and downstream use is unreliable.
    pub c_min_eigenvalue: f64,
}

impl LimitMatrices {
    pub fn is_well_conditioned(&self) -> bool {
        self.c_min_eigenvalue >= 1e-8
    }
}

/// Plug-in estimates `(C_n, Sigma_n, s2_n)` from a dataset and residuals.
pub fn estimate_limit_matrices(data: &Dataset, residuals: &[f64]) -> Result<LimitMatrices> {
    let (n, p) = (data.n(), data.p());
    if residuals.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: residuals.len(),
            what: "residual length",
        });
    }
    let nf = n as f64;
    let mut c = Mat::zeros(p, p);
    let mut sigma = Mat::zeros(p, p);
    for a in 0..p {
        let ca = data.col(a);
        for b in a..p {
            let cb = data.col(b);
            let mut sc = 0.0;
            let mut ss = 0.0;
            for i in 0..n {
                let prod = ca[i] * cb[i];
                sc += prod;
                ss += prod * residuals[i] * residuals[i];
            }
            c.set(a, b, sc / nf);
            c.set(b, a, sc / nf);
            sigma.set(a, b, ss / nf);
            sigma.set(b, a, ss / nf);
        }
    }
    let s2 = residuals.iter().map(|e| e * e).sum::<f64>() / nf;
    let c_min_eigenvalue = c.min_eigenvalue();
    Ok(LimitMatrices {
        c,
        sigma,
        s2,
        c_min_eigenvalue,
    })
}

/// Parameters of the limit objective `Z(v)`.
#[derive(Debug, Clone)]
pub struct LimitObjective {
    c: Mat,
    sigma: Mat,
    s2c: Option<Mat>,
    lambda0: f64,
    /// One entry per coordinate: the sign of the true coefficient for the
    /// leading `p0` active coordinates, zero after that.
    signs: Vec<i8>,
    p0: usize,
}

impl LimitObjective {
    /// Validates shape, symmetry, definiteness, and the convention that the
    /// nonzero signs occupy the leading positions.
    pub fn new(
        c: Mat,
        sigma: Mat,
        s2c: Option<Mat>,
        lambda0: f64,
        signs: Vec<i8>,
    ) -> Result<Self> {
        let p = signs.len();
        if !c.is_square() || c.rows() != p {
            return Err(invalid("C must be p x p"));
        }
        if !sigma.is_square() || sigma.rows() != p {
            return Err(invalid("Sigma must be p x p"));
        }
        let scale_c = c.frobenius_norm().max(1.0);
        if !c.is_symmetric(1e-10 * scale_c) {
            return Err(invalid("C must be symmetric"));
        }
        let scale_s = sigma.frobenius_norm().max(1.0);
        if !sigma.is_symmetric(1e-10 * scale_s) {
            return Err(invalid("Sigma must be symmetric"));
        }
        if c.min_eigenvalue() <= 0.0 {
            return Err(Error::NotPositiveDefinite("limit objective C"));
        }
        if sigma.min_eigenvalue() < -1e-10 * scale_s {
            return Err(invalid("Sigma must be positive semidefinite"));
        }
        if let Some(m) = &s2c {
            if !m.is_square() || m.rows() != p {
                return Err(invalid("s2C must be p x p"));
            }
        }
        if !(lambda0 >= 0.0) || !lambda0.is_finite() {
            return Err(invalid("lambda0 must be finite and nonnegative"));
        }
        if signs.iter().any(|s| s.abs() > 1) {
            return Err(invalid("signs must lie in {-1, 0, +1}"));
        }
        let p0 = signs.iter().filter(|s| **s != 0).count();
        if signs[..p0].contains(&0) {
            return Err(invalid(
                "active signs must occupy the leading coordinates; reorder covariates",
            ));
        }
        Ok(LimitObjective {
            c,
            sigma,
            s2c,
            lambda0,
            signs,
            p0,
        })
    }

    /// Assemble from plug-in matrices, `lambda0 = lambda_n / sqrt(n)`, and
    /// the thresholded estimate's sign pattern.
    pub fn from_estimates(
        mats: &LimitMatrices,
        lambda_n: f64,
        n: usize,
        signs: Vec<i8>,
    ) -> Result<Self> {
        let lambda0 = lambda_n / (n as f64).sqrt();
        let mut s2c = mats.c.clone();
        s2c.scale(mats.s2);
        LimitObjective::new(mats.c.clone(), mats.sigma.clone(), Some(s2c), lambda0, signs)
    }

    pub fn p(&self) -> usize {
        self.signs.len()
    }

    pub fn p0(&self) -> usize {
        self.p0
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    /// Value of `Z` at `v` for a given score draw `w`.
    pub fn value(&self, v: &[f64], w: &[f64]) -> f64 {
        let cv = self.c.matvec(v);
        let mut z = 0.0;
        for j in 0..v.len() {
            z += v[j] * cv[j] - 2.0 * v[j] * w[j];
        }
        let mut pen = 0.0;
        for j in 0..v.len() {
            if j < self.p0 {
                pen += self.signs[j] as f64 * v[j];
            } else {
                pen += v[j].abs();
            }
        }
        z + self.lambda0 * pen
    }

    /// Largest violation of the subgradient optimality conditions of `Z`
    /// at `v`.
    pub fn subgradient_gap(&self, v: &[f64], w: &[f64]) -> f64 {
        let cv = self.c.matvec(v);
        let mut gap: f64 = 0.0;
        for j in 0..v.len() {
            let g = 2.0 * (cv[j] - w[j]);
            let viol = if j < self.p0 {
                (g + self.lambda0 * self.signs[j] as f64).abs()
            } else if v[j] != 0.0 {
                (g + self.lambda0 * v[j].signum()).abs()
            } else {
                (g.abs() - self.lambda0).max(0.0)
            };
            gap = gap.max(viol);
        }
        gap
    }

    /// Minimize `Z(., w)` by cyclic coordinate descent.
    pub fn minimize(&self, w: &[f64]) -> Vec<f64> {
        let p = self.p();
        assert_eq!(w.len(), p);
        let mut v = vec![0.0; p];
        for _ in 0..10_000 {
            let mut max_delta: f64 = 0.0;
            for j in 0..p {
                let mut g = w[j];
                for k in 0..p {
                    if k != j {
                        g -= self.c.get(j, k) * v[k];
                    }
                }
                let cjj = self.c.get(j, j);
                let new = if j < self.p0 {
                    (g - 0.5 * self.lambda0 * self.signs[j] as f64) / cjj
                } else {
                    soft_threshold_unchecked(g, 0.5 * self.lambda0) / cjj
                };
                let delta = new - v[j];
                if delta != 0.0 {
                    v[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < 1e-13 && self.subgradient_gap(&v, w) <= 1e-10 {
                break;
            }
        }
        v
    }
}

/// Draw `draws` samples from `argmin Z`. With `use_s2c` set, the score is
/// drawn from `N(0, s^2 C)` (the residual-bootstrap limit) instead of
/// `N(0, Sigma)`.
pub fn sample_limit_argmin(
    obj: &LimitObjective,
    use_s2c: bool,
    seed: u64,
    draws: usize,
) -> Result<Vec<Vec<f64>>> {
    if draws == 0 {
        return Err(invalid("need at least one draw"));
    }
    let cov = if use_s2c {
        obj.s2c
            .as_ref()
            .ok_or_else(|| invalid("no s^2 C matrix attached to this objective"))?
    } else {
        &obj.sigma
    };
    let factor = cov.sampling_factor()?;
    let p = obj.p();
    let out: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = substream(seed, domain::LIMIT, d as u64);
            let z: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let w = factor.matvec(&z);
            obj.minimize(&w)
        })
        .collect();
    Ok(out)
}
