//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the coordinate-descent solver: the grid search, the
//! golden-section scan, and the proximal-gradient minimizer are separate
//! computation paths so that agreement with the library is evidence, not
//! circularity.

#![allow(dead_code)]

use lassoboot::{Dataset, WeightDistribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Lasso criterion value, evaluated directly.
pub fn lasso_objective(data: &Dataset, lambda: f64, beta: &[f64]) -> f64 {
    let r = data.residuals(beta);
    let mut obj = lambda * beta.iter().map(|b| b.abs()).sum::<f64>();
    for e in &r {
        obj += e * e;
    }
    obj
}

/// Exhaustive zooming grid search for the Lasso minimizer, p <= 2 only.
///
/// Starts from a coarse grid over `[-half_width, half_width]^p` and zooms
/// toward the incumbent until the cell size drops below `target_step`,
/// keeping a two-cell safety margin each stage (the criterion is convex, so
/// the minimizer cannot escape a bracket around the best grid point). Ends
/// with a per-coordinate golden-section refinement.
pub fn grid_search_lasso(data: &Dataset, lambda: f64, half_width: f64, target_step: f64) -> Vec<f64> {
    let p = data.p();
    assert!(p <= 2, "grid oracle only supports p <= 2");
    let points_per_dim = 33usize;
    let mut centers = vec![0.0; p];
    let mut half = half_width;
    let mut best = vec![0.0; p];

    while half * 2.0 / (points_per_dim - 1) as f64 > target_step {
        best = grid_stage(data, lambda, &centers, half, points_per_dim);
        let step = 2.0 * half / (points_per_dim - 1) as f64;
        centers = best.clone();
        half = 2.0 * step;
    }
    best = grid_stage(data, lambda, &centers, half, points_per_dim);

    // golden-section polish, one pass per coordinate
    for j in 0..p {
        let mut probe = best.clone();
        let step = 2.0 * half / (points_per_dim - 1) as f64;
        let (mut lo, mut hi) = (best[j] - 2.0 * step, best[j] + 2.0 * step);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            probe[j] = m1;
            let f1 = lasso_objective(data, lambda, &probe);
            probe[j] = m2;
            let f2 = lasso_objective(data, lambda, &probe);
            if f1 <= f2 {
                hi = m2;
            } else {
                lo = m1;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        best[j] = 0.5 * (lo + hi);
    }
    best
}

fn grid_stage(
    data: &Dataset,
    lambda: f64,
    centers: &[f64],
    half: f64,
    points_per_dim: usize,
) -> Vec<f64> {
    let p = centers.len();
    let axis = |c: f64| -> Vec<f64> {
        (0..points_per_dim)
            .map(|k| c - half + 2.0 * half * k as f64 / (points_per_dim - 1) as f64)
            .collect()
    };
    let mut best = centers.to_vec();
    let mut best_val = f64::INFINITY;
    match p {
        1 => {
            for &a in &axis(centers[0]) {
                let v = lasso_objective(data, lambda, &[a]);
                if v < best_val {
                    best_val = v;
                    best = vec![a];
                }
            }
        }
        2 => {
            let (xs, ys) = (axis(centers[0]), axis(centers[1]));
            for &a in &xs {
                for &b in &ys {
                    let v = lasso_objective(data, lambda, &[a, b]);
                    if v < best_val {
                        best_val = v;
                        best = vec![a, b];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Golden-section minimizer of a univariate convex function on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The reweighted two-term bootstrap objective, written out literally:
///
/// ```text
///   sum_i (y_i - X_i' t)^2 (G_i - mu)
/// + sum_i (ytilde_i - X_i' t)^2 (2 mu - G_i)
/// + mu * lambda * sum_j |t_j|
/// ```
pub fn reweighted_objective(
    data: &Dataset,
    fitted: &[f64],
    weights: &[f64],
    mu: f64,
    lambda: f64,
    t: &[f64],
) -> f64 {
    let pred = data.predict(t);
    let mut obj = mu * lambda * t.iter().map(|v| v.abs()).sum::<f64>();
    for i in 0..data.n() {
        let a = data.y()[i] - pred[i];
        let b = fitted[i] - pred[i];
        obj += a * a * (weights[i] - mu) + b * b * (2.0 * mu - weights[i]);
    }
    obj
}

/// Minimize the reweighted two-term objective by FISTA, evaluating the
/// gradient from the two weighted residual sums directly.
pub fn fista_reweighted_min(
    data: &Dataset,
    fitted: &[f64],
    weights: &[f64],
    mu: f64,
    lambda: f64,
) -> Vec<f64> {
    let (n, p) = (data.n(), data.p());

    let grad = |t: &[f64]| -> Vec<f64> {
        let pred = data.predict(t);
        let mut g = vec![0.0; p];
        for i in 0..n {
            let a = 2.0 * (pred[i] - data.y()[i]) * (weights[i] - mu);
            let b = 2.0 * (pred[i] - fitted[i]) * (2.0 * mu - weights[i]);
            for j in 0..p {
                let x = data.col(j)[i];
                g[j] += x * (a + b);
            }
        }
        g
    };

    // Lipschitz constant of the gradient: 2 mu lambda_max(X'X), by power
    // iteration on the Gram matrix.
    let gram = {
        let mut gm = vec![vec![0.0; p]; p];
        for a in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for i in 0..n {
                    s += data.col(a)[i] * data.col(b)[i];
                }
                gm[a][b] = s;
            }
        }
        gm
    };
    let mut v = vec![1.0; p];
    let mut lmax = 1.0;
    for _ in 0..200 {
        let mut w = vec![0.0; p];
        for a in 0..p {
            for b in 0..p {
                w[a] += gram[a][b] * v[b];
            }
        }
        lmax = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if lmax == 0.0 {
            break;
        }
        for (a, wv) in w.iter().enumerate() {
            v[a] = wv / lmax;
        }
    }
    let lip = 2.0 * mu * lmax * 1.05 + 1e-12;
    let step = 1.0 / lip;
    let thresh = step * mu * lambda;

    let soft = |z: f64, g: f64| -> f64 {
        if z > g {
            z - g
        } else if z < -g {
            z + g
        } else {
            0.0
        }
    };

    let mut x = vec![0.0; p];
    let mut y_acc = x.clone();
    let mut theta: f64 = 1.0;
    for _ in 0..500_000 {
        let g = grad(&y_acc);
        let mut x_new = vec![0.0; p];
        for j in 0..p {
            x_new[j] = soft(y_acc[j] - step * g[j], thresh);
        }
        let theta_new = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        let momentum = (theta - 1.0) / theta_new;
        let mut max_move: f64 = 0.0;
        for j in 0..p {
            let delta = x_new[j] - x[j];
            max_move = max_move.max(delta.abs());
            y_acc[j] = x_new[j] + momentum * delta;
        }
        x = x_new;
        theta = theta_new;
        if max_move < 1e-13 {
            break;
        }
    }
    x
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < sa.len() && ib < sb.len() {
        let x = sa[ia].min(sb[ib]);
        while ia < sa.len() && sa[ia] <= x {
            ia += 1;
        }
        while ib < sb.len() && sb[ib] <= x {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    d
}

/// Sample covariance matrix of draws stored as rows.
pub fn sample_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let b = rows.len();
    let p = rows[0].len();
    let mut mean = vec![0.0; p];
    for r in rows {
        for j in 0..p {
            mean[j] += r[j];
        }
    }
    for m in &mut mean {
        *m /= b as f64;
    }
    let mut cov = vec![vec![0.0; p]; p];
    for r in rows {
        for a in 0..p {
            for c in 0..p {
                cov[a][c] += (r[a] - mean[a]) * (r[c] - mean[c]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (b - 1) as f64;
        }
    }
    cov
}

pub fn frobenius_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..a[i].len() {
            let d = a[i][j] - b[i][j];
            s += d * d;
        }
    }
    s.sqrt()
}

/// Random dense regression instance with standard normal entries and a
/// response that mixes signal and noise.
pub fn random_instance(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let beta: Vec<f64> = (0..p)
        .map(|_| {
            if rng.random::<f64>() < 0.4 {
                0.0
            } else {
                2.0 * rng.sample::<f64, _>(StandardNormal)
            }
        })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut v: f64 = rng.sample(StandardNormal);
            for j in 0..p {
                v += cols[j][i] * beta[j];
            }
            v
        })
        .collect();
    Dataset::from_cols(cols, y).unwrap()
}

/// Draw weight vectors for the reweighted-objective tests.
pub fn weight_vector(dist: &WeightDistribution, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    lassoboot::draw_weights(dist, n, rng)
}
