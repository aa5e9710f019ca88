//! Solver invariants: oracle agreement, scaling, permutation equivariance,
//! and the closed form under an orthogonal-scaled design.

mod common;

use common::{golden_section_min, grid_search_lasso, lasso_objective};
use lassoboot::rng::substream;
use lassoboot::{fit_lasso, kkt_gap, lambda_max, soft_threshold, Dataset, SolverOptions};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn instance(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = substream(seed, 0x1001, 0);
    common::random_instance(n, p, &mut rng)
}

#[test]
fn orthogonal_design_has_soft_threshold_solution() {
    // 8x8 Hadamard matrix: columns are orthogonal with squared norm 8 = n,
    // so X'X = n I and the fit decouples into soft thresholds of the
    // per-coordinate least-squares estimates.
    let h1 = vec![vec![1.0]];
    let mut h = h1;
    for _ in 0..3 {
        let k = h.len();
        let mut next = vec![vec![0.0; 2 * k]; 2 * k];
        for i in 0..k {
            for j in 0..k {
                next[i][j] = h[i][j];
                next[i][j + k] = h[i][j];
                next[i + k][j] = h[i][j];
                next[i + k][j + k] = -h[i][j];
            }
        }
        h = next;
    }
    let n = 8;
    let mut rng = substream(77, 0x1002, 0);
    let y: Vec<f64> = (0..n).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let rows: Vec<Vec<f64>> = h.clone();
    let data = Dataset::from_rows(&rows, y.clone()).unwrap();

    let lambda = 6.0;
    let fit = fit_lasso(&data, lambda, None, &SolverOptions::default()).unwrap();

    for j in 0..n {
        let ols_j = (0..n).map(|i| h[i][j] * y[i]).sum::<f64>() / n as f64;
        let closed = soft_threshold(ols_j, lambda / (2.0 * n as f64)).unwrap();
        assert!(
            (fit.beta[j] - closed).abs() < 1e-10,
            "coordinate {j}: {} vs {closed}",
            fit.beta[j]
        );

        // independent check: brute-force 1-D minimization of the decoupled
        // criterion n t^2 - 2 n ols_j t + lambda |t| (plus a constant)
        let brute = golden_section_min(
            |t| n as f64 * t * t - 2.0 * n as f64 * ols_j * t + lambda * t.abs(),
            -10.0,
            10.0,
        );
        assert!(
            (fit.beta[j] - brute).abs() < 1e-6,
            "coordinate {j}: {} vs brute {brute}",
            fit.beta[j]
        );
    }
}

#[test]
fn grid_oracle_agreement_small_instances() {
    // every small instance: solver within 5e-3 of the exhaustive grid search
    for seed in 0..12u64 {
        let n = 4 + (seed as usize % 5);
        let p = 1 + (seed as usize % 2);
        let data = instance(n, p, seed);
        for lambda_frac in [0.0, 0.05, 0.3, 0.9] {
            let lambda = lambda_frac * lambda_max(&data);
            let fit = fit_lasso(&data, lambda, None, &SolverOptions::default()).unwrap();
            let oracle = grid_search_lasso(&data, lambda, 8.0, 1e-3);
            for j in 0..p {
                assert!(
                    (fit.beta[j] - oracle[j]).abs() < 5e-3,
                    "seed {seed} lambda {lambda}: coordinate {j}: {} vs {}",
                    fit.beta[j],
                    oracle[j]
                );
            }
            // the solver should never do worse than the oracle's point
            assert!(
                lasso_objective(&data, lambda, &fit.beta)
                    <= lasso_objective(&data, lambda, &oracle) + 1e-9
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_covariance(seed in 0u64..1000, c in 0.25f64..4.0) {
        // fit(X, c y, c lambda) == c * fit(X, y, lambda): substituting
        // t = c u turns the scaled criterion into c^2 times the original,
        // term by term.
        let data = instance(20, 3, seed);
        let lambda = 0.3 * lambda_max(&data);
        let opts = SolverOptions::default();
        let base = fit_lasso(&data, lambda, None, &opts).unwrap();

        let scaled_y: Vec<f64> = data.y().iter().map(|v| c * v).collect();
        let scaled = Dataset::from_cols(
            (0..3).map(|j| data.col(j).to_vec()).collect(),
            scaled_y,
        ).unwrap();
        let fit_c = fit_lasso(&scaled, c * lambda, None, &opts).unwrap();
        for j in 0..3 {
            prop_assert!((fit_c.beta[j] - c * base.beta[j]).abs() < 1e-7 * c.max(1.0));
        }
    }

    #[test]
    fn permutation_equivariance(seed in 0u64..1000) {
        let data = instance(15, 4, seed);
        let lambda = 0.2 * lambda_max(&data);
        let opts = SolverOptions::default();
        let base = fit_lasso(&data, lambda, None, &opts).unwrap();

        let perm = [2usize, 0, 3, 1];
        let permuted = Dataset::from_cols(
            perm.iter().map(|&j| data.col(j).to_vec()).collect(),
            data.y().to_vec(),
        ).unwrap();
        let fit_p = fit_lasso(&permuted, lambda, None, &opts).unwrap();
        for (slot, &j) in perm.iter().enumerate() {
            prop_assert!((fit_p.beta[slot] - base.beta[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn support_shutdown_at_lambda_max(seed in 0u64..1000) {
        let data = instance(12, 3, seed);
        let lam = lambda_max(&data);
        let fit = fit_lasso(&data, lam * 1.000001, None, &SolverOptions::default()).unwrap();
        prop_assert!(fit.beta.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn fits_are_kkt_certified(seed in 0u64..1000, lambda_frac in 0.0f64..1.1) {
        let data = instance(25, 4, seed);
        let lambda = lambda_frac * lambda_max(&data);
        let opts = SolverOptions::default();
        let fit = fit_lasso(&data, lambda, None, &opts).unwrap();
        prop_assert!(fit.converged);
        let gap = kkt_gap(&data, lambda, &fit.beta).unwrap();
        prop_assert!(gap <= opts.kkt_tol, "gap {gap}");
    }
}
