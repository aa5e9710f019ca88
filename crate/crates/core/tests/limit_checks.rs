//! Plug-in limit matrices versus a fresh-draw Monte Carlo oracle.

mod common;

use lassoboot::rng::{domain, substream};
use lassoboot::sim::scenario_draw;
use lassoboot::*;

#[test]
fn sigma_estimate_tracks_monte_carlo_oracle() {
    // Sigma_n from one n = 5000 dataset (case II residuals off the
    // thresholded fit) against the average of X X' eps^2 over one million
    // fresh draws from the same DGP. Entries are ~10 with sampling error
    // ~1 at n = 5000, so agreement is asserted in relative Frobenius norm.
    let scenario = SimulationScenario {
        n: 5000,
        p: 10,
        p0: 6,
        design_mode: DesignMode::Fixed,
        error_case: ErrorCase::Normal,
        m: 1,
        b: 1,
        level: 0.9,
        seed: 31,
        homoscedastic: false,
    };
    let draw = scenario_draw(&scenario, None, 0).unwrap();
    let opts = SolverOptions::default();
    let grid = default_lambda_grid(&draw.dataset, 50, 1e-3);
    let lambda = cross_validate_lambda(
        &draw.dataset,
        &grid,
        DEFAULT_CV_FOLDS,
        &mut substream(31, domain::CV_FOLDS, 0),
        &opts,
    )
    .unwrap();
    let fit = fit_lasso(&draw.dataset, lambda, None, &opts).unwrap();
    let est = threshold_estimate(&fit, default_threshold(5000, 1.0).unwrap()).unwrap();
    let resid = draw.dataset.residuals(&est.beta_tilde);
    let mats = estimate_limit_matrices(&draw.dataset, &resid).unwrap();
    assert!(mats.is_well_conditioned());

    let p = 10;
    let total = 1_000_000usize;
    let chunk = 10_000usize;
    let mc_scenario = SimulationScenario {
        n: chunk,
        ..scenario.clone()
    };
    let mut acc = vec![vec![0.0; p]; p];
    for rep in 0..(total / chunk) {
        let cols =
            gen_design(&mc_scenario, &mut substream(777, domain::DESIGN, rep as u64)).unwrap();
        let (eps, _) = gen_errors(
            &mc_scenario,
            &cols,
            &mut substream(777, domain::ERRORS, rep as u64),
        )
        .unwrap();
        for i in 0..chunk {
            let e2 = eps[i] * eps[i];
            for a in 0..p {
                let va = cols[a][i] * e2;
                for b in 0..p {
                    acc[a][b] += va * cols[b][i];
                }
            }
        }
    }
    for row in &mut acc {
        for v in row.iter_mut() {
            *v /= total as f64;
        }
    }

    let mut dist2 = 0.0;
    let mut norm2 = 0.0;
    for a in 0..p {
        for b in 0..p {
            let d = mats.sigma.get(a, b) - acc[a][b];
            dist2 += d * d;
            norm2 += acc[a][b] * acc[a][b];
        }
    }
    let rel = (dist2 / norm2).sqrt();
    assert!(rel < 0.35, "relative Frobenius distance {rel}");

    // the homoscedastic shortcut s^2 C is NOT close to Sigma here: the
    // heteroscedasticity is what the perturbation scheme is for
    let mut s2c = mats.c.clone();
    s2c.scale(mats.s2);
    let mut mismatch2 = 0.0;
    for a in 0..p {
        for b in 0..p {
            let d = s2c.get(a, b) - acc[a][b];
            mismatch2 += d * d;
        }
    }
    let rel_mismatch = (mismatch2 / norm2).sqrt();
    assert!(
        rel_mismatch > 2.0 * rel,
        "s^2 C unexpectedly matches Sigma: {rel_mismatch} vs {rel}"
    );
}
