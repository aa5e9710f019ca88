//! Subcommand bodies. Every command writes its fully resolved config into
//! the output directory alongside its artifacts.

use crate::config::{BootstrapConfig, FitConfig, ReportConfig, SimulateConfig};
use crate::fsio::{
    coverage_csv, fmt_f64, read_coverage_csv, read_dataset_csv, write_file, write_json,
    CoverageRow,
};
use crate::{CliError, CliResult};
use lassoboot::rng::{domain, substream};
use lassoboot::{
    cross_validate_lambda, default_lambda_grid, default_threshold, fit_lasso,
    percentile_interval_with, run_coverage_experiment, run_scheme, sup_norm_region,
    threshold_estimate, CoverageReport, Dataset, IntervalEstimate, Scheme, Side,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

fn select_lambda(data: &Dataset, lambda: Option<f64>, cfg_seed: u64, folds: usize, grid_size: usize, grid_ratio: f64, solver: &lassoboot::SolverOptions) -> CliResult<(f64, &'static str)> {
    match lambda {
        Some(l) => Ok((l, "config")),
        None => {
            let grid = default_lambda_grid(data, grid_size, grid_ratio);
            let folds = folds.min(data.n());
            let l = cross_validate_lambda(
                data,
                &grid,
                folds,
                &mut substream(cfg_seed, domain::CV_FOLDS, 0),
                solver,
            )?;
            Ok((l, "cross-validation"))
        }
    }
}

#[derive(Serialize)]
struct FitOutput<'a> {
    beta: &'a [f64],
    lambda: f64,
    lambda_source: &'a str,
    objective: f64,
    kkt_gap: f64,
    iterations: usize,
    converged: bool,
}

pub fn cmd_fit(cfg: &FitConfig, out: &Path) -> CliResult<()> {
    let data = read_dataset_csv(&cfg.input)?;
    let (lambda, source) = select_lambda(
        &data,
        cfg.lambda,
        cfg.seed,
        cfg.folds,
        cfg.grid_size,
        cfg.grid_ratio,
        &cfg.solver,
    )?;
    let fit = fit_lasso(&data, lambda, None, &cfg.solver)?;
    if !fit.converged {
        return Err(CliError::no_convergence(format!(
            "solver did not converge after {} sweeps (kkt gap {:.3e})",
            fit.iterations, fit.kkt_gap
        )));
    }
    write_json(out, "resolved_config.json", cfg)?;
    write_json(
        out,
        "fit.json",
        &FitOutput {
            beta: &fit.beta,
            lambda: fit.lambda,
            lambda_source: source,
            objective: fit.objective,
            kkt_gap: fit.kkt_gap,
            iterations: fit.iterations,
            converged: fit.converged,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct IntervalOutput {
    scheme: String,
    seed: u64,
    n: usize,
    b: usize,
    lambda: f64,
    level: f64,
    threshold: f64,
    beta_hat: Vec<f64>,
    beta_tilde: Vec<f64>,
    flagged: usize,
    two_sided: Vec<IntervalEstimate>,
    right_sided: Vec<IntervalEstimate>,
    region_radius: f64,
}

pub fn cmd_bootstrap(cfg: &BootstrapConfig, out: &Path) -> CliResult<()> {
    let data = read_dataset_csv(&cfg.input)?;
    let (lambda, _) = select_lambda(
        &data,
        cfg.lambda,
        cfg.seed,
        cfg.folds,
        cfg.grid_size,
        cfg.grid_ratio,
        &cfg.solver,
    )?;
    let fit = fit_lasso(&data, lambda, None, &cfg.solver)?;
    if !fit.converged {
        return Err(CliError::no_convergence(format!(
            "solver did not converge after {} sweeps (kkt gap {:.3e})",
            fit.iterations, fit.kkt_gap
        )));
    }
    let a_n = default_threshold(data.n(), cfg.threshold_scale)?;
    let est = threshold_estimate(&fit, a_n)?;
    let draws = run_scheme(
        cfg.scheme,
        &data,
        &fit,
        &est,
        &cfg.weights,
        cfg.b,
        cfg.seed,
        &cfg.solver,
    )?;

    let mut tstar = (0..data.p())
        .map(|j| format!("coef_{j}"))
        .collect::<Vec<_>>()
        .join(",");
    tstar.push('\n');
    for row in &draws.t_star {
        let line = row.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
        tstar.push_str(&line);
        tstar.push('\n');
    }

    let mut two_sided = Vec::with_capacity(data.p());
    let mut right_sided = Vec::with_capacity(data.p());
    for j in 0..data.p() {
        two_sided.push(percentile_interval_with(
            &draws,
            &fit,
            j,
            cfg.level,
            Side::TwoSided,
            cfg.pivot,
        )?);
        right_sided.push(percentile_interval_with(
            &draws,
            &fit,
            j,
            cfg.level,
            Side::RightSided,
            cfg.pivot,
        )?);
    }
    let region = sup_norm_region(&draws, &fit, cfg.level)?;

    write_json(out, "resolved_config.json", cfg)?;
    write_file(out, "tstar.csv", &tstar)?;
    write_json(
        out,
        "intervals.json",
        &IntervalOutput {
            scheme: cfg.scheme.name().to_string(),
            seed: cfg.seed,
            n: data.n(),
            b: cfg.b,
            lambda,
            level: cfg.level,
            threshold: a_n,
            beta_hat: fit.beta.clone(),
            beta_tilde: est.beta_tilde.clone(),
            flagged: draws.flagged,
            two_sided,
            right_sided,
            region_radius: region.radius,
        },
    )?;
    Ok(())
}

fn report_rows(report: &CoverageReport) -> Vec<CoverageRow> {
    report
        .coefficients
        .iter()
        .map(|c| CoverageRow {
            coef_index: c.index,
            beta_true: c.truth,
            two_sided_coverage: c.two_sided_coverage(),
            two_sided_avg_width: c.avg_width(),
            one_sided_coverage: c.one_sided_coverage(),
            m: report.m,
        })
        .collect()
}

pub fn cmd_simulate(cfg: &SimulateConfig, out: &Path) -> CliResult<()> {
    let reports = run_coverage_experiment(&cfg.scenario, &cfg.methods)?;

    write_json(out, "resolved_config.json", cfg)?;

    // one coverage table per method (consumed by `report`)
    for (scheme, report) in &reports {
        write_file(
            out,
            &format!("coverage_{}.csv", scheme.name()),
            &coverage_csv(&report_rows(report)),
        )?;
    }

    // combined table: rows = coefficients, columns = method x statistic
    let schemes: Vec<Scheme> = reports.keys().copied().collect();
    let mut table = String::from("coef_index,beta_true");
    for s in &schemes {
        let _ = write!(
            table,
            ",{0}_two_sided,{0}_avg_width,{0}_one_sided",
            s.name()
        );
    }
    table.push('\n');
    let p = cfg.scenario.p;
    for j in 0..p {
        let first = &reports[&schemes[0]].coefficients[j];
        let _ = write!(table, "{},{}", j, fmt_f64(first.truth));
        for s in &schemes {
            let c = &reports[s].coefficients[j];
            let _ = write!(
                table,
                ",{},{},{}",
                fmt_f64(c.two_sided_coverage()),
                fmt_f64(c.avg_width()),
                fmt_f64(c.one_sided_coverage())
            );
        }
        table.push('\n');
    }
    write_file(out, "table.csv", &table)?;

    // region coverage table
    let mut region = String::from("method,region_coverage,hits,m\n");
    for (scheme, report) in &reports {
        let r = report.region.expect("experiment always tallies the region");
        let _ = writeln!(
            region,
            "{},{},{},{}",
            scheme.name(),
            fmt_f64(r.coverage()),
            r.hits,
            r.count
        );
    }
    write_file(out, "region.csv", &region)?;

    // ECR vectors against each competitor, when the perturbation scheme ran
    if let Some(pb) = reports.get(&Scheme::Perturbation) {
        for (scheme, other) in &reports {
            if *scheme == Scheme::Perturbation {
                continue;
            }
            let ecr = ecr_csv(pb, other)?;
            write_file(out, &format!("ecr_{}.csv", scheme.name()), &ecr)?;
        }
    }

    write_json(out, "summary.json", &SummaryOutput {
        scenario: &cfg.scenario,
        reports: reports.values().collect(),
    })?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryOutput<'a> {
    scenario: &'a lassoboot::SimulationScenario,
    reports: Vec<&'a CoverageReport>,
}

fn ecr_csv(pb: &CoverageReport, other: &CoverageReport) -> CliResult<String> {
    let two = lassoboot::empirical_coverage_ratio(pb, other, Side::TwoSided)?;
    let one = lassoboot::empirical_coverage_ratio(pb, other, Side::RightSided)?;
    let mut out = String::from("coef_index,beta_true,ecr_two_sided,ecr_one_sided,undefined\n");
    for (a, b) in two.iter().zip(&one) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            a.index,
            fmt_f64(pb.coefficients[a.index].truth),
            fmt_f64(a.ratio),
            fmt_f64(b.ratio),
            a.undefined || b.undefined
        );
    }
    Ok(out)
}

pub fn cmd_report(cfg: &ReportConfig, out: &Path) -> CliResult<()> {
    let pb = read_coverage_csv(&cfg.pb)?;
    let other = read_coverage_csv(&cfg.other)?;
    if pb.len() != other.len() {
        return Err(CliError::usage(format!(
            "coverage tables disagree: {} vs {} coefficients",
            pb.len(),
            other.len()
        )));
    }
    let mut ecr = String::from("coef_index,beta_true,ecr_two_sided,ecr_one_sided,undefined\n");
    for (a, b) in pb.iter().zip(&other) {
        if a.coef_index != b.coef_index || a.beta_true != b.beta_true {
            return Err(CliError::usage(format!(
                "coverage tables disagree on coefficient {} (truth {} vs {})",
                a.coef_index, a.beta_true, b.beta_true
            )));
        }
        let ratio = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
        let r2 = ratio(a.two_sided_coverage, b.two_sided_coverage);
        let r1 = ratio(a.one_sided_coverage, b.one_sided_coverage);
        let undefined = b.two_sided_coverage == 0.0 || b.one_sided_coverage == 0.0;
        let _ = writeln!(
            ecr,
            "{},{},{},{},{}",
            a.coef_index,
            fmt_f64(a.beta_true),
            fmt_f64(r2),
            fmt_f64(r1),
            undefined
        );
    }
    write_json(out, "resolved_config.json", cfg)?;
    write_file(out, "ecr.csv", &ecr)?;
    Ok(())
}
