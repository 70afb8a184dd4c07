//! The `table`, `pmf`, `mean` and `simulate` subcommands.

use birthflow_core::inversion::{choose_truncation, invert_cf};
use birthflow_core::metrics::{
    approximation_verdict, build_distance_table, chi_squared_gof, distance_cell, TableErrors,
};
use birthflow_core::model::{analytic_pmf_poisson, matched_intensity, mean_occupancy};
use birthflow_core::sim::{simulate_autonomous, simulate_mtminf};
use birthflow_core::{AutonomousCf, PoissonMatchedCf};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{render, render_table, Row};
use crate::validate::GOF_ALPHA;
use crate::{CliError, Report};

pub fn cmd_table(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let base = birthflow_core::SystemBase {
        mu: config.params.mu,
        n0: config.params.n0,
    };
    match build_distance_table(&base, &config.b_grid, &config.t_grid, config.tail_tol) {
        Ok(table) => Ok(Report::ok(render_table(&table, config.format)?)),
        Err(TableErrors(errors)) => Ok(Report {
            body: String::new(),
            notes: errors.iter().map(ToString::to_string).collect(),
            success: false,
        }),
    }
}

#[derive(Debug, Serialize)]
struct PmfRow {
    i: usize,
    p_poisson: f64,
    p_autonomous: f64,
}

impl Row for PmfRow {
    fn header() -> &'static [&'static str] {
        &["i", "p_poisson", "p_autonomous"]
    }

    fn markdown_cells(&self) -> Vec<String> {
        vec![
            self.i.to_string(),
            format!("{:.6e}", self.p_poisson),
            format!("{:.6e}", self.p_autonomous),
        ]
    }
}

#[derive(Debug, Serialize)]
struct VerdictLine {
    b: f64,
    t: f64,
    rho: f64,
    threshold: f64,
    verdict: String,
}

pub fn cmd_pmf(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let cell = distance_cell(&config.params, config.t, config.tail_tol)?;
    let rows: Vec<PmfRow> = (0..=cell.config.kmax)
        .map(|i| PmfRow {
            i,
            p_poisson: cell.poisson.get(i),
            p_autonomous: cell.autonomous.get(i),
        })
        .collect();
    let verdict = VerdictLine {
        b: config.params.b,
        t: config.t,
        rho: cell.rho,
        threshold: config.threshold,
        verdict: approximation_verdict(cell.rho, config.threshold).to_string(),
    };
    let mut body = render(&rows, config.format)?;
    body.push_str(&match config.format {
        Format::Csv => format!(
            "# rho={},verdict={},threshold={}\n",
            verdict.rho, verdict.verdict, verdict.threshold
        ),
        Format::JsonLines => serde_json::to_string(&verdict)? + "\n",
        Format::Markdown => format!(
            "\nrho(b={}, t={}) = {:.6}: {} at threshold {}\n",
            verdict.b, verdict.t, verdict.rho, verdict.verdict, verdict.threshold
        ),
    });
    Ok(Report::ok(body))
}

#[derive(Debug, Serialize)]
struct MeanRow {
    t: f64,
    mean: f64,
    intensity: f64,
    mean_poisson: f64,
    mean_autonomous: f64,
}

impl Row for MeanRow {
    fn header() -> &'static [&'static str] {
        &["t", "mean", "intensity", "mean_poisson", "mean_autonomous"]
    }

    fn markdown_cells(&self) -> Vec<String> {
        vec![
            self.t.to_string(),
            format!("{:.6}", self.mean),
            format!("{:.6}", self.intensity),
            format!("{:.6}", self.mean_poisson),
            format!("{:.6}", self.mean_autonomous),
        ]
    }
}

/// Closed-form mean and intensity over the t grid, with the means of both
/// inverted pmfs alongside.
pub fn cmd_mean(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let p = config.params;
    let rows = config
        .t_grid
        .iter()
        .map(|&t| {
            let trunc = choose_truncation(&p, t, config.tail_tol);
            Ok(MeanRow {
                t,
                mean: mean_occupancy(&p, t),
                intensity: matched_intensity(&p, t),
                mean_poisson: invert_cf(&PoissonMatchedCf(p), t, &trunc)?.mean(),
                mean_autonomous: invert_cf(&AutonomousCf(p), t, &trunc)?.mean(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report::ok(render(&rows, config.format)?))
}

#[derive(Debug, Serialize)]
struct SimRow {
    i: usize,
    count_autonomous: u64,
    count_poisson: u64,
    expected_autonomous: f64,
    expected_poisson: f64,
}

impl Row for SimRow {
    fn header() -> &'static [&'static str] {
        &["i", "count_autonomous", "count_poisson", "expected_autonomous", "expected_poisson"]
    }

    fn markdown_cells(&self) -> Vec<String> {
        vec![
            self.i.to_string(),
            self.count_autonomous.to_string(),
            self.count_poisson.to_string(),
            format!("{:.2}", self.expected_autonomous),
            format!("{:.2}", self.expected_poisson),
        ]
    }
}

#[derive(Debug, Serialize)]
struct SimSummary {
    system: &'static str,
    replications: u64,
    seed: u64,
    mean: f64,
    standard_error: f64,
    expected_mean: f64,
    chi_squared: f64,
    dof: usize,
    p_value: f64,
}

/// Empirical occupancy histograms of both simulators next to the closed-form
/// expectations, with goodness-of-fit summaries.
pub fn cmd_simulate(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let p = config.params;
    let t = config.t;
    let trunc = choose_truncation(&p, t, config.tail_tol);
    let auto_pmf = invert_cf(&AutonomousCf(p), t, &trunc)?;
    let pois_pmf = analytic_pmf_poisson(&p, t, trunc.kmax, config.tail_tol)?;
    let auto = simulate_autonomous(&p, t, &config.sim)?;
    let pois = simulate_mtminf(&p, t, &config.sim)?;

    let n = config.sim.replications as f64;
    let len = auto.counts.len().max(pois.counts.len()).max(trunc.kmax + 1);
    let rows: Vec<SimRow> = (0..len)
        .map(|i| SimRow {
            i,
            count_autonomous: auto.counts.get(i).copied().unwrap_or(0),
            count_poisson: pois.counts.get(i).copied().unwrap_or(0),
            expected_autonomous: n * auto_pmf.get(i),
            expected_poisson: n * pois_pmf.get(i),
        })
        .collect();

    let m = mean_occupancy(&p, t);
    let summaries = [("autonomous", &auto, &auto_pmf), ("poisson", &pois, &pois_pmf)].map(
        |(system, res, pmf)| {
            let gof = chi_squared_gof(&res.counts, pmf, GOF_ALPHA);
            SimSummary {
                system,
                replications: res.replications,
                seed: res.seed,
                mean: res.mean(),
                standard_error: res.standard_error(),
                expected_mean: m,
                chi_squared: gof.statistic,
                dof: gof.dof,
                p_value: gof.p_value,
            }
        },
    );

    let mut body = render(&rows, config.format)?;
    for s in &summaries {
        body.push_str(&match config.format {
            Format::JsonLines => serde_json::to_string(s)? + "\n",
            Format::Csv => format!(
                "# system={},replications={},seed={},mean={},standard_error={},expected_mean={},chi_squared={},dof={},p_value={}\n",
                s.system, s.replications, s.seed, s.mean, s.standard_error, s.expected_mean, s.chi_squared, s.dof, s.p_value
            ),
            Format::Markdown => format!(
                "\n{}: mean {:.4} +- {:.4} (expected {:.4}), chi2 {:.2} on {} dof, p = {:.3}\n",
                s.system, s.mean, s.standard_error, s.expected_mean, s.chi_squared, s.dof, s.p_value
            ),
        });
    }
    Ok(Report {
        body,
        notes: vec![format!(
            "simulated {} replications per system in {:?} + {:?}",
            config.sim.replications, auto.elapsed, pois.elapsed
        )],
        success: true,
    })
}
