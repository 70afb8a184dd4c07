//! The `validate` subcommand: every route to the occupancy law checked
//! against every other, one record per check.

use birthflow_core::inversion::{choose_truncation, invert_cf};
use birthflow_core::metrics::chi_squared_gof;
use birthflow_core::model::{analytic_pmf_poisson, matched_intensity, mean_occupancy};
use birthflow_core::ode::{solve_autonomous, solve_mtminf};
use birthflow_core::sim::{simulate_autonomous, simulate_mtminf};
use birthflow_core::{AutonomousCf, CfEvaluator, Complex, ModelParams, Pmf, PoissonMatchedCf};
use serde::Serialize;

use crate::config::{PerturbTarget, RunConfig};
use crate::output::{render, Row};
use crate::{CliError, Report};

pub const INVERSION_VS_EXACT_TOL: f64 = 1e-9;
pub const INVERSION_VS_ODE_TOL: f64 = 1e-6;
pub const ODE_VS_EXACT_TOL: f64 = 1e-6;
pub const MEAN_REL_TOL: f64 = 1e-5;
pub const GOF_ALPHA: f64 = 0.01;
/// Simulated means must land within this many standard errors.
pub const MEAN_SE_MULTIPLE: f64 = 3.0;
/// Cells where the simulators are compared to the exact laws.
pub const SIM_CELLS: [(f64, f64); 3] = [(0.8, 0.4), (1.5, 0.6), (1.9, 1.0)];
/// Factor applied to one characteristic function by `--perturb`.
pub const PERTURB_FACTOR: f64 = 1.001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub b: f64,
    pub t: f64,
    pub quantity: &'static str,
    pub tolerance: f64,
    /// `None` when the check could not be evaluated; see `detail`.
    pub observed: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

impl Row for Check {
    fn header() -> &'static [&'static str] {
        &["check", "b", "t", "quantity", "tolerance", "observed", "passed", "detail"]
    }

    fn markdown_cells(&self) -> Vec<String> {
        vec![
            self.check.to_string(),
            self.b.to_string(),
            self.t.to_string(),
            self.quantity.to_string(),
            format!("{:e}", self.tolerance),
            self.observed.map_or_else(|| "-".into(), |x| format!("{x:.3e}")),
            if self.passed { "pass" } else { "FAIL" }.to_string(),
            self.detail.clone(),
        ]
    }
}

struct Scaled<C>(C, f64);

impl<C: CfEvaluator> CfEvaluator for Scaled<C> {
    fn eval(&self, u: f64, t: f64) -> birthflow_core::Result<Complex> {
        Ok(self.0.eval(u, t)? * self.1)
    }
}

struct Cell<'a> {
    config: &'a RunConfig,
    b: f64,
    t: f64,
    out: &'a mut Vec<Check>,
}

impl Cell<'_> {
    /// `observed <= tolerance` passes; an evaluation error fails.
    fn record(
        &mut self,
        check: &'static str,
        quantity: &'static str,
        tolerance: f64,
        observed: birthflow_core::Result<f64>,
    ) {
        let (observed, passed, detail) = match observed {
            Ok(x) => (Some(x), x <= tolerance, String::new()),
            Err(e) => (None, false, e.to_string()),
        };
        self.push(check, quantity, tolerance, observed, passed, detail);
    }

    fn push(
        &mut self,
        check: &'static str,
        quantity: &'static str,
        tolerance: f64,
        observed: Option<f64>,
        passed: bool,
        detail: String,
    ) {
        self.out.push(Check {
            check,
            b: self.b,
            t: self.t,
            quantity,
            tolerance,
            observed,
            passed,
            detail,
        });
    }

    fn factor(&self, target: PerturbTarget) -> f64 {
        if self.config.perturb == Some(target) {
            PERTURB_FACTOR
        } else {
            1.0
        }
    }

    /// Both inverted laws, perturbed if asked: `(poisson, autonomous)`.
    fn invert_both(&self, p: &ModelParams) -> birthflow_core::Result<(Pmf, Pmf)> {
        let trunc = choose_truncation(p, self.t, self.config.tail_tol);
        let pois = Scaled(PoissonMatchedCf(*p), self.factor(PerturbTarget::Poisson));
        let auto = Scaled(AutonomousCf(*p), self.factor(PerturbTarget::Autonomous));
        Ok((invert_cf(&pois, self.t, &trunc)?, invert_cf(&auto, self.t, &trunc)?))
    }
}

fn grid_checks(config: &RunConfig, b: f64, t: f64, out: &mut Vec<Check>) {
    let mut cell = Cell { config, b, t, out };
    let p = match ModelParams::new(b, config.params.mu, config.params.n0) {
        Ok(p) => p,
        Err(e) => return cell.record("parameters", "-", 0.0, Err(e)),
    };
    let (pois_inv, auto_inv) = match cell.invert_both(&p) {
        Ok((pois, auto)) => (Ok(pois), Ok(auto)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let kmax = choose_truncation(&p, t, config.tail_tol).kmax;
    let exact = analytic_pmf_poisson(&p, t, kmax, config.tail_tol);
    let ode_auto = solve_autonomous(&p, t, &config.ode_config(&p, kmax));
    let ode_pois = solve_mtminf(&p, |s| matched_intensity(&p, s), t, &config.ode_config(&p, kmax));

    let diff = |a: &birthflow_core::Result<Pmf>, b: &birthflow_core::Result<Pmf>| {
        Ok(a.clone()?.max_abs_diff(&b.clone()?))
    };
    cell.record(
        "poisson-inversion-vs-exact",
        "max_abs_pmf_diff",
        INVERSION_VS_EXACT_TOL,
        diff(&pois_inv, &exact),
    );
    cell.record(
        "autonomous-inversion-vs-ode",
        "max_abs_pmf_diff",
        INVERSION_VS_ODE_TOL,
        diff(&auto_inv, &ode_auto),
    );
    cell.record(
        "poisson-ode-vs-exact",
        "max_abs_pmf_diff",
        ODE_VS_EXACT_TOL,
        diff(&ode_pois, &exact),
    );
    let m = mean_occupancy(&p, t);
    let worst = [pois_inv, auto_inv, ode_auto, ode_pois]
        .into_iter()
        .try_fold(0.0f64, |acc, pmf| Ok(acc.max((pmf?.mean() / m - 1.0).abs())));
    cell.record("mean-law", "max_rel_mean_err", MEAN_REL_TOL, worst);
}

fn sim_checks(config: &RunConfig, b: f64, t: f64, out: &mut Vec<Check>) {
    let mut cell = Cell { config, b, t, out };
    let p = match ModelParams::new(b, config.params.mu, config.params.n0) {
        Ok(p) => p,
        Err(e) => return cell.record("parameters", "-", 0.0, Err(e)),
    };
    let m = mean_occupancy(&p, t);
    let laws = cell.invert_both(&p);
    let runs = [
        ("autonomous-sim-gof", "autonomous-sim-mean", true),
        ("poisson-sim-gof", "poisson-sim-mean", false),
    ];
    for (gof_name, mean_name, autonomous) in runs {
        let sim = if autonomous {
            simulate_autonomous(&p, t, &config.sim)
        } else {
            simulate_mtminf(&p, t, &config.sim)
        };
        let pair = sim.and_then(|sim| {
            let (pois, auto) = laws.clone()?;
            Ok((sim, if autonomous { auto } else { pois }))
        });
        let (sim, law) = match pair {
            Ok(pair) => pair,
            Err(e) => {
                cell.record(gof_name, "p_value", GOF_ALPHA, Err(e.clone()));
                cell.record(mean_name, "abs_mean_err_in_se", MEAN_SE_MULTIPLE, Err(e));
                continue;
            }
        };
        let gof = chi_squared_gof(&sim.counts, &law, GOF_ALPHA);
        cell.push(
            gof_name,
            "p_value",
            GOF_ALPHA,
            Some(gof.p_value),
            gof.p_value >= GOF_ALPHA,
            format!("chi2={:.3} dof={} bins={}", gof.statistic, gof.dof, gof.bins),
        );
        let se = sim.standard_error();
        let err = (sim.mean() - m).abs();
        let z = if se > 0.0 { err / se } else { err };
        cell.push(
            mean_name,
            "abs_mean_err_in_se",
            MEAN_SE_MULTIPLE,
            Some(z),
            z <= MEAN_SE_MULTIPLE,
            format!("mean={:.6} se={:.6} m={m:.6}", sim.mean(), se),
        );
    }
}

/// Runs every check; never stops at the first failure.
pub fn run_checks(config: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for &b in &config.b_grid {
        for &t in &config.t_grid {
            grid_checks(config, b, t, &mut out);
        }
    }
    for (b, t) in SIM_CELLS {
        sim_checks(config, b, t, &mut out);
    }
    out
}

pub fn cmd_validate(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let checks = run_checks(config);
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(Report {
        body: render(&checks, config.format)?,
        notes: vec![format!("{} checks, {failed} failed", checks.len())],
        success: failed == 0,
    })
}
