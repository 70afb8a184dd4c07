//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! Run with `cargo test -p birthflow-core --test acceptance`.

use std::time::{Duration, Instant};

use birthflow_core::inversion::{choose_truncation, invert_cf, InversionConfig};
use birthflow_core::metrics::{
    approximation_verdict, build_distance_table, chi_squared_gof, distance_cell, SystemBase,
    Verdict, DEFAULT_THRESHOLD,
};
use birthflow_core::model::{
    analytic_pmf_poisson, cf_autonomous, matched_intensity, mean_occupancy, AutonomousCf,
    ModelParams, PoissonMatchedCf,
};
use birthflow_core::ode::{solve_autonomous, solve_mtminf, OdeConfig};
use birthflow_core::sim::{simulate_autonomous, simulate_mtminf, SimConfig};
use birthflow_core::{Complex, DEFAULT_TAIL_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MU: f64 = 1.0;
const N0: u32 = 15;
const B_VALUES: [f64; 7] = [0.8, 1.2, 1.5, 1.6, 1.7, 1.8, 1.9];
const T_VALUES: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Published distances, rows by b, columns by t.
const REFERENCE: [[f64; 6]; 7] = [
    [0.009, 0.019, 0.039, 0.057, 0.075, 0.090],
    [0.014, 0.030, 0.059, 0.086, 0.112, 0.136],
    [0.019, 0.038, 0.073, 0.107, 0.125, 0.126],
    [0.020, 0.040, 0.079, 0.105, 0.108, 0.096],
    [0.021, 0.042, 0.082, 0.096, 0.086, 0.068],
    [0.023, 0.045, 0.080, 0.082, 0.065, 0.045],
    [0.024, 0.048, 0.076, 0.067, 0.046, 0.039],
];
const TABLE_TOL: f64 = 0.002;
const TABLE_BUDGET: Duration = Duration::from_secs(5);

const POISSON_ROUTE_TOL: f64 = 1e-9;
const ODE_ROUTE_TOL: f64 = 1e-6;
const MEAN_REL_TOL: f64 = 1e-5;
const BRANCH_GAP_TOL: f64 = 1e-4;
const ORDER_TOL: f64 = 0.3;
const ALPHA: f64 = 0.01;
const SIM_REPS: u64 = 100_000;
const SIM_SEED: u64 = 20_240_501;
const ROUND_TRIP_TOL: f64 = 1e-12;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn base() -> SystemBase {
    SystemBase { mu: MU, n0: N0 }
}

fn params(b: f64) -> ModelParams {
    ModelParams::new(b, MU, N0).unwrap()
}

fn cells() -> impl Iterator<Item = (usize, usize, f64, f64)> {
    B_VALUES.iter().enumerate().flat_map(|(bi, &b)| {
        T_VALUES
            .iter()
            .enumerate()
            .map(move |(ti, &t)| (bi, ti, b, t))
    })
}

fn criterion_1_table() -> Outcome {
    let table = build_distance_table(&base(), &B_VALUES, &T_VALUES, DEFAULT_TAIL_TOL).unwrap();
    let mut misses = Vec::new();
    for (bi, ti, b, t) in cells() {
        let got = table.rho(bi, ti);
        let want = REFERENCE[bi][ti];
        if (got - want).abs() > TABLE_TOL {
            misses.push(format!("({b},{t}) {got:.4} vs {want:.3}"));
        }
    }
    Outcome {
        passed: misses.is_empty(),
        detail: format!(
            "{}/42 cells within +-{TABLE_TOL}; off: [{}]",
            42 - misses.len(),
            misses.join(", ")
        ),
    }
}

fn criterion_1_anchors() -> Outcome {
    let anchors = [(0.8, 0.1, 0.009), (1.2, 1.0, 0.136), (1.9, 1.0, 0.039)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (b, t, want) in anchors {
        let rho = distance_cell(&params(b), t, DEFAULT_TAIL_TOL).unwrap().rho;
        ok &= (rho - want).abs() <= TABLE_TOL;
        parts.push(format!("({b},{t}) {rho:.4} vs {want}"));
    }
    Outcome {
        passed: ok,
        detail: parts.join(", "),
    }
}

fn criterion_1_runtime() -> Outcome {
    let start = Instant::now();
    build_distance_table(&base(), &B_VALUES, &T_VALUES, DEFAULT_TAIL_TOL).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        passed: elapsed <= TABLE_BUDGET,
        detail: format!("full table in {elapsed:?} (budget {TABLE_BUDGET:?}, single thread)"),
    }
}

/// The two routes to the Poisson-side pmf agree, so any disagreement with
/// the published table cannot come from our inversion.
fn criterion_1_isolation() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, _, b, t) in cells() {
        let p = params(b);
        let cell = distance_cell(&p, t, DEFAULT_TAIL_TOL).unwrap();
        let exact = analytic_pmf_poisson(&p, t, cell.config.kmax, DEFAULT_TAIL_TOL).unwrap();
        worst = worst.max(cell.poisson.max_abs_diff(&exact));
    }
    Outcome {
        passed: worst <= POISSON_ROUTE_TOL,
        detail: format!("max |inversion - convolution| = {worst:.2e} over all cells"),
    }
}

fn criterion_2_verdicts() -> Outcome {
    let table = build_distance_table(&base(), &B_VALUES, &T_VALUES, DEFAULT_TAIL_TOL).unwrap();
    let mut bad = Vec::new();
    for (bi, ti, b, t) in cells() {
        let verdict = approximation_verdict(table.rho(bi, ti), DEFAULT_THRESHOLD);
        let expected = if t == 0.1 {
            Some(Verdict::Admissible)
        } else if t >= 0.4 && b >= 1.2 {
            Some(Verdict::Inexpedient)
        } else {
            None
        };
        if let Some(e) = expected {
            if verdict != e {
                bad.push(format!("({b},{t}) {verdict}"));
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: format!("threshold {DEFAULT_THRESHOLD}; violations: [{}]", bad.join(", ")),
    }
}

fn ode_config(p: &ModelParams, kmax: usize) -> OdeConfig {
    OdeConfig::default_for(p, kmax, DEFAULT_TAIL_TOL)
}

fn criterion_3_oracle_triangle() -> Outcome {
    let (mut a, mut b_err, mut c, mut lost): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (_, _, b, t) in cells() {
        let p = params(b);
        let config = choose_truncation(&p, t, DEFAULT_TAIL_TOL);
        let exact = analytic_pmf_poisson(&p, t, config.kmax, DEFAULT_TAIL_TOL).unwrap();
        let pois = invert_cf(&PoissonMatchedCf(p), t, &config).unwrap();
        let auto = invert_cf(&AutonomousCf(p), t, &config).unwrap();
        let ode_auto = solve_autonomous(&p, t, &ode_config(&p, config.kmax)).unwrap();
        let ode_pois =
            solve_mtminf(&p, |s| matched_intensity(&p, s), t, &ode_config(&p, config.kmax)).unwrap();
        a = a.max(pois.max_abs_diff(&exact));
        b_err = b_err.max(auto.max_abs_diff(&ode_auto));
        c = c.max(ode_pois.max_abs_diff(&exact));
        lost = lost.max(ode_auto.tail_bound()).max(ode_pois.tail_bound());
    }
    Outcome {
        passed: a <= POISSON_ROUTE_TOL && b_err <= ODE_ROUTE_TOL && c <= ODE_ROUTE_TOL,
        detail: format!(
            "(a) {a:.2e} <= {POISSON_ROUTE_TOL:e}; (b) {b_err:.2e} <= {ODE_ROUTE_TOL:e}; (c) {c:.2e} <= {ODE_ROUTE_TOL:e}; ODE truncation loss {lost:.1e}"
        ),
    }
}

fn criterion_4_means() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut intensity_exact = true;
    for (_, _, b, t) in cells() {
        let p = params(b);
        let m = mean_occupancy(&p, t);
        let config = choose_truncation(&p, t, DEFAULT_TAIL_TOL);
        let routes = [
            invert_cf(&PoissonMatchedCf(p), t, &config).unwrap().mean(),
            invert_cf(&AutonomousCf(p), t, &config).unwrap().mean(),
            solve_autonomous(&p, t, &ode_config(&p, config.kmax)).unwrap().mean(),
            solve_mtminf(&p, |s| matched_intensity(&p, s), t, &ode_config(&p, config.kmax))
                .unwrap()
                .mean(),
        ];
        for r in routes {
            worst = worst.max((r / m - 1.0).abs());
        }
        intensity_exact &= matched_intensity(&p, t) == b * m;
    }
    Outcome {
        passed: worst <= MEAN_REL_TOL && intensity_exact,
        detail: format!(
            "max relative mean error {worst:.2e} <= {MEAN_REL_TOL:e}; lambda = b*m exactly: {intensity_exact}"
        ),
    }
}

/// The `b = mu` closed form written out independently of the library.
fn limit_form(b: f64, n: u32, u: f64, t: f64) -> Complex {
    let e = Complex::cis(u);
    let r = ((e - 1.0) * b * t - e) / ((e - 1.0) * b * t - 1.0);
    r.powu(n)
}

fn criterion_5_degenerate_branch() -> Outcome {
    let mut gap: f64 = 0.0;
    for t in [0.1, 0.5, 1.0, 2.0] {
        for k in 0..=2000 {
            let u = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / 2000.0;
            let limit = limit_form(MU, N0, u, t);
            for scale in [1.0 - 1e-6, 1.0 + 1e-6] {
                let near = cf_autonomous(&params(MU * scale), u, t).unwrap();
                gap = gap.max((near - limit).norm());
            }
        }
    }
    let p = params(MU);
    let t = 0.5;
    let config = choose_truncation(&p, t, DEFAULT_TAIL_TOL);
    let inverted = invert_cf(&AutonomousCf(p), t, &config).unwrap();
    let ode = solve_autonomous(&p, t, &ode_config(&p, config.kmax)).unwrap();
    let diff = inverted.max_abs_diff(&ode);
    Outcome {
        passed: gap <= BRANCH_GAP_TOL && diff <= ODE_ROUTE_TOL,
        detail: format!(
            "max-norm gap {gap:.2e} <= {BRANCH_GAP_TOL:e}; b=mu pmf vs ODE {diff:.2e} <= {ODE_ROUTE_TOL:e}"
        ),
    }
}

/// Largest central-difference residual of
/// `dH/dt + j((e^{ju} - 1) b + (e^{-ju} - 1) mu) dH/du` over a fixed grid.
fn pde_residual(b: f64, h: f64) -> f64 {
    let p = params(b);
    let cf = |u: f64, t: f64| cf_autonomous(&p, u, t).unwrap();
    let mut worst: f64 = 0.0;
    for u in [-2.8, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 2.8] {
        for t in [0.2, 0.5, 1.0] {
            let dt = (cf(u, t + h) - cf(u, t - h)) / (2.0 * h);
            let du = (cf(u + h, t) - cf(u - h, t)) / (2.0 * h);
            let coeff = Complex::i()
                * ((Complex::cis(u) - 1.0) * b + (Complex::cis(-u) - 1.0) * MU);
            worst = worst.max((dt + coeff * du).norm());
        }
    }
    worst
}

fn criterion_6_pde_residual() -> Outcome {
    let steps = [0.04, 0.02, 0.01];
    let mut orders = Vec::new();
    for b in [0.8, 1.0, 1.5, 1.9] {
        let r: Vec<f64> = steps.iter().map(|&h| pde_residual(b, h)).collect();
        orders.push(b.to_string() + ":" + &format!("{:.3}/{:.3}", (r[0] / r[1]).log2(), (r[1] / r[2]).log2()));
        if !r.windows(2).all(|w| ((w[0] / w[1]).log2() - 2.0).abs() <= ORDER_TOL) {
            return Outcome {
                passed: false,
                detail: format!("order outside 2+-{ORDER_TOL}: {}", orders.join(", ")),
            };
        }
    }
    Outcome {
        passed: true,
        detail: format!("observed orders (nominal 2+-{ORDER_TOL}) {}", orders.join(", ")),
    }
}

fn criterion_7_simulation() -> Outcome {
    let config = SimConfig::new(SIM_REPS, SIM_SEED);
    let mut ok = true;
    let mut parts = Vec::new();
    for (b, t) in [(0.8, 0.4), (1.5, 0.6), (1.9, 1.0)] {
        let p = params(b);
        let trunc = choose_truncation(&p, t, DEFAULT_TAIL_TOL);
        let auto_pmf = invert_cf(&AutonomousCf(p), t, &trunc).unwrap();
        let pois_pmf = analytic_pmf_poisson(&p, t, trunc.kmax, DEFAULT_TAIL_TOL).unwrap();

        let auto = simulate_autonomous(&p, t, &config).unwrap();
        let pois = simulate_mtminf(&p, t, &config).unwrap();
        let g_auto = chi_squared_gof(&auto.counts, &auto_pmf, ALPHA);
        let g_pois = chi_squared_gof(&pois.counts, &pois_pmf, ALPHA);
        let same = simulate_autonomous(&p, t, &config).unwrap().counts == auto.counts
            && simulate_mtminf(&p, t, &config).unwrap().counts == pois.counts;
        ok &= g_auto.passed && g_pois.passed && same;
        parts.push(format!(
            "({b},{t}) p_auto={:.3} p_pois={:.3} rerun-identical={same}",
            g_auto.p_value, g_pois.p_value
        ));
    }
    Outcome {
        passed: ok,
        detail: format!("alpha={ALPHA}, {SIM_REPS} reps, seed {SIM_SEED}: {}", parts.join("; ")),
    }
}

fn criterion_8_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kmax = 127;
    let config = InversionConfig {
        grid_size: 256,
        kmax,
        tail_tol: 1e-9,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len = rng.random_range(1..=kmax + 1);
        let weights: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let cf = |u: f64, _t: f64| -> Complex {
            probs
                .iter()
                .enumerate()
                .map(|(k, p)| Complex::cis(u * k as f64) * p)
                .sum()
        };
        let pmf = invert_cf(&cf, 0.0, &config).unwrap();
        for i in 0..=kmax {
            worst = worst.max((pmf.get(i) - probs.get(i).copied().unwrap_or(0.0)).abs());
        }
    }
    Outcome {
        passed: worst <= ROUND_TRIP_TOL,
        detail: format!("100 random pmfs, max entry error {worst:.2e} <= {ROUND_TRIP_TOL:e}"),
    }
}

fn main() {
    // The table budget is a single-threaded figure.
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global()
        .ok();
    let criteria: [Criterion; 11] = [
        ("1   table reproduction", criterion_1_table),
        ("1   spot anchors", criterion_1_anchors),
        ("1   runtime", criterion_1_runtime),
        ("1   discrepancy isolation", criterion_1_isolation),
        ("2   threshold verdict", criterion_2_verdicts),
        ("3   oracle triangle", criterion_3_oracle_triangle),
        ("4   mean laws", criterion_4_means),
        ("5   degenerate branch", criterion_5_degenerate_branch),
        ("6   PDE residual order", criterion_6_pde_residual),
        ("7   simulation statistics", criterion_7_simulation),
        ("8   inversion round-trip", criterion_8_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = check();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", outcome.detail);
        failed += usize::from(!outcome.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
