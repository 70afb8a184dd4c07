//! Distances between occupancy distributions and the (b, t) distance table.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::inversion::{choose_truncation, invert_cf, InversionConfig};
use crate::model::{AutonomousCf, ModelParams, PoissonMatchedCf};
use crate::pmf::Pmf;

/// Default admissibility threshold on the Kolmogorov distance.
pub const DEFAULT_THRESHOLD: f64 = 0.03;

/// `max_i |sum_{n<=i} (p(n) - q(n))|` over the union support plus one.
pub fn kolmogorov_distance(p: &Pmf, q: &Pmf) -> f64 {
    let len = p.probs().len().max(q.probs().len());
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for i in 0..=len {
        acc += p.get(i) - q.get(i);
        best = best.max(acc.abs());
    }
    best.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The Poisson approximation is within the threshold.
    Admissible,
    Inexpedient,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Admissible => f.write_str("admissible"),
            Verdict::Inexpedient => f.write_str("inexpedient"),
        }
    }
}

/// Admissible iff `rho <= threshold` (the boundary counts as admissible).
pub fn approximation_verdict(rho: f64, threshold: f64) -> Verdict {
    if rho <= threshold {
        Verdict::Admissible
    } else {
        Verdict::Inexpedient
    }
}

/// Service rate and initial occupancy; the birth intensity varies per row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemBase {
    pub mu: f64,
    pub n0: u32,
}

impl SystemBase {
    pub fn with_b(&self, b: f64) -> Result<ModelParams> {
        ModelParams::new(b, self.mu, self.n0)
    }
}

/// Both pmfs of one (b, t) cell and their distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub params: ModelParams,
    pub t: f64,
    pub config: InversionConfig,
    /// Matched M(t)/M/inf occupancy.
    pub poisson: Pmf,
    /// Autonomous occupancy.
    pub autonomous: Pmf,
    pub rho: f64,
}

impl CellResult {
    pub fn tail_bound(&self) -> f64 {
        self.poisson.tail_bound().max(self.autonomous.tail_bound())
    }
}

/// Inverts both characteristic functions on a shared truncation.
pub fn distance_cell(params: &ModelParams, t: f64, tail_tol: f64) -> Result<CellResult> {
    params.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    let config = choose_truncation(params, t, tail_tol);
    let poisson = invert_cf(&PoissonMatchedCf(*params), t, &config)?;
    let autonomous = invert_cf(&AutonomousCf(*params), t, &config)?;
    let rho = kolmogorov_distance(&poisson, &autonomous);
    Ok(CellResult {
        params: *params,
        t,
        config,
        poisson,
        autonomous,
        rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMeta {
    pub kmax: usize,
    pub grid_size: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub base: SystemBase,
    pub tail_tol: f64,
    pub b_values: Vec<f64>,
    pub t_values: Vec<f64>,
    /// Row-major by `b`.
    pub rho: Vec<f64>,
    pub cells: Vec<CellMeta>,
}

impl DistanceTable {
    pub fn rho(&self, bi: usize, ti: usize) -> f64 {
        self.rho[bi * self.t_values.len() + ti]
    }

    pub fn meta(&self, bi: usize, ti: usize) -> &CellMeta {
        &self.cells[bi * self.t_values.len() + ti]
    }

    /// `(b, t, rho, meta)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64, &CellMeta)> + '_ {
        self.b_values.iter().enumerate().flat_map(move |(bi, &b)| {
            self.t_values
                .iter()
                .enumerate()
                .map(move |(ti, &t)| (b, t, self.rho(bi, ti), self.meta(bi, ti)))
        })
    }
}

/// Every failing cell of a table build, with coordinates attached.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} table cell(s) failed", .0.len())]
pub struct TableErrors(pub Vec<Error>);

/// Computes `rho(b, t)` for every grid pair.
pub fn build_distance_table(
    base: &SystemBase,
    b_values: &[f64],
    t_values: &[f64],
    tail_tol: f64,
) -> std::result::Result<DistanceTable, TableErrors> {
    let mut rho = Vec::with_capacity(b_values.len() * t_values.len());
    let mut cells = Vec::with_capacity(rho.capacity());
    let mut errors = Vec::new();
    for &b in b_values {
        for &t in t_values {
            let cell = base
                .with_b(b)
                .and_then(|params| distance_cell(&params, t, tail_tol))
                .map_err(|e| e.at_cell(b, t));
            match cell {
                Ok(cell) => {
                    rho.push(cell.rho);
                    cells.push(CellMeta {
                        kmax: cell.config.kmax,
                        grid_size: cell.config.grid_size,
                        tail_bound: cell.tail_bound(),
                    });
                }
                Err(e) => errors.push(e),
            }
        }
    }
    if !errors.is_empty() {
        return Err(TableErrors(errors));
    }
    Ok(DistanceTable {
        base: *base,
        tail_tol,
        b_values: b_values.to_vec(),
        t_values: t_values.to_vec(),
        rho,
        cells,
    })
}

/// Pearson goodness-of-fit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
    pub passed: bool,
}

/// Minimum expected count per pooled bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-squared test of a histogram against `expected`, pooling
/// adjacent occupancies until each bin expects at least five observations.
/// The last bin absorbs everything to the right, including mass beyond the
/// pmf's support.
pub fn chi_squared_gof(counts: &[u64], expected: &Pmf, alpha: f64) -> GofResult {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let len = counts.len().max(expected.probs().len());

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut cum_prob = 0.0;
    let mut cum_obs = 0u64;
    for i in 0..len {
        let c = counts.get(i).copied().unwrap_or(0);
        obs += c as f64;
        exp += nf * expected.get(i);
        cum_prob += expected.get(i);
        cum_obs += c;
        if exp >= MIN_EXPECTED && nf * (1.0 - cum_prob) >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    // Right tail: remaining observations against remaining mass.
    let rest_obs = obs + (n - cum_obs) as f64;
    let rest_exp = exp + nf * (1.0 - cum_prob).max(0.0);
    match bins.last_mut() {
        Some(last) if rest_exp < MIN_EXPECTED => {
            last.0 += rest_obs;
            last.1 += rest_exp;
        }
        _ => bins.push((rest_obs, rest_exp)),
    }

    let statistic: f64 = bins
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map(|d| d.sf(statistic))
            .unwrap_or(0.0)
    };
    GofResult {
        statistic,
        dof,
        p_value,
        bins: bins.len(),
        passed: p_value >= alpha,
    }
}
