//! Lattice pmf recovery from a characteristic function.
//!
//! For an integer-valued `X` the inversion integral
//! `P(i) = (1/2pi) * int_{-pi}^{pi} e^{-jui} CF(u) du` is approximated by the
//! `M`-point trapezoid rule on the periodic integrand. That rule is exact up
//! to aliasing: the recovered value at `i` is `sum_{m in Z} P(i + mM)`, so the
//! only error is mass beyond `M` folding back. Choosing `M >= 2 (kmax + 1)`
//! with `kmax` well into the tail makes it negligible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mean_occupancy, mgf_autonomous, mgf_poisson_matched, CfEvaluator, ModelParams};
use crate::pmf::Pmf;

/// Largest tolerated imaginary part of a recovered probability.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

/// Largest exponent tried when minimising a Chernoff bound.
const THETA_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Number of CF samples `M`; a power of two.
    pub grid_size: usize,
    /// Largest retained occupancy.
    pub kmax: usize,
    /// Recovered mass may fall short of one by less than this.
    pub tail_tol: f64,
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.grid_size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid_size {} is not a power of two",
                self.grid_size
            )));
        }
        if self.grid_size < 2 * self.kmax {
            return Err(Error::InvalidConfig(format!(
                "grid_size {} < 2 * kmax ({})",
                self.grid_size, self.kmax
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidConfig("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Recovers `P(0..=kmax)` at time `t` from `cf`.
pub fn invert_cf<C: CfEvaluator + ?Sized>(cf: &C, t: f64, config: &InversionConfig) -> Result<Pmf> {
    config.validate()?;
    let m = config.grid_size;
    let samples = (0..m)
        .map(|k| {
            // Sample on [-pi, pi): indices past M/2 wrap to negative phases.
            let signed = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
            cf.eval(std::f64::consts::TAU * signed / m as f64, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let twiddles: Vec<Complex64> = (0..m)
        .map(|r| Complex64::cis(-std::f64::consts::TAU * r as f64 / m as f64))
        .collect();

    let scale = 1.0 / m as f64;
    let mut probs = Vec::with_capacity(config.kmax + 1);
    for i in 0..=config.kmax {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut r = 0usize;
        for s in &samples {
            acc += twiddles[r] * s;
            r += i;
            if r >= m {
                r %= m;
            }
        }
        acc *= scale;
        if acc.im.abs() > IMAGINARY_RESIDUE_TOL {
            return Err(Error::NonRealProbability {
                index: i,
                residue: acc.im,
            });
        }
        probs.push(acc.re);
    }

    let pmf = Pmf::from_raw(probs)?;
    if pmf.tail_bound() >= config.tail_tol {
        return Err(Error::Aliasing {
            tail_bound: pmf.tail_bound(),
            tail_tol: config.tail_tol,
        });
    }
    Ok(pmf)
}

/// Picks a support and grid size under which both systems' pmfs at `t`
/// lose less than `tail_tol / 10` beyond `kmax` (by a Chernoff bound).
pub fn choose_truncation(params: &ModelParams, t: f64, tail_tol: f64) -> InversionConfig {
    let mean = mean_occupancy(params, t);
    let target = tail_tol / 10.0;
    let mut c = 1.0;
    let kmax = loop {
        let kmax = ((mean + c * mean.sqrt()).ceil() as usize).max(params.n0 as usize);
        let k = (kmax + 1) as f64;
        let auto = chernoff_bound(|theta| mgf_autonomous(params, theta, t), k);
        let pois = chernoff_bound(|theta| Some(mgf_poisson_matched(params, theta, t)), k);
        if auto.max(pois) < target {
            break kmax;
        }
        c += 1.0;
    };
    InversionConfig {
        grid_size: (2 * (kmax + 1)).next_power_of_two(),
        kmax,
        tail_tol,
    }
}

/// `min_theta E[e^{theta X}] e^{-theta k}`, an upper bound on `P(X >= k)`.
fn chernoff_bound<F>(mgf: F, k: f64) -> f64
where
    F: Fn(f64) -> Option<f64>,
{
    let objective = |theta: f64| match mgf(theta) {
        Some(v) if v > 0.0 => v.ln() - theta * k,
        _ => f64::INFINITY,
    };
    // The objective is convex in theta; bracket where it is finite.
    let mut hi = THETA_CAP;
    while !objective(hi).is_finite() && hi > 1e-12 {
        hi *= 0.5;
    }
    let mut lo = 0.0;
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
    }
    let best = f1.min(f2).min(objective(THETA_CAP.min(hi)));
    best.min(0.0).exp()
}
