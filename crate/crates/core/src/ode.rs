//! Truncated Kolmogorov forward equations for both systems, integrated with
//! fixed-step classical RK4.
//!
//! The state space is cut at `k_trunc`. That state keeps its full exit rate,
//! but births out of it leave the system, so `1 - sum(P)` measures exactly the
//! mass lost to truncation and is reported as the pmf's tail bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pmf::{Pmf, NEGATIVE_FLOOR};

/// Upper bound on `dt * k_trunc * (b + mu)`.
pub const MAX_COURANT: f64 = 0.5;

/// Courant number and step cap used by [`OdeConfig::default_for`].
pub const DEFAULT_COURANT: f64 = 0.05;
pub const DEFAULT_MAX_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeMethod {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub k_trunc: usize,
    /// Largest step; the actual step divides `t` evenly.
    pub dt: f64,
    /// Target truncation loss; more than ten times this is an error.
    pub tail_tol: f64,
    pub method: OdeMethod,
}

impl OdeConfig {
    /// A config whose step keeps `dt * k_trunc * (b + mu)` at `courant`.
    pub fn with_courant(params: &ModelParams, k_trunc: usize, tail_tol: f64, courant: f64) -> Self {
        let rate = (k_trunc.max(1) as f64) * (params.b + params.mu);
        Self {
            k_trunc,
            dt: courant / rate,
            tail_tol,
            method: OdeMethod::Rk4,
        }
    }

    /// The default oracle accuracy: courant [`DEFAULT_COURANT`], step at most
    /// [`DEFAULT_MAX_DT`].
    pub fn default_for(params: &ModelParams, k_trunc: usize, tail_tol: f64) -> Self {
        let mut config = Self::with_courant(params, k_trunc, tail_tol, DEFAULT_COURANT);
        config.dt = config.dt.min(DEFAULT_MAX_DT);
        config
    }

    fn validate(&self, params: &ModelParams) -> Result<()> {
        params.validate()?;
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        let courant = self.dt * self.k_trunc as f64 * (params.b + params.mu);
        if courant > MAX_COURANT {
            return Err(Error::Stability { courant });
        }
        if params.n0 as usize > self.k_trunc {
            return Err(Error::InvalidConfig(format!(
                "n0={} exceeds k_trunc={}",
                params.n0, self.k_trunc
            )));
        }
        Ok(())
    }
}

/// Pmf of the autonomous birth-death chain at `t`, started from `n0`.
pub fn solve_autonomous(params: &ModelParams, t: f64, config: &OdeConfig) -> Result<Pmf> {
    config.validate(params)?;
    let (b, mu) = (params.b, params.mu);
    let k = config.k_trunc;
    let rhs = |_s: f64, p: &[f64], dp: &mut [f64]| {
        for i in 0..=k {
            let fi = i as f64;
            let mut v = -fi * (b + mu) * p[i];
            if i > 0 {
                v += (fi - 1.0) * b * p[i - 1];
            }
            if i < k {
                v += (fi + 1.0) * mu * p[i + 1];
            }
            dp[i] = v;
        }
        Ok(())
    };
    integrate(params, t, config, rhs)
}

/// Pmf of the M(t)/M/inf occupancy at `t` under arrival intensity
/// `intensity`, started from `n0`.
pub fn solve_mtminf<F>(params: &ModelParams, intensity: F, t: f64, config: &OdeConfig) -> Result<Pmf>
where
    F: Fn(f64) -> f64,
{
    config.validate(params)?;
    let mu = params.mu;
    let k = config.k_trunc;
    let dt = config.dt;
    let rhs = |s: f64, p: &[f64], dp: &mut [f64]| {
        let lambda = intensity(s);
        let courant = dt * (lambda + k as f64 * mu);
        if !(lambda >= 0.0) || courant > MAX_COURANT {
            return Err(Error::Stability { courant });
        }
        for i in 0..=k {
            let fi = i as f64;
            let mut v = -(lambda + fi * mu) * p[i];
            if i > 0 {
                v += lambda * p[i - 1];
            }
            if i < k {
                v += (fi + 1.0) * mu * p[i + 1];
            }
            dp[i] = v;
        }
        Ok(())
    };
    integrate(params, t, config, rhs)
}

fn integrate<F>(params: &ModelParams, t: f64, config: &OdeConfig, rhs: F) -> Result<Pmf>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = config.k_trunc + 1;
    let mut p = vec![0.0; n];
    p[params.n0 as usize] = 1.0;

    let steps = if t > 0.0 { (t / config.dt).ceil() as usize } else { 0 };
    let h = if steps > 0 { t / steps as f64 } else { 0.0 };
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    for step in 0..steps {
        let s = step as f64 * h;
        rhs(s, &p, &mut k1)?;
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * h * k1[i];
        }
        rhs(s + 0.5 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = p[i] + 0.5 * h * k2[i];
        }
        rhs(s + 0.5 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = p[i] + h * k3[i];
        }
        rhs(s + h, &tmp, &mut k4)?;
        for i in 0..n {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| **v < -NEGATIVE_FLOOR) {
            return Err(Error::NegativeProbability { index, value });
        }
    }

    let pmf = Pmf::from_raw(p)?;
    let limit = 10.0 * config.tail_tol;
    if pmf.tail_bound() > limit {
        return Err(Error::MassLoss {
            lost: pmf.tail_bound(),
            limit,
        });
    }
    Ok(pmf)
}
