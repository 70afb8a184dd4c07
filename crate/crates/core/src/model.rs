//! Closed-form quantities of the two systems.
//!
//! The *autonomous* system is the linear birth-death chain: each of the `i`
//! occupied devices departs at rate `mu` and spawns a new customer at rate
//! `b`. The *matched* system is an M(t)/M/inf queue fed by a nonstationary
//! Poisson flow whose intensity `lambda(t) = b * m(t)` is chosen so that both
//! systems share the mean occupancy `m(t) = n0 * exp((b - mu) t)`.
//!
//! # Evaluating the autonomous characteristic function
//!
//! The textbook rational form
//!
//! ```text
//! H = [(e - r - r (e - 1) E) / (e - r - (e - 1) E)]^N,  e = exp(ju), r = mu/b, E = exp((b - mu) t)
//! ```
//!
//! degenerates to 0/0 at `b = mu`: numerator and denominator are both
//! `O(b - mu)` and are formed by subtracting `O(1)` terms, so the quotient
//! loses `log10(1 / |b - mu|)` digits. Multiplying through by `b / (b - mu)`
//! gives the equivalent form
//!
//! ```text
//! H = [(1 + (e - 1)(1 - mu * phi)) / (1 - (e - 1) b phi)]^N,  phi = expm1((b - mu) t) / (b - mu)
//! ```
//!
//! which has no cancellation: `phi` is computed with `expm1` and tends to `t`
//! as `b -> mu`, where the formula reduces to the `b = mu` limit
//! `[((e - 1) b t - e) / ((e - 1) b t - 1)]^N`. We switch to `phi = t` when
//! `|b - mu| t < 1e-8`, where the relative error of doing so is below
//! `|b - mu| t / 2 < 5e-9`. For real `u`, `Re(e - 1) <= 0` and `phi > 0`, so
//! the denominator has real part at least one; the floor check in
//! [`cf_autonomous`] can only fire on non-finite inputs.
//!
//! The integer power `N` is taken by repeated squaring, never through a
//! complex logarithm.
//!
//! # Valid envelope
//!
//! The Poisson parameter `n0 * exp(-mu t) * expm1(b t)` is finite for
//! `b t < 709`; pmf construction additionally needs the mean to fit a dense
//! vector (`m(t)` up to ~1e6). Every cell of the distance table
//! (`b <= 1.9`, `t <= 1`, `n0 = 15`) is many orders of magnitude inside.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::quadrature::{adaptive_simpson, DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH};

/// Below this value of `|b - mu| * t` the `b = mu` limit form is used.
pub const BRANCH_THRESHOLD: f64 = 1e-8;

/// Smallest denominator magnitude accepted by [`cf_autonomous`].
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Birth intensity `b`, service rate `mu` and initial occupancy `n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b: f64,
    pub mu: f64,
    pub n0: u32,
}

impl ModelParams {
    pub fn new(b: f64, mu: f64, n0: u32) -> Result<Self> {
        let params = Self { b, mu, n0 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::InvalidParams(format!("b must be >= 0, got {}", self.b)));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParams(format!("mu must be > 0, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    fn n(&self) -> f64 {
        f64::from(self.n0)
    }
}

/// Anything that maps `(u, t)` to a characteristic-function value.
pub trait CfEvaluator: Sync {
    fn eval(&self, u: f64, t: f64) -> Result<Complex64>;
}

impl<F> CfEvaluator for F
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, u: f64, t: f64) -> Result<Complex64> {
        Ok(self(u, t))
    }
}

/// `H(u, t)` of the autonomous birth-death system.
#[derive(Debug, Clone, Copy)]
pub struct AutonomousCf(pub ModelParams);

impl CfEvaluator for AutonomousCf {
    fn eval(&self, u: f64, t: f64) -> Result<Complex64> {
        cf_autonomous(&self.0, u, t)
    }
}

/// `G(u, t)` of the M(t)/M/inf system under the matched intensity.
#[derive(Debug, Clone, Copy)]
pub struct PoissonMatchedCf(pub ModelParams);

impl CfEvaluator for PoissonMatchedCf {
    fn eval(&self, u: f64, t: f64) -> Result<Complex64> {
        Ok(cf_poisson_matched(&self.0, u, t))
    }
}

/// `z^n` by repeated squaring.
pub fn powu(mut z: Complex64, mut n: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= z;
        }
        z *= z;
        n >>= 1;
    }
    acc
}

/// `expm1((b - mu) t) / (b - mu)`, continuous through `b = mu`.
pub fn growth_integral(params: &ModelParams, t: f64) -> f64 {
    let delta = params.b - params.mu;
    if (delta * t).abs() < BRANCH_THRESHOLD {
        t
    } else {
        (delta * t).exp_m1() / delta
    }
}

/// `m(t) = n0 exp((b - mu) t)`, shared by both systems.
pub fn mean_occupancy(params: &ModelParams, t: f64) -> f64 {
    params.n() * ((params.b - params.mu) * t).exp()
}

/// `lambda(t) = b n0 exp((b - mu) t)`.
pub fn matched_intensity(params: &ModelParams, t: f64) -> f64 {
    params.b * mean_occupancy(params, t)
}

/// `Lambda(s) = integral of lambda over [0, s]`.
pub fn cumulative_matched_intensity(params: &ModelParams, s: f64) -> f64 {
    params.b * params.n() * growth_integral(params, s)
}

/// Inverse of [`cumulative_matched_intensity`]. `None` when `y` is beyond the
/// total mass `Lambda(inf)` (possible for `b < mu`) or the intensity is zero.
pub fn inverse_cumulative_matched_intensity(params: &ModelParams, y: f64) -> Option<f64> {
    let rate0 = params.b * params.n();
    if rate0 <= 0.0 {
        return None;
    }
    let delta = params.b - params.mu;
    if delta == 0.0 {
        return Some(y / rate0);
    }
    let x = delta * y / rate0;
    if x <= -1.0 {
        return None;
    }
    Some(x.ln_1p() / delta)
}

/// Probability that an initial customer is still in service at `t`.
pub fn survival_probability(params: &ModelParams, t: f64) -> f64 {
    (-params.mu * t).exp()
}

/// Poisson parameter of the arrivals still in service at `t`,
/// `n0 exp(-mu t) (exp(b t) - 1)`.
pub fn poisson_parameter(params: &ModelParams, t: f64) -> f64 {
    params.n() * survival_probability(params, t) * (params.b * t).exp_m1()
}

/// CF of Binomial(n, p): `(1 - p + p e^{ju})^n`.
pub fn cf_binomial(n: u32, p: f64, u: f64) -> Complex64 {
    let e = Complex64::cis(u);
    powu(1.0 + p * (e - 1.0), n)
}

/// CF of Poisson(a): `exp((e^{ju} - 1) a)`.
pub fn cf_poisson(a: f64, u: f64) -> Complex64 {
    ((Complex64::cis(u) - 1.0) * a).exp()
}

/// Characteristic function of the autonomous occupancy at time `t`.
pub fn cf_autonomous(params: &ModelParams, u: f64, t: f64) -> Result<Complex64> {
    let phi = growth_integral(params, t);
    let em1 = Complex64::cis(u) - 1.0;
    let num = 1.0 + em1 * (1.0 - params.mu * phi);
    let den = 1.0 - em1 * (params.b * phi);
    let magnitude = den.norm();
    if !(magnitude >= DENOMINATOR_FLOOR) {
        return Err(Error::NumericalInstability { u, t, magnitude });
    }
    Ok(powu(num / den, params.n0))
}

/// Characteristic function of the matched M(t)/M/inf occupancy: the product
/// of a Binomial(n0, e^{-mu t}) CF and a Poisson CF.
pub fn cf_poisson_matched(params: &ModelParams, u: f64, t: f64) -> Complex64 {
    cf_binomial(params.n0, survival_probability(params, t), u)
        * cf_poisson(poisson_parameter(params, t), u)
}

/// Characteristic function of the M(t)/M/inf occupancy for an arbitrary
/// nonnegative arrival intensity, integrating `lambda(tau) e^{mu tau}`
/// numerically.
pub fn cf_poisson_general<F>(params: &ModelParams, intensity: F, u: f64, t: f64) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    let mu = params.mu;
    // Integrate lambda(tau) e^{-mu (t - tau)} directly so nothing overflows.
    let a = adaptive_simpson(
        |tau| intensity(tau) * (-mu * (t - tau)).exp(),
        0.0,
        t,
        DEFAULT_ABS_TOL,
        DEFAULT_MAX_DEPTH,
    )?;
    Ok(cf_binomial(params.n0, survival_probability(params, t), u) * cf_poisson(a, u))
}

/// Binomial(n, p) pmf on `{0..=n}`.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    (0..=n)
        .map(|k| {
            let c = ln_binomial(u64::from(n), u64::from(k)).exp();
            c * p.powi(k as i32) * q.powi((n - k) as i32)
        })
        .collect()
}

/// Poisson(a) pmf on `{0..=kmax}`, computed in log space.
pub fn poisson_pmf(a: f64, kmax: usize) -> Vec<f64> {
    if a == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ln_a = a.ln();
    (0..=kmax)
        .map(|k| {
            let k = k as f64;
            (k * ln_a - a - ln_gamma(k + 1.0)).exp()
        })
        .collect()
}

/// Exact matched-system pmf on `{0..=kmax}` as the convolution of
/// Binomial(n0, e^{-mu t}) with Poisson(n0 e^{-mu t}(e^{bt} - 1)).
///
/// Fails with [`Error::TailMass`] when the mass beyond `kmax` is at least
/// `tail_tol`.
pub fn analytic_pmf_poisson(params: &ModelParams, t: f64, kmax: usize, tail_tol: f64) -> Result<Pmf> {
    params.validate()?;
    let binom = binomial_pmf(params.n0, survival_probability(params, t));
    let pois = poisson_pmf(poisson_parameter(params, t), kmax);
    let probs: Vec<f64> = (0..=kmax)
        .map(|k| {
            binom
                .iter()
                .enumerate()
                .take(k + 1)
                .map(|(j, pb)| pb * pois[k - j])
                .sum()
        })
        .collect();
    let pmf = Pmf::from_raw(probs)?;
    if pmf.tail_bound() >= tail_tol {
        return Err(Error::TailMass {
            kmax,
            tail: pmf.tail_bound(),
            tol: tail_tol,
        });
    }
    Ok(pmf)
}

/// `E[z^X]` of the autonomous occupancy for real `z = e^theta >= 1`;
/// `None` where the generating function diverges.
pub fn mgf_autonomous(params: &ModelParams, theta: f64, t: f64) -> Option<f64> {
    let phi = growth_integral(params, t);
    let zm1 = theta.exp_m1();
    let den = 1.0 - zm1 * params.b * phi;
    if den <= 0.0 {
        return None;
    }
    let num = 1.0 + zm1 * (1.0 - params.mu * phi);
    let ratio = num / den;
    let value = ratio.powi(params.n0 as i32);
    value.is_finite().then_some(value)
}

/// `E[e^{theta X}]` of the matched occupancy.
pub fn mgf_poisson_matched(params: &ModelParams, theta: f64, t: f64) -> f64 {
    let zm1 = theta.exp_m1();
    let p = survival_probability(params, t);
    (1.0 + p * zm1).powi(params.n0 as i32) * (zm1 * poisson_parameter(params, t)).exp()
}
