//! Finite-support probability mass functions over occupancy counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries in `[-NEGATIVE_FLOOR, 0)` are treated as roundoff and clipped.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

/// Slack allowed on the total mass above one.
pub const MASS_SLACK: f64 = 1e-9;

/// A pmf on `{0, ..., kmax}` with an estimate of the mass lying beyond `kmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
    tail_bound: f64,
    clipped: f64,
}

impl Pmf {
    /// Builds a pmf from raw values, clipping roundoff-sized negatives.
    ///
    /// `tail_bound` is taken as `max(0, 1 - sum)`.
    pub fn from_raw(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidConfig("empty pmf".into()));
        }
        let mut clipped = 0.0;
        for (index, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::NegativeProbability { index, value: *p });
            }
            if *p < 0.0 {
                if *p < -NEGATIVE_FLOOR {
                    return Err(Error::NegativeProbability { index, value: *p });
                }
                clipped -= *p;
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + MASS_SLACK {
            return Err(Error::MassExcess { total });
        }
        Ok(Self {
            probs,
            tail_bound: (1.0 - total).max(0.0),
            clipped,
        })
    }

    pub fn point_mass(at: usize, kmax: usize) -> Self {
        let mut probs = vec![0.0; kmax.max(at) + 1];
        probs[at] = 1.0;
        Self {
            probs,
            tail_bound: 0.0,
            clipped: 0.0,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kmax(&self) -> usize {
        self.probs.len() - 1
    }

    /// Mass missing from the retained support (truncation or aliasing loss).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Total magnitude of negative roundoff that was clipped to zero.
    pub fn clipped(&self) -> f64 {
        self.clipped
    }

    /// Probability of occupancy `i`; zero past the support.
    pub fn get(&self, i: usize) -> f64 {
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64 - m).powi(2) * p)
            .sum()
    }

    /// Largest entrywise absolute difference, zero-padding the shorter support.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        (0..len)
            .map(|i| (self.get(i) - other.get(i)).abs())
            .fold(0.0, f64::max)
    }
}
