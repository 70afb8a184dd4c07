//! Event-driven Monte Carlo for both systems.
//!
//! Replication `r` draws from its own ChaCha8 stream: the key comes from
//! `seed` (expanded by `SeedableRng::seed_from_u64`) and the ChaCha stream id
//! is `r`. Replications are therefore independent of scheduling, and the
//! histogram is bit-identical across platforms and thread counts.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cumulative_matched_intensity, inverse_cumulative_matched_intensity, ModelParams};
use crate::pmf::Pmf;

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), key=seed_from_u64(seed), stream=replication";

pub const DEFAULT_MAX_EVENTS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    /// Events allowed per replication before the run is abandoned.
    pub max_events: u64,
}

impl SimConfig {
    pub fn new(replications: u64, seed: u64) -> Self {
        Self {
            replications,
            seed,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// `counts[i]` replications ended with occupancy `i`.
    pub counts: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    pub elapsed: Duration,
}

impl SimResult {
    fn from_states(states: &[u32], config: &SimConfig, elapsed: Duration) -> Self {
        let max = states.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0u64; max + 1];
        for &s in states {
            counts[s as usize] += 1;
        }
        Self {
            counts,
            replications: config.replications,
            seed: config.seed,
            elapsed,
        }
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| i as f64 * c as f64)
            .sum();
        sum / self.replications as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 - m).powi(2) * c as f64)
            .sum();
        ss / (self.replications.saturating_sub(1).max(1)) as f64
    }

    /// Standard error of the empirical mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.replications as f64).sqrt()
    }

    pub fn empirical_pmf(&self) -> Pmf {
        let n = self.replications as f64;
        let probs = self.counts.iter().map(|&c| c as f64 / n).collect();
        Pmf::from_raw(probs).expect("histogram frequencies form a pmf")
    }
}

/// The generator used by replication `replication` under `seed`.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

fn run<F>(config: &SimConfig, replicate: F) -> Result<SimResult>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<u32> + Sync,
{
    config.validate()?;
    let start = Instant::now();
    let states = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(r, &mut replication_rng(config.seed, r)))
        .collect::<Result<Vec<u32>>>()?;
    Ok(SimResult::from_states(&states, config, start.elapsed()))
}

/// Occupancy at `t` of the autonomous chain, one draw per replication.
pub fn simulate_autonomous(params: &ModelParams, t: f64, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    let (b, mu) = (params.b, params.mu);
    let birth = b / (b + mu);
    run(config, |replication, rng| {
        let mut state = params.n0;
        let mut clock = 0.0;
        let mut events = 0u64;
        // Zero is absorbing.
        while state > 0 {
            clock += exponential(rng, f64::from(state) * (b + mu));
            if clock > t {
                break;
            }
            if rng.random_bool(birth) {
                state += 1;
            } else {
                state -= 1;
            }
            events += 1;
            if events > config.max_events {
                return Err(Error::SimulationCap {
                    replication,
                    events: config.max_events,
                });
            }
        }
        Ok(state)
    })
}

/// Arrival epochs on `[0, t]` of the matched nonstationary Poisson flow, by
/// mapping unit-rate Poisson epochs through the inverse cumulative intensity.
pub fn sample_arrival_times<R: Rng>(params: &ModelParams, t: f64, rng: &mut R) -> Vec<f64> {
    let horizon = cumulative_matched_intensity(params, t);
    let mut arrivals = Vec::new();
    if horizon <= 0.0 {
        return arrivals;
    }
    let mut epoch = 0.0;
    loop {
        epoch += exponential(rng, 1.0);
        if epoch > horizon {
            break;
        }
        match inverse_cumulative_matched_intensity(params, epoch) {
            Some(s) => arrivals.push(s.min(t)),
            None => break,
        }
    }
    arrivals
}

/// Occupancy at `t` of the matched M(t)/M/inf queue, one draw per replication.
pub fn simulate_mtminf(params: &ModelParams, t: f64, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    let mu = params.mu;
    run(config, |_, rng| {
        let mut busy = 0u32;
        for _ in 0..params.n0 {
            if exponential(rng, mu) > t {
                busy += 1;
            }
        }
        for arrival in sample_arrival_times(params, t, rng) {
            if arrival + exponential(rng, mu) > t {
                busy += 1;
            }
        }
        Ok(busy)
    })
}
