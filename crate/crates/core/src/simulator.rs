//! Discrete-event simulation of the finite-buffer queue with exhaustive
//! service and multiple vacations.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chains::QueueModel;
use crate::distributions::uniform;
use crate::error::{Error, Result};
use crate::special;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: QueueModel,
    pub capacity: usize,
    pub warmup_arrivals: u64,
    pub measured_arrivals: u64,
    pub batches: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults: 10⁵ warm-up arrivals, 10⁶ measured arrivals in 20 batches.
    pub fn new(model: QueueModel, capacity: usize) -> Self {
        SimConfig { model, capacity, warmup_arrivals: 100_000, measured_arrivals: 1_000_000, batches: 20, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity < 1 {
            return Err(Error::InvalidConfig("capacity must be at least 1".into()));
        }
        if self.batches < 10 {
            return Err(Error::InvalidConfig(format!("need at least 10 batches, got {}", self.batches)));
        }
        if self.measured_arrivals < 10 * self.batches as u64 {
            return Err(Error::InvalidConfig(format!(
                "measured arrivals {} below 10 per batch",
                self.measured_arrivals
            )));
        }
        if self.model.vacation.is_zero() {
            return Err(Error::InvalidConfig(
                "zero-length vacations cannot be simulated; use a short positive vacation".into(),
            ));
        }
        Ok(())
    }
}

/// Batch-means summary of one statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub point: f64,
    pub half_width_95: f64,
    pub batch_means: Vec<f64>,
}

impl BatchSummary {
    /// Mean of the batch means with a Student-t 95% half-width.
    pub fn from_batches(batch_means: Vec<f64>, point: f64) -> Self {
        let b = batch_means.len() as f64;
        let mean = batch_means.iter().sum::<f64>() / b;
        let var = batch_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
        let t = special::student_t_quantile(0.975, b - 1.0);
        BatchSummary { point, half_width_95: t * libm::sqrt(var / b), batch_means }
    }

    pub fn contains(&self, x: f64) -> bool {
        libm::fabs(x - self.point) <= self.half_width_95
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossEstimate {
    /// `blocked / arrivals_seen`.
    pub point: f64,
    pub half_width_95: f64,
    pub batch_means: Vec<f64>,
    pub arrivals_seen: u64,
    pub blocked: u64,
    /// Fraction of measured time with the system full.
    pub time_full: BatchSummary,
    /// Over the whole run, warm-up included.
    pub accepted_total: u64,
    pub departures_total: u64,
    pub final_content: usize,
    pub seed: u64,
}

impl LossEstimate {
    pub fn contains(&self, x: f64) -> bool {
        libm::fabs(x - self.point) <= self.half_width_95
    }

    /// Accepted arrivals equal departures plus what is left in the system.
    pub fn flow_balanced(&self) -> bool {
        self.accepted_total == self.departures_total + self.final_content as u64
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Server {
    Busy,
    Vacation,
}

/// Runs one replication.
///
/// The server starts a vacation at time 0 with an empty system. Events at
/// equal times are processed as service completion, then vacation end, then
/// arrival.
pub fn simulate(config: &SimConfig) -> Result<LossEstimate> {
    config.validate()?;
    let model = &config.model;
    let cap = config.capacity;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_batch = config.measured_arrivals / config.batches as u64;
    let measured = per_batch * config.batches as u64;
    let total_arrivals = config.warmup_arrivals + measured;

    let mut now = 0.0f64;
    let mut content = 0usize;
    let mut server = Server::Vacation;
    let mut next_arrival = -libm::log(uniform(&mut rng)) / model.lambda;
    // End of the current service or vacation.
    let mut phase_end = model.vacation.sample(&mut rng);

    let mut arrivals = 0u64;
    let mut accepted_total = 0u64;
    let mut departures_total = 0u64;
    let mut blocked = 0u64;
    let mut batch_blocked = 0u64;
    let mut batch_loss = Vec::with_capacity(config.batches);
    let mut batch_full = Vec::with_capacity(config.batches);
    let mut full_time = 0.0;
    let mut batch_full_time = 0.0;
    let mut batch_start = 0.0;
    let mut measure_start = 0.0;

    while arrivals < total_arrivals {
        let t = if phase_end <= next_arrival { phase_end } else { next_arrival };
        if content == cap && arrivals >= config.warmup_arrivals {
            full_time += t - now;
            batch_full_time += t - now;
        }
        now = t;
        if phase_end <= next_arrival {
            match server {
                Server::Busy => {
                    content -= 1;
                    departures_total += 1;
                    if content > 0 {
                        phase_end = now + model.service.sample(&mut rng);
                    } else {
                        server = Server::Vacation;
                        phase_end = now + model.vacation.sample(&mut rng);
                    }
                }
                Server::Vacation => {
                    if content > 0 {
                        server = Server::Busy;
                        phase_end = now + model.service.sample(&mut rng);
                    } else {
                        phase_end = now + model.vacation.sample(&mut rng);
                    }
                }
            }
            continue;
        }

        let measuring = arrivals >= config.warmup_arrivals;
        if content == cap {
            if measuring {
                blocked += 1;
                batch_blocked += 1;
            }
        } else {
            content += 1;
            accepted_total += 1;
        }
        arrivals += 1;
        next_arrival = now - libm::log(uniform(&mut rng)) / model.lambda;

        if arrivals == config.warmup_arrivals {
            measure_start = now;
            batch_start = now;
        } else if measuring && (arrivals - config.warmup_arrivals) % per_batch == 0 {
            batch_loss.push(batch_blocked as f64 / per_batch as f64);
            batch_full.push(batch_full_time / (now - batch_start));
            batch_blocked = 0;
            batch_full_time = 0.0;
            batch_start = now;
        }
    }

    let loss = BatchSummary::from_batches(batch_loss, blocked as f64 / measured as f64);
    let time_full = BatchSummary::from_batches(batch_full, full_time / (now - measure_start));
    Ok(LossEstimate {
        point: loss.point,
        half_width_95: loss.half_width_95,
        batch_means: loss.batch_means,
        arrivals_seen: measured,
        blocked,
        time_full,
        accepted_total,
        departures_total,
        final_content: content,
        seed: config.seed,
    })
}

/// Pools independent replications: the batch means of all runs form one
/// batch-means sample.
pub fn merge(runs: &[LossEstimate]) -> Option<LossEstimate> {
    let first = runs.first()?;
    let mut means = Vec::new();
    let mut full = Vec::new();
    let (mut seen, mut blocked, mut accepted, mut departed, mut content) = (0, 0, 0, 0, 0);
    let mut full_weighted = 0.0;
    for r in runs {
        means.extend_from_slice(&r.batch_means);
        full.extend_from_slice(&r.time_full.batch_means);
        seen += r.arrivals_seen;
        blocked += r.blocked;
        accepted += r.accepted_total;
        departed += r.departures_total;
        content += r.final_content;
        full_weighted += r.time_full.point;
    }
    let loss = BatchSummary::from_batches(means, blocked as f64 / seen as f64);
    let time_full = BatchSummary::from_batches(full, full_weighted / runs.len() as f64);
    Some(LossEstimate {
        point: loss.point,
        half_width_95: loss.half_width_95,
        batch_means: loss.batch_means,
        arrivals_seen: seen,
        blocked,
        time_full,
        accepted_total: accepted,
        departures_total: departed,
        final_content: content,
        seed: first.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Distribution;

    fn model(l: f64, s: Distribution, v: Distribution) -> QueueModel {
        QueueModel::new(l, s, v).unwrap()
    }

    fn small(m: QueueModel, n: usize, seed: u64) -> SimConfig {
        SimConfig { warmup_arrivals: 10_000, measured_arrivals: 200_000, ..SimConfig::new(m, n).with_seed(seed) }
    }

    #[test]
    fn rejects_bad_configs() {
        let m = model(1.0, Distribution::exponential(2.0).unwrap(), Distribution::zero());
        assert!(matches!(simulate(&SimConfig::new(m, 5)), Err(Error::InvalidConfig(_))));
        let m = model(1.0, Distribution::exponential(2.0).unwrap(), Distribution::exponential(1.0).unwrap());
        let mut c = SimConfig::new(m, 5);
        c.batches = 5;
        assert!(c.validate().is_err());
        c.batches = 20;
        c.measured_arrivals = 100;
        assert!(c.validate().is_err());
        c.measured_arrivals = 1000;
        c.capacity = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_and_balanced() {
        let m = model(1.0, Distribution::exponential(2.0).unwrap(), Distribution::exponential(4.0).unwrap());
        let a = simulate(&small(m.clone(), 5, 7)).unwrap();
        let b = simulate(&small(m.clone(), 5, 7)).unwrap();
        assert_eq!(a, b);
        assert!(a.flow_balanced());
        let c = simulate(&small(m, 5, 8)).unwrap();
        assert_ne!(a.blocked, c.blocked);
        assert_eq!(a.batch_means.len(), 20);
        assert_eq!(a.point, a.blocked as f64 / a.arrivals_seen as f64);
    }

    #[test]
    fn light_traffic_rarely_blocks() {
        let m = model(0.01, Distribution::exponential(1.0).unwrap(), Distribution::exponential(1.0).unwrap());
        let e = simulate(&small(m, 2, 1)).unwrap();
        assert!(e.point < 1e-3);
    }

    #[test]
    fn supercritical_loss_near_half() {
        let m = model(2.0, Distribution::exponential(1.0).unwrap(), Distribution::exponential(1.0).unwrap());
        let e = simulate(&small(m, 40, 3)).unwrap();
        assert!(libm::fabs(e.point - 0.5) < 4.0 * e.half_width_95.max(1e-3));
    }

    #[test]
    fn pasta_time_average_agrees() {
        let m = model(1.0, Distribution::deterministic(0.8).unwrap(), Distribution::exponential(2.0).unwrap());
        let e = simulate(&small(m, 4, 11)).unwrap();
        let gap = libm::fabs(e.point - e.time_full.point);
        assert!(gap <= e.half_width_95 + e.time_full.half_width_95, "{} vs {}", e.point, e.time_full.point);
    }

    #[test]
    fn merge_pools_batches() {
        let m = model(1.0, Distribution::exponential(2.0).unwrap(), Distribution::exponential(4.0).unwrap());
        let runs: Vec<_> = (0..3).map(|s| simulate(&small(m.clone(), 3, s)).unwrap()).collect();
        let all = merge(&runs).unwrap();
        assert_eq!(all.batch_means.len(), 60);
        assert_eq!(all.blocked, runs.iter().map(|r| r.blocked).sum::<u64>());
        assert!(all.flow_balanced());
    }
}
