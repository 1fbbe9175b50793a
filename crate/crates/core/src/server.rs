//! Edge server: background M/M/1 queue and tail-computation latency.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::VersionProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    pub background_arrival_rate_hz: f64,
    pub background_service_rate_hz: f64,
    /// Delay each queued background job imposes on an arriving inference job.
    pub expected_service_s: f64,
    #[serde(default)]
    pub initial_queue_len: u32,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            background_arrival_rate_hz: 2.0,
            background_service_rate_hz: 4.0,
            expected_service_s: 0.05,
            initial_queue_len: 0,
        }
    }
}

impl ServerConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.background_arrival_rate_hz >= 0.0) || !self.background_arrival_rate_hz.is_finite()
        {
            errors.push("server.background_arrival_rate_hz: must be finite and >= 0".to_string());
        }
        if !(self.background_service_rate_hz > 0.0) || !self.background_service_rate_hz.is_finite()
        {
            errors.push("server.background_service_rate_hz: must be finite and > 0".to_string());
        }
        if !(self.expected_service_s >= 0.0) {
            errors.push("server.expected_service_s: must be >= 0".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn utilization(&self) -> f64 {
        self.background_arrival_rate_hz / self.background_service_rate_hz
    }

    /// Stationary mean number in an M/M/1 system, `rho / (1 - rho)`.
    /// `None` when the queue is not stable.
    pub fn stationary_mean_queue(&self) -> Option<f64> {
        let rho = self.utilization();
        (rho < 1.0).then(|| rho / (1.0 - rho))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub config: ServerConfig,
    pub queue_len: u32,
}

impl ServerState {
    pub fn new(config: ServerConfig) -> Self {
        let queue_len = config.initial_queue_len;
        Self { config, queue_len }
    }

    /// Simulates the birth-death chain for `slot_s` seconds: Poisson arrivals
    /// and, while the queue is non-empty, exponential service completions.
    pub fn advance_queue<R: Rng + ?Sized>(&mut self, slot_s: f64, rng: &mut R) {
        let lambda = self.config.background_arrival_rate_hz;
        let mu = self.config.background_service_rate_hz;
        let mut t = 0.0;
        loop {
            let service = if self.queue_len > 0 { mu } else { 0.0 };
            let total = lambda + service;
            if total <= 0.0 {
                break;
            }
            let dt = Exp::new(total).expect("positive rate").sample(rng);
            t += dt;
            if t > slot_s {
                break;
            }
            let u: f64 = rng.random::<f64>() * total;
            if u < lambda {
                self.queue_len += 1;
            } else {
                self.queue_len -= 1;
            }
        }
    }

    /// Delay seen by an inference job arriving now.
    pub fn queue_delay(&self) -> f64 {
        f64::from(self.queue_len) * self.config.expected_service_s
    }

    /// Deterministic delay estimate: stationary mean queue times per-job delay.
    /// Falls back to the current snapshot when the queue is unstable.
    pub fn expected_queue_delay(&self) -> f64 {
        match self.config.stationary_mean_queue() {
            Some(mean) => mean * self.config.expected_service_s,
            None => self.queue_delay(),
        }
    }
}

/// Queue delay plus server compute for layers `l+1..=L`.
pub fn remote_latency(queue_delay_s: f64, version: &VersionProfile, l: usize) -> Result<f64> {
    Ok(queue_delay_s + version.tail_server_latency(l)?)
}
