use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_reliability_scores;
use crate::model::{EnergyQuery, EnergyService};
use crate::simulator::stream_rng;

const SERVICE_STREAM: u64 = 1;
const QUERY_STREAM: u64 = 2;

/// Where provider reliability scores come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReliabilitySource {
    Uniform {
        min: f64,
        max: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    /// Scores read from a one-column `reliability` CSV, drawn uniformly per service.
    Scores {
        path: PathBuf,
    },
}

impl Default for ReliabilitySource {
    fn default() -> Self {
        ReliabilitySource::Uniform { min: 0.0, max: 1.0 }
    }
}

/// Parameters of a synthetic crowdsourced environment. Ranges are inclusive
/// `[min, max]` pairs; times are minutes, energies mAh, currents mA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub num_areas: usize,
    pub num_queries: usize,
    /// Services generated per query (N.CES / N.Q).
    pub ratio_services_per_query: f64,
    /// Start times are drawn from `[0, horizon)`.
    pub horizon: i64,
    pub service_duration: (i64, i64),
    pub query_duration: (i64, i64),
    pub provided_energy: (f64, f64),
    pub required_energy: (f64, f64),
    pub tsr: (f64, f64),
    pub max_intensity: (f64, f64),
    /// Hard deadline is `du + U(0, factor * du)`.
    pub hard_deadline_factor: f64,
    pub reliability: ReliabilitySource,
    pub seed: u64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            num_areas: 100,
            num_queries: 100,
            ratio_services_per_query: 3.0,
            horizon: 240,
            service_duration: (10, 60),
            query_duration: (5, 120),
            provided_energy: (50.0, 1000.0),
            required_energy: (100.0, 800.0),
            tsr: (0.8, 1.0),
            max_intensity: (4000.0, 8000.0),
            hard_deadline_factor: 1.0,
            reliability: ReliabilitySource::default(),
            seed: 42,
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Display>(field: &str, (lo, hi): (T, T)) -> Result<()> {
    if lo > hi {
        return Err(Error::config(field, format!("empty range [{lo}, {hi}]")));
    }
    Ok(())
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_areas == 0 {
            return Err(Error::config("num_areas", "must be at least 1"));
        }
        if !(self.ratio_services_per_query >= 1.0) {
            return Err(Error::config(
                "ratio_services_per_query",
                format!("{} must be at least 1", self.ratio_services_per_query),
            ));
        }
        if self.horizon <= 0 {
            return Err(Error::config("horizon", "must be positive"));
        }
        check_range("service_duration", self.service_duration)?;
        check_range("query_duration", self.query_duration)?;
        check_range("provided_energy", self.provided_energy)?;
        check_range("required_energy", self.required_energy)?;
        check_range("tsr", self.tsr)?;
        check_range("max_intensity", self.max_intensity)?;
        if self.service_duration.0 <= 0 {
            return Err(Error::config(
                "service_duration",
                "durations must be positive",
            ));
        }
        if self.query_duration.0 <= 0 {
            return Err(Error::config(
                "query_duration",
                "durations must be positive",
            ));
        }
        if self.provided_energy.0 < 0.0 {
            return Err(Error::config("provided_energy", "must be non-negative"));
        }
        if self.required_energy.0 <= 0.0 {
            return Err(Error::config("required_energy", "must be positive"));
        }
        if !(self.tsr.0 > 0.0 && self.tsr.1 <= 1.0) {
            return Err(Error::config("tsr", "must lie in (0, 1]"));
        }
        if !(self.hard_deadline_factor >= 0.0) {
            return Err(Error::config(
                "hard_deadline_factor",
                "must be non-negative",
            ));
        }
        match &self.reliability {
            ReliabilitySource::Uniform { min, max } => {
                check_range("reliability", (*min, *max))?;
                if *min < 0.0 || *max > 1.0 {
                    return Err(Error::config("reliability", "range must lie in [0, 1]"));
                }
            }
            ReliabilitySource::Beta { alpha, beta } => {
                if !(*alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::config(
                        "reliability",
                        "beta parameters must be positive",
                    ));
                }
            }
            ReliabilitySource::Scores { .. } => {}
        }
        Ok(())
    }

    pub fn num_services(&self) -> usize {
        (self.ratio_services_per_query * self.num_queries as f64).round() as usize
    }

    pub fn area_id(&self, index: usize) -> String {
        format!("area{:04}", index % self.num_areas)
    }
}

enum ReliabilitySampler {
    Uniform(f64, f64),
    Beta(Beta<f64>),
    Scores(Vec<f64>),
}

impl ReliabilitySampler {
    fn new(source: &ReliabilitySource) -> Result<Self> {
        Ok(match source {
            ReliabilitySource::Uniform { min, max } => ReliabilitySampler::Uniform(*min, *max),
            ReliabilitySource::Beta { alpha, beta } => ReliabilitySampler::Beta(
                Beta::new(*alpha, *beta)
                    .map_err(|e| Error::config("reliability", e.to_string()))?,
            ),
            ReliabilitySource::Scores { path } => {
                let scores = read_reliability_scores(path)?;
                if scores.is_empty() {
                    return Err(Error::config("reliability", "score file is empty"));
                }
                ReliabilitySampler::Scores(scores)
            }
        })
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            ReliabilitySampler::Uniform(lo, hi) => uniform_f64(rng, *lo, *hi),
            ReliabilitySampler::Beta(b) => b.sample(rng),
            ReliabilitySampler::Scores(s) => s[rng.random_range(0..s.len())],
        }
    }
}

fn uniform_f64(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub services: Vec<EnergyService>,
    pub queries: Vec<EnergyQuery>,
}

/// Samples services and queries; service `i` and query `j` are placed in
/// areas `i mod num_areas` and `j mod num_areas`. Deterministic per seed.
pub fn generate_environment(cfg: &EnvironmentConfig) -> Result<Environment> {
    cfg.validate()?;
    let reliability = ReliabilitySampler::new(&cfg.reliability)?;

    let mut rng = stream_rng(cfg.seed, SERVICE_STREAM);
    let services = (0..cfg.num_services())
        .map(|i| {
            let start = rng.random_range(0..cfg.horizon);
            let duration = rng.random_range(cfg.service_duration.0..=cfg.service_duration.1);
            let energy = uniform_f64(&mut rng, cfg.provided_energy.0, cfg.provided_energy.1);
            let tsr = uniform_f64(&mut rng, cfg.tsr.0, cfg.tsr.1);
            let rel = reliability.sample(&mut rng);
            // advertised energy over the window fixes the current
            let intensity = energy / (duration as f64 / 60.0 * tsr);
            EnergyService::new(
                format!("s{i:06}"),
                format!("p{i:06}"),
                cfg.area_id(i),
                start,
                start + duration,
                intensity,
                tsr,
                rel,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = stream_rng(cfg.seed, QUERY_STREAM);
    let queries = (0..cfg.num_queries)
        .map(|j| {
            let t_s = rng.random_range(0..cfg.horizon);
            let du = rng.random_range(cfg.query_duration.0..=cfg.query_duration.1);
            let re = uniform_f64(&mut rng, cfg.required_energy.0, cfg.required_energy.1);
            let ci = uniform_f64(&mut rng, cfg.max_intensity.0, cfg.max_intensity.1);
            let slack =
                uniform_f64(&mut rng, 0.0, cfg.hard_deadline_factor * du as f64).round() as i64;
            EnergyQuery::new(
                format!("q{j:06}"),
                t_s,
                cfg.area_id(j),
                re,
                ci,
                du,
                du + slack,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Environment { services, queries })
}
