//! Synthetic environments, failure injection and the experiment suites.

mod env;
mod experiment;
mod failure;
mod replay;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use env::{generate_environment, Environment, EnvironmentConfig, ReliabilitySource};
pub use experiment::{
    exer_flag, exer_ratio, run_experiment, AggregateRow, ExperimentConfig, ExperimentReport,
    ReportRow, RiskStrategy, Suite, Summary,
};
pub use failure::{inject_failures, FailureOrder, FailureScenario, DEFAULT_EPSILON};
pub use replay::{effective_extension, replacement_deficit, ReplacementPolicy};

/// Independent deterministic generator for `(seed, stream)`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
