//! Reliability-aware elastic composition of crowdsourced wireless energy services.
//!
//! A consumer's charging window is cut into chunks at provider switch points
//! ([`timeline`]); each one-provider-per-chunk composition is scored on total
//! energy, aggregate reliability and expected extension past the soft
//! deadline ([`assessment`]); the [`composer`] keeps the Pareto-optimal
//! compositions and picks one by consumer preference. The [`simulator`]
//! generates synthetic environments, revokes unreliable services and measures
//! how often the expected extension underestimates the real one.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assessment;
pub mod cli;
pub mod composer;
pub mod error;
pub mod io;
pub mod model;
pub mod reliability;
pub mod simulator;
pub mod timeline;

pub use error::{Error, Result};
