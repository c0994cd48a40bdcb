//! Unsupervised appliance-level disaggregation of whole-house smart-meter
//! load curves.
//!
//! The core idea: learn where people spend their time from time-of-use
//! diaries, simulate plausible appliance schedules for the household being
//! studied, and keep the simulated day that best matches the measured one.
//! No appliance-level training data is needed — only the aggregate meter,
//! a short household questionnaire and a public activity survey.

pub mod appliance;
pub mod co;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod household;
pub mod ingest;
pub mod kv;
pub mod pretreat;
pub mod recognize;
pub mod sampler;
pub mod series;
pub mod suncalc;
pub mod tou;
pub mod types;

pub use error::{Error, Result};
