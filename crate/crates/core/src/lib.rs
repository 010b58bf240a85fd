//! Reconstruct discussion threads from flat forum dumps, label each user's
//! stance per time period, describe users by how they interact with the
//! stances around them, and forecast their next-period stance.
//!
//! The crate is organised as a pipeline of independent modules:
//!
//! - [`corpus`]: entry parsing, thread forests, diffusions, time periods and a
//!   synthetic corpus generator with planted stance dynamics.
//! - [`stance`]: text preprocessing (Porter stemmer), hashtag weak labels,
//!   multinomial Naive Bayes and the probability-to-stance mapping.
//! - [`features`]: the FS0..FS5 feature sets.
//! - [`learning`]: supervised instances, five classifier families, nested
//!   cross-validation with random search, macro metrics.
//! - [`pipeline`]: config file, on-disk stage artifacts and the dataset profile.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod corpus;
pub mod error;
pub mod features;
pub mod learning;
pub mod pipeline;
pub mod stance;

pub use error::{Error, Result};
