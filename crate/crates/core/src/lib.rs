//! Auditory attention decoding from multichannel neural recordings.
//!
//! The crate covers the full pipeline: stimulus and recording preprocessing
//! ([`signal`]), lagged ridge backward decoders with leave-one-out
//! regularization selection ([`decoding`]), three-stream attention
//! classification ([`attention`]), a seeded forward-model simulator that
//! supplies ground truth ([`simulation`]), the matrix-sentence behavioral
//! protocol ([`behavioral`]) and one-way ANOVA tooling ([`stats`]).

pub mod attention;
pub mod behavioral;
pub mod decoding;
pub mod error;
pub mod signal;
pub mod simulation;
pub mod stats;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
