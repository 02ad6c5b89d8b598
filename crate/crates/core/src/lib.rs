//! Uncertainty-aware collision risk estimation for human-robot collaboration.
//!
//! The crate is organized bottom-up:
//!
//! * [`stream`]: deterministic, splittable random streams.
//! * [`uncertainty`]: temporal (reaction delay) and spatial (distance error) models.
//! * [`scenario`]: discrete-time scenarios that turn one uncertainty draw into a
//!   [`scenario::TrialOutcome`].
//! * [`estimator`]: plain Monte Carlo and grid-based importance sampling of the
//!   dangerous-event probability, plus the repeated-run variance comparison.
//! * [`risk`]: uncertainty sweeps, risk values and safety-limit evaluation.
//!
//! The guide in `book/` walks through each layer with runnable snippets.

pub mod error;
pub mod stream;
pub mod uncertainty;
pub mod scenario;
pub mod estimator;
pub mod risk;

pub use error::{Error, Result};
pub use stream::RandomStream;
