//! Probability estimators for dangerous events.
//!
//! [`mc_estimate`] is the plain Monte Carlo baseline. The grid-based importance
//! sampler first spends a fraction `beta` of the budget learning where
//! critical samples cluster on an `e^d` grid ([`learn_grid_density`]), then
//! spends the remaining `r = n * (1 - beta)` samples cell by cell in
//! proportion to the learned density and re-weights each cell's hit count by
//! its base mass over its sampling share ([`is_estimate`]).

mod allocate;
mod benchmark;
mod compare;
mod grid_is;
mod mc;
mod report;
mod scenario_space;
mod space;

pub use allocate::allocate_samples;
pub use benchmark::{Benchmark, BoxRegion, NormalBump};
pub use compare::{repeated_estimate, vae_compare, EstimatorSettings};
pub use grid_is::{
    default_noise_scale, grid_is_estimate, is_estimate, is_estimate_with, learn_grid_density,
    split_budget, CellSampling, ImportancePhase, LearnedGrid,
};
pub use mc::mc_estimate;
pub use report::{
    mean, sample_variance, EstimateReport, GridRepetition, GridSummary, Method, Repetition,
};
pub use scenario_space::{ScenarioCriticality, SpaceMode};
pub use space::{BaseDensity, GridPartition, SampleSpace};

use crate::stream::RandomStream;

/// Labels sample points as critical (the dangerous event occurred) or not.
///
/// `stream` is private to this evaluation, so stochastic predicates stay
/// reproducible.
pub trait Criticality: Sync {
    fn is_critical(&self, point: &[f64], stream: &mut RandomStream) -> bool;
}

impl<F> Criticality for F
where
    F: Fn(&[f64]) -> bool + Sync,
{
    fn is_critical(&self, point: &[f64], _stream: &mut RandomStream) -> bool {
        self(point)
    }
}
