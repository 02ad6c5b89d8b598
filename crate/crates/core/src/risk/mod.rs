//! Uncertainty sweeps and risk measures.
//!
//! A sweep evaluates the scenario on a grid of uncertainty constellations and
//! stores, per constellation, the collision probability and severity
//! statistics. The resulting [`RiskSurface`] is the empirical map
//! `(u_t, u_s) -> Pr(collision)`; [`evaluate_safety_limit`] turns it into
//! tolerated uncertainty thresholds.

mod safety;
mod stats;
mod sweep;

pub use safety::{evaluate_safety_limit, SafetyEvaluation, SeverityStatistic, ToleratedBox, Verdict};
pub use stats::{quantile, Histogram};
pub use sweep::{
    risk_value, sweep, Axis, Constellation, RiskSurface, RiskValue, SurfaceTable, SweepGrid,
    SweepMode, trial_stream,
};
