use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid_is::{default_noise_scale, grid_is_estimate, split_budget};
use super::mc::mc_estimate;
use super::report::{mean, sample_variance, EstimateReport, GridSummary, Method, Repetition};
use super::space::cell_count;
use super::{Criticality, SampleSpace};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Budget and grid settings shared by both estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    /// Samples per repetition.
    pub n: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_edges")]
    pub edges_per_side: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Defaults to `1 / (10 * e^d)`.
    #[serde(default)]
    pub noise_scale: Option<f64>,
}

fn default_beta() -> f64 {
    0.2
}

fn default_edges() -> usize {
    10
}

fn default_repetitions() -> usize {
    10
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            n: 3000,
            beta: default_beta(),
            edges_per_side: default_edges(),
            repetitions: default_repetitions(),
            noise_scale: None,
        }
    }
}

impl EstimatorSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions", "must be >= 1"));
        }
        if self.edges_per_side == 0 {
            return Err(Error::invalid("edges_per_side", "must be >= 1"));
        }
        split_budget(self.n, self.beta)?;
        if let Some(s) = self.noise_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("noise_scale", "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

fn method_tag(method: Method) -> u64 {
    match method {
        Method::MonteCarlo => 0,
        Method::GridIs => 1,
    }
}

/// Runs `settings.repetitions` independent repetitions of `method`.
///
/// Repetition `r` uses the stream `[method, r]` under `master_seed`, so MC and
/// grid-IS repetitions never share draws. Grid-IS re-learns its density in
/// every repetition.
pub fn repeated_estimate<C: Criticality + ?Sized>(
    method: Method,
    space: &SampleSpace,
    predicate: &C,
    settings: &EstimatorSettings,
    master_seed: u64,
) -> Result<EstimateReport> {
    settings.validate()?;
    let tag = method_tag(method);
    let reps: Vec<Repetition> = (0..settings.repetitions)
        .into_par_iter()
        .map(|r| {
            let stream = RandomStream::derive(master_seed, &[tag, r as u64]);
            match method {
                Method::MonteCarlo => mc_estimate(space, predicate, settings.n, &stream),
                Method::GridIs => grid_is_estimate(
                    space,
                    predicate,
                    settings.n,
                    settings.beta,
                    settings.edges_per_side,
                    settings.noise_scale,
                    &stream,
                ),
            }
        })
        .collect::<Result<_>>()?;

    let estimates: Vec<f64> = reps.iter().map(|r| r.p_hat).collect();
    let vae = sample_variance(&estimates);
    let mut notes = Vec::new();
    if vae.is_none() {
        notes.push("VAE omitted: variance needs at least two repetitions".to_string());
    }

    let (beta, grid) = match method {
        Method::MonteCarlo => (None, None),
        Method::GridIs => {
            let cells = cell_count(settings.edges_per_side, space.dimension())
                .ok_or_else(|| Error::invalid("edges_per_side", "grid too large"))?;
            let degenerate = cells == 1;
            if degenerate {
                notes.push(
                    "single grid cell: grid-is degenerates to Monte Carlo on n * (1 - beta) samples"
                        .to_string(),
                );
            }
            let grid = GridSummary {
                dimension: space.dimension(),
                edges_per_side: settings.edges_per_side,
                cells,
                noise_scale: settings.noise_scale.unwrap_or_else(|| default_noise_scale(cells)),
                degenerate_single_cell: degenerate,
                repetitions: reps.into_iter().filter_map(|r| r.grid).collect(),
            };
            (Some(settings.beta), Some(grid))
        }
    };

    Ok(EstimateReport {
        method,
        p_hat: mean(&estimates),
        per_repetition_estimates: estimates,
        vae,
        notes,
        samples_per_repetition: settings.n,
        samples_total: settings.n * settings.repetitions,
        learning_fraction_beta: beta,
        grid,
        master_seed,
    })
}

/// Paired MC / grid-IS runs with equal budgets, for comparing their VAE.
pub fn vae_compare<C: Criticality + ?Sized>(
    space: &SampleSpace,
    predicate: &C,
    settings: &EstimatorSettings,
    master_seed: u64,
) -> Result<(EstimateReport, EstimateReport)> {
    if settings.repetitions < 2 {
        return Err(Error::invalid(
            "repetitions",
            "comparing VAE needs at least 2 repetitions",
        ));
    }
    let mc = repeated_estimate(Method::MonteCarlo, space, predicate, settings, master_seed)?;
    let is = repeated_estimate(Method::GridIs, space, predicate, settings, master_seed)?;
    Ok((mc, is))
}
