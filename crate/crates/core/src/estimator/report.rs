use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mc")]
    MonteCarlo,
    #[serde(rename = "grid-is")]
    GridIs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::GridIs => "grid-is",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mc" => Ok(Method::MonteCarlo),
            "grid-is" => Ok(Method::GridIs),
            other => Err(format!("unknown method `{other}` (expected `mc` or `grid-is`)")),
        }
    }
}

/// Per-cell detail of one grid-IS repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRepetition {
    pub learning_samples: usize,
    pub learning_criticals: usize,
    /// Critical learning samples per cell.
    pub learning_counts: Vec<usize>,
    /// Learned density `g` per cell.
    pub densities: Vec<f64>,
    /// Importance-phase samples per cell.
    pub allocation: Vec<usize>,
    /// Critical importance-phase samples per cell.
    pub critical_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub dimension: usize,
    pub edges_per_side: usize,
    pub cells: usize,
    pub noise_scale: f64,
    /// With a single cell the importance phase is plain Monte Carlo on `n * (1 - beta)` samples.
    pub degenerate_single_cell: bool,
    pub repetitions: Vec<GridRepetition>,
}

/// One estimate of a single repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct Repetition {
    pub p_hat: f64,
    pub grid: Option<GridRepetition>,
}

/// Result of `R` repetitions of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    /// Mean of the per-repetition estimates.
    pub p_hat: f64,
    pub per_repetition_estimates: Vec<f64>,
    /// Sample variance of the per-repetition estimates; `None` for `R = 1`.
    pub vae: Option<f64>,
    pub notes: Vec<String>,
    pub samples_per_repetition: usize,
    pub samples_total: usize,
    pub learning_fraction_beta: Option<f64>,
    pub grid: Option<GridSummary>,
    pub master_seed: u64,
}

impl EstimateReport {
    pub fn repetitions(&self) -> usize {
        self.per_repetition_estimates.len()
    }

    /// Standard error of the repetition mean, `sqrt(vae / R)`.
    pub fn standard_error(&self) -> Option<f64> {
        self.vae.map(|v| (v / self.repetitions() as f64).sqrt())
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance `1/(R-1) * sum (x - mean)^2`; `None` below two values.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m) * (x - m)).sum();
    Some(ss / (values.len() - 1) as f64)
}
