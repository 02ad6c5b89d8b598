use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{quantile, Histogram};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, ScenarioConfig, ScenarioKind, TrialParams};
use crate::stream::RandomStream;
use crate::uncertainty::UncertaintySpec;

/// Values along one sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Axis {
    Values { values: Vec<f64> },
    Linspace { min: f64, max: f64, count: usize },
    /// `count` draws from the axis' uncertainty model.
    Draw { count: usize },
}

impl Axis {
    fn resolve(&self, name: &str, mut draw: impl FnMut(usize) -> f64) -> Result<Vec<f64>> {
        let values = match self {
            Axis::Values { values } => values.clone(),
            Axis::Linspace { min, max, count } => match count {
                0 => Vec::new(),
                1 => vec![*min],
                n => (0..*n)
                    .map(|i| min + (max - min) * (i as f64 / (n - 1) as f64))
                    .collect(),
            },
            Axis::Draw { count } => (0..*count).map(&mut draw).collect(),
        };
        if values.is_empty() {
            return Err(Error::invalid(format!("sweep.{name}"), "axis is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sweep.{name}"), "values must be finite"));
        }
        Ok(values)
    }
}

/// Which uncertainty parameters the sweep holds fixed per constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", deny_unknown_fields)]
pub enum SweepGrid {
    /// `(N, delta_d0, c)`; `u_s` varies with the human's current speed.
    #[serde(rename = "3d")]
    ThreeD {
        delay_steps: Axis,
        delta_d0: Axis,
        c: Axis,
    },
    /// `(N, u_s)` with `u_s` applied as a constant distance offset.
    #[serde(rename = "2d")]
    TwoD {
        delay_steps: Axis,
        spatial_deviation: Axis,
    },
}

impl SweepGrid {
    /// 10 delay draws x 10 `c` draws x 25 `delta_d0` draws = 2500 constellations.
    pub fn paper_shaped() -> Self {
        SweepGrid::ThreeD {
            delay_steps: Axis::Draw { count: 10 },
            c: Axis::Draw { count: 10 },
            delta_d0: Axis::Draw { count: 25 },
        }
    }

    pub fn mode(&self) -> SweepMode {
        match self {
            SweepGrid::ThreeD { .. } => SweepMode::ThreeD,
            SweepGrid::TwoD { .. } => SweepMode::TwoD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d")]
    TwoD,
}

const AXIS_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

/// Stream of trial `t` in sweeps and fixed-constellation simulations.
pub fn trial_stream(master_seed: u64, trial: usize) -> RandomStream {
    RandomStream::derive(master_seed, &[TRIAL_STREAM, trial as u64])
}

/// Statistics of one uncertainty constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub index: usize,
    pub delay_steps: u32,
    /// `N * T` in seconds.
    pub u_t: f64,
    pub delta_d0: f64,
    pub c: f64,
    /// Distance error at the scenario's nominal human speed.
    pub u_s: f64,
    pub trials: usize,
    pub collisions: usize,
    /// Trials whose true distance fell below `d_threshold`.
    pub below_threshold: usize,
    /// `None` when no trial ran.
    pub p_hat: Option<f64>,
    pub p_below_threshold: Option<f64>,
    /// `E[severity]` including zeros for non-collisions.
    pub mean_severity: f64,
    pub mean_severity_given_collision: Option<f64>,
    /// 50/90/99 % quantiles over all trials.
    pub severity_quantiles: [f64; 3],
    /// 50/90/99 % quantiles over colliding trials.
    pub severity_quantiles_given_collision: Option<[f64; 3]>,
}

/// Probability and severity per uncertainty constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSurface {
    pub scenario: ScenarioKind,
    pub mode: SweepMode,
    pub timestep: f64,
    pub nominal_human_speed: f64,
    pub trials_per_constellation: usize,
    pub master_seed: u64,
    pub constellations: Vec<Constellation>,
    /// Severity of every colliding trial across the surface.
    pub severity_histogram: Histogram,
    pub non_colliding_trials: usize,
}

/// `Pr`, `E[severity]`, and the scalar `Pr * E[severity | collision]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskValue {
    pub probability: f64,
    pub expected_severity: f64,
    pub scalar_risk: f64,
}

/// Risk components of a present constellation; `None` when it has no trials.
pub fn risk_value(cell: &Constellation) -> Option<RiskValue> {
    let probability = cell.p_hat?;
    let conditional = cell.mean_severity_given_collision.unwrap_or(0.0);
    Some(RiskValue {
        probability,
        expected_severity: cell.mean_severity,
        scalar_risk: probability * conditional,
    })
}

fn quantiles(sorted: &[f64]) -> Option<[f64; 3]> {
    Some([
        quantile(sorted, 0.5)?,
        quantile(sorted, 0.9)?,
        quantile(sorted, 0.99)?,
    ])
}

struct TrialSummary {
    collided: bool,
    below_threshold: bool,
    severity: f64,
}

fn summarize(
    index: usize,
    params: TrialParams,
    config: &ScenarioConfig,
    results: &[TrialSummary],
) -> Constellation {
    let trials = results.len();
    let collisions = results.iter().filter(|r| r.collided).count();
    let below = results.iter().filter(|r| r.below_threshold).count();
    let mut all: Vec<f64> = results.iter().map(|r| r.severity).collect();
    all.sort_by(f64::total_cmp);
    let mut hit: Vec<f64> = results.iter().filter(|r| r.collided).map(|r| r.severity).collect();
    hit.sort_by(f64::total_cmp);
    let ratio = |k: usize| (trials > 0).then(|| k as f64 / trials as f64);
    Constellation {
        index,
        delay_steps: params.delay_steps,
        u_t: f64::from(params.delay_steps) * config.timestep(),
        delta_d0: params.spatial.delta_d0,
        c: params.spatial.c,
        u_s: params.spatial.deviation_at(config.human_speed()),
        trials,
        collisions,
        below_threshold: below,
        p_hat: ratio(collisions),
        p_below_threshold: ratio(below),
        mean_severity: if trials > 0 {
            all.iter().sum::<f64>() / trials as f64
        } else {
            0.0
        },
        mean_severity_given_collision: (!hit.is_empty())
            .then(|| hit.iter().sum::<f64>() / hit.len() as f64),
        severity_quantiles: quantiles(&all).unwrap_or([0.0; 3]),
        severity_quantiles_given_collision: quantiles(&hit),
    }
}

/// Runs `trials_per_constellation` trials on every grid constellation.
///
/// Trial `t` of every constellation uses [`trial_stream`] (common random
/// numbers), so differences between constellations come from the uncertainty
/// values alone. `Draw` axes use
/// the streams `[0, axis, i]`.
pub fn sweep(
    config: &ScenarioConfig,
    spec: &UncertaintySpec,
    grid: &SweepGrid,
    trials_per_constellation: usize,
    master_seed: u64,
) -> Result<RiskSurface> {
    if trials_per_constellation == 0 {
        return Err(Error::invalid("trials_per_constellation", "must be >= 1"));
    }
    let axis_stream = |axis: u64, i: usize| RandomStream::derive(master_seed, &[AXIS_STREAM, axis, i as u64]);
    let delay_axis = match grid {
        SweepGrid::ThreeD { delay_steps, .. } | SweepGrid::TwoD { delay_steps, .. } => delay_steps,
    };
    let delays: Vec<u32> = delay_axis
        .resolve("delay_steps", |i| f64::from(spec.temporal.sample_steps(&mut axis_stream(0, i))))?
        .into_iter()
        .map(|v| {
            if v < 0.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
                Err(Error::invalid(
                    "sweep.delay_steps",
                    format!("{v} is not a non-negative whole number of steps"),
                ))
            } else {
                Ok(v as u32)
            }
        })
        .collect::<Result<_>>()?;

    let spatial: Vec<(f64, f64)> = match grid {
        SweepGrid::ThreeD { delta_d0, c, .. } => {
            let cs = c.resolve("c", |i| spec.spatial.sample_c(&mut axis_stream(1, i)))?;
            let d0s = delta_d0.resolve("delta_d0", |i| spec.spatial.sample_delta_d0(&mut axis_stream(2, i)))?;
            cs.iter()
                .flat_map(|&c| d0s.iter().map(move |&d0| (d0, c)))
                .collect()
        }
        SweepGrid::TwoD {
            spatial_deviation, ..
        } => spatial_deviation
            .resolve("spatial_deviation", |i| {
                let p = spec.spatial.sample_params(&mut axis_stream(3, i));
                p.deviation_at(config.human_speed())
            })?
            .into_iter()
            .map(|u| (u, 0.0))
            .collect(),
    };

    let params: Vec<TrialParams> = delays
        .iter()
        .flat_map(|&n| spatial.iter().map(move |&(d0, c)| TrialParams::new(n, d0, c)))
        .collect();

    let scenario = Scenario::new(*config);
    let per_cell: Vec<(Constellation, Vec<f64>)> = params
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let results: Vec<TrialSummary> = (0..trials_per_constellation)
                .map(|t| {
                    let mut stream = trial_stream(master_seed, t);
                    let out = scenario.run_trial(p, &mut stream);
                    TrialSummary {
                        collided: out.collided,
                        below_threshold: out.min_true_distance < config.d_threshold(),
                        severity: out.severity,
                    }
                })
                .collect();
            let severities = results.iter().filter(|r| r.collided).map(|r| r.severity).collect();
            (summarize(index, *p, config, &results), severities)
        })
        .collect();

    let mut constellations = Vec::with_capacity(per_cell.len());
    let mut severities = Vec::new();
    let mut non_colliding = 0;
    for (cell, sev) in per_cell {
        non_colliding += cell.trials - cell.collisions;
        severities.extend(sev);
        constellations.push(cell);
    }

    Ok(RiskSurface {
        scenario: config.kind(),
        mode: grid.mode(),
        timestep: config.timestep(),
        nominal_human_speed: config.human_speed(),
        trials_per_constellation,
        master_seed,
        constellations,
        severity_histogram: Histogram::from_values(&severities, 20),
        non_colliding_trials: non_colliding,
    })
}

/// Probability matrix with delay steps as rows and spatial-deviation bins as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTable {
    pub delay_steps: Vec<u32>,
    /// Column `j` covers `[edges[j], edges[j + 1])` (last column closed).
    /// For 2-D sweeps every distinct `u_s` is its own zero-width column.
    pub column_edges: Vec<f64>,
    pub column_labels: Vec<f64>,
    /// Pooled probability; `None` where no constellation falls in the cell.
    pub cells: Vec<Vec<Option<f64>>>,
}

type ColumnOf = Box<dyn Fn(f64) -> usize>;

impl RiskSurface {
    pub fn len(&self) -> usize {
        self.constellations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constellations.is_empty()
    }

    /// Table-shaped view of the surface. `bins` applies to 3-D sweeps only.
    pub fn table(&self, bins: usize) -> SurfaceTable {
        let mut delays: Vec<u32> = self.constellations.iter().map(|c| c.delay_steps).collect();
        delays.sort_unstable();
        delays.dedup();

        let (edges, labels, column_of): (Vec<f64>, Vec<f64>, ColumnOf) = match self.mode {
            SweepMode::TwoD => {
                let mut values: Vec<f64> = self.constellations.iter().map(|c| c.u_s).collect();
                values.sort_by(f64::total_cmp);
                values.dedup();
                let lookup = values.clone();
                (
                    values.clone(),
                    values,
                    Box::new(move |u| lookup.partition_point(|v| *v < u)),
                )
            }
            SweepMode::ThreeD => {
                let bins = bins.max(1);
                let lo = self.constellations.iter().map(|c| c.u_s).fold(f64::INFINITY, f64::min);
                let hi = self.constellations.iter().map(|c| c.u_s).fold(f64::NEG_INFINITY, f64::max);
                let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
                let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
                let labels = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                (
                    edges,
                    labels,
                    Box::new(move |u| (((u - lo) / width).floor().max(0.0) as usize).min(bins - 1)),
                )
            }
        };

        let columns = labels.len();
        let mut tallies = vec![vec![(0usize, 0usize); columns]; delays.len()];
        for c in &self.constellations {
            let row = delays.binary_search(&c.delay_steps).expect("row exists");
            let cell = &mut tallies[row][column_of(c.u_s)];
            cell.0 += c.collisions;
            cell.1 += c.trials;
        }
        let cells = tallies
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(hits, trials)| (trials > 0).then(|| hits as f64 / trials as f64))
                    .collect()
            })
            .collect();
        SurfaceTable {
            delay_steps: delays,
            column_edges: edges,
            column_labels: labels,
            cells,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Geometry, ScenarioConfig};

    fn approach_no_jitter() -> ScenarioConfig {
        ScenarioConfig::builder(ScenarioKind::Approach)
            .geometry(Geometry::Approach {
                initial_separation: 3.0,
                start_jitter: 0.0,
            })
            .build()
            .unwrap()
    }

    #[test]
    fn risk_value_examples() {
        let mut cell = summarize(0, TrialParams::new(0, 0.0, 0.0), &approach_no_jitter(), &[]);
        assert_eq!(risk_value(&cell), None);
        cell.p_hat = Some(0.0);
        assert_eq!(risk_value(&cell).unwrap().scalar_risk, 0.0);
        cell.p_hat = Some(1.0);
        cell.mean_severity_given_collision = Some(1.0);
        assert_eq!(risk_value(&cell).unwrap().scalar_risk, 1.0);
        cell.p_hat = Some(0.5);
        cell.mean_severity_given_collision = Some(0.8);
        assert_eq!(risk_value(&cell).unwrap().scalar_risk, 0.4);
    }

    #[test]
    fn paper_shaped_grid_has_2500_cells() {
        let cfg = ScenarioConfig::builder(ScenarioKind::Approach).horizon_steps(60).build().unwrap();
        let s = sweep(&cfg, &UncertaintySpec::default(), &SweepGrid::paper_shaped(), 1, 5).unwrap();
        assert_eq!(s.len(), 2500);
        assert!(s.constellations.iter().all(|c| (0.0..=1.0).contains(&c.p_hat.unwrap())));
    }

    #[test]
    fn origin_on_benign_geometry_is_safe() {
        let grid = SweepGrid::TwoD {
            delay_steps: Axis::Values { values: vec![0.0] },
            spatial_deviation: Axis::Values { values: vec![0.0] },
        };
        let s = sweep(&approach_no_jitter(), &UncertaintySpec::default(), &grid, 10, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.constellations[0].p_hat, Some(0.0));
        assert_eq!(s.non_colliding_trials, 10);
    }

    #[test]
    fn delay_axis_must_be_whole_steps() {
        let grid = SweepGrid::TwoD {
            delay_steps: Axis::Values { values: vec![1.5] },
            spatial_deviation: Axis::Values { values: vec![0.0] },
        };
        assert!(sweep(&approach_no_jitter(), &UncertaintySpec::default(), &grid, 1, 1).is_err());
        let empty = SweepGrid::TwoD {
            delay_steps: Axis::Values { values: vec![] },
            spatial_deviation: Axis::Values { values: vec![0.0] },
        };
        assert!(sweep(&approach_no_jitter(), &UncertaintySpec::default(), &empty, 1, 1).is_err());
        assert!(sweep(&approach_no_jitter(), &UncertaintySpec::default(), &SweepGrid::paper_shaped(), 0, 1).is_err());
    }

    #[test]
    fn table_pools_and_marks_absent() {
        let cfg = ScenarioConfig::preset(ScenarioKind::Approach);
        let grid = SweepGrid::TwoD {
            delay_steps: Axis::Linspace { min: 0.0, max: 9.0, count: 10 },
            spatial_deviation: Axis::Values { values: vec![-0.1, 0.0, 0.1] },
        };
        let s = sweep(&cfg, &UncertaintySpec::default(), &grid, 8, 3).unwrap();
        let t = s.table(10);
        assert_eq!(t.delay_steps, (0..10).collect::<Vec<_>>());
        assert_eq!(t.column_labels, vec![-0.1, 0.0, 0.1]);
        assert!(t.cells.iter().flatten().all(|c| c.is_some()));

        let grid3 = SweepGrid::ThreeD {
            delay_steps: Axis::Values { values: vec![0.0, 5.0] },
            delta_d0: Axis::Values { values: vec![-0.1, 0.1] },
            c: Axis::Values { values: vec![0.0] },
        };
        let s = sweep(&cfg, &UncertaintySpec::default(), &grid3, 4, 3).unwrap();
        let t = s.table(4);
        assert_eq!(t.cells[0].len(), 4);
        assert!(t.cells[0][0].is_some() && t.cells[0][3].is_some());
        assert!(t.cells[0][1].is_none() && t.cells[0][2].is_none());
    }
}
