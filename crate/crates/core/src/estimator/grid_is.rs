use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::allocate::allocate_samples;
use super::report::{GridRepetition, Repetition};
use super::space::BaseDensity;
use super::{Criticality, GridPartition, SampleSpace};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Noise floor used when none is configured: a tenth of a uniform cell's mass.
pub fn default_noise_scale(cells: usize) -> f64 {
    1.0 / (10.0 * cells as f64)
}

/// Splits `n` into `(learning, importance)` sample counts for fraction `beta`.
pub fn split_budget(n: usize, beta: f64) -> Result<(usize, usize)> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid("beta", format!("{beta} is outside [0, 1)")));
    }
    let learn = ((n as f64) * beta).round() as usize;
    let learn = learn.min(n);
    let rest = n - learn;
    if rest == 0 {
        return Err(Error::invalid(
            "n",
            format!("{n} samples leave nothing for the importance phase at beta = {beta}"),
        ));
    }
    Ok((learn, rest))
}

/// A grid partition with a learned per-cell sampling density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedGrid {
    partition: GridPartition,
    densities: Vec<f64>,
    learning_counts: Vec<usize>,
    learning_samples: usize,
    learning_criticals: usize,
    noise_scale: f64,
}

impl LearnedGrid {
    /// Wraps externally supplied densities (they must sum to 1 within 1e-9).
    ///
    /// Zero densities are accepted here and rejected by the importance phase.
    pub fn from_densities(partition: GridPartition, densities: Vec<f64>) -> Result<Self> {
        if densities.len() != partition.cell_count() {
            return Err(Error::invalid(
                "densities",
                format!("expected {} cells, got {}", partition.cell_count(), densities.len()),
            ));
        }
        if densities.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::invalid("densities", "must be finite and >= 0"));
        }
        let total: f64 = densities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("densities", format!("sum to {total}, expected 1")));
        }
        let cells = densities.len();
        Ok(Self {
            partition,
            densities,
            learning_counts: vec![0; cells],
            learning_samples: 0,
            learning_criticals: 0,
            noise_scale: 0.0,
        })
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn learning_counts(&self) -> &[usize] {
        &self.learning_counts
    }

    pub fn learning_criticals(&self) -> usize {
        self.learning_criticals
    }

    pub fn learning_samples(&self) -> usize {
        self.learning_samples
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }
}

/// Learning phase.
///
/// Draws `n_learn` points from the base density, counts critical ones per
/// cell, divides by the total number of critical points, adds
/// `|N(0, noise_scale)|` to every cell and renormalizes. With no critical
/// points at all the density is pure noise, close to uniform.
pub fn learn_grid_density<C: Criticality + ?Sized>(
    partition: &GridPartition,
    predicate: &C,
    n_learn: usize,
    noise_scale: f64,
    stream: &RandomStream,
) -> Result<LearnedGrid> {
    if !(noise_scale.is_finite() && noise_scale > 0.0) {
        return Err(Error::invalid("noise_scale", "must be finite and > 0"));
    }
    let space = partition.space();
    let samples = stream.child(0);
    let hits: Vec<Option<usize>> = (0..n_learn)
        .into_par_iter()
        .map(|i| {
            let mut s = samples.child(i as u64);
            let point = space.sample(&mut s);
            predicate
                .is_critical(&point, &mut s)
                .then(|| partition.cell_of(&point))
        })
        .collect();

    let mut counts = vec![0usize; partition.cell_count()];
    for cell in hits.into_iter().flatten() {
        counts[cell] += 1;
    }
    let criticals: usize = counts.iter().sum();

    let mut noise = stream.child(1);
    let mut densities: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let share = if criticals == 0 {
                0.0
            } else {
                c as f64 / criticals as f64
            };
            let z: f64 = StandardNormal.sample(&mut noise);
            (share + noise_scale * z.abs()).max(f64::MIN_POSITIVE)
        })
        .collect();
    let total: f64 = densities.iter().sum();
    for g in &mut densities {
        *g /= total;
    }

    Ok(LearnedGrid {
        partition: partition.clone(),
        densities,
        learning_counts: counts,
        learning_samples: n_learn,
        learning_criticals: criticals,
        noise_scale,
    })
}

/// How points are placed inside a cell during the importance phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellSampling {
    /// Independent uniform draws.
    #[default]
    Uniform,
    /// Midpoints of a regular `m^d` sub-lattice; the cell allocation must be a
    /// perfect `d`-th power. Used for exhaustive evaluation of discretized spaces.
    Midpoints,
}

fn lattice_side(count: usize, dimension: usize) -> Option<usize> {
    let m = (count as f64).powf(1.0 / dimension as f64).round() as usize;
    (m.checked_pow(dimension as u32) == Some(count)).then_some(m)
}

fn midpoint(bounds: &[(f64, f64)], side: usize, mut index: usize) -> Vec<f64> {
    let mut point = vec![0.0; bounds.len()];
    for (d, slot) in point.iter_mut().enumerate().rev() {
        let k = index % side;
        index /= side;
        let (a, b) = bounds[d];
        *slot = a + (b - a) * ((k as f64 + 0.5) / side as f64);
    }
    point
}

/// Outcome of the importance phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportancePhase {
    pub p_hat: f64,
    pub allocation: Vec<usize>,
    pub critical_counts: Vec<usize>,
}

/// Importance phase over an already learned grid with an explicit budget `r`.
///
/// Each cell contributes `|C|_g * A_g / q_g`, where `A_g` is the cell's base
/// mass and `q_g = count_g / r` the share of the budget it actually received;
/// the sum is divided by `r`. With an exact allocation (`count_g = r * g`)
/// this is the textbook `|C|_g * A_g / g`.
pub fn is_estimate_with<C: Criticality + ?Sized>(
    learned: &LearnedGrid,
    predicate: &C,
    r: usize,
    sampling: CellSampling,
    stream: &RandomStream,
) -> Result<ImportancePhase> {
    if r == 0 {
        return Err(Error::invalid("r", "importance phase needs at least one sample"));
    }
    if let Some((cell, &density)) = learned
        .densities
        .iter()
        .enumerate()
        .find(|(_, g)| **g <= 0.0)
    {
        return Err(Error::ZeroDensityCell { cell, density });
    }
    let partition = &learned.partition;
    let dimension = partition.space().dimension();
    let allocation = allocate_samples(r, &learned.densities);

    let sides: Vec<Option<usize>> = match sampling {
        CellSampling::Uniform => vec![None; allocation.len()],
        CellSampling::Midpoints => allocation
            .iter()
            .enumerate()
            .map(|(cell, &count)| {
                if count == 0 {
                    return Ok(None);
                }
                lattice_side(count, dimension).map(Some).ok_or_else(|| {
                    Error::invalid(
                        "allocation",
                        format!("cell {cell} got {count} samples, not a perfect power of {dimension}"),
                    )
                })
            })
            .collect::<Result<_>>()?,
    };

    let critical_counts: Vec<usize> = allocation
        .par_iter()
        .enumerate()
        .map(|(cell, &count)| {
            let cell_stream = stream.child(cell as u64);
            let bounds = partition.cell_bounds(cell);
            (0..count)
                .into_par_iter()
                .filter(|&j| {
                    let mut s = cell_stream.child(j as u64);
                    let point = match sides[cell] {
                        Some(side) => midpoint(&bounds, side, j),
                        None => bounds
                            .iter()
                            .map(|&(a, b)| a + s.next_unit() * (b - a))
                            .collect(),
                    };
                    predicate.is_critical(&point, &mut s)
                })
                .count()
        })
        .collect();

    let rf = r as f64;
    let p_hat = match partition.space().base_density() {
        BaseDensity::Uniform => {
            // equal cells: A_g = 1 / G_x, factored out of the sum
            let total: f64 = critical_counts
                .iter()
                .zip(&allocation)
                .filter(|(_, &n)| n > 0)
                .map(|(&c, &n)| c as f64 * rf / n as f64)
                .sum();
            total / (rf * allocation.len() as f64)
        }
        BaseDensity::CellMass { masses, .. } => {
            let total: f64 = critical_counts
                .iter()
                .zip(&allocation)
                .zip(masses)
                .filter(|((_, &n), _)| n > 0)
                .map(|((&c, &n), &mass)| c as f64 * rf / n as f64 * mass)
                .sum();
            total / rf
        }
    };
    Ok(ImportancePhase {
        p_hat: check_estimate(p_hat)?,
        allocation,
        critical_counts,
    })
}

/// Re-weighted estimates above 1 mean the learned density and the base
/// density disagree; they are reported, never clamped.
fn check_estimate(p_hat: f64) -> Result<f64> {
    if p_hat > 1.0 + 1e-12 {
        Err(Error::EstimateAboveOne { value: p_hat })
    } else {
        Ok(p_hat)
    }
}

/// Importance phase on `r = n * (1 - beta)` uniformly placed samples.
pub fn is_estimate<C: Criticality + ?Sized>(
    learned: &LearnedGrid,
    predicate: &C,
    n: usize,
    beta: f64,
    stream: &RandomStream,
) -> Result<ImportancePhase> {
    let (_, r) = split_budget(n, beta)?;
    is_estimate_with(learned, predicate, r, CellSampling::Uniform, stream)
}

/// Both phases of grid-based importance sampling for one repetition.
///
/// The learning phase uses `stream.child(0)`, the importance phase
/// `stream.child(1)`; learning samples are not reused.
pub fn grid_is_estimate<C: Criticality + ?Sized>(
    space: &SampleSpace,
    predicate: &C,
    n: usize,
    beta: f64,
    edges_per_side: usize,
    noise_scale: Option<f64>,
    stream: &RandomStream,
) -> Result<Repetition> {
    let (n_learn, r) = split_budget(n, beta)?;
    let partition = GridPartition::new(space.clone(), edges_per_side)?;
    let noise = noise_scale.unwrap_or_else(|| default_noise_scale(partition.cell_count()));
    let learned = learn_grid_density(&partition, predicate, n_learn, noise, &stream.child(0))?;
    let phase = is_estimate_with(&learned, predicate, r, CellSampling::Uniform, &stream.child(1))?;
    Ok(Repetition {
        p_hat: phase.p_hat,
        grid: Some(GridRepetition {
            learning_samples: n_learn,
            learning_criticals: learned.learning_criticals,
            learning_counts: learned.learning_counts,
            densities: learned.densities,
            allocation: phase.allocation,
            critical_counts: phase.critical_counts,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::mc_estimate;

    fn unit_grid(d: usize, e: usize) -> GridPartition {
        GridPartition::new(SampleSpace::unit_cube(d), e).unwrap()
    }

    #[test]
    fn budget_split() {
        assert_eq!(split_budget(30_000, 0.2).unwrap(), (6000, 24_000));
        assert_eq!(split_budget(10, 0.0).unwrap(), (0, 10));
        assert!(split_budget(10, 1.0).is_err());
        assert!(split_budget(10, -0.1).is_err());
        assert!(split_budget(1, 0.6).is_err());
    }

    #[test]
    fn single_cluster_dominates_as_noise_vanishes() {
        let grid = unit_grid(2, 10);
        let in_cell = |p: &[f64]| p[0] > 0.3 && p[0] <= 0.4 && p[1] > 0.5 && p[1] <= 0.6;
        let learned =
            learn_grid_density(&grid, &in_cell, 5000, 1e-12, &RandomStream::root(3)).unwrap();
        let target = grid.cell_of(&[0.35, 0.55]);
        assert!(learned.learning_criticals() > 0);
        assert!(learned.densities()[target] > 1.0 - 1e-9);
        for (g, &d) in learned.densities().iter().enumerate() {
            assert!(d > 0.0);
            if g != target {
                assert!(d < 1e-10);
            }
        }
    }

    #[test]
    fn no_criticals_gives_noise_only_density() {
        let grid = unit_grid(2, 10);
        let learned =
            learn_grid_density(&grid, &|_: &[f64]| false, 2000, 0.001, &RandomStream::root(4))
                .unwrap();
        assert_eq!(learned.learning_criticals(), 0);
        let sum: f64 = learned.densities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(learned.densities().iter().all(|&g| g > 0.0));
        // half-normal noise: every cell within a generous factor of uniform on average
        let max = learned.densities().iter().cloned().fold(0.0, f64::max);
        assert!(max < 0.06, "{max}");
    }

    #[test]
    fn noise_scale_must_be_positive() {
        let grid = unit_grid(1, 2);
        assert!(learn_grid_density(&grid, &|_: &[f64]| true, 10, 0.0, &RandomStream::root(1)).is_err());
    }

    #[test]
    fn whole_space_event_is_exactly_one() {
        let grid = unit_grid(2, 10);
        let learned = LearnedGrid::from_densities(grid, vec![0.01; 100]).unwrap();
        let phase =
            is_estimate(&learned, &|_: &[f64]| true, 30_000, 0.2, &RandomStream::root(5)).unwrap();
        assert_eq!(phase.p_hat, 1.0);
    }

    #[test]
    fn two_cell_line_with_exact_allocation() {
        let grid = unit_grid(1, 2);
        let learned = LearnedGrid::from_densities(grid, vec![0.8, 0.2]).unwrap();
        let critical = |p: &[f64]| p[0] < 0.25;
        let phase =
            is_estimate_with(&learned, &critical, 10, CellSampling::Midpoints, &RandomStream::root(1))
                .unwrap();
        assert_eq!(phase.allocation, vec![8, 2]);
        assert_eq!(phase.critical_counts, vec![4, 0]);
        assert_eq!(phase.p_hat, 0.25);
    }

    #[test]
    fn zero_density_cell_is_a_diagnostic() {
        let grid = unit_grid(1, 2);
        let learned = LearnedGrid::from_densities(grid, vec![1.0, 0.0]).unwrap();
        let err = is_estimate(&learned, &|_: &[f64]| true, 100, 0.2, &RandomStream::root(1))
            .unwrap_err();
        assert_eq!(err, Error::ZeroDensityCell { cell: 1, density: 0.0 });
        assert!(err.is_diagnostic());
    }

    #[test]
    fn mass_table_weights_by_cell_mass() {
        let space = SampleSpace::with_density(
            vec![(0.0, 1.0)],
            BaseDensity::CellMass {
                edges_per_side: 2,
                masses: vec![0.75, 0.25],
            },
        )
        .unwrap();
        let grid = GridPartition::new(space, 2).unwrap();
        let learned = LearnedGrid::from_densities(grid, vec![0.01, 0.99]).unwrap();
        let phase =
            is_estimate(&learned, &|_: &[f64]| true, 1000, 0.0, &RandomStream::root(2)).unwrap();
        assert_eq!(phase.allocation, vec![10, 990]);
        assert_eq!(phase.p_hat, 1.0);
        let left = is_estimate(&learned, &|p: &[f64]| p[0] <= 0.5, 1000, 0.0, &RandomStream::root(2))
            .unwrap();
        assert_eq!(left.p_hat, 0.75);
    }

    #[test]
    fn estimates_above_one_are_rejected() {
        assert_eq!(check_estimate(1.0), Ok(1.0));
        assert_eq!(check_estimate(1.0 + 1e-13), Ok(1.0 + 1e-13));
        assert_eq!(check_estimate(1.5), Err(Error::EstimateAboveOne { value: 1.5 }));
    }

    #[test]
    fn midpoints_require_perfect_powers() {
        let grid = unit_grid(2, 1);
        let learned = LearnedGrid::from_densities(grid, vec![1.0]).unwrap();
        assert!(is_estimate_with(&learned, &|_: &[f64]| true, 10, CellSampling::Midpoints, &RandomStream::root(1)).is_err());
        let phase = is_estimate_with(&learned, &|p: &[f64]| p[0] < 0.5, 16, CellSampling::Midpoints, &RandomStream::root(1)).unwrap();
        assert_eq!(phase.p_hat, 0.5);
    }

    #[test]
    fn single_cell_is_plain_monte_carlo() {
        let space = SampleSpace::new(vec![(-1.0, 2.0), (0.0, 5.0)]).unwrap();
        let event = |p: &[f64]| p[0] * p[0] + (p[1] - 2.0).powi(2) < 1.0;
        let stream = RandomStream::root(77);
        let is = grid_is_estimate(&space, &event, 5000, 0.2, 1, None, &stream).unwrap();
        let mc = mc_estimate(&space, &event, 4000, &stream.child(1).child(0)).unwrap();
        assert_eq!(is.p_hat, mc.p_hat);
        assert!(is.p_hat > 0.0);
    }
}
