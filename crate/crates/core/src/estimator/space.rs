use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Nominal density of the sample space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseDensity {
    Uniform,
    /// Probability mass per cell of an `edges_per_side`-grid; uniform inside a cell.
    CellMass { edges_per_side: usize, masses: Vec<f64> },
}

/// A finite, axis-aligned box with a base density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpace {
    bounds: Vec<(f64, f64)>,
    base_density: BaseDensity,
}

impl SampleSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_density(bounds, BaseDensity::Uniform)
    }

    pub fn unit_cube(dimension: usize) -> Self {
        Self::new(vec![(0.0, 1.0); dimension]).expect("unit cube is valid")
    }

    pub fn with_density(bounds: Vec<(f64, f64)>, base_density: BaseDensity) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("bounds", "sample space needs at least one dimension"));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::invalid(
                    format!("bounds[{d}]"),
                    format!("[{lo}, {hi}] is not a finite, non-degenerate interval"),
                ));
            }
        }
        if let BaseDensity::CellMass {
            edges_per_side,
            masses,
        } = &base_density
        {
            let cells = cell_count(*edges_per_side, bounds.len())
                .ok_or_else(|| Error::invalid("base_density.edges_per_side", "grid too large"))?;
            if *edges_per_side == 0 || masses.len() != cells {
                return Err(Error::invalid(
                    "base_density.masses",
                    format!("expected {cells} cell masses, got {}", masses.len()),
                ));
            }
            if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(Error::invalid("base_density.masses", "masses must be finite and >= 0"));
            }
            let total: f64 = masses.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "base_density.masses",
                    format!("masses sum to {total}, expected 1"),
                ));
            }
        }
        Ok(Self {
            bounds,
            base_density,
        })
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn base_density(&self) -> &BaseDensity {
        &self.base_density
    }

    /// Hypervolume of the space.
    pub fn area(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Draws one point from the base density.
    pub fn sample(&self, stream: &mut RandomStream) -> Vec<f64> {
        match &self.base_density {
            BaseDensity::Uniform => self
                .bounds
                .iter()
                .map(|&(lo, hi)| lo + stream.next_unit() * (hi - lo))
                .collect(),
            BaseDensity::CellMass {
                edges_per_side,
                masses,
            } => {
                let u = stream.next_unit();
                let mut acc = 0.0;
                let mut cell = masses.len() - 1;
                for (i, m) in masses.iter().enumerate() {
                    acc += m;
                    if u < acc && *m > 0.0 {
                        cell = i;
                        break;
                    }
                }
                let grid = GridPartition::new(self.clone(), *edges_per_side)
                    .expect("mass table grid was validated");
                grid.sample_in_cell(cell, stream)
            }
        }
    }
}

pub(crate) fn cell_count(edges_per_side: usize, dimension: usize) -> Option<usize> {
    edges_per_side.checked_pow(u32::try_from(dimension).ok()?)
}

/// `e^d` axis-aligned cells tiling a [`SampleSpace`].
///
/// Cells are indexed row-major with the first dimension most significant. A
/// point on a shared face belongs to the lower-index cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    space: SampleSpace,
    edges_per_side: usize,
}

impl GridPartition {
    pub fn new(space: SampleSpace, edges_per_side: usize) -> Result<Self> {
        if edges_per_side == 0 {
            return Err(Error::invalid("edges_per_side", "must be >= 1"));
        }
        cell_count(edges_per_side, space.dimension())
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::invalid("edges_per_side", "grid has too many cells"))?;
        if let BaseDensity::CellMass {
            edges_per_side: mass_edges,
            ..
        } = space.base_density
        {
            if mass_edges != edges_per_side {
                return Err(Error::invalid(
                    "edges_per_side",
                    format!("must match the base-density mass grid ({mass_edges})"),
                ));
            }
        }
        Ok(Self {
            space,
            edges_per_side,
        })
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn edges_per_side(&self) -> usize {
        self.edges_per_side
    }

    pub fn cell_count(&self) -> usize {
        cell_count(self.edges_per_side, self.space.dimension()).expect("checked in new")
    }

    fn axis_index(&self, d: usize, x: f64) -> usize {
        let (lo, hi) = self.space.bounds[d];
        let e = self.edges_per_side;
        let scaled = (x - lo) / (hi - lo) * e as f64;
        let idx = scaled.ceil() - 1.0;
        if idx <= 0.0 {
            0
        } else {
            (idx as usize).min(e - 1)
        }
    }

    /// Cell containing `point`. Points outside the space are clamped to the border cells.
    pub fn cell_of(&self, point: &[f64]) -> usize {
        point
            .iter()
            .enumerate()
            .fold(0, |acc, (d, &x)| acc * self.edges_per_side + self.axis_index(d, x))
    }

    fn axis_indices(&self, mut cell: usize) -> Vec<usize> {
        let d = self.space.dimension();
        let mut out = vec![0; d];
        for slot in out.iter_mut().rev() {
            *slot = cell % self.edges_per_side;
            cell /= self.edges_per_side;
        }
        out
    }

    /// Bounds of cell `cell`.
    pub fn cell_bounds(&self, cell: usize) -> Vec<(f64, f64)> {
        let e = self.edges_per_side as f64;
        self.axis_indices(cell)
            .into_iter()
            .zip(&self.space.bounds)
            .map(|(i, &(lo, hi))| {
                let a = lo + (hi - lo) * (i as f64 / e);
                let b = if i + 1 == self.edges_per_side {
                    hi
                } else {
                    lo + (hi - lo) * ((i + 1) as f64 / e)
                };
                (a, b)
            })
            .collect()
    }

    /// Geometric hypervolume `A_g` of a cell.
    pub fn cell_area(&self, cell: usize) -> f64 {
        self.cell_bounds(cell).iter().map(|(a, b)| b - a).product()
    }

    /// Base-density mass of a cell: `A_g / area(space)` for a uniform base,
    /// the tabulated mass otherwise.
    pub fn cell_mass(&self, cell: usize) -> f64 {
        match &self.space.base_density {
            BaseDensity::Uniform => self.cell_area(cell) / self.space.area(),
            BaseDensity::CellMass { masses, .. } => masses[cell],
        }
    }

    /// Uniform draw inside a cell; one unit draw per dimension.
    pub fn sample_in_cell(&self, cell: usize, stream: &mut RandomStream) -> Vec<f64> {
        self.cell_bounds(cell)
            .into_iter()
            .map(|(a, b)| a + stream.next_unit() * (b - a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_bounds() {
        assert!(SampleSpace::new(vec![]).is_err());
        assert!(SampleSpace::new(vec![(0.0, 0.0)]).is_err());
        assert!(SampleSpace::new(vec![(0.0, f64::INFINITY)]).is_err());
        assert!(SampleSpace::new(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn cells_tile_the_space() {
        let space = SampleSpace::new(vec![(-3.0, 3.0), (0.0, 0.7), (2.0, 2.5)]).unwrap();
        let grid = GridPartition::new(space.clone(), 7).unwrap();
        assert_eq!(grid.cell_count(), 343);
        let total: f64 = (0..grid.cell_count()).map(|g| grid.cell_area(g)).sum();
        assert!((total - space.area()).abs() <= 1e-12 * space.area());
        let mass: f64 = (0..grid.cell_count()).map(|g| grid.cell_mass(g)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_go_to_lower_cell() {
        let grid = GridPartition::new(SampleSpace::unit_cube(1), 4).unwrap();
        assert_eq!(grid.cell_of(&[0.0]), 0);
        assert_eq!(grid.cell_of(&[0.25]), 0);
        assert_eq!(grid.cell_of(&[0.2500001]), 1);
        assert_eq!(grid.cell_of(&[0.5]), 1);
        assert_eq!(grid.cell_of(&[1.0]), 3);
        assert_eq!(grid.cell_of(&[7.0]), 3);
        assert_eq!(grid.cell_of(&[-1.0]), 0);
    }

    #[test]
    fn row_major_indexing_round_trips() {
        let grid = GridPartition::new(SampleSpace::unit_cube(2), 10).unwrap();
        assert_eq!(grid.cell_of(&[0.05, 0.95]), 9);
        assert_eq!(grid.cell_of(&[0.95, 0.05]), 90);
        let mut s = RandomStream::root(4);
        for cell in 0..grid.cell_count() {
            let p = grid.sample_in_cell(cell, &mut s);
            assert_eq!(grid.cell_of(&p), cell);
        }
    }

    #[test]
    fn mass_table_must_match() {
        let bad = BaseDensity::CellMass {
            edges_per_side: 2,
            masses: vec![0.5, 0.5],
        };
        assert!(SampleSpace::with_density(vec![(0.0, 1.0); 2], bad).is_err());
        let ok = BaseDensity::CellMass {
            edges_per_side: 2,
            masses: vec![0.1, 0.2, 0.3, 0.4],
        };
        let space = SampleSpace::with_density(vec![(0.0, 1.0); 2], ok).unwrap();
        assert!(GridPartition::new(space.clone(), 3).is_err());
        let grid = GridPartition::new(space, 2).unwrap();
        assert_eq!(grid.cell_mass(3), 0.4);
    }

    #[test]
    fn mass_table_sampling_follows_masses() {
        let space = SampleSpace::with_density(
            vec![(0.0, 1.0)],
            BaseDensity::CellMass {
                edges_per_side: 4,
                masses: vec![0.0, 0.5, 0.25, 0.25],
            },
        )
        .unwrap();
        let grid = GridPartition::new(space.clone(), 4).unwrap();
        let mut hits = [0usize; 4];
        let mut s = RandomStream::root(12);
        for _ in 0..40_000 {
            hits[grid.cell_of(&space.sample(&mut s))] += 1;
        }
        assert_eq!(hits[0], 0);
        assert!((hits[1] as f64 / 40_000.0 - 0.5).abs() < 0.015);
        assert!((hits[2] as f64 / 40_000.0 - 0.25).abs() < 0.015);
    }
}
