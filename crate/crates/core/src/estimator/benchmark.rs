use serde::{Deserialize, Serialize};

use super::{Criticality, SampleSpace};
use crate::stream::RandomStream;

/// Critical iff the point lies in the half-open box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

impl Criticality for BoxRegion {
    fn is_critical(&self, point: &[f64], _stream: &mut RandomStream) -> bool {
        point
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x < hi)
    }
}

/// Stochastic criticality shaped like a standard normal bump: a point `x`
/// is critical with probability `exp(-|x|^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalBump;

impl Criticality for NormalBump {
    fn is_critical(&self, point: &[f64], stream: &mut RandomStream) -> bool {
        let r2: f64 = point.iter().map(|x| x * x).sum();
        stream.next_unit() < (-0.5 * r2).exp()
    }
}

/// Composite Simpson rule for `int_{-a}^{a} exp(-x^2 / 2) dx`.
fn gaussian_integral(a: f64) -> f64 {
    let intervals = 2000;
    let h = 2.0 * a / intervals as f64;
    let f = |x: f64| (-0.5 * x * x).exp();
    let mut sum = f(-a) + f(a);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(-a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Built-in estimator benchmarks with known answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    /// Unit square, critical box of area 0.01 straddling four cells of a 10 x 10 grid.
    AnalyticBox,
    /// Unit square, critical box of area 0.45 with no edge on the 10 x 10 grid.
    LargeBox,
    /// `[-3, 3]^2` with [`NormalBump`] criticality.
    NormalBump,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::AnalyticBox, Benchmark::LargeBox, Benchmark::NormalBump];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::AnalyticBox => "analytic-box",
            Benchmark::LargeBox => "large-box",
            Benchmark::NormalBump => "normal-bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn space(self) -> SampleSpace {
        match self {
            Benchmark::AnalyticBox | Benchmark::LargeBox => SampleSpace::unit_cube(2),
            Benchmark::NormalBump => {
                SampleSpace::new(vec![(-3.0, 3.0); 2]).expect("static bounds")
            }
        }
    }

    pub fn region(self) -> Option<BoxRegion> {
        match self {
            Benchmark::AnalyticBox => Some(BoxRegion {
                lo: vec![0.33, 0.52],
                hi: vec![0.43, 0.62],
            }),
            Benchmark::LargeBox => Some(BoxRegion {
                lo: vec![0.05, 0.23],
                hi: vec![0.95, 0.73],
            }),
            Benchmark::NormalBump => None,
        }
    }

    pub fn predicate(self) -> Box<dyn Criticality> {
        match self.region() {
            Some(region) => Box::new(region),
            None => Box::new(NormalBump),
        }
    }

    /// Probability of the critical event under the uniform base density.
    pub fn exact_probability(self) -> f64 {
        match self.region() {
            Some(region) => region.volume() / self.space().area(),
            None => gaussian_integral(3.0).powi(2) / self.space().area(),
        }
    }
}
