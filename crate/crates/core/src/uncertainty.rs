//! Temporal and spatial measurement-uncertainty models.
//!
//! Temporal uncertainty is a reaction delay of `N` whole simulation steps,
//! `u_t = N * T`, with `N` uniform on an integer range. Spatial uncertainty is
//! an additive error on the measured human-robot distance,
//! `u_s = delta_d0 + c * v_h`, where `delta_d0` is Gaussian and `c` uniform.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Reaction delay model: `u_t = N * T`, `N ~ U{delay_steps_min, ..., delay_steps_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemporalFields", into = "TemporalFields")]
pub struct TemporalUncertaintyModel {
    timestep: f64,
    delay_steps_min: u32,
    delay_steps_max: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemporalFields {
    #[serde(rename = "timestep_T")]
    timestep: f64,
    delay_steps_min: u32,
    delay_steps_max: u32,
}

impl TryFrom<TemporalFields> for TemporalUncertaintyModel {
    type Error = Error;

    fn try_from(f: TemporalFields) -> Result<Self> {
        Self::new(f.timestep, f.delay_steps_min, f.delay_steps_max)
    }
}

impl From<TemporalUncertaintyModel> for TemporalFields {
    fn from(m: TemporalUncertaintyModel) -> Self {
        Self {
            timestep: m.timestep,
            delay_steps_min: m.delay_steps_min,
            delay_steps_max: m.delay_steps_max,
        }
    }
}

impl TemporalUncertaintyModel {
    pub fn new(timestep: f64, delay_steps_min: u32, delay_steps_max: u32) -> Result<Self> {
        if !(timestep.is_finite() && timestep > 0.0) {
            return Err(Error::invalid("timestep_T", "must be finite and > 0"));
        }
        if delay_steps_max < delay_steps_min {
            return Err(Error::invalid(
                "delay_steps_max",
                format!("{delay_steps_max} is below delay_steps_min {delay_steps_min}"),
            ));
        }
        Ok(Self {
            timestep,
            delay_steps_min,
            delay_steps_max,
        })
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn delay_steps_min(&self) -> u32 {
        self.delay_steps_min
    }

    pub fn delay_steps_max(&self) -> u32 {
        self.delay_steps_max
    }

    /// Delay in seconds for a given number of steps.
    pub fn delay_for_steps(&self, steps: u32) -> f64 {
        f64::from(steps) * self.timestep
    }

    /// Draws `N`. Always consumes exactly one 64-bit draw.
    pub fn sample_steps(&self, stream: &mut RandomStream) -> u32 {
        let span = u64::from(self.delay_steps_max - self.delay_steps_min) + 1;
        let offset = ((stream.next_unit() * span as f64) as u64).min(span - 1);
        self.delay_steps_min + offset as u32
    }
}

impl Default for TemporalUncertaintyModel {
    fn default() -> Self {
        Self {
            timestep: 0.05,
            delay_steps_min: 0,
            delay_steps_max: 9,
        }
    }
}

/// Distance error model: `delta_d0 ~ N(mean, std)`, `c ~ U[c_min, c_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpatialFields", into = "SpatialFields")]
pub struct SpatialUncertaintyModel {
    delta_d0_mean: f64,
    delta_d0_std: f64,
    c_min: f64,
    c_max: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpatialFields {
    delta_d0_mean: f64,
    delta_d0_std: f64,
    c_min: f64,
    c_max: f64,
}

impl TryFrom<SpatialFields> for SpatialUncertaintyModel {
    type Error = Error;

    fn try_from(f: SpatialFields) -> Result<Self> {
        Self::new(f.delta_d0_mean, f.delta_d0_std, f.c_min, f.c_max)
    }
}

impl From<SpatialUncertaintyModel> for SpatialFields {
    fn from(m: SpatialUncertaintyModel) -> Self {
        Self {
            delta_d0_mean: m.delta_d0_mean,
            delta_d0_std: m.delta_d0_std,
            c_min: m.c_min,
            c_max: m.c_max,
        }
    }
}

impl SpatialUncertaintyModel {
    pub fn new(delta_d0_mean: f64, delta_d0_std: f64, c_min: f64, c_max: f64) -> Result<Self> {
        if !delta_d0_mean.is_finite() {
            return Err(Error::invalid("delta_d0_mean", "must be finite"));
        }
        if !(delta_d0_std.is_finite() && delta_d0_std >= 0.0) {
            return Err(Error::invalid("delta_d0_std", "must be finite and >= 0"));
        }
        if !(c_min.is_finite() && c_max.is_finite()) {
            return Err(Error::invalid("c_min/c_max", "must be finite"));
        }
        if c_max < c_min {
            return Err(Error::invalid(
                "c_max",
                format!("{c_max} is below c_min {c_min}"),
            ));
        }
        Ok(Self {
            delta_d0_mean,
            delta_d0_std,
            c_min,
            c_max,
        })
    }

    pub fn delta_d0_mean(&self) -> f64 {
        self.delta_d0_mean
    }

    pub fn delta_d0_std(&self) -> f64 {
        self.delta_d0_std
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn sample_delta_d0(&self, stream: &mut RandomStream) -> f64 {
        let z: f64 = StandardNormal.sample(stream);
        self.delta_d0_mean + self.delta_d0_std * z
    }

    pub fn sample_c(&self, stream: &mut RandomStream) -> f64 {
        self.c_min + stream.next_unit() * (self.c_max - self.c_min)
    }

    /// One independent `(delta_d0, c)` pair.
    pub fn sample_params(&self, stream: &mut RandomStream) -> SpatialParams {
        let delta_d0 = self.sample_delta_d0(stream);
        let c = self.sample_c(stream);
        SpatialParams { delta_d0, c }
    }
}

impl Default for SpatialUncertaintyModel {
    fn default() -> Self {
        Self {
            delta_d0_mean: 0.0,
            delta_d0_std: 0.05,
            c_min: 0.0,
            c_max: 0.05,
        }
    }
}

/// A drawn spatial-uncertainty parameter pair, fixed for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialParams {
    pub delta_d0: f64,
    pub c: f64,
}

impl SpatialParams {
    pub const ZERO: SpatialParams = SpatialParams {
        delta_d0: 0.0,
        c: 0.0,
    };

    pub fn deviation_at(&self, human_speed: f64) -> f64 {
        spatial_deviation(self.delta_d0, self.c, human_speed)
    }
}

/// GUM-style classification of an uncertainty source. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyClass {
    Statistical,
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classification {
    pub temporal: UncertaintyClass,
    pub spatial: UncertaintyClass,
}

impl Default for Classification {
    fn default() -> Self {
        Self {
            temporal: UncertaintyClass::Systematic,
            spatial: UncertaintyClass::Statistical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySpec {
    pub temporal: TemporalUncertaintyModel,
    pub spatial: SpatialUncertaintyModel,
    #[serde(default)]
    pub classification: Classification,
}

/// Reaction delay in seconds, `N * T` for a freshly drawn `N`.
pub fn sample_temporal(model: &TemporalUncertaintyModel, stream: &mut RandomStream) -> f64 {
    model.delay_for_steps(model.sample_steps(stream))
}

pub fn sample_spatial_params(
    model: &SpatialUncertaintyModel,
    stream: &mut RandomStream,
) -> SpatialParams {
    model.sample_params(stream)
}

/// `u_s = delta_d0 + c * v_h`.
pub fn spatial_deviation(delta_d0: f64, c: f64, human_speed: f64) -> f64 {
    delta_d0 + c * human_speed
}

/// Distance reported by the sensor. Never negative.
pub fn perturb_distance(true_distance: f64, deviation: f64) -> f64 {
    (true_distance + deviation).max(0.0)
}
