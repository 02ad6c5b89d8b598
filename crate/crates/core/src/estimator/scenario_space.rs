use serde::{Deserialize, Serialize};

use super::{Criticality, SampleSpace};
use crate::error::{Error, Result};
use crate::scenario::{DangerPredicate, Scenario, TrialParams};
use crate::stream::RandomStream;
use crate::uncertainty::UncertaintySpec;

/// Coordinates of the estimator's sample space for scenario analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpaceMode {
    /// `(N, u_s)`: delay steps and the effective distance error at nominal
    /// human speed (applied as a constant offset).
    #[default]
    #[serde(rename = "2d")]
    TwoD,
    /// `(N, delta_d0, c)`.
    #[serde(rename = "3d")]
    ThreeD,
}

/// Runs one scenario trial per sample point and reports the dangerous event.
///
/// The first coordinate is a continuous delay; `N = floor(x)` clamped to the
/// temporal model's step range.
#[derive(Debug, Clone)]
pub struct ScenarioCriticality {
    scenario: Scenario,
    spec: UncertaintySpec,
    danger: DangerPredicate,
    mode: SpaceMode,
}

impl ScenarioCriticality {
    pub fn new(
        scenario: Scenario,
        spec: UncertaintySpec,
        danger: DangerPredicate,
        mode: SpaceMode,
    ) -> Self {
        Self {
            scenario,
            spec,
            danger,
            mode,
        }
    }

    pub fn mode(&self) -> SpaceMode {
        self.mode
    }

    /// Trial parameters encoded by a sample point.
    pub fn params_at(&self, point: &[f64]) -> TrialParams {
        let t = &self.spec.temporal;
        let steps = point[0]
            .floor()
            .clamp(f64::from(t.delay_steps_min()), f64::from(t.delay_steps_max())) as u32;
        match self.mode {
            SpaceMode::TwoD => TrialParams::new(steps, point[1], 0.0),
            SpaceMode::ThreeD => TrialParams::new(steps, point[1], point[2]),
        }
    }

    /// Default bounds: `N` over `[min, max + 1)`, `delta_d0` over mean +- 3 std,
    /// `c` over its uniform range. In 2-D the spatial axis is
    /// `[mean - 3 std + c_min v_h, mean + 3 std + c_max v_h]`.
    pub fn default_space(&self) -> Result<SampleSpace> {
        let t = &self.spec.temporal;
        let s = &self.spec.spatial;
        let v = self.scenario.config().human_speed();
        let delay = (
            f64::from(t.delay_steps_min()),
            f64::from(t.delay_steps_max()) + 1.0,
        );
        let d0 = (
            s.delta_d0_mean() - 3.0 * s.delta_d0_std(),
            s.delta_d0_mean() + 3.0 * s.delta_d0_std(),
        );
        let bounds = match self.mode {
            SpaceMode::TwoD => vec![delay, (d0.0 + s.c_min() * v, d0.1 + s.c_max() * v)],
            SpaceMode::ThreeD => vec![delay, d0, (s.c_min(), s.c_max())],
        };
        SampleSpace::new(bounds).map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::invalid(
                format!("estimator space {field}"),
                format!("{reason}; set explicit `bounds` for degenerate uncertainty models"),
            ),
            other => other,
        })
    }

    pub fn expected_dimension(&self) -> usize {
        match self.mode {
            SpaceMode::TwoD => 2,
            SpaceMode::ThreeD => 3,
        }
    }
}

impl Criticality for ScenarioCriticality {
    fn is_critical(&self, point: &[f64], stream: &mut RandomStream) -> bool {
        let params = self.params_at(point);
        let outcome = self.scenario.run_trial(&params, stream);
        self.danger.holds(&outcome, self.scenario.config())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ScenarioConfig, ScenarioKind};

    fn criticality(mode: SpaceMode) -> ScenarioCriticality {
        ScenarioCriticality::new(
            Scenario::new(ScenarioConfig::preset(ScenarioKind::Approach)),
            UncertaintySpec::default(),
            DangerPredicate::Collision,
            mode,
        )
    }

    #[test]
    fn point_decoding() {
        let c = criticality(SpaceMode::ThreeD);
        assert_eq!(c.params_at(&[3.7, 0.01, 0.02]), TrialParams::new(3, 0.01, 0.02));
        assert_eq!(c.params_at(&[10.0, 0.0, 0.0]).delay_steps, 9);
        assert_eq!(c.params_at(&[-2.0, 0.0, 0.0]).delay_steps, 0);
        let c = criticality(SpaceMode::TwoD);
        assert_eq!(c.params_at(&[9.99, -0.1]), TrialParams::new(9, -0.1, 0.0));
    }

    #[test]
    fn default_bounds() {
        let c = criticality(SpaceMode::TwoD);
        let space = c.default_space().unwrap();
        assert_eq!(space.bounds()[0], (0.0, 10.0));
        let (lo, hi) = space.bounds()[1];
        assert!((lo + 0.15).abs() < 1e-12 && (hi - 0.2).abs() < 1e-12);
        assert_eq!(criticality(SpaceMode::ThreeD).default_space().unwrap().dimension(), 3);
    }

    #[test]
    fn degenerate_model_needs_bounds() {
        let spec = UncertaintySpec {
            spatial: crate::uncertainty::SpatialUncertaintyModel::new(0.0, 0.0, 0.0, 0.0).unwrap(),
            ..Default::default()
        };
        let c = ScenarioCriticality::new(
            Scenario::new(ScenarioConfig::preset(ScenarioKind::Approach)),
            spec,
            DangerPredicate::Collision,
            SpaceMode::ThreeD,
        );
        let err = c.default_space().unwrap_err();
        assert!(err.to_string().contains("bounds"), "{err}");
    }

    #[test]
    fn long_delays_are_critical() {
        let c = criticality(SpaceMode::TwoD);
        let mut s = RandomStream::root(1);
        assert!(c.is_critical(&[9.5, 0.0], &mut s));
        assert!(!c.is_critical(&[0.5, 0.0], &mut s));
    }
}
