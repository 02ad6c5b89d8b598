//! Discrete-time human-robot collaboration scenarios.
//!
//! Each trial advances two point agents with `x[k+1] = f(x[k], u)`. The robot
//! measures the human-robot distance through the spatial uncertainty model and
//! schedules its safety reaction `N` steps after the measured distance first
//! drops below `d_threshold`:
//!
//! * [`ScenarioKind::Approach`]: 1-D corridor. The human walks toward the robot,
//!   the robot moves toward the human until the reaction makes it retreat.
//! * [`ScenarioKind::SharedReach`]: both agents reach for one object from
//!   perpendicular directions; the reaction reverses the robot.
//! * [`ScenarioKind::MobileStop`]: a mobile robot drives toward a crossing human
//!   and performs a full stop as its reaction.
//!
//! Contact happens when the true separation reaches zero (agent radii are
//! folded into the geometry).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::RandomStream;
use crate::uncertainty::{perturb_distance, SpatialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Approach,
    SharedReach,
    MobileStop,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Approach => "A",
            ScenarioKind::SharedReach => "B",
            ScenarioKind::MobileStop => "C",
        }
    }
}

/// Kind-specific layout. Lengths in meters.
///
/// `start_jitter` draws a per-trial offset uniformly from
/// `[-start_jitter, start_jitter]` and moves the human's start toward the
/// robot (or the object) by that amount. It is the only randomness a trial
/// consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Approach {
        initial_separation: f64,
        #[serde(default)]
        start_jitter: f64,
    },
    SharedReach {
        human_path_length: f64,
        robot_path_length: f64,
        object_radius: f64,
        #[serde(default)]
        start_jitter: f64,
    },
    MobileStop {
        robot_to_crossing: f64,
        human_to_crossing: f64,
        contact_radius: f64,
        #[serde(default)]
        start_jitter: f64,
    },
}

impl Geometry {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Geometry::Approach { .. } => ScenarioKind::Approach,
            Geometry::SharedReach { .. } => ScenarioKind::SharedReach,
            Geometry::MobileStop { .. } => ScenarioKind::MobileStop,
        }
    }

    pub fn start_jitter(&self) -> f64 {
        match *self {
            Geometry::Approach { start_jitter, .. }
            | Geometry::SharedReach { start_jitter, .. }
            | Geometry::MobileStop { start_jitter, .. } => start_jitter,
        }
    }

    fn validate(&self) -> Result<()> {
        let jitter = self.start_jitter();
        if !(jitter.is_finite() && jitter >= 0.0) {
            return Err(Error::invalid("geometry.start_jitter", "must be finite and >= 0"));
        }
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("geometry.{name}"), "must be finite and >= 0"))
            }
        };
        match *self {
            Geometry::Approach {
                initial_separation, ..
            } => {
                if !initial_separation.is_finite() {
                    return Err(Error::invalid("geometry.initial_separation", "must be finite"));
                }
            }
            Geometry::SharedReach {
                human_path_length,
                robot_path_length,
                object_radius,
                ..
            } => {
                non_negative("human_path_length", human_path_length)?;
                non_negative("robot_path_length", robot_path_length)?;
                non_negative("object_radius", object_radius)?;
                if jitter > human_path_length {
                    return Err(Error::invalid(
                        "geometry.start_jitter",
                        "exceeds human_path_length; the human would start behind the object",
                    ));
                }
            }
            Geometry::MobileStop {
                robot_to_crossing,
                human_to_crossing,
                contact_radius,
                ..
            } => {
                non_negative("robot_to_crossing", robot_to_crossing)?;
                non_negative("human_to_crossing", human_to_crossing)?;
                non_negative("contact_radius", contact_radius)?;
                if jitter > human_to_crossing {
                    return Err(Error::invalid(
                        "geometry.start_jitter",
                        "exceeds human_to_crossing",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Scenario parameters. Immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFields", into = "ScenarioFields")]
pub struct ScenarioConfig {
    timestep: f64,
    horizon_steps: usize,
    d_threshold: f64,
    human_speed: f64,
    robot_speed: f64,
    geometry: Geometry,
    contact_stiffness: f64,
    effective_mass: f64,
    f_max: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFields {
    #[serde(rename = "timestep_T")]
    timestep: f64,
    #[serde(rename = "horizon_K")]
    horizon_steps: usize,
    d_threshold: f64,
    #[serde(rename = "human_speed_vH")]
    human_speed: f64,
    robot_speed: f64,
    geometry: Geometry,
    #[serde(rename = "contact_stiffness_k")]
    contact_stiffness: f64,
    #[serde(rename = "effective_mass_mu")]
    effective_mass: f64,
    #[serde(rename = "F_max")]
    f_max: f64,
}

impl TryFrom<ScenarioFields> for ScenarioConfig {
    type Error = Error;

    fn try_from(f: ScenarioFields) -> Result<Self> {
        ScenarioConfig {
            timestep: f.timestep,
            horizon_steps: f.horizon_steps,
            d_threshold: f.d_threshold,
            human_speed: f.human_speed,
            robot_speed: f.robot_speed,
            geometry: f.geometry,
            contact_stiffness: f.contact_stiffness,
            effective_mass: f.effective_mass,
            f_max: f.f_max,
        }
        .validated()
    }
}

impl From<ScenarioConfig> for ScenarioFields {
    fn from(c: ScenarioConfig) -> Self {
        Self {
            timestep: c.timestep,
            horizon_steps: c.horizon_steps,
            d_threshold: c.d_threshold,
            human_speed: c.human_speed,
            robot_speed: c.robot_speed,
            geometry: c.geometry,
            contact_stiffness: c.contact_stiffness,
            effective_mass: c.effective_mass,
            f_max: c.f_max,
        }
    }
}

/// Builder-style constructor for [`ScenarioConfig`].
#[derive(Debug, Clone, Copy)]
pub struct ScenarioBuilder {
    inner: ScenarioConfig,
}

impl ScenarioBuilder {
    pub fn timestep(mut self, seconds: f64) -> Self {
        self.inner.timestep = seconds;
        self
    }

    pub fn horizon_steps(mut self, steps: usize) -> Self {
        self.inner.horizon_steps = steps;
        self
    }

    pub fn d_threshold(mut self, meters: f64) -> Self {
        self.inner.d_threshold = meters;
        self
    }

    pub fn human_speed(mut self, mps: f64) -> Self {
        self.inner.human_speed = mps;
        self
    }

    pub fn robot_speed(mut self, mps: f64) -> Self {
        self.inner.robot_speed = mps;
        self
    }

    pub fn geometry(mut self, geometry: Geometry) -> Self {
        self.inner.geometry = geometry;
        self
    }

    pub fn contact(mut self, stiffness: f64, effective_mass: f64) -> Self {
        self.inner.contact_stiffness = stiffness;
        self.inner.effective_mass = effective_mass;
        self
    }

    pub fn f_max(mut self, newtons: f64) -> Self {
        self.inner.f_max = newtons;
        self
    }

    pub fn build(self) -> Result<ScenarioConfig> {
        self.inner.validated()
    }
}

impl ScenarioConfig {
    /// Starts from the default layout of `kind`.
    pub fn builder(kind: ScenarioKind) -> ScenarioBuilder {
        ScenarioBuilder {
            inner: Self::preset(kind),
        }
    }

    /// Desk-scale default layout for each kind.
    ///
    /// Contact parameters and `F_max = 140 N` are placeholders, not values
    /// taken from any body-region limit table.
    pub fn preset(kind: ScenarioKind) -> Self {
        let base = ScenarioConfig {
            timestep: 0.05,
            horizon_steps: 400,
            d_threshold: 0.5,
            human_speed: 1.0,
            robot_speed: 1.5,
            geometry: Geometry::Approach {
                initial_separation: 3.0,
                start_jitter: 0.1,
            },
            contact_stiffness: 2000.0,
            effective_mass: 2.0,
            f_max: 140.0,
        };
        match kind {
            ScenarioKind::Approach => base,
            ScenarioKind::SharedReach => ScenarioConfig {
                d_threshold: 0.35,
                human_speed: 0.8,
                robot_speed: 1.0,
                geometry: Geometry::SharedReach {
                    human_path_length: 1.0,
                    robot_path_length: 1.25,
                    object_radius: 0.2,
                    start_jitter: 0.1,
                },
                ..base
            },
            ScenarioKind::MobileStop => ScenarioConfig {
                d_threshold: 0.6,
                human_speed: 1.0,
                robot_speed: 1.2,
                geometry: Geometry::MobileStop {
                    robot_to_crossing: 3.0,
                    human_to_crossing: 2.5,
                    contact_radius: 0.4,
                    start_jitter: 0.1,
                },
                effective_mass: 20.0,
                ..base
            },
        }
    }

    fn validated(self) -> Result<Self> {
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            return Err(Error::invalid("timestep_T", "must be finite and > 0"));
        }
        if self.horizon_steps < 1 {
            return Err(Error::invalid("horizon_K", "must be >= 1"));
        }
        if !(self.d_threshold.is_finite() && self.d_threshold > 0.0) {
            return Err(Error::invalid("d_threshold", "must be finite and > 0"));
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return Err(Error::invalid("F_max", "must be finite and > 0"));
        }
        // A negative speed reverses the nominal direction, so the paths diverge.
        for (name, v) in [
            ("human_speed_vH", self.human_speed),
            ("robot_speed", self.robot_speed),
            ("contact_stiffness_k", self.contact_stiffness),
            ("effective_mass_mu", self.effective_mass),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        self.geometry.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.geometry.kind()
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn horizon_steps(&self) -> usize {
        self.horizon_steps
    }

    pub fn d_threshold(&self) -> f64 {
        self.d_threshold
    }

    pub fn human_speed(&self) -> f64 {
        self.human_speed
    }

    pub fn robot_speed(&self) -> f64 {
        self.robot_speed
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn contact_stiffness(&self) -> f64 {
        self.contact_stiffness
    }

    pub fn effective_mass(&self) -> f64 {
        self.effective_mass
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }
}

type Vec2 = [f64; 2];

fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Positions and the velocities used on the most recent step.
///
/// Before the first step the velocities hold the nominal ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub step: usize,
    pub human: Vec2,
    pub robot: Vec2,
    pub human_velocity: Vec2,
    pub robot_velocity: Vec2,
}

impl AgentState {
    pub fn relative_speed(&self) -> f64 {
        norm(sub(self.robot_velocity, self.human_velocity))
    }
}

/// Safety reaction bookkeeping: first trigger wins, takes effect `delay_steps` later.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reaction {
    delay_steps: u32,
    triggered_step: Option<usize>,
}

impl Reaction {
    pub fn new(delay_steps: u32) -> Self {
        Self {
            delay_steps,
            triggered_step: None,
        }
    }

    /// Registers a measurement taken at `step`. Returns true if it triggered.
    pub fn observe(&mut self, step: usize, measured: f64, d_threshold: f64) -> bool {
        if self.triggered_step.is_none() && measured < d_threshold {
            self.triggered_step = Some(step);
            true
        } else {
            false
        }
    }

    pub fn triggered_step(&self) -> Option<usize> {
        self.triggered_step
    }

    pub fn effective_step(&self) -> Option<usize> {
        self.triggered_step
            .map(|s| s + self.delay_steps as usize)
    }

    pub fn is_effective(&self, step: usize) -> bool {
        self.effective_step().is_some_and(|e| step >= e)
    }
}

/// Result of one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub collided: bool,
    pub collision_step: Option<usize>,
    pub impact_speed: Option<f64>,
    pub collision_force: f64,
    pub severity: f64,
    pub min_true_distance: f64,
    pub reaction_triggered_step: Option<usize>,
    pub reaction_effective_step: Option<usize>,
}

/// Uncertainty realization applied to a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub delay_steps: u32,
    pub spatial: SpatialParams,
}

impl TrialParams {
    pub fn new(delay_steps: u32, delta_d0: f64, c: f64) -> Self {
        Self {
            delay_steps,
            spatial: SpatialParams { delta_d0, c },
        }
    }
}

/// What counts as a dangerous event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DangerPredicate {
    #[default]
    Collision,
    /// The true distance fell below `d_threshold` at some step.
    DistanceBelowThreshold,
}

impl DangerPredicate {
    pub fn holds(self, outcome: &TrialOutcome, config: &ScenarioConfig) -> bool {
        match self {
            DangerPredicate::Collision => outcome.collided,
            DangerPredicate::DistanceBelowThreshold => {
                outcome.min_true_distance < config.d_threshold
            }
        }
    }
}

/// `F_c = v * sqrt(k * mu)`.
pub fn collision_force(impact_speed: f64, effective_mass: f64, contact_stiffness: f64) -> f64 {
    impact_speed * (contact_stiffness * effective_mass).sqrt()
}

/// `0` without collision, `F_c / F_max` otherwise. Not clipped at 1.
pub fn severity(collision_force: f64, f_max: f64, collided: bool) -> f64 {
    if collided {
        collision_force / f_max
    } else {
        0.0
    }
}

/// A validated scenario ready to simulate trials.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    config: ScenarioConfig,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Initial state with the human start shifted by `offset` meters toward
    /// the robot or object.
    pub fn initial_state(&self, offset: f64) -> AgentState {
        let c = &self.config;
        let (human, robot) = match c.geometry {
            Geometry::Approach {
                initial_separation, ..
            } => ([offset, 0.0], [initial_separation, 0.0]),
            Geometry::SharedReach {
                human_path_length,
                robot_path_length,
                ..
            } => (
                [-(human_path_length - offset).max(0.0), 0.0],
                [0.0, robot_path_length],
            ),
            Geometry::MobileStop {
                robot_to_crossing,
                human_to_crossing,
                ..
            } => (
                [0.0, -(human_to_crossing - offset).max(0.0)],
                [-robot_to_crossing, 0.0],
            ),
        };
        let mut state = AgentState {
            step: 0,
            human,
            robot,
            human_velocity: [0.0; 2],
            robot_velocity: [0.0; 2],
        };
        state.human_velocity = self.human_velocity(&state);
        state.robot_velocity = self.robot_velocity(&state, false);
        state
    }

    /// Per-trial start offset drawn from `stream`. One draw.
    pub fn sample_offset(&self, stream: &mut RandomStream) -> f64 {
        let jitter = self.config.geometry.start_jitter();
        let u = stream.next_unit();
        if jitter == 0.0 {
            0.0
        } else {
            jitter * (2.0 * u - 1.0)
        }
    }

    /// Ground-truth separation; `<= 0` means contact.
    pub fn true_distance(&self, state: &AgentState) -> f64 {
        match self.config.geometry {
            Geometry::Approach { .. } => state.robot[0] - state.human[0],
            Geometry::SharedReach { object_radius, .. } => {
                norm(sub(state.robot, state.human)) - object_radius
            }
            Geometry::MobileStop { contact_radius, .. } => {
                norm(sub(state.robot, state.human)) - contact_radius
            }
        }
    }

    /// Human velocity for the step starting at `state`.
    fn human_velocity(&self, state: &AgentState) -> Vec2 {
        let v = self.config.human_speed;
        let t = self.config.timestep;
        match self.config.geometry {
            Geometry::Approach { .. } => [v, 0.0],
            // walks to the object and stays there
            Geometry::SharedReach { .. } => [(-state.human[0]).max(0.0).min(v * t) / t, 0.0],
            Geometry::MobileStop { .. } => [0.0, v],
        }
    }

    fn robot_velocity(&self, state: &AgentState, reacting: bool) -> Vec2 {
        let v = self.config.robot_speed;
        let t = self.config.timestep;
        match self.config.geometry {
            Geometry::Approach { .. } => {
                if reacting {
                    [v, 0.0]
                } else {
                    [-v, 0.0]
                }
            }
            Geometry::SharedReach {
                robot_path_length, ..
            } => {
                let y = state.robot[1];
                if reacting {
                    [0.0, (robot_path_length - y).max(0.0).min(v * t) / t]
                } else {
                    [0.0, -y.max(0.0).min(v * t) / t]
                }
            }
            Geometry::MobileStop { .. } => {
                if reacting {
                    [0.0, 0.0]
                } else {
                    [v, 0.0]
                }
            }
        }
    }

    /// Current human speed, used for the velocity-dependent distance error.
    pub fn human_speed_at(&self, state: &AgentState) -> f64 {
        norm(self.human_velocity(state))
    }

    /// Advances both agents by one timestep.
    ///
    /// `measured_distance` is the sensor reading at `state.step`; it may
    /// trigger `reaction`. The robot evades (A, B) or stops (C) once the
    /// reaction is effective at this step.
    pub fn step(&self, state: &AgentState, measured_distance: f64, reaction: &mut Reaction) -> AgentState {
        reaction.observe(state.step, measured_distance, self.config.d_threshold);
        let reacting = reaction.is_effective(state.step);
        let hv = self.human_velocity(state);
        let rv = self.robot_velocity(state, reacting);
        let t = self.config.timestep;
        AgentState {
            step: state.step + 1,
            human: [state.human[0] + hv[0] * t, state.human[1] + hv[1] * t],
            robot: [state.robot[0] + rv[0] * t, state.robot[1] + rv[1] * t],
            human_velocity: hv,
            robot_velocity: rv,
        }
    }

    /// Simulates one trial for up to `horizon_K` steps.
    pub fn run_trial(&self, params: &TrialParams, stream: &mut RandomStream) -> TrialOutcome {
        let offset = self.sample_offset(stream);
        self.run_from(self.initial_state(offset), params, |_, _| {})
    }

    /// Like [`Scenario::run_trial`] with a fixed start offset, reporting
    /// `(true, measured)` distances for every step where a measurement was taken.
    pub fn run_from(
        &self,
        mut state: AgentState,
        params: &TrialParams,
        mut observe: impl FnMut(f64, f64),
    ) -> TrialOutcome {
        let c = &self.config;
        let mut reaction = Reaction::new(params.delay_steps);
        let mut min_distance = f64::INFINITY;
        let mut collision_step = None;

        loop {
            let d = self.true_distance(&state);
            min_distance = min_distance.min(d);
            if d <= 0.0 {
                collision_step = Some(state.step);
                break;
            }
            if state.step >= c.horizon_steps {
                break;
            }
            let deviation = params.spatial.deviation_at(self.human_speed_at(&state));
            let measured = perturb_distance(d, deviation);
            observe(d, measured);
            state = self.step(&state, measured, &mut reaction);
        }

        let collided = collision_step.is_some();
        let impact_speed = collided.then(|| state.relative_speed());
        let force = impact_speed
            .map(|v| collision_force(v, c.effective_mass, c.contact_stiffness))
            .unwrap_or(0.0);
        TrialOutcome {
            collided,
            collision_step,
            impact_speed,
            collision_force: force,
            severity: severity(force, c.f_max, collided),
            min_true_distance: min_distance,
            reaction_triggered_step: reaction.triggered_step(),
            reaction_effective_step: reaction.effective_step(),
        }
    }
}

/// Convenience wrapper: `Scenario::new(*config).run_trial(params, stream)`.
pub fn run_trial(config: &ScenarioConfig, params: &TrialParams, stream: &mut RandomStream) -> TrialOutcome {
    Scenario::new(*config).run_trial(params, stream)
}
