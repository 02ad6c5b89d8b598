//! Closed-form kinematics of the corridor scenario (kind A) without start
//! jitter, written independently of the simulator.
//!
//! The agents close in at `delta = (v_h + v_r) * T` per step until the
//! robot's evasion takes effect. The measured distance at step `k` is
//! `s0 - k * delta + u_s`, so the reaction triggers at the first step where
//! that drops below `d_th` and becomes effective `N` steps later. Contact is
//! the first step with `s0 - k * delta <= 0`.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub struct Corridor {
    pub s0: f64,
    pub d_th: f64,
    pub v_h: f64,
    pub v_r: f64,
    pub t: f64,
    pub horizon: usize,
}

impl Corridor {
    pub fn delta(&self) -> f64 {
        (self.v_h + self.v_r) * self.t
    }

    pub fn trigger_step(&self, u_s: f64) -> usize {
        let m = self.s0 + u_s;
        if m < self.d_th {
            0
        } else {
            ((m - self.d_th) / self.delta()).floor() as usize + 1
        }
    }

    pub fn contact_step(&self) -> usize {
        (self.s0 / self.delta()).ceil().max(0.0) as usize
    }

    pub fn collides(&self, n: u32, u_s: f64) -> bool {
        let kc = self.contact_step();
        kc <= self.trigger_step(u_s) + n as usize && kc <= self.horizon
    }

    /// Smallest delay (in steps) that produces contact.
    pub fn cutoff(&self, u_s: f64) -> usize {
        self.contact_step().saturating_sub(self.trigger_step(u_s))
    }

    /// `N* = ceil(d_th / delta)`: an upper bound on [`Corridor::cutoff`] at `u_s = 0`
    /// that does not depend on the start distance.
    pub fn textbook_cutoff(&self) -> usize {
        (self.d_th / self.delta()).ceil() as usize
    }

    /// Closest approach of a non-colliding trial.
    pub fn min_distance(&self, n: u32, u_s: f64) -> f64 {
        let last = (self.trigger_step(u_s) + n as usize).min(self.horizon);
        self.s0 - last as f64 * self.delta()
    }

    pub fn impact_speed(&self) -> f64 {
        self.v_h + self.v_r
    }

    /// Both step formulas are away from floating-point ties.
    pub fn well_conditioned(&self, u_s: f64) -> bool {
        let away = |x: f64| (x - x.round()).abs() > 1e-6;
        away((self.s0 + u_s - self.d_th) / self.delta()) && away(self.s0 / self.delta())
    }
}
