use serde::{Deserialize, Serialize};

use super::sweep::{Constellation, RiskSurface};
use crate::error::{Error, Result};

/// Severity statistic compared against the severity limit.
///
/// Quantiles and the mean are taken over colliding trials only; a
/// constellation without collisions has statistic 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityStatistic {
    Q50,
    Q90,
    #[default]
    Q99,
    Mean,
}

impl SeverityStatistic {
    pub fn of(self, cell: &Constellation) -> f64 {
        let q = cell.severity_quantiles_given_collision;
        match self {
            SeverityStatistic::Q50 => q.map_or(0.0, |q| q[0]),
            SeverityStatistic::Q90 => q.map_or(0.0, |q| q[1]),
            SeverityStatistic::Q99 => q.map_or(0.0, |q| q[2]),
            SeverityStatistic::Mean => cell.mean_severity_given_collision.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub index: usize,
    pub u_t: f64,
    pub u_s: f64,
    pub probability: f64,
    pub severity_statistic: f64,
    pub admissible: bool,
}

/// Box `[0, u_t_max] x [-u_s_abs_max, u_s_abs_max]` whose constellations are all admissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleratedBox {
    pub u_t_max: f64,
    pub u_s_abs_max: f64,
    pub constellations_inside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyEvaluation {
    pub lambda: f64,
    pub severity_limit: f64,
    pub statistic: SeverityStatistic,
    pub verdicts: Vec<Verdict>,
    pub admissible_count: usize,
    /// `None` when the minimum-uncertainty constellation itself is inadmissible.
    pub tolerated: Option<ToleratedBox>,
    /// No simulated constellation meets both limits.
    pub no_admissible_components: bool,
}

/// Checks every constellation against `Pr <= lambda` and `statistic <= severity_limit`
/// and derives the largest tolerated uncertainty box.
///
/// Among boxes anchored at the origin that contain only admissible
/// constellations, the one holding the most constellations wins; ties go to
/// the larger `u_t_max`, then the larger `u_s_abs_max`. Box limits are the
/// largest `u_t` and `|u_s|` actually inside.
pub fn evaluate_safety_limit(
    surface: &RiskSurface,
    lambda: f64,
    severity_limit: f64,
    statistic: SeverityStatistic,
) -> Result<SafetyEvaluation> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("safety.lambda", "must lie in [0, 1]"));
    }
    if !severity_limit.is_finite() || severity_limit < 0.0 {
        return Err(Error::invalid("safety.severity_limit", "must be a finite value >= 0"));
    }
    let verdicts: Vec<Verdict> = surface
        .constellations
        .iter()
        .filter_map(|c| {
            let probability = c.p_hat?;
            let severity_statistic = statistic.of(c);
            Some(Verdict {
                index: c.index,
                u_t: c.u_t,
                u_s: c.u_s,
                probability,
                severity_statistic,
                admissible: probability <= lambda && severity_statistic <= severity_limit,
            })
        })
        .collect();
    let admissible_count = verdicts.iter().filter(|v| v.admissible).count();
    let tolerated = tolerated_box(&verdicts);
    Ok(SafetyEvaluation {
        lambda,
        severity_limit,
        statistic,
        admissible_count,
        no_admissible_components: admissible_count == 0,
        tolerated,
        verdicts,
    })
}

fn tolerated_box(verdicts: &[Verdict]) -> Option<ToleratedBox> {
    let mut caps: Vec<f64> = verdicts.iter().map(|v| v.u_t).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();

    let mut best: Option<ToleratedBox> = None;
    for &cap in &caps {
        let mut inside: Vec<&Verdict> = verdicts.iter().filter(|v| v.u_t <= cap).collect();
        inside.sort_by(|a, b| a.u_s.abs().total_cmp(&b.u_s.abs()));
        let blocker = inside
            .iter()
            .find(|v| !v.admissible)
            .map_or(f64::INFINITY, |v| v.u_s.abs());
        let kept: Vec<&&Verdict> = inside.iter().filter(|v| v.u_s.abs() < blocker).collect();
        if kept.is_empty() {
            // Larger caps only add constellations, so the blocker can only move inward.
            break;
        }
        let candidate = ToleratedBox {
            u_t_max: kept.iter().map(|v| v.u_t).fold(f64::NEG_INFINITY, f64::max),
            u_s_abs_max: kept.iter().map(|v| v.u_s.abs()).fold(f64::NEG_INFINITY, f64::max),
            constellations_inside: kept.len(),
        };
        let better = match best {
            None => true,
            Some(b) => {
                (candidate.constellations_inside, candidate.u_t_max, candidate.u_s_abs_max)
                    > (b.constellations_inside, b.u_t_max, b.u_s_abs_max)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(u_t: f64, u_s: f64, admissible: bool) -> Verdict {
        Verdict {
            index: 0,
            u_t,
            u_s,
            probability: if admissible { 0.0 } else { 1.0 },
            severity_statistic: 0.0,
            admissible,
        }
    }

    #[test]
    fn all_admissible_box_spans_grid() {
        let v: Vec<_> = (0..3)
            .flat_map(|t| [-0.1, 0.0, 0.2].map(|s| verdict(t as f64 * 0.05, s, true)))
            .collect();
        let b = tolerated_box(&v).unwrap();
        assert_eq!(b.constellations_inside, 9);
        assert_eq!(b.u_t_max, 0.1);
        assert_eq!(b.u_s_abs_max, 0.2);
    }

    #[test]
    fn inadmissible_origin_means_no_box() {
        let v = vec![verdict(0.0, 0.0, false), verdict(0.05, 0.1, true)];
        assert_eq!(tolerated_box(&v), None);
    }

    #[test]
    fn box_stops_before_unsafe_delay() {
        let v: Vec<_> = (0..5)
            .flat_map(|t| [0.0, 0.1].map(move |s| verdict(t as f64, s, t < 3)))
            .collect();
        let b = tolerated_box(&v).unwrap();
        assert_eq!(b.u_t_max, 2.0);
        assert_eq!(b.constellations_inside, 6);
    }

    #[test]
    fn spatial_blocker_trims_the_box() {
        let v = vec![
            verdict(0.0, 0.0, true),
            verdict(0.0, 0.3, true),
            verdict(1.0, 0.0, true),
            verdict(1.0, -0.2, false),
        ];
        let b = tolerated_box(&v).unwrap();
        // Cap 0: both rows of u_t = 0 (2 cells). Cap 1: |u_s| < 0.2 only (2 cells, larger u_t).
        assert_eq!((b.u_t_max, b.u_s_abs_max, b.constellations_inside), (1.0, 0.0, 2));
    }
}
