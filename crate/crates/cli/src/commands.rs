use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hrc_risk::estimator::{
    repeated_estimate, vae_compare, Criticality, EstimateReport, Method, SampleSpace,
    ScenarioCriticality,
};
use hrc_risk::risk::{
    self, evaluate_safety_limit, risk_value, trial_stream, RiskSurface, SafetyEvaluation, SurfaceTable,
};
use hrc_risk::scenario::{Scenario, TrialParams};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::export::{opt, Metadata, Output};

fn open(command: &str, config: &ExperimentConfig, out: &Path) -> Result<Output, CliError> {
    let mut output = Output::create(out, Metadata::new(command, config.seed, config.hash()))?;
    output.text("config.toml", &config.to_toml())?;
    Ok(output)
}

pub fn simulate(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let sim = &config.simulate;
    if sim.trials == 0 {
        return Err(CliError::Config("simulate.trials must be >= 1".into()));
    }
    let scenario = Scenario::new(config.scenario);
    let params = TrialParams::new(sim.delay_steps, sim.delta_d0, sim.c);
    let rows: Vec<Vec<String>> = (0..sim.trials)
        .map(|t| {
            let o = scenario.run_trial(&params, &mut trial_stream(config.seed, t));
            vec![
                t.to_string(),
                sim.delay_steps.to_string(),
                sim.delta_d0.to_string(),
                sim.c.to_string(),
                o.collided.to_string(),
                opt(o.collision_step),
                opt(o.impact_speed),
                o.collision_force.to_string(),
                o.severity.to_string(),
                o.min_true_distance.to_string(),
                opt(o.reaction_triggered_step),
                opt(o.reaction_effective_step),
            ]
        })
        .collect();
    let mut output = open("simulate", config, out)?;
    output.csv(
        "trials.csv",
        &[
            "trial_index",
            "N",
            "delta_d0",
            "c",
            "collided",
            "collision_step",
            "impact_speed",
            "F_c",
            "severity",
            "min_true_distance",
            "reaction_triggered_step",
            "reaction_effective_step",
        ],
        rows,
    )?;
    Ok(output.written().to_vec())
}

/// Sample space and criticality predicate configured in `[estimator]`.
pub fn estimation_problem(
    config: &ExperimentConfig,
) -> Result<(SampleSpace, Box<dyn Criticality>), CliError> {
    let est = &config.estimator;
    if let Some(bench) = est.benchmark {
        if est.bounds.is_some() {
            return Err(CliError::Config(
                "estimator.bounds cannot be combined with estimator.benchmark".into(),
            ));
        }
        return Ok((bench.space(), bench.predicate()));
    }
    let predicate = ScenarioCriticality::new(
        Scenario::new(config.scenario),
        config.uncertainty,
        est.danger,
        est.space_mode,
    );
    let space = match &est.bounds {
        Some(bounds) => {
            if bounds.len() != predicate.expected_dimension() {
                return Err(CliError::Config(format!(
                    "estimator.bounds has {} entries; space_mode needs {}",
                    bounds.len(),
                    predicate.expected_dimension()
                )));
            }
            SampleSpace::new(bounds.iter().map(|b| (b[0], b[1])).collect())?
        }
        None => predicate.default_space()?,
    };
    Ok((space, Box::new(predicate)))
}

fn summary_row(report: &EstimateReport, config: &ExperimentConfig) -> Vec<String> {
    vec![
        report.method.name().to_string(),
        report.p_hat.to_string(),
        opt(report.vae),
        report.samples_per_repetition.to_string(),
        opt(report.learning_fraction_beta),
        report
            .grid
            .as_ref()
            .map(|g| g.edges_per_side.to_string())
            .unwrap_or_default(),
        report.repetitions().to_string(),
        config.seed.to_string(),
    ]
}

const SUMMARY_HEADER: [&str; 8] = ["method", "p_hat", "vae", "n", "beta", "e", "repetitions", "seed"];

#[derive(Serialize)]
struct EstimateFile<'a> {
    problem: String,
    report: &'a EstimateReport,
}

fn problem_name(config: &ExperimentConfig) -> String {
    match config.estimator.benchmark {
        Some(b) => format!("benchmark {}", b.name()),
        None => format!("scenario {}", config.scenario.kind().label()),
    }
}

pub fn estimate(
    config: &ExperimentConfig,
    method: Method,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let (space, predicate) = estimation_problem(config)?;
    let report = repeated_estimate(
        method,
        &space,
        predicate.as_ref(),
        &config.estimator.settings(),
        config.seed,
    )?;
    let mut output = open("estimate", config, out)?;
    output.json(
        "estimate.json",
        &EstimateFile {
            problem: problem_name(config),
            report: &report,
        },
    )?;
    output.csv("estimate.csv", &SUMMARY_HEADER, [summary_row(&report, config)])?;
    Ok(output.written().to_vec())
}

#[derive(Serialize)]
struct CompareFile<'a> {
    problem: String,
    /// `VAE(grid-is) / VAE(mc)`; absent when the MC variance is zero.
    vae_ratio: Option<f64>,
    monte_carlo: &'a EstimateReport,
    grid_is: &'a EstimateReport,
}

pub fn compare(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if config.estimator.repetitions < 2 {
        return Err(CliError::Usage(format!(
            "compare needs estimator.repetitions >= 2 (got {})",
            config.estimator.repetitions
        )));
    }
    let (space, predicate) = estimation_problem(config)?;
    let (mc, is) = vae_compare(&space, predicate.as_ref(), &config.estimator.settings(), config.seed)?;
    let vae_ratio = match (mc.vae, is.vae) {
        (Some(m), Some(i)) if m > 0.0 => Some(i / m),
        _ => None,
    };
    let mut output = open("compare", config, out)?;
    output.json(
        "compare.json",
        &CompareFile {
            problem: problem_name(config),
            vae_ratio,
            monte_carlo: &mc,
            grid_is: &is,
        },
    )?;
    output.csv(
        "compare.csv",
        &SUMMARY_HEADER,
        [summary_row(&mc, config), summary_row(&is, config)],
    )?;
    output.csv(
        "compare_repetitions.csv",
        &["repetition", "mc", "grid_is"],
        mc.per_repetition_estimates
            .iter()
            .zip(&is.per_repetition_estimates)
            .enumerate()
            .map(|(r, (m, i))| vec![r.to_string(), m.to_string(), i.to_string()]),
    )?;
    Ok(output.written().to_vec())
}

/// Contents of `surface.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub metadata: Metadata,
    pub surface: RiskSurface,
    pub table: SurfaceTable,
}

#[derive(Serialize)]
struct SurfaceBody<'a> {
    surface: &'a RiskSurface,
    table: &'a SurfaceTable,
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<RiskSurface, CliError> {
    risk::sweep(
        &config.scenario,
        &config.uncertainty,
        &config.sweep.grid,
        config.sweep.trials_per_constellation,
        config.seed,
    )
    .map_err(|e| match e {
        hrc_risk::Error::InvalidParameter { field, reason } if reason == "axis is empty" => {
            CliError::Usage(format!("{field}: {reason}"))
        }
        other => other.into(),
    })
}

pub fn sweep(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let surface = run_sweep(config)?;
    let table = surface.table(config.sweep.table_bins);
    let mut output = open("sweep", config, out)?;
    output.json(
        "surface.json",
        &SurfaceBody {
            surface: &surface,
            table: &table,
        },
    )?;
    write_table(&mut output, &table)?;
    write_long(&mut output, &surface)?;
    write_plots(&mut output, &surface)?;
    Ok(output.written().to_vec())
}

fn write_table(output: &mut Output, table: &SurfaceTable) -> Result<(), CliError> {
    let mut header = vec!["delay_steps".to_string()];
    header.extend(table.column_labels.iter().map(|l| format!("u_s={l}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    output.csv(
        "surface_table.csv",
        &header,
        table.delay_steps.iter().zip(&table.cells).map(|(n, row)| {
            std::iter::once(n.to_string())
                .chain(row.iter().map(|c| opt(*c)))
                .collect::<Vec<_>>()
        }),
    )
}

fn write_long(output: &mut Output, surface: &RiskSurface) -> Result<(), CliError> {
    output.csv(
        "surface_long.csv",
        &[
            "index",
            "delay_steps",
            "u_t",
            "delta_d0",
            "c",
            "u_s",
            "trials",
            "collisions",
            "below_threshold",
            "p_hat",
            "p_below_threshold",
            "mean_severity",
            "mean_severity_given_collision",
            "severity_q50",
            "severity_q90",
            "severity_q99",
            "severity_q50_given_collision",
            "severity_q90_given_collision",
            "severity_q99_given_collision",
            "scalar_risk",
        ],
        surface.constellations.iter().map(|c| {
            let q = c.severity_quantiles;
            let qc = c.severity_quantiles_given_collision;
            vec![
                c.index.to_string(),
                c.delay_steps.to_string(),
                c.u_t.to_string(),
                c.delta_d0.to_string(),
                c.c.to_string(),
                c.u_s.to_string(),
                c.trials.to_string(),
                c.collisions.to_string(),
                c.below_threshold.to_string(),
                opt(c.p_hat),
                opt(c.p_below_threshold),
                c.mean_severity.to_string(),
                opt(c.mean_severity_given_collision),
                q[0].to_string(),
                q[1].to_string(),
                q[2].to_string(),
                opt(qc.map(|q| q[0])),
                opt(qc.map(|q| q[1])),
                opt(qc.map(|q| q[2])),
                opt(risk_value(c).map(|r| r.scalar_risk)),
            ]
        }),
    )
}

fn write_plots(output: &mut Output, surface: &RiskSurface) -> Result<(), CliError> {
    output.csv(
        "plot_probability_vs_us.csv",
        &["u_s", "u_t", "delay_steps", "p_hat"],
        surface.constellations.iter().map(|c| {
            vec![
                c.u_s.to_string(),
                c.u_t.to_string(),
                c.delay_steps.to_string(),
                opt(c.p_hat),
            ]
        }),
    )?;

    let mut by_delay: BTreeMap<u32, (f64, usize, usize, usize)> = BTreeMap::new();
    for c in &surface.constellations {
        let e = by_delay.entry(c.delay_steps).or_insert((c.u_t, 0, 0, 0));
        e.1 += c.trials;
        e.2 += c.below_threshold;
        e.3 += c.collisions;
    }
    output.csv(
        "plot_events_vs_ut.csv",
        &[
            "delay_steps",
            "u_t",
            "trials",
            "below_threshold_events",
            "below_threshold_fraction",
            "collisions",
            "collision_fraction",
        ],
        by_delay.iter().map(|(n, (u_t, trials, below, hits))| {
            let frac = |k: usize| opt((*trials > 0).then(|| k as f64 / *trials as f64));
            vec![
                n.to_string(),
                u_t.to_string(),
                trials.to_string(),
                below.to_string(),
                frac(*below),
                hits.to_string(),
                frac(*hits),
            ]
        }),
    )?;

    let h = &surface.severity_histogram;
    output.csv(
        "plot_severity.csv",
        &["bin_lo", "bin_hi", "count_given_collision", "count_all_trials"],
        h.counts.iter().enumerate().map(|(i, &count)| {
            // Non-colliding trials have severity 0 and land in the first bin.
            let all = count + if i == 0 { surface.non_colliding_trials } else { 0 };
            vec![
                h.edges[i].to_string(),
                h.edges[i + 1].to_string(),
                count.to_string(),
                all.to_string(),
            ]
        }),
    )
}

#[derive(Serialize)]
struct SafetyBody<'a> {
    scenario: &'a str,
    surface_config_hash: &'a str,
    evaluation: &'a SafetyEvaluation,
}

pub fn load_surface(path: &Path) -> Result<SurfaceFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not a surface file: {e}", path.display())))
}

pub fn evaluate(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let s = &config.safety;
    let (surface, source_hash) = match &s.surface {
        Some(path) => {
            let file = load_surface(path)?;
            (file.surface, file.metadata.config_hash)
        }
        None => (run_sweep(config)?, config.hash()),
    };
    if surface.is_empty() {
        return Err(CliError::Usage("the risk surface has no constellations".into()));
    }
    let eval = evaluate_safety_limit(&surface, s.lambda, s.severity_limit, s.statistic)?;
    let mut output = open("evaluate", config, out)?;
    output.json(
        "safety.json",
        &SafetyBody {
            scenario: surface.scenario.label(),
            surface_config_hash: &source_hash,
            evaluation: &eval,
        },
    )?;
    output.csv(
        "safety_verdicts.csv",
        &["index", "u_t", "u_s", "p_hat", "severity_statistic", "admissible"],
        eval.verdicts.iter().map(|v| {
            vec![
                v.index.to_string(),
                v.u_t.to_string(),
                v.u_s.to_string(),
                v.probability.to_string(),
                v.severity_statistic.to_string(),
                v.admissible.to_string(),
            ]
        }),
    )?;
    output.text("safety.txt", &safety_summary(&eval, surface.scenario.label()))?;
    Ok(output.written().to_vec())
}

pub fn safety_summary(eval: &SafetyEvaluation, scenario: &str) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "Safety evaluation, scenario {scenario}");
    let _ = writeln!(t, "probability limit lambda: {}", eval.lambda);
    let _ = writeln!(
        t,
        "severity limit: {} on the {:?} severity given collision",
        eval.severity_limit, eval.statistic
    );
    let _ = writeln!(
        t,
        "admissible constellations: {} of {}",
        eval.admissible_count,
        eval.verdicts.len()
    );
    if eval.no_admissible_components {
        let _ = writeln!(t, "no admissible components: every constellation violates the limits");
    }
    match eval.tolerated {
        Some(b) => {
            let _ = writeln!(t, "tolerated u_t max: {:.4} s", b.u_t_max);
            let _ = writeln!(t, "tolerated |u_s| max: {:.4} m", b.u_s_abs_max);
            let _ = writeln!(t, "constellations inside the tolerated box: {}", b.constellations_inside);
        }
        None => {
            let _ = writeln!(
                t,
                "no tolerated box: the minimum-uncertainty constellation is not admissible"
            );
        }
    }
    t
}
