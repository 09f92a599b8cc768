//! Monte Carlo trials and their aggregation.
//!
//! Trial `p` of a sweep point places devices with a generator seeded from
//! `seed ^ p`, so every sweep value, scheme and CH strategy sees the same
//! normalized placement. Channels and random CH choices come from stream
//! `1 + repeat` of the same seed and are shared by all schemes.

use serde::Serialize;

use super::config::{ExperimentConfig, SweepPoint, SweepVariable};
use crate::baselines::{solve_scheme, SchemeId};
use crate::error::Result;
use crate::exec::Execution;
use crate::network::{
    draw_channels, place_wds, rng_from_seed, select_ch, ChStrategy, ChannelRealization, NetworkInstance, PhyParams,
    Point,
};
use crate::solver::{SolveStatus, SolverSettings};

/// Network and channels of one trial.
pub fn trial_instance(
    point: &SweepPoint,
    phy: &PhyParams,
    seed: u64,
    placement: usize,
    strategy: ChStrategy,
    repeat: usize,
) -> Result<(NetworkInstance, ChannelRealization)> {
    let trial_seed = seed ^ placement as u64;
    let mut rng = rng_from_seed(trial_seed);
    let positions = place_wds(point.devices, point.distance_m, point.radius_m, &mut rng)?;
    let mut rng = rng_from_seed(trial_seed);
    rng.set_stream(1 + repeat as u64);
    let ch = select_ch(&positions, Point::ORIGIN, strategy, &mut rng)?;
    let net = NetworkInstance::new(Point::ORIGIN, &positions, ch, *phy)?;
    let mut chan = draw_channels(&net, &mut rng)?;
    chan.rng_seed = Some(trial_seed);
    Ok((net, chan))
}

/// Max-min and sum throughput of one scheme in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeOutcome {
    pub scheme: SchemeId,
    /// `None` when the solver failed or hit its iteration cap.
    pub throughput: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub placement: usize,
    pub strategy: ChStrategy,
    pub repeat: usize,
    pub schemes: Vec<SchemeOutcome>,
}

#[derive(Debug, Clone, Copy)]
struct TrialKey {
    sweep_index: usize,
    placement: usize,
    strategy: ChStrategy,
    repeat: usize,
}

fn run_trial(config: &ExperimentConfig, key: &TrialKey) -> TrialOutcome {
    let value = config.sweep.values[key.sweep_index];
    let point = config.point(value);
    let instance = trial_instance(
        &point,
        &config.phy,
        config.seed,
        key.placement,
        key.strategy,
        key.repeat,
    );
    let schemes = config
        .schemes
        .iter()
        .map(|&scheme| SchemeOutcome {
            scheme,
            throughput: instance
                .as_ref()
                .ok()
                .and_then(|(_, chan)| solve_one(scheme, chan, &config.phy, &config.solver)),
        })
        .collect();
    TrialOutcome {
        sweep_index: key.sweep_index,
        sweep_value: value,
        placement: key.placement,
        strategy: key.strategy,
        repeat: key.repeat,
        schemes,
    }
}

fn solve_one(
    scheme: SchemeId,
    chan: &ChannelRealization,
    phy: &PhyParams,
    settings: &SolverSettings,
) -> Option<(f64, f64)> {
    let report = solve_scheme(scheme, chan, phy, settings).ok()?;
    match report.status {
        SolveStatus::Optimal | SolveStatus::InfeasibleInput => Some((report.sbar_star, report.sum_rate())),
        SolveStatus::MaxIterations => None,
    }
}

/// Every trial of the experiment, ordered by sweep value, placement,
/// strategy and repeat.
pub fn run_trials(config: &ExperimentConfig, exec: Execution) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let mut keys = Vec::new();
    for sweep_index in 0..config.sweep.values.len() {
        for placement in 0..config.placements {
            for &strategy in &config.strategies {
                for repeat in 0..config.repeats(strategy) {
                    keys.push(TrialKey {
                        sweep_index,
                        placement,
                        strategy,
                        repeat,
                    });
                }
            }
        }
    }
    Ok(exec.map(&keys, |key| run_trial(config, key)))
}

/// One aggregated line of output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub strategy: ChStrategy,
    /// Means and standard errors are over successful trials only.
    pub mean_maxmin: f64,
    pub mean_sum: f64,
    pub stderr_maxmin: f64,
    pub stderr_sum: f64,
    pub n_trials: usize,
    pub n_failures: usize,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Aggregates trials into rows ordered by sweep value, scheme and strategy.
/// The result does not depend on the order of `trials`.
pub fn aggregate(config: &ExperimentConfig, trials: &[TrialOutcome]) -> Vec<ResultRow> {
    let mut sorted: Vec<&TrialOutcome> = trials.iter().collect();
    sorted.sort_by_key(|t| (t.sweep_index, t.placement, t.strategy, t.repeat));
    let mut rows = Vec::new();
    for (sweep_index, &value) in config.sweep.values.iter().enumerate() {
        for &scheme in &config.schemes {
            for &strategy in &config.strategies {
                let mut maxmin = Vec::new();
                let mut sum = Vec::new();
                let mut n_trials = 0;
                for t in sorted
                    .iter()
                    .filter(|t| t.sweep_index == sweep_index && t.strategy == strategy)
                {
                    let Some(outcome) = t.schemes.iter().find(|s| s.scheme == scheme) else {
                        continue;
                    };
                    n_trials += 1;
                    if let Some((m, s)) = outcome.throughput {
                        maxmin.push(m);
                        sum.push(s);
                    }
                }
                let (mean_maxmin, stderr_maxmin) = mean_and_stderr(&maxmin);
                let (mean_sum, stderr_sum) = mean_and_stderr(&sum);
                rows.push(ResultRow {
                    sweep_var: config.sweep.variable,
                    sweep_value: value,
                    scheme,
                    strategy,
                    mean_maxmin,
                    mean_sum,
                    stderr_maxmin,
                    stderr_sum,
                    n_trials,
                    n_failures: n_trials - maxmin.len(),
                });
            }
        }
    }
    rows
}

/// Runs the experiment with the default execution mode.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ResultRow>> {
    let trials = run_trials(config, exec)?;
    Ok(aggregate(config, &trials))
}
