//! `wpcn`: solve single instances, run throughput sweeps and self-check the
//! solver against the grid oracle.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wpcn_core::harness::{emit_csv, run_experiment_with, trial_instance, write_csv, ExperimentConfig, ResultRow};
use wpcn_core::oracle::OracleSettings;
use wpcn_core::verify::{hessian_sweep, oracle_suite};
use wpcn_core::{solve_scheme, ChStrategy, Execution, SchemeId, SolveReport};

#[derive(Parser, Debug)]
#[command(
    name = "wpcn",
    version,
    about = "Max-min throughput of clustered wireless powered networks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Base seed; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON experiment config
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output path (CSV for sweeps)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Restrict to one scheme
    #[arg(long, global = true)]
    scheme: Option<SchemeId>,

    /// Restrict to one cluster-head strategy
    #[arg(long, global = true)]
    strategy: Option<ChStrategy>,

    /// Suppress progress messages
    #[arg(long, short, global = true)]
    quiet: bool,

    /// Worker threads; 1 runs sequentially
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one seeded instance and print the reports
    Solve {
        /// Placement index within the seed
        #[arg(long, default_value_t = 0)]
        placement: usize,
    },
    /// Run the config's sweep and write CSV
    Sweep,
    /// Compare cluster-head strategies over the config's sweep
    ChCompare,
    /// Check the solver against the grid oracle and the rate Hessian
    /// against finite differences
    Verify {
        /// Oracle instances
        #[arg(long, default_value_t = 8)]
        instances: usize,
        /// Random Hessian points
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
}

impl Common {
    fn load_config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(scheme) = self.scheme {
            config.schemes = vec![scheme];
        }
        if let Some(strategy) = self.strategy {
            config.strategies = vec![strategy];
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        Ok(config)
    }

    fn execution(&self) -> Result<Execution> {
        match self.threads {
            None => Ok(Execution::default()),
            Some(0) => bail!("--threads must be at least 1"),
            Some(1) => Ok(Execution::Sequential),
            Some(n) => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring the thread pool")?;
                Ok(Execution::Parallel)
            }
        }
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn print_report(out: &mut impl Write, report: &SolveReport) -> std::io::Result<()> {
    writeln!(out, "scheme          {}", report.scheme)?;
    writeln!(out, "status          {:?}", report.status)?;
    writeln!(out, "max-min         {:.9e} bit/s/Hz", report.sbar_star)?;
    writeln!(out, "sum             {:.9e} bit/s/Hz", report.sum_rate())?;
    writeln!(out, "tau1            {:.9e}", report.point.tau1())?;
    let rates: Vec<String> = report.rates.rates.iter().map(|r| format!("{r:.6e}")).collect();
    writeln!(out, "rates           [{}]", rates.join(", "))?;
    let d = &report.diagnostics;
    writeln!(
        out,
        "newton steps    {} ({} stages)",
        d.newton_iterations, d.outer_iterations
    )?;
    writeln!(out, "gap bound       {:.3e}", d.duality_gap_bound)?;
    writeln!(out, "max violation   {:.3e}", report.residuals.max_primal())?;
    writeln!(out)
}

fn solve(common: &Common, placement: usize) -> Result<()> {
    let config = common.load_config()?;
    let point = config.point(config.sweep.values[0]);
    let strategy = config.strategies[0];
    let (net, chan) = trial_instance(&point, &config.phy, config.seed, placement, strategy, 0)?;
    let mut text = Vec::new();
    writeln!(
        text,
        "instance        N = {}, M = {}, d = {} m, r = {} m, seed {}, placement {placement}, CH = device {} ({strategy})\n",
        point.devices,
        config.phy.antennas,
        point.distance_m,
        point.radius_m,
        config.seed,
        net.ch_original_index(),
    )?;
    for &scheme in &config.schemes {
        let report = solve_scheme(scheme, &chan, &config.phy, &config.solver)?;
        print_report(&mut text, &report)?;
    }
    match &common.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&text)?,
    }
    Ok(())
}

fn write_rows(rows: &[ResultRow], path: Option<&Path>) -> Result<()> {
    match path {
        Some(path) => emit_csv(rows, path)?,
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn sweep(common: &Common, config: ExperimentConfig) -> Result<()> {
    let exec = common.execution()?;
    common.note(format!(
        "sweeping {} over {:?}: {} placements, {} scheme(s), {} strategy(ies)",
        config.sweep.variable.name(),
        config.sweep.values,
        config.placements,
        config.schemes.len(),
        config.strategies.len()
    ));
    let rows = run_experiment_with(&config, exec)?;
    let failures: usize = rows.iter().map(|r| r.n_failures).sum();
    if failures > 0 {
        common.note(format!("warning: {failures} solver failure(s) excluded from the means"));
    }
    write_rows(&rows, config.output.as_deref())?;
    if let Some(path) = &config.output {
        common.note(format!("wrote {} rows to {}", rows.len(), path.display()));
    }
    Ok(())
}

fn ch_compare(common: &Common) -> Result<()> {
    let mut config = common.load_config()?;
    if common.strategy.is_none() {
        config.strategies = ChStrategy::ALL.to_vec();
    }
    if common.scheme.is_none() {
        config.schemes = vec![SchemeId::ProposedEbCooperation];
    }
    sweep(common, config)
}

fn verify(common: &Common, instances: usize, points: usize) -> Result<bool> {
    let exec = common.execution()?;
    let seed = common.seed.unwrap_or(1);
    let mut ok = true;

    let hessian = hessian_sweep(points, seed)?;
    println!(
        "hessian: {} points, {} failures, worst finite-difference error {:.2e}",
        hessian.points, hessian.failures, hessian.worst_fd_error
    );
    ok &= hessian.passed();

    let checks = oracle_suite(instances, seed, &OracleSettings::default(), exec)?;
    for c in &checks {
        if !common.quiet || !c.passed() {
            println!(
                "oracle: seed {} N={} M={} solver {:.9e} oracle {:.9e} error {:.2e} tol {:.2e} {}",
                c.seed,
                c.devices,
                c.antennas,
                c.solver,
                c.oracle,
                c.error(),
                c.tolerance,
                if c.passed() { "ok" } else { "FAIL" }
            );
        }
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    println!("oracle: {passed}/{} instances agree", checks.len());
    ok &= passed == checks.len();
    Ok(ok)
}

fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    match &cli.command {
        Command::Solve { placement } => solve(common, *placement).map(|_| true),
        Command::Sweep => sweep(common, common.load_config()?).map(|_| true),
        Command::ChCompare => ch_compare(common).map(|_| true),
        Command::Verify { instances, points } => verify(common, *instances, *points),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
