// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line driver: parses arguments into an [`ExperimentSpec`], runs it
//! and writes the resulting CSV.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use thgame_core::experiment::{Experiment, ExperimentSpec};
use thgame_core::{GameKind, QuenchedDisorder};

/// Directory for CSV output when `--out` is not given.
pub const OUT_DIR_ENV: &str = "THGAME_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "thgame",
    version,
    about = "Time-horizon minority, majority and dollar games",
    long_about = "Time-horizon minority, majority and dollar games: simulation, exact \
                  Markov-chain gains and persistence analysis.\n\n\
                  Every subcommand writes one CSV table, to --out, to \
                  $THGAME_OUT_DIR/<subcommand>.csv, or to standard output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact and simulated gains of all three games on one disorder
    #[command(long_about = "The table of agent and strategy gains for the three games at \
        m=2, S=2, tau=1, N=31 on one quenched disorder: each game gets a simulated row and an \
        exact row from the Markov chain. The disorder is drawn from --seed unless \
        --disorder-file is given. --steps is the simulated step total.")]
    Table1(Opts),
    /// Agent and strategy gains against memory
    #[command(long_about = "Ensemble-averaged agent and strategy gains against memory. At \
        tau=1 this is the data of the gain-versus-memory plots of the minority, majority and \
        dollar games; at tau=1000 the minority curve shows the phase transition near m=4. \
        Defaults: m 2..12, tau 1, 50 runs of 20000 steps.")]
    Sweep(Opts),
    /// Gain of counteradaptive agents over standard ones
    #[command(long_about = "Mean gain of agents that play their worst strategy minus that of \
        standard agents, against memory. Defaults: 3 counteradaptive agents of 31, tau=400, \
        200 runs of 100 measured steps, m 2..14.")]
    Cagents(Opts),
    /// Persistence of the outcome series over memory and scale
    #[command(long_about = "Grid of mean persistence of the outcome series over memory and \
        scale, one grid per game. Defaults: m 2..10, scales 2..10, tau=100, 100 runs, series \
        length 1000 (--steps).")]
    Persistence(Opts),
    /// Exact against simulated gains on sampled disorders
    #[command(long_about = "Exact Markov-chain gains against Monte Carlo estimates with \
        standard errors, on --runs disorders per memory (or the one in --disorder-file). \
        --steps is the simulated step total per comparison.")]
    Analytic(Opts),
}

#[derive(Debug, Clone, Default, clap::Args)]
struct Opts {
    /// Game kinds, comma separated: minority, majority, dollar
    #[arg(long, value_delimiter = ',')]
    kind: Option<Vec<String>>,
    /// Memories: a range like 2..12 (inclusive) or a list like 2,3,5
    #[arg(long)]
    m: Option<String>,
    /// Score window lengths, as a range or list
    #[arg(long)]
    tau: Option<String>,
    /// Number of agents
    #[arg(long = "N")]
    n: Option<usize>,
    /// Strategies per agent
    #[arg(long = "S")]
    s: Option<usize>,
    /// Runs per ensemble point; disorders per memory for `analytic`
    #[arg(long)]
    runs: Option<usize>,
    /// Measured steps per run (see each subcommand)
    #[arg(long)]
    steps: Option<usize>,
    /// Discarded steps before measuring
    #[arg(long)]
    warmup: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quenched disorder in the plain-text tensor format
    #[arg(long)]
    disorder_file: Option<PathBuf>,
    /// Number of counteradaptive agents
    #[arg(long = "n-c-agents")]
    n_c_agents: Option<usize>,
    /// Persistence scales, as a range or list
    #[arg(long = "scale-range", alias = "scale")]
    scale_range: Option<String>,
}

/// Parses `2..12`, `2..=12`, a single value or a comma list. Ranges are
/// inclusive and must not run backwards.
fn parse_values<T>(text: &str) -> anyhow::Result<Vec<T>>
where
    T: FromStr + Copy + PartialOrd,
    RangeInclusive<T>: Iterator<Item = T>,
{
    let number = |s: &str| -> anyhow::Result<T> {
        s.trim()
            .parse::<T>()
            .map_err(|_| anyhow::anyhow!("'{s}' is not a valid number"))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (number(lo)?, number(hi.trim_start_matches('='))?);
        if hi < lo {
            bail!("range '{text}' runs backwards");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(number).collect()
}

fn experiment_name(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::Table1 => "table1",
        Experiment::IllusionSweep => "sweep",
        Experiment::Counteradaptive => "cagents",
        Experiment::PersistenceGrid => "persistence",
        Experiment::AnalyticVsNumeric => "analytic",
    }
}

fn build_spec(experiment: Experiment, opts: Opts) -> anyhow::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(experiment);
    let name = experiment_name(experiment);
    if opts.scale_range.is_some() && experiment != Experiment::PersistenceGrid {
        bail!("--scale-range only applies to persistence");
    }
    if opts.n_c_agents.is_some() && experiment != Experiment::Counteradaptive {
        bail!("--n-c-agents only applies to cagents");
    }
    let analytic = matches!(experiment, Experiment::Table1 | Experiment::AnalyticVsNumeric);
    if opts.disorder_file.is_some() && !analytic {
        bail!("--disorder-file only applies to table1 and analytic");
    }

    if let Some(kinds) = opts.kind {
        spec.kinds = kinds
            .iter()
            .map(|k| GameKind::from_str(k.trim()))
            .collect::<Result<_, _>>()?;
    }
    if let Some(m) = &opts.m {
        spec.memories = parse_values(m).context("--m")?;
    }
    if let Some(tau) = &opts.tau {
        spec.taus = parse_values(tau).context("--tau")?;
    }
    if let Some(scales) = &opts.scale_range {
        spec.scales = parse_values(scales).context("--scale-range")?;
    }
    if let Some(n) = opts.n {
        spec.n = n;
    }
    if let Some(s) = opts.s {
        spec.s = s;
    }
    if let Some(runs) = opts.runs {
        spec.runs = runs;
    }
    if let Some(steps) = opts.steps {
        spec.steps = steps;
    }
    spec.warmup = opts.warmup;
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(n_c) = opts.n_c_agents {
        spec.n_counteradaptive = n_c;
    }
    if let Some(path) = &opts.disorder_file {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read disorder file {}", path.display()))?;
        let d = QuenchedDisorder::parse_text(&text)
            .with_context(|| format!("in disorder file {}", path.display()))?;
        if opts.m.is_some() && spec.memories != [d.memory()] {
            bail!("--m does not match the disorder file's m={}", d.memory());
        }
        if opts.n.is_some_and(|n| n != d.agent_count()) || opts.s.is_some_and(|s| s != d.strategies_per_agent()) {
            bail!("--N/--S do not match the disorder file");
        }
        spec.memories = vec![d.memory()];
        spec.n = d.agent_count();
        spec.s = d.strategies_per_agent();
        spec.disorder = Some(d);
    }
    if experiment == Experiment::Table1 && spec.memories.len() != 1 {
        bail!("table1 takes a single memory");
    }
    spec.output = match opts.out {
        Some(path) => Some(path),
        None => std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{name}.csv"))),
    };
    Ok(spec)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (experiment, opts) = match cli.command {
        Command::Table1(o) => (Experiment::Table1, o),
        Command::Sweep(o) => (Experiment::IllusionSweep, o),
        Command::Cagents(o) => (Experiment::Counteradaptive, o),
        Command::Persistence(o) => (Experiment::PersistenceGrid, o),
        Command::Analytic(o) => (Experiment::AnalyticVsNumeric, o),
    };
    let spec = build_spec(experiment, opts)?;
    let table = spec.execute()?;
    match &spec.output {
        Some(path) => eprintln!("wrote {} rows to {}", table.len(), path.display()),
        None => std::io::stdout()
            .write_all(table.to_string().as_bytes())
            .context("writing to standard output")?,
    }
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 2 on usage errors, 1 on failures.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("thgame: error: {e:#}");
            1
        }
    }
}
