// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiments over ensembles of games, written out as CSV tables.
//!
//! Every experiment is driven by one master seed. Run `i` of an ensemble
//! gets the seed `derive_seed(master, tag, i)` (see [`crate::seed`]), where
//! the tag names the experiment and its parameter cell but not the game
//! kind, so the three games in a cell play on the same disorders. Rows come
//! out sorted by kind, then by parameters, so reruns give identical files.

mod csv;
mod numeric;

use std::path::PathBuf;

pub use self::csv::{trace_csv, CsvTable};
pub use numeric::{numeric_gains, NumericGains, NumericPlan};

use self::csv::num;
use crate::analytics::MarkovAnalysis;
use crate::engine::{
    ensemble_gains_tagged, ensemble_runs, GainReport, GameKind, SimConfig, DEFAULT_STEPS,
    DEFAULT_WARMUP,
};
use crate::error::{Error, Result};
use crate::persistence::{persistence_grid, GridCell, GridConfig};
use crate::seed::{derive_seed, disorder_rng};
use crate::stats::MeanSe;
use crate::strategy::{sample_quenched_disorder, QuenchedDisorder, StrategySpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Analytic and simulated gains of the three games on one disorder.
    Table1,
    /// Agent and strategy gains over a range of memories.
    IllusionSweep,
    /// Gain of counteradaptive agents relative to standard ones.
    Counteradaptive,
    PersistenceGrid,
    /// Analytic and simulated gains on a set of sampled disorders.
    AnalyticVsNumeric,
}

/// Size and seeding of a Monte Carlo ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSettings {
    pub n: usize,
    pub s: usize,
    pub runs: usize,
    /// Measured steps per run.
    pub steps: usize,
    /// Discarded steps per run; `None` for `max(400, tau)`.
    pub warmup: Option<usize>,
    pub seed: u64,
}

impl Default for EnsembleSettings {
    fn default() -> EnsembleSettings {
        EnsembleSettings {
            n: 31,
            s: 2,
            runs: 50,
            steps: DEFAULT_STEPS,
            warmup: None,
            seed: 0,
        }
    }
}

impl EnsembleSettings {
    pub fn warmup_for(&self, tau: usize) -> usize {
        self.warmup.unwrap_or(DEFAULT_WARMUP.max(tau))
    }

    fn config(&self, kind: GameKind, m: u32, tau: usize) -> SimConfig {
        SimConfig::new(kind, self.n, m, self.s, tau)
            .with_steps(self.warmup_for(tau), self.steps)
            .with_seed(self.seed)
    }
}

/// Mean agent and strategy gains per `(kind, m)`, ordered by kind then `m`.
pub fn run_illusion_sweep(
    kinds: &[GameKind],
    memories: &[u32],
    tau: usize,
    settings: &EnsembleSettings,
) -> Result<Vec<GainReport>> {
    let mut out = Vec::with_capacity(kinds.len() * memories.len());
    for &kind in kinds {
        for &m in memories {
            let tag = format!("sweep/m{m}/tau{tau}");
            out.push(ensemble_gains_tagged(
                &settings.config(kind, m, tau),
                settings.runs,
                &tag,
            )?);
        }
    }
    Ok(out)
}

pub fn sweep_csv(reports: &[GainReport], settings: &EnsembleSettings) -> CsvTable {
    let mut t = CsvTable::new(&[
        "kind",
        "m",
        "tau",
        "agent_gain",
        "agent_se",
        "strategy_gain",
        "strategy_se",
        "N",
        "S",
        "runs",
        "steps",
        "warmup",
        "seed",
    ]);
    for r in reports {
        t.push(vec![
            r.kind.to_string(),
            r.m.to_string(),
            r.tau.to_string(),
            num(r.agent.mean),
            num(r.agent.se),
            num(r.strategy.mean),
            num(r.strategy.se),
            r.n.to_string(),
            settings.s.to_string(),
            r.runs.to_string(),
            settings.steps.to_string(),
            settings.warmup_for(r.tau).to_string(),
            settings.seed.to_string(),
        ]);
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CounteradaptiveRow {
    pub kind: GameKind,
    pub m: u32,
    pub tau: usize,
    pub n_c: usize,
    /// Counteradaptive minus standard per-step gain, per run.
    pub diff: MeanSe,
    pub counteradaptive: MeanSe,
    pub standard: MeanSe,
}

/// The first `n_c` agents of every run play their worst strategy.
pub fn run_counteradaptive(
    kinds: &[GameKind],
    memories: &[u32],
    tau: usize,
    n_c: usize,
    settings: &EnsembleSettings,
) -> Result<Vec<CounteradaptiveRow>> {
    if n_c == 0 || n_c >= settings.n {
        return Err(Error::config(format!(
            "need 1 <= n_c < N, got n_c={n_c}, N={}",
            settings.n
        )));
    }
    if settings.runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }
    let mut out = Vec::with_capacity(kinds.len() * memories.len());
    for &kind in kinds {
        for &m in memories {
            let mut config = settings.config(kind, m, tau);
            config.n_counteradaptive = n_c;
            config.validate()?;
            let results = ensemble_runs(&config, settings.runs, &format!("cagents/m{m}/tau{tau}"))?;
            let c: Vec<f64> = results
                .iter()
                .map(|r| r.counteradaptive_gain().expect("n_c >= 1"))
                .collect();
            let s: Vec<f64> = results
                .iter()
                .map(|r| r.standard_gain().expect("n_c < N"))
                .collect();
            let d: Vec<f64> = c.iter().zip(&s).map(|(c, s)| c - s).collect();
            out.push(CounteradaptiveRow {
                kind,
                m,
                tau,
                n_c,
                diff: MeanSe::from_samples(&d),
                counteradaptive: MeanSe::from_samples(&c),
                standard: MeanSe::from_samples(&s),
            });
        }
    }
    Ok(out)
}

pub fn counteradaptive_csv(rows: &[CounteradaptiveRow], settings: &EnsembleSettings) -> CsvTable {
    let mut t = CsvTable::new(&[
        "kind", "m", "tau", "N", "n_c", "diff", "diff_se", "c_gain", "c_se", "s_gain", "s_se",
        "S", "runs", "steps", "warmup", "seed",
    ]);
    for r in rows {
        t.push(vec![
            r.kind.to_string(),
            r.m.to_string(),
            r.tau.to_string(),
            settings.n.to_string(),
            r.n_c.to_string(),
            num(r.diff.mean),
            num(r.diff.se),
            num(r.counteradaptive.mean),
            num(r.counteradaptive.se),
            num(r.standard.mean),
            num(r.standard.se),
            settings.s.to_string(),
            settings.runs.to_string(),
            settings.steps.to_string(),
            settings.warmup_for(r.tau).to_string(),
            settings.seed.to_string(),
        ]);
    }
    t
}

pub fn persistence_csv(cells: &[GridCell], config: &GridConfig) -> CsvTable {
    let mut t = CsvTable::new(&[
        "kind",
        "m",
        "scale",
        "persistence",
        "stderr",
        "tau",
        "N",
        "S",
        "runs",
        "length",
        "warmup",
        "seed",
    ]);
    for c in cells {
        t.push(vec![
            c.kind.to_string(),
            c.m.to_string(),
            c.scale.to_string(),
            num(c.persistence.mean),
            num(c.persistence.se),
            config.tau.to_string(),
            config.n.to_string(),
            config.s.to_string(),
            config.runs.to_string(),
            config.length.to_string(),
            config.warmup.to_string(),
            config.seed.to_string(),
        ]);
    }
    t
}

/// Analytic and simulated gains of one game on one disorder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonRow {
    pub kind: GameKind,
    pub m: u32,
    pub tau: usize,
    pub n: usize,
    /// Index of the disorder within its experiment.
    pub disorder: usize,
    pub analytic_agent: f64,
    pub analytic_strategy: f64,
    pub numeric: NumericGains,
    /// Seed of the simulations.
    pub seed: u64,
}

/// Compares the chain's gains with simulation for every kind, disorder and
/// window length. `plan.seed` is the master seed.
pub fn analytic_vs_numeric(
    kinds: &[GameKind],
    disorders: &[QuenchedDisorder],
    taus: &[usize],
    plan: &NumericPlan,
) -> Result<Vec<ComparisonRow>> {
    let mut out = Vec::new();
    for &kind in kinds {
        for (i, d) in disorders.iter().enumerate() {
            for &tau in taus {
                let m = d.memory();
                let analysis = MarkovAnalysis::new(kind, d, tau)?;
                let seed = derive_seed(plan.seed, &format!("numeric/{kind}/m{m}/tau{tau}"), i as u64);
                let numeric = numeric_gains(kind, d, tau, &NumericPlan { seed, ..plan.clone() })?;
                out.push(ComparisonRow {
                    kind,
                    m,
                    tau,
                    n: d.agent_count(),
                    disorder: i,
                    analytic_agent: analysis.agent_gain(),
                    analytic_strategy: analysis.strategy_gain(),
                    numeric,
                    seed,
                });
            }
        }
    }
    out.sort_by_key(|r| (r.kind, r.m, r.tau, r.disorder));
    Ok(out)
}

/// The three games at `tau = 1` on one disorder.
pub fn run_table1(disorder: &QuenchedDisorder, plan: &NumericPlan) -> Result<Vec<ComparisonRow>> {
    analytic_vs_numeric(&GameKind::ALL, std::slice::from_ref(disorder), &[1], plan)
}

/// `S = 2` disorders for `N` agents at memory `m`, drawn from `master`.
pub fn sample_disorders(n: usize, m: u32, count: usize, master: u64) -> Result<Vec<QuenchedDisorder>> {
    let space = StrategySpace::reduced(m)?;
    (0..count)
        .map(|i| {
            let mut rng = disorder_rng(derive_seed(master, &format!("disorder/m{m}"), i as u64));
            sample_quenched_disorder(n, 2, space, &mut rng)
        })
        .collect()
}

/// Numeric and analytic rows share one schema and differ in `source`.
pub fn comparison_csv(rows: &[ComparisonRow]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "kind",
        "m",
        "tau",
        "N",
        "agent_gain",
        "strategy_gain",
        "source",
        "agent_se",
        "strategy_se",
        "disorder",
        "steps",
        "seed",
    ]);
    for r in rows {
        let common = |v: Vec<String>| {
            let mut row = vec![r.kind.to_string(), r.m.to_string(), r.tau.to_string(), r.n.to_string()];
            row.extend(v);
            row
        };
        t.push(common(vec![
            num(r.numeric.agent.mean),
            num(r.numeric.strategy.mean),
            "numeric".into(),
            num(r.numeric.agent.se),
            num(r.numeric.strategy.se),
            r.disorder.to_string(),
            r.numeric.steps.to_string(),
            r.seed.to_string(),
        ]));
        t.push(common(vec![
            num(r.analytic_agent),
            num(r.analytic_strategy),
            "analytic".into(),
            String::new(),
            String::new(),
            r.disorder.to_string(),
            String::new(),
            String::new(),
        ]));
    }
    t
}

/// Everything needed to run one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub kinds: Vec<GameKind>,
    pub memories: Vec<u32>,
    pub taus: Vec<usize>,
    /// Persistence scales.
    pub scales: Vec<u32>,
    pub n: usize,
    pub s: usize,
    /// Ensemble size; disorders for the analytic comparison.
    pub runs: usize,
    /// Measured steps per run; total simulated steps per comparison for
    /// the analytic experiments; series length for persistence.
    pub steps: usize,
    pub warmup: Option<usize>,
    pub n_counteradaptive: usize,
    pub seed: u64,
    /// Fixed disorder for the analytic experiments.
    pub disorder: Option<QuenchedDisorder>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// The defaults of each experiment.
    pub fn new(experiment: Experiment) -> ExperimentSpec {
        let base = ExperimentSpec {
            experiment,
            kinds: GameKind::ALL.to_vec(),
            memories: vec![2],
            taus: vec![1],
            scales: Vec::new(),
            n: 31,
            s: 2,
            runs: 50,
            steps: DEFAULT_STEPS,
            warmup: None,
            n_counteradaptive: 0,
            seed: 0,
            disorder: None,
            output: None,
        };
        match experiment {
            Experiment::Table1 => ExperimentSpec {
                runs: 1,
                steps: 200_000,
                ..base
            },
            Experiment::AnalyticVsNumeric => ExperimentSpec {
                runs: 10,
                steps: 200_000,
                ..base
            },
            Experiment::IllusionSweep => ExperimentSpec {
                memories: (2..=12).collect(),
                ..base
            },
            Experiment::Counteradaptive => ExperimentSpec {
                memories: (2..=14).collect(),
                taus: vec![400],
                runs: 200,
                steps: 100,
                n_counteradaptive: 3,
                ..base
            },
            Experiment::PersistenceGrid => ExperimentSpec {
                memories: (2..=10).collect(),
                scales: (2..=10).collect(),
                taus: vec![100],
                runs: 100,
                steps: 1000,
                ..base
            },
        }
    }

    fn ensemble(&self) -> EnsembleSettings {
        EnsembleSettings {
            n: self.n,
            s: self.s,
            runs: self.runs,
            steps: self.steps,
            warmup: self.warmup,
            seed: self.seed,
        }
    }

    fn plan(&self) -> NumericPlan {
        let default = NumericPlan::default();
        NumericPlan {
            total_steps: self.steps,
            burn_in: self.warmup.unwrap_or(default.burn_in),
            seed: self.seed,
            ..default
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() {
            return Err(Error::config("no game kinds selected"));
        }
        if self.taus.is_empty() {
            return Err(Error::config("no window lengths selected"));
        }
        if self.runs == 0 || self.steps == 0 || self.n == 0 || self.s == 0 {
            return Err(Error::config("N, S, runs and steps must all be at least 1"));
        }
        if let Some(&tau) = self.taus.iter().find(|&&t| t == 0) {
            return Err(Error::config(format!("tau must be at least 1, got {tau}")));
        }
        match self.experiment {
            Experiment::Table1 | Experiment::AnalyticVsNumeric => {
                if self.s != 2 {
                    return Err(Error::config("the exact chain is built for S = 2"));
                }
                if let Some(d) = &self.disorder {
                    if d.strategies_per_agent() != 2 {
                        return Err(Error::config("the disorder must have S = 2"));
                    }
                }
            }
            Experiment::Counteradaptive => {
                if self.n_counteradaptive == 0 || self.n_counteradaptive >= self.n {
                    return Err(Error::config(format!(
                        "need 1 <= n_c < N, got n_c={}, N={}",
                        self.n_counteradaptive, self.n
                    )));
                }
            }
            Experiment::PersistenceGrid => {
                if self.scales.is_empty() {
                    return Err(Error::config("no persistence scales selected"));
                }
            }
            Experiment::IllusionSweep => {}
        }
        Ok(())
    }

    /// Runs the experiment and returns its table.
    pub fn run(&self) -> Result<CsvTable> {
        self.validate()?;
        match self.experiment {
            Experiment::Table1 => {
                let d = match &self.disorder {
                    Some(d) => d.clone(),
                    None => table1_disorder(self.n, self.memories[0], self.seed)?,
                };
                let plan = self.plan();
                let rows = analytic_vs_numeric(&self.kinds, std::slice::from_ref(&d), &self.taus, &plan)?;
                Ok(comparison_csv(&rows))
            }
            Experiment::AnalyticVsNumeric => {
                let mut rows = Vec::new();
                match &self.disorder {
                    Some(d) => rows.extend(analytic_vs_numeric(
                        &self.kinds,
                        std::slice::from_ref(d),
                        &self.taus,
                        &self.plan(),
                    )?),
                    None => {
                        for &m in &self.memories {
                            let ds = sample_disorders(self.n, m, self.runs, self.seed)?;
                            rows.extend(analytic_vs_numeric(&self.kinds, &ds, &self.taus, &self.plan())?);
                        }
                    }
                }
                rows.sort_by_key(|r| (r.kind, r.m, r.tau, r.disorder));
                Ok(comparison_csv(&rows))
            }
            Experiment::IllusionSweep => {
                let settings = self.ensemble();
                let mut reports = Vec::new();
                for &tau in &self.taus {
                    reports.extend(run_illusion_sweep(&self.kinds, &self.memories, tau, &settings)?);
                }
                reports.sort_by_key(|r| (r.kind, r.tau, r.m));
                Ok(sweep_csv(&reports, &settings))
            }
            Experiment::Counteradaptive => {
                let settings = self.ensemble();
                let mut rows = Vec::new();
                for &tau in &self.taus {
                    rows.extend(run_counteradaptive(
                        &self.kinds,
                        &self.memories,
                        tau,
                        self.n_counteradaptive,
                        &settings,
                    )?);
                }
                rows.sort_by_key(|r| (r.kind, r.tau, r.m));
                Ok(counteradaptive_csv(&rows, &settings))
            }
            Experiment::PersistenceGrid => {
                let mut cells = Vec::new();
                let mut last = None;
                for &tau in &self.taus {
                    let config = GridConfig {
                        n: self.n,
                        s: self.s,
                        tau,
                        runs: self.runs,
                        length: self.steps,
                        warmup: self.warmup.unwrap_or(DEFAULT_WARMUP.max(tau)),
                        seed: self.seed,
                    };
                    cells.extend(persistence_grid(&self.kinds, &self.memories, &self.scales, &config)?);
                    last = Some(config);
                }
                let config = last.expect("taus checked non-empty");
                Ok(persistence_csv(&cells, &config))
            }
        }
    }

    /// Runs the experiment and writes the table to `output` when set.
    pub fn execute(&self) -> Result<CsvTable> {
        let table = self.run()?;
        if let Some(path) = &self.output {
            table.write(path)?;
        }
        Ok(table)
    }
}

/// The disorder `table1` uses when none is given.
pub fn table1_disorder(n: usize, m: u32, seed: u64) -> Result<QuenchedDisorder> {
    let mut rng = disorder_rng(derive_seed(seed, "table1", 0));
    Ok(sample_quenched_disorder(n, 2, StrategySpace::reduced(m)?, &mut rng)?.canonical())
}
