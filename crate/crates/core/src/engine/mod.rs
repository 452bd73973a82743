// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo engine for the time-horizon minority, majority and dollar
//! games.
//!
//! Each step every agent plays the strategy with the highest virtual score
//! (counteradaptive agents: the lowest), breaking exact ties with a fair
//! random choice among the tied strategies. The aggregate vote `A(t)` sets
//! the outcome bit (`1` iff `A > 0`), agents are paid, and every held
//! strategy receives the payoff it would have earned, which enters a
//! rolling window of the last `tau` increments.
//!
//! Virtual scores depend only on the public history, so they are tracked
//! once per distinct held strategy rather than once per agent slot.

mod sim;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use sim::{AgentMode, AgentState, SimState, StepRecord};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, disorder_rng};
use crate::stats::MeanSe;
use crate::strategy::{sample_quenched_disorder, QuenchedDisorder, SpaceKind, StrategySpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameKind {
    Minority,
    Majority,
    Dollar,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [GameKind::Minority, GameKind::Majority, GameKind::Dollar];

    /// `-1` for the minority rule, `+1` for the majority-type rules.
    #[inline]
    pub fn payoff_sign(self) -> i64 {
        match self {
            GameKind::Minority => -1,
            GameKind::Majority | GameKind::Dollar => 1,
        }
    }

    /// Steps between an action and the outcome that pays it.
    #[inline]
    pub fn lag(self) -> u32 {
        match self {
            GameKind::Dollar => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Minority => "minority",
            GameKind::Majority => "majority",
            GameKind::Dollar => "dollar",
        })
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minority" | "mg" | "min" => Ok(GameKind::Minority),
            "majority" | "majg" | "maj" => Ok(GameKind::Majority),
            "dollar" | "$g" | "$" | "dg" => Ok(GameKind::Dollar),
            other => Err(Error::config(format!("unknown game kind '{other}'"))),
        }
    }
}

/// Payoff per settled step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PayoffRule {
    /// `±Sign[a A]`: one point won or lost.
    #[default]
    Sign,
    /// `±a A`.
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub m: u32,
    pub s: usize,
    pub tau: usize,
    pub kind: GameKind,
    /// Measured steps.
    pub steps: usize,
    /// Steps discarded before measuring.
    pub warmup: usize,
    /// The first `n_counteradaptive` agents play their worst strategy.
    pub n_counteradaptive: usize,
    pub seed: u64,
    pub space: SpaceKind,
    /// Record `1` for `A < 0` instead of `A > 0`.
    pub history_bit_flip: bool,
    pub payoff: PayoffRule,
}

pub const DEFAULT_WARMUP: usize = 400;
pub const DEFAULT_STEPS: usize = 20_000;

impl SimConfig {
    pub fn new(kind: GameKind, n: usize, m: u32, s: usize, tau: usize) -> SimConfig {
        SimConfig {
            n,
            m,
            s,
            tau,
            kind,
            steps: DEFAULT_STEPS,
            warmup: DEFAULT_WARMUP,
            n_counteradaptive: 0,
            seed: 0,
            space: SpaceKind::Reduced,
            history_bit_flip: false,
            payoff: PayoffRule::Sign,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> SimConfig {
        self.seed = seed;
        self
    }

    pub fn with_steps(mut self, warmup: usize, steps: usize) -> SimConfig {
        self.warmup = warmup;
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("N must be at least 1"));
        }
        if self.s == 0 {
            return Err(Error::config("S must be at least 1"));
        }
        if self.tau == 0 {
            return Err(Error::config("tau must be at least 1"));
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be at least 1"));
        }
        if self.n_counteradaptive > self.n {
            return Err(Error::config(format!(
                "{} counteradaptive agents requested but N={}",
                self.n_counteradaptive, self.n
            )));
        }
        self.strategy_space().map(|_| ())
    }

    pub fn strategy_space(&self) -> Result<StrategySpace> {
        StrategySpace::new(self.space, self.m)
    }

    /// Draws the disorder this configuration's seed implies.
    pub fn sample_disorder(&self) -> Result<QuenchedDisorder> {
        self.validate()?;
        let mut rng = disorder_rng(self.seed);
        sample_quenched_disorder(self.n, self.s, self.strategy_space()?, &mut rng)
    }
}

/// Measurements from one run, over the measured window only.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub bit_series: Vec<u8>,
    pub a_series: Vec<i64>,
    /// Mean per-step gain over agents.
    pub agent_wealth_per_step: f64,
    /// Mean per-step virtual gain over all `S N` strategy slots.
    pub strategy_wealth_per_step: f64,
    /// `Var[A] / N`.
    pub volatility: f64,
    pub per_agent_gains: Vec<f64>,
    pub n_counteradaptive: usize,
}

impl RunResult {
    pub fn counteradaptive_gain(&self) -> Option<f64> {
        mean(&self.per_agent_gains[..self.n_counteradaptive])
    }

    pub fn standard_gain(&self) -> Option<f64> {
        mean(&self.per_agent_gains[self.n_counteradaptive..])
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Runs `config` on a disorder sampled from its seed.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    let disorder = config.sample_disorder()?;
    run_with_disorder(config, &disorder)
}

pub fn run_with_disorder(config: &SimConfig, disorder: &QuenchedDisorder) -> Result<RunResult> {
    let mut state = SimState::new(config.clone(), disorder)?;
    Ok(state.measure(config.warmup, config.steps))
}

/// Agent and strategy gains averaged over independent runs.
#[derive(Clone, Debug, PartialEq)]
pub struct GainReport {
    pub kind: GameKind,
    pub m: u32,
    pub tau: usize,
    pub n: usize,
    pub runs: usize,
    pub agent: MeanSe,
    pub strategy: MeanSe,
    pub volatility: MeanSe,
}

/// Runs `runs` independent games, each on a fresh disorder, with run seeds
/// derived from `config.seed` under the tag `"ensemble"`.
pub fn ensemble_gains(config: &SimConfig, runs: usize) -> Result<GainReport> {
    ensemble_gains_tagged(config, runs, "ensemble")
}

pub(crate) fn ensemble_gains_tagged(
    config: &SimConfig,
    runs: usize,
    tag: &str,
) -> Result<GainReport> {
    if runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }
    config.validate()?;
    let results = ensemble_runs(config, runs, tag)?;
    let agent: Vec<f64> = results.iter().map(|r| r.agent_wealth_per_step).collect();
    let strategy: Vec<f64> = results.iter().map(|r| r.strategy_wealth_per_step).collect();
    let vol: Vec<f64> = results.iter().map(|r| r.volatility).collect();
    Ok(GainReport {
        kind: config.kind,
        m: config.m,
        tau: config.tau,
        n: config.n,
        runs,
        agent: MeanSe::from_samples(&agent),
        strategy: MeanSe::from_samples(&strategy),
        volatility: MeanSe::from_samples(&vol),
    })
}

/// The raw results of an ensemble, in run order.
pub fn ensemble_runs(config: &SimConfig, runs: usize, tag: &str) -> Result<Vec<RunResult>> {
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut c = config.clone();
            c.seed = derive_seed(config.seed, tag, i as u64);
            run(&c)
        })
        .collect()
}
