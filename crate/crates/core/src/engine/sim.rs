// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GameKind, PayoffRule, RunResult, SimConfig};
use crate::error::{Error, Result};
use crate::seed::dynamics_rng;
use crate::strategy::{mask, QuenchedDisorder, StrategySpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentMode {
    /// Plays the strategy with the most virtual points.
    Standard,
    /// Plays the strategy with the fewest virtual points.
    Counteradaptive,
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub strategy_ids: Vec<u32>,
    pub mode: AgentMode,
    pub wealth: i64,
    slots: Vec<usize>,
    last_action: Option<i8>,
}

impl AgentState {
    pub fn last_action(&self) -> Option<i8> {
        self.last_action
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// Net vote, `#(+1) - #(-1)`.
    pub a: i64,
    /// Outcome bit appended to the history.
    pub winning_bit: u8,
    pub per_agent_payoff: Vec<i64>,
    /// Agents whose tied best strategies disagreed, so a coin decided.
    pub n_undecided: usize,
    /// Virtual payoff summed over all `S N` strategy slots.
    pub strategy_payoff: i64,
}

/// One settled step of the rolling score window. `acted` is the history the
/// scored action was taken on (`None` when there was none yet).
#[derive(Clone, Copy, Debug)]
struct WindowEntry {
    acted: Option<usize>,
    outcome: i64,
}

#[derive(Clone, Copy, Debug)]
struct StepSummary {
    a: i64,
    bit: u8,
    n_undecided: usize,
    strategy_total: i64,
}

/// Mutable state of one game.
#[derive(Clone, Debug)]
pub struct SimState {
    config: SimConfig,
    space: StrategySpace,
    held: Vec<u32>,
    /// Action of held strategy `k` on history `h` at `k * table_len + h`.
    tables: Vec<i8>,
    table_len: usize,
    /// Slots of agent `i` at `i * s .. (i + 1) * s`.
    slots: Vec<usize>,
    kappa: Vec<i64>,
    agents: Vec<AgentState>,
    scores: Vec<i64>,
    window: VecDeque<WindowEntry>,
    history: usize,
    prev_history: Option<usize>,
    path: u64,
    steps_taken: u64,
    rng: ChaCha8Rng,
    actions: Vec<i8>,
    payoffs: Vec<i64>,
}

/// Totals of one step, as returned by [`SimState::step_totals`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepTotals {
    /// Summed agent payoff.
    pub agent: i64,
    /// Summed virtual payoff of all strategy slots.
    pub strategy: i64,
    /// No coin was needed: every tie was between agreeing strategies and
    /// the vote was not split.
    pub forced: bool,
}

impl SimState {
    /// Instantiates one agent per disorder tuple, in disorder order, with
    /// empty score windows and a uniformly drawn initial history. The first
    /// `n_counteradaptive` agents are counteradaptive.
    pub fn new(config: SimConfig, disorder: &QuenchedDisorder) -> Result<SimState> {
        config.validate()?;
        let space = config.strategy_space()?;
        if disorder.space() != space {
            return Err(Error::DisorderMismatch(format!(
                "disorder is drawn from the {} space with m={}, config wants {} with m={}",
                disorder.space().kind(),
                disorder.memory(),
                space.kind(),
                space.memory()
            )));
        }
        if disorder.agent_count() != config.n || disorder.strategies_per_agent() != config.s {
            return Err(Error::DisorderMismatch(format!(
                "disorder has N={} S={}, config has N={} S={}",
                disorder.agent_count(),
                disorder.strategies_per_agent(),
                config.n,
                config.s
            )));
        }

        let mut local = BTreeMap::new();
        for tuple in disorder.agents() {
            for &k in tuple {
                local.entry(k).or_insert(0usize);
            }
        }
        let held: Vec<u32> = local.keys().copied().collect();
        for (i, slot) in local.values_mut().enumerate() {
            *slot = i;
        }
        let table_len = space.history_count();
        let tables = held.iter().flat_map(|&k| space.table(k as usize)).collect();
        let mut kappa = vec![0i64; held.len()];
        let agents: Vec<AgentState> = disorder
            .agents()
            .iter()
            .enumerate()
            .map(|(i, tuple)| {
                let slots: Vec<usize> = tuple.iter().map(|k| local[k]).collect();
                for &s in &slots {
                    kappa[s] += 1;
                }
                AgentState {
                    strategy_ids: tuple.clone(),
                    mode: if i < config.n_counteradaptive {
                        AgentMode::Counteradaptive
                    } else {
                        AgentMode::Standard
                    },
                    wealth: 0,
                    slots,
                    last_action: None,
                }
            })
            .collect();

        let mut rng = dynamics_rng(config.seed);
        let path_bits = (config.m as usize + config.tau).min(64) as u32;
        let path = if path_bits == 64 {
            rng.gen::<u64>()
        } else {
            rng.gen::<u64>() & ((1u64 << path_bits) - 1)
        };
        let n = config.n;
        let tau = config.tau;
        let slots = agents.iter().flat_map(|a: &AgentState| a.slots.clone()).collect();
        Ok(SimState {
            history: path as usize & mask(config.m),
            prev_history: None,
            path,
            space,
            scores: vec![0; held.len()],
            window: VecDeque::with_capacity(tau.min(1 << 16)),
            held,
            tables,
            table_len,
            slots,
            kappa,
            agents,
            steps_taken: 0,
            rng,
            actions: vec![0; n],
            payoffs: vec![0; n],
            config,
        })
    }

    /// Starts a game in the chain state given by a full path history of
    /// `m + tau + lag` bits: the current history, the previous history and
    /// the score window are all read off the path, as if the game had been
    /// running. Only the sign payoff can be reconstructed from bits.
    pub fn at_path(config: SimConfig, disorder: &QuenchedDisorder, path: u64) -> Result<SimState> {
        if config.payoff != PayoffRule::Sign {
            return Err(Error::config("warm start needs the sign payoff"));
        }
        let lag = config.kind.lag();
        let bits = config.m + config.tau as u32 + lag;
        if config.tau > 48 || bits > 63 {
            return Err(Error::config(format!("path of {bits} bits is too long")));
        }
        if path >> bits != 0 {
            return Err(Error::config(format!("path {path} does not fit in {bits} bits")));
        }
        let mut state = SimState::new(config, disorder)?;
        let m = state.config.m;
        let h_mask = mask(m) as u64;
        state.path = path;
        state.history = (path & h_mask) as usize;
        state.prev_history = Some(((path >> 1) & h_mask) as usize);
        let flip = state.config.history_bit_flip;
        for age in (0..state.config.tau as u32).rev() {
            let bit = ((path >> age) & 1) as u8;
            let acted = ((path >> (age + 1 + lag)) & h_mask) as usize;
            let outcome = if (bit == 1) != flip { 1 } else { -1 };
            state.push_window(WindowEntry {
                acted: Some(acted),
                outcome,
            });
        }
        Ok(state)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn space(&self) -> StrategySpace {
        self.space
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn history(&self) -> usize {
        self.history
    }

    /// The last (up to 64) history bits, newest in bit 0.
    pub fn path(&self) -> u64 {
        self.path
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Virtual score (window sum) of a held strategy.
    pub fn strategy_score(&self, strategy: u32) -> Option<i64> {
        self.held
            .binary_search(&strategy)
            .ok()
            .map(|i| self.scores[i])
    }

    /// Current score of each of an agent's strategies, in tuple order.
    pub fn agent_scores(&self, agent: usize) -> Vec<i64> {
        self.agents[agent]
            .slots
            .iter()
            .map(|&s| self.scores[s])
            .collect()
    }

    pub fn step(&mut self) -> StepRecord {
        let summary = self.advance();
        StepRecord {
            a: summary.a,
            winning_bit: summary.bit,
            per_agent_payoff: self.payoffs.clone(),
            n_undecided: summary.n_undecided,
            strategy_payoff: summary.strategy_total,
        }
    }

    /// Plays one step, returning only totals.
    pub fn step_totals(&mut self) -> StepTotals {
        let s = self.advance();
        StepTotals {
            agent: self.payoffs.iter().sum(),
            strategy: s.strategy_total,
            forced: s.n_undecided == 0 && s.a != 0,
        }
    }

    /// Runs `warmup` discarded steps, then measures `steps` steps.
    pub fn measure(&mut self, warmup: usize, steps: usize) -> RunResult {
        for _ in 0..warmup {
            self.advance();
        }
        let start: Vec<i64> = self.agents.iter().map(|a| a.wealth).collect();
        let mut bit_series = Vec::with_capacity(steps);
        let mut a_series = Vec::with_capacity(steps);
        let mut strategy_total = 0i64;
        for _ in 0..steps {
            let s = self.advance();
            bit_series.push(s.bit);
            a_series.push(s.a);
            strategy_total += s.strategy_total;
        }
        let per_agent_gains: Vec<f64> = self
            .agents
            .iter()
            .zip(&start)
            .map(|(a, w0)| (a.wealth - w0) as f64 / steps as f64)
            .collect();
        let n = self.config.n as f64;
        let slots = (self.config.n * self.config.s) as f64;
        let mean_a = a_series.iter().sum::<i64>() as f64 / steps as f64;
        let var_a = a_series
            .iter()
            .map(|&a| (a as f64 - mean_a).powi(2))
            .sum::<f64>()
            / steps as f64;
        RunResult {
            agent_wealth_per_step: per_agent_gains.iter().sum::<f64>() / n,
            strategy_wealth_per_step: strategy_total as f64 / (slots * steps as f64),
            volatility: var_a / n,
            per_agent_gains,
            bit_series,
            a_series,
            n_counteradaptive: self.config.n_counteradaptive,
        }
    }

    /// Adds `weight` times each held strategy's increment for `entry`.
    fn add_increments(scores: &mut [i64], tables: &[i8], len: usize, sign: i64, entry: WindowEntry) {
        let Some(h) = entry.acted else { return };
        let w = sign * entry.outcome;
        for (k, score) in scores.iter_mut().enumerate() {
            *score += w * i64::from(tables[k * len + h]);
        }
    }

    fn push_window(&mut self, entry: WindowEntry) {
        let sign = self.config.kind.payoff_sign();
        if self.window.len() == self.config.tau {
            let old = self.window.pop_front().expect("non-empty window");
            Self::add_increments(&mut self.scores, &self.tables, self.table_len, -sign, old);
        }
        Self::add_increments(&mut self.scores, &self.tables, self.table_len, sign, entry);
        self.window.push_back(entry);
    }

    fn advance(&mut self) -> StepSummary {
        let h = self.history;
        let mut a = 0i64;
        let mut n_undecided = 0usize;
        let per_agent = self.config.s;
        for (i, agent) in self.agents.iter().enumerate() {
            let slots = &self.slots[i * per_agent..(i + 1) * per_agent];
            let worst = agent.mode == AgentMode::Counteradaptive;
            let mut best = self.scores[slots[0]];
            let mut ties = 1usize;
            for &slot in &slots[1..] {
                let sc = self.scores[slot];
                if (worst && sc < best) || (!worst && sc > best) {
                    best = sc;
                    ties = 1;
                } else if sc == best {
                    ties += 1;
                }
            }
            let len = self.table_len;
            let scores = &self.scores;
            let mut tied = slots.iter().copied().filter(|&k| scores[k] == best);
            let chosen = if ties == 1 {
                tied.next().expect("a best slot")
            } else {
                let mut acts = tied.clone().map(|k| self.tables[k * len + h]);
                let first = acts.next().expect("a best slot");
                if acts.any(|x| x != first) {
                    n_undecided += 1;
                }
                tied.nth(self.rng.gen_range(0..ties)).expect("pick within ties")
            };
            let action = self.tables[chosen * self.table_len + h];
            self.actions[i] = action;
            a += i64::from(action);
        }

        let bit = match a.signum() {
            1 => 1,
            -1 => 0,
            _ => self.rng.gen::<bool>() as u8,
        };
        let hist_bit = bit ^ self.config.history_bit_flip as u8;
        let outcome = match self.config.payoff {
            PayoffRule::Sign => a.signum(),
            PayoffRule::Linear => a,
        };
        let kind = self.config.kind;
        let sign = kind.payoff_sign();
        for ((agent, &action), payoff) in self
            .agents
            .iter_mut()
            .zip(&self.actions)
            .zip(self.payoffs.iter_mut())
        {
            let paid = match kind {
                GameKind::Dollar => agent.last_action,
                _ => Some(action),
            };
            *payoff = paid.map_or(0, |x| sign * i64::from(x) * outcome);
            agent.wealth += *payoff;
            agent.last_action = Some(action);
        }

        let entry = WindowEntry {
            acted: match kind {
                GameKind::Dollar => self.prev_history,
                _ => Some(h),
            },
            outcome,
        };
        let strategy_total = match entry.acted {
            Some(acted) => {
                let w = kind.payoff_sign() * entry.outcome;
                self.kappa
                    .iter()
                    .enumerate()
                    .map(|(k, &kappa)| kappa * w * i64::from(self.tables[k * self.table_len + acted]))
                    .sum()
            }
            None => 0,
        };
        self.push_window(entry);

        self.prev_history = Some(h);
        self.history = ((h << 1) | hist_bit as usize) & mask(self.config.m);
        self.path = (self.path << 1) | u64::from(hist_bit);
        self.steps_taken += 1;
        StepSummary {
            a,
            bit: hist_bit,
            n_undecided,
            strategy_total,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{SpaceKind, StrategySpace};

    fn fixture() -> QuenchedDisorder {
        let a4: [[u32; 8]; 8] = [
            [1, 2, 0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 3, 3, 1, 1],
            [0, 0, 2, 0, 1, 0, 0, 0],
            [0, 0, 0, 1, 1, 0, 0, 1],
            [0, 0, 0, 0, 1, 0, 2, 1],
            [0, 0, 0, 0, 0, 2, 2, 1],
            [0, 0, 0, 0, 0, 0, 2, 1],
            [0, 0, 0, 0, 0, 0, 0, 0],
        ];
        let rows: Vec<Vec<u32>> = a4.iter().map(|r| r.to_vec()).collect();
        QuenchedDisorder::from_pair_matrix(StrategySpace::reduced(2).unwrap(), &rows).unwrap()
    }

    fn cfg(kind: GameKind) -> SimConfig {
        SimConfig::new(kind, 31, 2, 2, 1).with_seed(7)
    }

    #[test]
    fn agents_mirror_the_tensor() {
        let d = fixture();
        let state = SimState::new(cfg(GameKind::Minority), &d).unwrap();
        assert_eq!(state.agents().len(), 31);
        let rebuilt = QuenchedDisorder::from_agents(
            d.space(),
            2,
            state.agents().iter().map(|a| a.strategy_ids.clone()).collect(),
        )
        .unwrap();
        assert_eq!(rebuilt.omega(), d.omega());
        assert!(state
            .agents()
            .iter()
            .all(|a| a.mode == AgentMode::Standard));
        assert_eq!(state.window_len(), 0);
    }

    #[test]
    fn counteradaptive_agents_come_first() {
        let mut c = cfg(GameKind::Minority);
        c.n_counteradaptive = 3;
        let state = SimState::new(c, &fixture()).unwrap();
        let modes: Vec<_> = state.agents().iter().map(|a| a.mode).collect();
        assert!(modes[..3].iter().all(|&m| m == AgentMode::Counteradaptive));
        assert!(modes[3..].iter().all(|&m| m == AgentMode::Standard));
    }

    #[test]
    fn same_seed_same_initial_state() {
        let a = SimState::new(cfg(GameKind::Dollar), &fixture()).unwrap();
        let b = SimState::new(cfg(GameKind::Dollar), &fixture()).unwrap();
        assert_eq!(a.path(), b.path());
        assert_eq!(a.history(), b.history());
    }

    #[test]
    fn mismatched_disorder_is_rejected() {
        let d = fixture();
        let c = SimConfig::new(GameKind::Minority, 30, 2, 2, 1);
        assert!(matches!(SimState::new(c, &d), Err(Error::DisorderMismatch(_))));
        let c = SimConfig::new(GameKind::Minority, 31, 3, 2, 1);
        assert!(SimState::new(c, &d).is_err());
        let mut c = SimConfig::new(GameKind::Minority, 31, 2, 2, 1);
        c.space = SpaceKind::Full;
        assert!(SimState::new(c, &d).is_err());
    }

    #[test]
    fn unanimous_vote_payoffs() {
        // Every agent holds the all -1 strategy twice.
        let space = StrategySpace::reduced(2).unwrap();
        let d = QuenchedDisorder::from_counts(space, 2, [(vec![0, 0], 31)]).unwrap();
        for (kind, expected) in [(GameKind::Minority, 1), (GameKind::Majority, -1)] {
            // Everyone votes -1 and lands in the majority.
            let mut state = SimState::new(cfg(kind), &d).unwrap();
            let rec = state.step();
            assert_eq!(rec.a, -31);
            assert_eq!(rec.winning_bit, 0);
            assert_eq!(rec.n_undecided, 0);
            assert!(rec.per_agent_payoff.iter().all(|&p| p == -expected));
        }
        // Same with the all +1 strategy.
        let d = QuenchedDisorder::from_counts(space, 2, [(vec![7, 7], 31)]).unwrap();
        let mut state = SimState::new(cfg(GameKind::Minority), &d).unwrap();
        let rec = state.step();
        assert_eq!(rec.a, 31);
        assert_eq!(rec.winning_bit, 1);
        assert!(rec.per_agent_payoff.iter().all(|&p| p == -1));
        let mut state = SimState::new(cfg(GameKind::Majority), &d).unwrap();
        assert!(state.step().per_agent_payoff.iter().all(|&p| p == 1));
    }

    #[test]
    fn dollar_first_step_pays_nothing() {
        let mut state = SimState::new(cfg(GameKind::Dollar), &fixture()).unwrap();
        let rec = state.step();
        assert!(rec.per_agent_payoff.iter().all(|&p| p == 0));
        assert_eq!(state.strategy_score(0), Some(0));
        let rec = state.step();
        assert!(rec.per_agent_payoff.iter().all(|&p| p.abs() == 1));
    }

    #[test]
    fn first_step_everyone_is_tied() {
        let d = fixture();
        let mut state = SimState::new(cfg(GameKind::Minority), &d).unwrap();
        let h = state.history();
        let space = d.space();
        let disagreeing = d
            .agents()
            .iter()
            .filter(|t| space.action(t[0] as usize, h) != space.action(t[1] as usize, h))
            .count();
        assert_eq!(state.step().n_undecided, disagreeing);
    }

    #[test]
    fn coin_toss_is_fair() {
        // A lone agent holding the all -1 and all +1 strategies is tied on
        // its first step, so its vote is a coin toss.
        let space = StrategySpace::reduced(2).unwrap();
        let d = QuenchedDisorder::from_counts(space, 2, [(vec![0, 7], 1)]).unwrap();
        let trials = 4000;
        let mut plus = 0;
        for t in 0..trials {
            let c = SimConfig::new(GameKind::Minority, 1, 2, 2, 1).with_seed(t);
            let mut state = SimState::new(c, &d).unwrap();
            let rec = state.step();
            assert_eq!(rec.n_undecided, 1);
            if rec.a > 0 {
                plus += 1;
            }
        }
        let expected = trials as f64 / 2.0;
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((plus as f64 - expected).abs() <= 4.0 * sigma, "{plus}");
    }

    #[test]
    fn warm_start_reads_window_from_path() {
        let d = fixture();
        let mut c = cfg(GameKind::Minority);
        c.tau = 3;
        let path = 0b10110;
        let state = SimState::at_path(c.clone(), &d, path).unwrap();
        assert_eq!(state.history(), 0b10);
        assert_eq!(state.window_len(), 3);
        let space = d.space();
        for k in 0..8u32 {
            let mut expected = 0i64;
            for age in 0..3u32 {
                let bit = (path >> age) & 1;
                let acted = ((path >> (age + 1)) & 3) as usize;
                let s = if bit == 1 { 1 } else { -1 };
                expected += -i64::from(space.action(k as usize, acted)) * s;
            }
            if let Some(score) = state.strategy_score(k) {
                assert_eq!(score, expected, "strategy {k}");
            }
        }
        assert!(SimState::at_path(c, &d, 1 << 5).is_err());
    }
}
