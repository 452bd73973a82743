// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact expected gains from the path-history Markov chain.
//!
//! With a finite score window the game is a Markov chain on the last
//! `m + tau + lag` outcome bits (`lag = 1` for the dollar game, whose
//! strategies are scored on the action taken one step earlier). A path
//! fixes every strategy's window score and the current history, hence
//! every agent's choice except for agents whose two strategies are tied
//! on score but disagree on the action: those toss a coin. Per path this
//! gives a determined vote `A_D` and an undecided count `N_U`, and the
//! next outcome is `1` with probability `P[A_D + 2X - N_U > 0]`,
//! `X ~ Binomial(N_U, 1/2)`.
//!
//! The stationary distribution `mu` of that chain weights per-path
//! quantities into per-step expectations:
//!
//! * strategies: `(1 / 2N) sum_k kappa_k dS_k(p)`, where `dS_k(p)` is the
//!   increment strategy `k` earned on the last transition of path `p`;
//! * agents (sign payoff, odd `N`): `-E|A| / N` in the minority game,
//!   `+E|A| / N` in the majority game, and `E[A(t) Sign A(t+1)] / N` in the
//!   dollar game, all with the binomial spread of the undecided agents
//!   included.
//!
//! [`MarkovAnalysis::determined_vote_gain`] gives the cruder `±|A_D| / N`
//! form that ignores the undecided agents.

mod chain;
mod tables;

pub use chain::{steady_state, transition_matrix, SteadyState, TransitionMatrix};
pub use tables::{
    action_table, path_score_table, score_increment_table, ActionTable, PathScoreTable,
    ScoreIncrementTable,
};

use rayon::prelude::*;

use crate::engine::GameKind;
use crate::error::{Error, Result};
use crate::strategy::{mask, strategy_counts, QuenchedDisorder, StrategySpace};

/// Largest `m + tau` the chain is built for.
pub const MAX_PATH_MEMORY: u32 = 16;

/// Largest agent count; the binomial sums are evaluated exactly.
pub const MAX_AGENTS: usize = 64;

/// Number of bits in a chain state.
pub fn path_bits(kind: GameKind, m: u32, tau: usize) -> u32 {
    m + tau as u32 + kind.lag()
}

/// Window score of strategy `k` on `path`: the sum of its increments over
/// the `tau` transitions the path encodes. The transition of age `j`
/// (0 = newest) has outcome bit `j` and was acted on the `m`-bit history
/// starting at bit `j + 1 + lag`.
#[inline]
pub(crate) fn path_score(
    space: &StrategySpace,
    kind: GameKind,
    tau: usize,
    k: usize,
    path: usize,
) -> i32 {
    let m = space.memory();
    let lag = kind.lag();
    (0..tau as u32)
        .map(|age| transition_increment(space, kind, k, path, age, lag, m))
        .sum()
}

#[inline]
fn transition_increment(
    space: &StrategySpace,
    kind: GameKind,
    k: usize,
    path: usize,
    age: u32,
    lag: u32,
    m: u32,
) -> i32 {
    let outcome = if (path >> age) & 1 == 1 { 1 } else { -1 };
    let acted = (path >> (age + 1 + lag)) & mask(m);
    kind.payoff_sign() as i32 * i32::from(space.action(k, acted)) * outcome
}

/// Determined vote and undecided count per path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminedVotes {
    pub a_d: Vec<i32>,
    pub n_u: Vec<u32>,
}

#[derive(Clone, Copy, Debug, Default)]
struct PathSummary {
    a_d: i32,
    n_u: u32,
    /// `sum_k kappa_k * dS_k` over the last transition.
    step_points: i64,
    /// `sum_k kappa_k * s_k` over the whole window.
    window_points: i64,
}

fn check_inputs(disorder: &QuenchedDisorder, tau: usize) -> Result<()> {
    disorder.require_pairs()?;
    let m = disorder.memory();
    if tau == 0 {
        return Err(Error::config("tau must be at least 1"));
    }
    if m as usize + tau > MAX_PATH_MEMORY as usize {
        return Err(Error::config(format!(
            "m + tau = {} exceeds {MAX_PATH_MEMORY}",
            m as usize + tau
        )));
    }
    if disorder.agent_count() > MAX_AGENTS {
        return Err(Error::config(format!(
            "N = {} exceeds {MAX_AGENTS}",
            disorder.agent_count()
        )));
    }
    Ok(())
}

fn summarize(kind: GameKind, disorder: &QuenchedDisorder, tau: usize) -> Result<Vec<PathSummary>> {
    check_inputs(disorder, tau)?;
    let space = disorder.space();
    let m = space.memory();
    let bits = path_bits(kind, m, tau);
    let kappa_full = strategy_counts(disorder);
    let held: Vec<usize> = (0..space.size()).filter(|&k| kappa_full[k] > 0).collect();
    let kappa: Vec<i64> = held.iter().map(|&k| i64::from(kappa_full[k])).collect();
    let local = |k: u32| held.binary_search(&(k as usize)).expect("held strategy");
    let pairs: Vec<(usize, usize, i32)> = disorder
        .omega()
        .into_iter()
        .map(|(t, c)| (local(t[0]), local(t[1]), c as i32))
        .collect();
    let lag = kind.lag();

    let summaries = (0..1usize << bits)
        .into_par_iter()
        .map_init(
            || vec![0i32; held.len()],
            |scores, path| {
                let h = path & mask(m);
                let mut step_points = 0i64;
                let mut window_points = 0i64;
                for (i, &k) in held.iter().enumerate() {
                    let last = transition_increment(&space, kind, k, path, 0, lag, m);
                    scores[i] = path_score(&space, kind, tau, k, path);
                    step_points += kappa[i] * i64::from(last);
                    window_points += kappa[i] * i64::from(scores[i]);
                }
                let mut a_d = 0i32;
                let mut n_u = 0u32;
                for &(i, j, count) in &pairs {
                    let (ai, aj) = (space.action(held[i], h), space.action(held[j], h));
                    let vote = match scores[i].cmp(&scores[j]) {
                        std::cmp::Ordering::Greater => ai,
                        std::cmp::Ordering::Less => aj,
                        std::cmp::Ordering::Equal if ai == aj => ai,
                        std::cmp::Ordering::Equal => {
                            n_u += count as u32;
                            continue;
                        }
                    };
                    a_d += i32::from(vote) * count;
                }
                PathSummary {
                    a_d,
                    n_u,
                    step_points,
                    window_points,
                }
            },
        )
        .collect();
    Ok(summaries)
}

/// Per-path determined vote `A_D` and undecided count `N_U` for an `S = 2`
/// disorder. An agent is undecided on a path iff its two strategies have
/// equal window scores and prescribe different actions on the current
/// history; otherwise its vote is fixed.
pub fn decided_and_undecided(
    kind: GameKind,
    disorder: &QuenchedDisorder,
    tau: usize,
) -> Result<DeterminedVotes> {
    let s = summarize(kind, disorder, tau)?;
    Ok(DeterminedVotes {
        a_d: s.iter().map(|p| p.a_d).collect(),
        n_u: s.iter().map(|p| p.n_u).collect(),
    })
}

/// `P(X = x)` for `X ~ Binomial(n, 1/2)`, `x = 0..=n`.
pub(crate) fn fair_binomial(n: u32) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(n as usize + 1);
    let mut p = 0.5f64.powi(n as i32);
    for x in 0..=n {
        pmf.push(p);
        p = p * f64::from(n - x) / f64::from(x + 1);
    }
    pmf
}

/// Everything the chain says about one game on one disorder.
#[derive(Clone, Debug)]
pub struct MarkovAnalysis {
    kind: GameKind,
    m: u32,
    tau: usize,
    n: usize,
    votes: DeterminedVotes,
    transition: TransitionMatrix,
    steady: SteadyState,
    step_points: Vec<i64>,
    window_points: Vec<i64>,
}

impl MarkovAnalysis {
    /// Needs `S = 2`, odd `N <= 64` and `m + tau <= 16`.
    pub fn new(kind: GameKind, disorder: &QuenchedDisorder, tau: usize) -> Result<MarkovAnalysis> {
        let n = disorder.agent_count();
        if n % 2 == 0 {
            return Err(Error::config(format!(
                "the exact chain needs an odd number of agents, got N={n}"
            )));
        }
        let summaries = summarize(kind, disorder, tau)?;
        let votes = DeterminedVotes {
            a_d: summaries.iter().map(|p| p.a_d).collect(),
            n_u: summaries.iter().map(|p| p.n_u).collect(),
        };
        let transition = chain::from_votes(path_bits(kind, disorder.memory(), tau), &votes, n)?;
        let steady = steady_state(&transition)?;
        Ok(MarkovAnalysis {
            kind,
            m: disorder.memory(),
            tau,
            n,
            votes,
            transition,
            steady,
            step_points: summaries.iter().map(|p| p.step_points).collect(),
            window_points: summaries.iter().map(|p| p.window_points).collect(),
        })
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn memory(&self) -> u32 {
        self.m
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn votes(&self) -> &DeterminedVotes {
        &self.votes
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn steady_state(&self) -> &SteadyState {
        &self.steady
    }

    /// Expected per-step gain of an agent, averaged over agents.
    pub fn agent_gain(&self) -> f64 {
        let mu = &self.steady.probs;
        let mut pmfs: Vec<Option<Vec<f64>>> = vec![None; self.n + 1];
        let mut total = 0.0;
        for (p, &weight) in mu.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let (a_d, n_u) = (self.votes.a_d[p], self.votes.n_u[p]);
            let pmf = pmfs[n_u as usize].get_or_insert_with(|| fair_binomial(n_u));
            let mut expected = 0.0;
            for (x, &px) in pmf.iter().enumerate() {
                let a = a_d + 2 * x as i32 - n_u as i32;
                expected += px
                    * match self.kind {
                        GameKind::Minority => -f64::from(a.abs()),
                        GameKind::Majority => f64::from(a.abs()),
                        GameKind::Dollar => {
                            let next = self.transition.successor(p, u8::from(a > 0));
                            f64::from(a) * (2.0 * self.transition.up_probability(next) - 1.0)
                        }
                    };
            }
            total += weight * expected;
        }
        total / self.n as f64
    }

    /// `±(1/N) |A_D| . mu`, minus for the minority game.
    pub fn determined_vote_gain(&self) -> f64 {
        let sum: f64 = self
            .votes
            .a_d
            .iter()
            .zip(&self.steady.probs)
            .map(|(a, w)| f64::from(a.abs()) * w)
            .sum();
        self.kind.payoff_sign() as f64 * sum / self.n as f64
    }

    /// Expected per-step virtual gain, averaged over all `2N` strategy slots.
    pub fn strategy_gain(&self) -> f64 {
        weighted(&self.step_points, &self.steady.probs) / (2 * self.n) as f64
    }

    /// `(1/2N) (s . kappa) . mu` with `s` the whole-window path scores; under
    /// stationarity this is `tau` times [`strategy_gain`](Self::strategy_gain).
    pub fn window_strategy_gain(&self) -> f64 {
        weighted(&self.window_points, &self.steady.probs) / (2 * self.n) as f64
    }
}

fn weighted(points: &[i64], mu: &[f64]) -> f64 {
    points.iter().zip(mu).map(|(&s, w)| s as f64 * w).sum()
}

pub fn expected_agent_gain(kind: GameKind, disorder: &QuenchedDisorder, tau: usize) -> Result<f64> {
    Ok(MarkovAnalysis::new(kind, disorder, tau)?.agent_gain())
}

pub fn expected_strategy_gain(
    kind: GameKind,
    disorder: &QuenchedDisorder,
    tau: usize,
) -> Result<f64> {
    Ok(MarkovAnalysis::new(kind, disorder, tau)?.strategy_gain())
}

#[cfg(test)]
mod tests;
