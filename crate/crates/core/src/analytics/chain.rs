// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

use crate::engine::GameKind;
use crate::error::{Error, Result};
use crate::strategy::{mask, QuenchedDisorder};

mod direct;

use super::{decided_and_undecided, fair_binomial, path_bits, DeterminedVotes};

const MAX_DENSE_STATES: usize = 1 << 12;
const STEADY_TOLERANCE: f64 = 5e-13;
const STEADY_MAX_ITERATIONS: usize = 1_000_000;
/// Largest chain whose stationary vector is found by dense elimination.
pub const DIRECT_MAX_STATES: usize = 1 << 10;

/// Column-stochastic transition matrix on `bits`-bit paths.
///
/// From path `p` the chain moves to `(p << 1 | b) & mask`, `b = 1` with
/// probability `up[p]`, so only two entries per column are nonzero and
/// the matrix is held as that vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    bits: u32,
    up: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_up_probabilities(bits: u32, up: Vec<f64>) -> Result<TransitionMatrix> {
        if bits == 0 || bits > 24 {
            return Err(Error::config(format!("unsupported path length {bits}")));
        }
        if up.len() != 1 << bits {
            return Err(Error::config(format!(
                "{} probabilities given for {} states",
                up.len(),
                1usize << bits
            )));
        }
        if let Some(p) = up.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Numerical(format!("transition probability {p} outside [0, 1]")));
        }
        Ok(TransitionMatrix { bits, up })
    }

    pub fn path_bits(&self) -> u32 {
        self.bits
    }

    pub fn size(&self) -> usize {
        self.up.len()
    }

    /// Probability that the next outcome bit is `1`.
    pub fn up_probability(&self, from: usize) -> f64 {
        self.up[from]
    }

    pub fn up_probabilities(&self) -> &[f64] {
        &self.up
    }

    #[inline]
    pub fn successor(&self, from: usize, bit: u8) -> usize {
        ((from << 1) | bit as usize) & mask(self.bits)
    }

    /// `T[to, from]`.
    pub fn get(&self, to: usize, from: usize) -> f64 {
        let mut p = 0.0;
        if self.successor(from, 1) == to {
            p += self.up[from];
        }
        if self.successor(from, 0) == to {
            p += 1.0 - self.up[from];
        }
        p
    }

    /// `T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (from, (&w, &up)) in x.iter().zip(&self.up).enumerate() {
            y[self.successor(from, 1)] += w * up;
            y[self.successor(from, 0)] += w * (1.0 - up);
        }
    }

    /// Dense `T`, row `to`, column `from`.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.size();
        if n > MAX_DENSE_STATES {
            return Err(Error::config(format!("{n} states is too many for a dense matrix")));
        }
        Ok((0..n)
            .map(|to| (0..n).map(|from| self.get(to, from)).collect())
            .collect())
    }

    /// 0/1 matrix of the transitions allowed at all, row `to`, column `from`.
    pub fn adjacency(bits: u32) -> Result<Vec<Vec<u8>>> {
        let n = 1usize << bits;
        if n > MAX_DENSE_STATES {
            return Err(Error::config(format!("{n} states is too many for a dense matrix")));
        }
        let m = mask(bits);
        Ok((0..n)
            .map(|to| {
                (0..n)
                    .map(|from| u8::from((from << 1) & m == to & !1))
                    .collect()
            })
            .collect())
    }
}

/// Transition matrix for an `S = 2` disorder with odd `N`.
pub fn transition_matrix(
    kind: GameKind,
    disorder: &QuenchedDisorder,
    tau: usize,
) -> Result<TransitionMatrix> {
    let n = disorder.agent_count();
    if n % 2 == 0 {
        return Err(Error::config(format!(
            "the exact chain needs an odd number of agents, got N={n}"
        )));
    }
    let votes = decided_and_undecided(kind, disorder, tau)?;
    from_votes(path_bits(kind, disorder.memory(), tau), &votes, n)
}

pub(crate) fn from_votes(bits: u32, votes: &DeterminedVotes, n: usize) -> Result<TransitionMatrix> {
    let pmfs: Vec<Vec<f64>> = (0..=n as u32).map(fair_binomial).collect();
    let up = votes
        .a_d
        .iter()
        .zip(&votes.n_u)
        .map(|(&a_d, &n_u)| {
            pmfs[n_u as usize]
                .iter()
                .enumerate()
                .filter(|&(x, _)| a_d + 2 * x as i32 - n_u as i32 > 0)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0)
        })
        .collect();
    TransitionMatrix::from_up_probabilities(bits, up)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub probs: Vec<f64>,
    pub iterations: usize,
    /// `|T mu - mu|_1` at exit.
    pub residual: f64,
}

/// Stationary distribution reached from the uniform start.
///
/// On a reducible chain this is the mixture of the stationary vectors of
/// the closed classes, weighted by the chance of ending in each from a
/// uniformly random path; on a periodic chain it is the time average over
/// the cycle. Chains of up to [`DIRECT_MAX_STATES`] states are solved
/// directly, which stays exact when some transitions are astronomically
/// unlikely. Larger chains, and the final polish of a direct solution, use
/// the lazy chain `(I + T) / 2`, which has the same stationary vectors as
/// `T` but no periodicity.
pub fn steady_state(t: &TransitionMatrix) -> Result<SteadyState> {
    let n = t.size();
    let start = if n <= DIRECT_MAX_STATES {
        direct::uniform_start_limit(t)?
    } else {
        vec![1.0 / n as f64; n]
    };
    lazy_iteration(t, start)
}

fn lazy_iteration(t: &TransitionMatrix, mut mu: Vec<f64>) -> Result<SteadyState> {
    let n = t.size();
    let mut next = vec![0.0; n];
    for iteration in 0..STEADY_MAX_ITERATIONS {
        t.apply_into(&mu, &mut next);
        let residual: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        if residual <= STEADY_TOLERANCE {
            let total: f64 = mu.iter().sum();
            mu.iter_mut().for_each(|p| *p /= total);
            return Ok(SteadyState {
                probs: mu,
                iterations: iteration,
                residual,
            });
        }
        for (m, x) in mu.iter_mut().zip(&next) {
            *m = 0.5 * (*m + x);
        }
    }
    Err(Error::Numerical(format!(
        "steady state not reached in {STEADY_MAX_ITERATIONS} iterations"
    )))
}
