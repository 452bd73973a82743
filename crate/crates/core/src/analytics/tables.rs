// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

use crate::engine::GameKind;
use crate::error::{Error, Result};
use crate::strategy::{mask, StrategySpace};

use super::{path_bits, path_score, MAX_PATH_MEMORY};

/// Largest memory for tabulated action and increment tables.
pub const MAX_TABLE_MEMORY: u32 = 10;
const MAX_INCREMENT_MEMORY: u32 = 6;
const MAX_PATH_TABLE_ENTRIES: usize = 1 << 26;

/// Reduced-space actions `a[k][h]` held as a dense table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTable {
    m: u32,
    rows: Vec<Vec<i8>>,
}

impl ActionTable {
    pub fn memory(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, k: usize, h: usize) -> i8 {
        self.rows[k][h]
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }
}

pub fn action_table(m: u32) -> Result<ActionTable> {
    if m > MAX_TABLE_MEMORY {
        return Err(Error::config(format!(
            "action tables are built for m <= {MAX_TABLE_MEMORY}, got {m}"
        )));
    }
    let space = StrategySpace::reduced(m)?;
    Ok(ActionTable {
        m,
        rows: (0..space.size()).map(|k| space.table(k)).collect(),
    })
}

/// Virtual score increments of every reduced-space strategy, per history
/// transition.
///
/// A transition is the history a strategy acted on together with the
/// outcome bit `b` that followed. The increment is
/// `payoff_sign * a_k(acted) * (2b - 1)`. The dollar game uses the
/// majority table; its one-step lag between action and payoff lives in the
/// path layer, see [`lag`](Self::lag).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreIncrementTable {
    kind: GameKind,
    actions: ActionTable,
}

impl ScoreIncrementTable {
    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn memory(&self) -> u32 {
        self.actions.m
    }

    pub fn lag(&self) -> u32 {
        self.kind.lag()
    }

    pub fn increment(&self, k: usize, acted: usize, outcome_bit: u8) -> i8 {
        let s = if outcome_bit == 1 { 1 } else { -1 };
        self.kind.payoff_sign() as i8 * self.actions.get(k, acted) * s
    }

    /// Increments of all strategies for one transition.
    pub fn column(&self, acted: usize, outcome_bit: u8) -> Vec<i8> {
        (0..self.actions.size())
            .map(|k| self.increment(k, acted, outcome_bit))
            .collect()
    }

    /// Lookup by 1-based history labels: `acted` is the label of the history
    /// acted on, `following` the label of the history after it, whose newest
    /// bit is the outcome. `None` if no single step joins the two.
    pub fn at_labels(&self, acted: usize, following: usize) -> Option<Vec<i8>> {
        let count = 1usize << self.memory();
        if acted == 0 || following == 0 || acted > count || following > count {
            return None;
        }
        let (h, next) = (acted - 1, following - 1);
        let bit = (next & 1) as u8;
        if ((h << 1) | bit as usize) & mask(self.memory()) != next {
            return None;
        }
        Some(self.column(h, bit))
    }
}

pub fn score_increment_table(kind: GameKind, m: u32) -> Result<ScoreIncrementTable> {
    if m > MAX_INCREMENT_MEMORY {
        return Err(Error::config(format!(
            "increment tables are built for m <= {MAX_INCREMENT_MEMORY}, got {m}"
        )));
    }
    Ok(ScoreIncrementTable {
        kind,
        actions: action_table(m)?,
    })
}

/// Window score of every reduced-space strategy on every chain state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathScoreTable {
    kind: GameKind,
    m: u32,
    tau: usize,
    bits: u32,
    size: usize,
    scores: Vec<i16>,
}

impl PathScoreTable {
    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn memory(&self) -> u32 {
        self.m
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Bits per path.
    pub fn path_bits(&self) -> u32 {
        self.bits
    }

    pub fn path_count(&self) -> usize {
        1 << self.bits
    }

    pub fn strategy_count(&self) -> usize {
        self.size
    }

    pub fn get(&self, k: usize, path: usize) -> i32 {
        i32::from(self.scores[k * self.path_count() + path])
    }

    /// Scores of strategy `k` on every path.
    pub fn row(&self, k: usize) -> &[i16] {
        let n = self.path_count();
        &self.scores[k * n..(k + 1) * n]
    }
}

pub fn path_score_table(kind: GameKind, m: u32, tau: usize) -> Result<PathScoreTable> {
    if tau == 0 {
        return Err(Error::config("tau must be at least 1"));
    }
    if m as usize + tau > MAX_PATH_MEMORY as usize {
        return Err(Error::config(format!(
            "m + tau = {} exceeds {MAX_PATH_MEMORY}",
            m as usize + tau
        )));
    }
    let space = StrategySpace::reduced(m)?;
    let bits = path_bits(kind, m, tau);
    let entries = space.size() << bits;
    if entries > MAX_PATH_TABLE_ENTRIES {
        return Err(Error::config(format!(
            "a path score table for m={m}, tau={tau} would hold {entries} entries"
        )));
    }
    let mut scores = Vec::with_capacity(entries);
    for k in 0..space.size() {
        scores.extend((0..1usize << bits).map(|p| path_score(&space, kind, tau, k, p) as i16));
    }
    Ok(PathScoreTable {
        kind,
        m,
        tau,
        bits,
        size: space.size(),
        scores,
    })
}
