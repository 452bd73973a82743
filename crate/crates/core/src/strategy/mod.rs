// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Strategies, histories and strategy spaces.
//!
//! A strategy is a lookup table from an `m`-bit history to an action in
//! `{-1, +1}`. Histories are packed into integers with the most recent
//! outcome in the least-significant bit, so appending an outcome is a shift
//! left followed by a mask.
//!
//! Two strategy spaces are supported:
//!
//! * the *reduced* space of `2^(m+1)` strategies, built from the sign rows
//!   of the order-`2^m` Walsh–Hadamard family and their negations. Strategy
//!   `k` and strategy `R-1-k` are negations of each other, and any two
//!   members are at Hamming distance `0`, `2^(m-1)` or `2^m`;
//! * the *full* space of all `2^(2^m)` tables, where strategy `k` plays
//!   `+1` on history `h` iff bit `h` of `k` is set.
//!
//! Neither space is materialized: actions are evaluated on demand, so the
//! reduced space is usable up to `m = 14` where it holds 32768 tables of
//! 16384 entries each.

mod disorder;

use std::fmt;
use std::str::FromStr;

pub use disorder::{sample_quenched_disorder, strategy_counts, QuenchedDisorder};

use crate::error::{Error, Result};

/// Largest memory accepted for the reduced strategy space.
pub const MAX_MEMORY: u32 = 14;

/// Largest memory accepted for the full strategy space (`2^(2^4)` tables).
pub const MAX_FULL_MEMORY: u32 = 4;

/// A lookup table from history code to action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strategy {
    table: Vec<i8>,
}

impl Strategy {
    pub fn new(table: Vec<i8>) -> Result<Self> {
        if table.len() < 2 || !table.len().is_power_of_two() {
            return Err(Error::config(format!(
                "strategy table length {} is not 2^m with m >= 1",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&a| a != 1 && a != -1) {
            return Err(Error::config(format!("strategy action {bad} is not -1 or +1")));
        }
        Ok(Strategy { table })
    }

    /// Builds a table from bits, `1 -> +1` and `0 -> -1`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Strategy::new(bits.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect())
    }

    pub fn memory(&self) -> u32 {
        self.table.len().trailing_zeros()
    }

    #[inline]
    pub fn action(&self, history: HistoryCode) -> i8 {
        self.table[history.value()]
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    pub fn negated(&self) -> Strategy {
        Strategy {
            table: self.table.iter().map(|a| -a).collect(),
        }
    }

    /// Number of histories on which the two tables prescribe different actions.
    pub fn hamming_distance(&self, other: &Strategy) -> usize {
        assert_eq!(self.table.len(), other.table.len(), "tables of different memory");
        self.table
            .iter()
            .zip(&other.table)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// The last `m` outcome bits, most recent in the least-significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HistoryCode(usize);

impl HistoryCode {
    pub fn new(value: usize, m: u32) -> Result<Self> {
        if value >= 1usize << m {
            return Err(Error::config(format!("history {value} does not fit in {m} bits")));
        }
        Ok(HistoryCode(value))
    }

    #[inline]
    pub fn value(self) -> usize {
        self.0
    }

    /// Appends `bit` as the newest outcome and drops the oldest one.
    #[inline]
    pub fn push(self, bit: u8, m: u32) -> HistoryCode {
        HistoryCode(((self.0 << 1) | bit as usize) & mask(m))
    }
}

/// The last `len` outcome bits ("path history"), most recent in the
/// least-significant bit. Its low `m` bits are the current [`HistoryCode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PathCode {
    value: u64,
    len: u32,
}

impl PathCode {
    pub fn new(value: u64, len: u32) -> Result<Self> {
        if len == 0 || len > 63 || value >> len != 0 {
            return Err(Error::config(format!("path {value} does not fit in {len} bits")));
        }
        Ok(PathCode { value, len })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn len(self) -> u32 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn history(self, m: u32) -> HistoryCode {
        HistoryCode(self.value as usize & mask(m))
    }

    /// Bit `age` of the path, where age 0 is the newest outcome.
    pub fn bit(self, age: u32) -> u8 {
        ((self.value >> age) & 1) as u8
    }

    pub fn push(self, bit: u8) -> PathCode {
        PathCode {
            value: ((self.value << 1) | bit as u64) & ((1u64 << self.len) - 1),
            len: self.len,
        }
    }
}

#[inline]
pub(crate) fn mask(bits: u32) -> usize {
    (1usize << bits) - 1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    #[default]
    Reduced,
    Full,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::Reduced => "reduced",
            SpaceKind::Full => "full",
        })
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reduced" | "rss" => Ok(SpaceKind::Reduced),
            "full" => Ok(SpaceKind::Full),
            other => Err(Error::config(format!("unknown strategy space '{other}'"))),
        }
    }
}

/// An ordered strategy space of memory `m`, evaluated lazily.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrategySpace {
    kind: SpaceKind,
    m: u32,
}

impl StrategySpace {
    pub fn new(kind: SpaceKind, m: u32) -> Result<Self> {
        let max = match kind {
            SpaceKind::Reduced => MAX_MEMORY,
            SpaceKind::Full => MAX_FULL_MEMORY,
        };
        if m == 0 || m > max {
            return Err(Error::config(format!(
                "memory m={m} outside 1..={max} for the {kind} strategy space"
            )));
        }
        Ok(StrategySpace { kind, m })
    }

    pub fn reduced(m: u32) -> Result<Self> {
        StrategySpace::new(SpaceKind::Reduced, m)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn memory(&self) -> u32 {
        self.m
    }

    pub fn history_count(&self) -> usize {
        1 << self.m
    }

    /// Number of strategies, `2^(m+1)` or `2^(2^m)`.
    pub fn size(&self) -> usize {
        match self.kind {
            SpaceKind::Reduced => 2 << self.m,
            SpaceKind::Full => 1 << (1usize << self.m),
        }
    }

    /// Action of strategy `k` on history `h`.
    #[inline]
    pub fn action(&self, k: usize, h: usize) -> i8 {
        debug_assert!(k < self.size() && h < self.history_count());
        match self.kind {
            SpaceKind::Reduced => {
                let half = 1usize << self.m;
                if k < half {
                    walsh_sign_row(k, h, self.m)
                } else {
                    -walsh_sign_row(2 * half - 1 - k, h, self.m)
                }
            }
            SpaceKind::Full => {
                if (k >> h) & 1 == 1 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn table(&self, k: usize) -> Vec<i8> {
        (0..self.history_count()).map(|h| self.action(k, h)).collect()
    }

    pub fn strategy(&self, k: usize) -> Strategy {
        Strategy { table: self.table(k) }
    }

    pub fn strategies(&self) -> impl Iterator<Item = Strategy> + '_ {
        (0..self.size()).map(move |k| self.strategy(k))
    }
}

/// Row `k` of the negated Walsh–Hadamard family with the row index
/// bit-reversed, which reproduces the canonical `m = 2` ordering
/// (all `-1` first, then `(-1,-1,+1,+1)`, `(-1,+1,-1,+1)`, `(-1,+1,+1,-1)`).
#[inline]
fn walsh_sign_row(k: usize, h: usize, m: u32) -> i8 {
    let row = k.reverse_bits() >> (usize::BITS - m);
    if (row & h).count_ones() % 2 == 0 {
        -1
    } else {
        1
    }
}

/// The reduced strategy space of memory `m`, `1 <= m <= 14`.
pub fn build_reduced_strategy_space(m: u32) -> Result<StrategySpace> {
    StrategySpace::reduced(m)
}
