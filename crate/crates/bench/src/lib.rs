// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use thgame_core::engine::{GameKind, SimConfig, SimState};
use thgame_core::experiment::sample_disorders;
use thgame_core::persistence::BitSeries;
use thgame_core::QuenchedDisorder;

pub const AGENTS: usize = 31;
pub const SEED: u64 = 1;

/// A fixed 31-agent disorder at memory `m`.
pub fn disorder(m: u32) -> QuenchedDisorder {
    sample_disorders(AGENTS, m, 1, SEED)
        .expect("valid memory")
        .remove(0)
}

/// A game already past its first `warmup` steps.
pub fn warm_game(kind: GameKind, m: u32, tau: usize, warmup: usize) -> SimState {
    let d = disorder(m);
    let config = SimConfig::new(kind, AGENTS, m, 2, tau).with_seed(SEED);
    let mut state = SimState::new(config, &d).expect("valid config");
    for _ in 0..warmup {
        state.step_totals();
    }
    state
}

/// Outcome bits of `len` steps of a warmed-up game.
pub fn outcome_series(kind: GameKind, m: u32, tau: usize, len: usize) -> BitSeries {
    let mut state = warm_game(kind, m, tau, 400);
    let bits = (0..len).map(|_| state.step().winning_bit).collect();
    BitSeries::new(bits).expect("bits are 0 or 1")
}
