// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-horizon minority, majority and dollar games.
//!
//! * [`strategy`]: reduced and full strategy spaces, quenched disorder.
//! * [`engine`]: Monte Carlo simulation with a finite score window.
//! * [`analytics`]: exact expected gains from the path-history Markov chain.
//! * [`persistence`]: persistence of binary outcome series.
//! * [`experiment`]: parameter sweeps and CSV output.

pub mod analytics;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod persistence;
pub mod seed;
pub mod stats;
pub mod strategy;

pub use analytics::{MarkovAnalysis, TransitionMatrix};
pub use engine::{GameKind, PayoffRule, RunResult, SimConfig, SimState};
pub use error::{Error, Result};
pub use strategy::{QuenchedDisorder, SpaceKind, StrategySpace};
