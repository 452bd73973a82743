// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo estimates of the quantities the Markov chain predicts.
//!
//! The chain's answer is the long-run average from a uniformly random path.
//! Chains with several absorbing cycles are common (especially in the
//! majority games), and some hold the game in a transient cycle for
//! thousands of steps first, so one long run is not an estimate of it.
//! Instead many independent replicas are started from uniformly spread
//! paths, each is burnt in and then measured, and the replica means are
//! averaged. Their spread carries both the noise within a run and the
//! chance of ending in one cycle or another.

use rand::Rng;
use rayon::prelude::*;

use crate::analytics::path_bits;
use crate::engine::{GameKind, SimConfig, SimState};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, dynamics_rng};
use crate::stats::MeanSe;
use crate::strategy::QuenchedDisorder;

#[derive(Clone, Debug, PartialEq)]
pub struct NumericPlan {
    /// Measured steps over all replicas.
    pub total_steps: usize,
    pub replicas: usize,
    /// Most discarded steps per replica before measuring.
    ///
    /// A replica that runs for longer than the number of paths without a
    /// coin being thrown is locked in a cycle for good. Burn-in goes in
    /// stages, each as long as all before it, and ends after the first
    /// stage in which no further replica locks (or when all have).
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for NumericPlan {
    fn default() -> NumericPlan {
        NumericPlan {
            total_steps: 200_000,
            replicas: 128,
            burn_in: 1 << 18,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericGains {
    pub agent: MeanSe,
    pub strategy: MeanSe,
    /// Measured steps actually played.
    pub steps: usize,
}

const FIRST_STAGE: usize = 1024;

struct Replica {
    state: SimState,
    forced: usize,
    locked: bool,
}

/// Start path of each replica. When the replicas can be shared out evenly
/// every path gets the same number, otherwise paths are drawn uniformly.
fn start_paths(bits: u32, replicas: usize, seed: u64) -> Vec<u64> {
    if bits < 32 && replicas % (1usize << bits) == 0 {
        (0..replicas as u64).map(|i| i % (1u64 << bits)).collect()
    } else {
        let mut rng = dynamics_rng(derive_seed(seed, "numeric-starts", 0));
        (0..replicas).map(|_| rng.gen_range(0..1u64 << bits)).collect()
    }
}

/// Per-step agent and strategy gains of `kind` on `disorder`, estimated by
/// simulation from warm starts spread uniformly over the chain's paths.
pub fn numeric_gains(
    kind: GameKind,
    disorder: &QuenchedDisorder,
    tau: usize,
    plan: &NumericPlan,
) -> Result<NumericGains> {
    if plan.replicas < 2 {
        return Err(Error::config("a numeric plan needs at least 2 replicas"));
    }
    let m = disorder.memory();
    let bits = path_bits(kind, m, tau);
    if bits > 63 {
        return Err(Error::config(format!("paths of {bits} bits cannot be simulated")));
    }
    let starts = start_paths(bits, plan.replicas, plan.seed);
    let steps = (plan.total_steps / plan.replicas).max(1);
    let locked_after = if bits < 32 { 1usize << bits } else { usize::MAX };
    let n = disorder.agent_count() as f64;
    let slots = (disorder.agent_count() * disorder.strategies_per_agent()) as f64;
    let base = SimConfig::new(kind, disorder.agent_count(), m, disorder.strategies_per_agent(), tau);
    base.validate()?;

    let mut replicas: Vec<Replica> = starts
        .iter()
        .enumerate()
        .map(|(i, &start)| {
            let c = base.clone().with_seed(derive_seed(plan.seed, "numeric", i as u64));
            Ok(Replica {
                state: SimState::at_path(c, disorder, start)?,
                forced: 0,
                locked: false,
            })
        })
        .collect::<Result<_>>()?;

    let mut burnt = 0;
    let mut stage = FIRST_STAGE.min(plan.burn_in);
    while stage > 0 {
        let newly: usize = replicas
            .par_iter_mut()
            .filter(|r| !r.locked)
            .map(|r| {
                for _ in 0..stage {
                    r.forced = if r.state.step_totals().forced { r.forced + 1 } else { 0 };
                    if r.forced > locked_after {
                        r.locked = true;
                        return 1;
                    }
                }
                0
            })
            .sum();
        burnt += stage;
        if newly == 0 || replicas.iter().all(|r| r.locked) {
            break;
        }
        stage = burnt.min(plan.burn_in - burnt);
    }

    let means: Vec<(f64, f64)> = replicas
        .par_iter_mut()
        .map(|r| {
            let (mut agent, mut strategy) = (0i64, 0i64);
            for _ in 0..steps {
                let t = r.state.step_totals();
                agent += t.agent;
                strategy += t.strategy;
            }
            (
                agent as f64 / (n * steps as f64),
                strategy as f64 / (slots * steps as f64),
            )
        })
        .collect();

    let agent: Vec<f64> = means.iter().map(|x| x.0).collect();
    let strategy: Vec<f64> = means.iter().map(|x| x.1).collect();
    Ok(NumericGains {
        agent: MeanSe::from_samples(&agent),
        strategy: MeanSe::from_samples(&strategy),
        steps: steps * plan.replicas,
    })
}
