// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::{SimConfig, SimState};
use crate::strategy::{sample_quenched_disorder, StrategySpace};

fn a4() -> QuenchedDisorder {
    let rows: Vec<Vec<u32>> = vec![
        vec![1, 2, 0, 0, 1, 1, 0, 0],
        vec![0, 0, 0, 0, 3, 3, 1, 1],
        vec![0, 0, 2, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 1, 0, 0, 1],
        vec![0, 0, 0, 0, 1, 0, 2, 1],
        vec![0, 0, 0, 0, 0, 2, 2, 1],
        vec![0, 0, 0, 0, 0, 0, 2, 1],
        vec![0, 0, 0, 0, 0, 0, 0, 0],
    ];
    QuenchedDisorder::from_pair_matrix(StrategySpace::reduced(2).unwrap(), &rows).unwrap()
}

fn agents(m: u32, pairs: &[[u32; 2]]) -> QuenchedDisorder {
    QuenchedDisorder::from_agents(
        StrategySpace::reduced(m).unwrap(),
        2,
        pairs.iter().map(|p| p.to_vec()).collect(),
    )
    .unwrap()
}

/// Replays the bits of `path` oldest first and scores strategy `k` on
/// each of the last `tau` steps.
fn replayed_score(kind: GameKind, m: u32, tau: usize, k: usize, path: usize) -> i32 {
    let space = StrategySpace::reduced(m).unwrap();
    let len = path_bits(kind, m, tau) as usize;
    let bits: Vec<usize> = (0..len).rev().map(|age| (path >> age) & 1).collect();
    let history_before = |t: usize| -> usize {
        // history formed by bits[t-m .. t], newest in the low bit
        (0..m as usize).fold(0, |h, i| (h << 1) | bits[t - m as usize + i])
    };
    let mut score = 0;
    for t in len - tau..len {
        let acted = match kind {
            GameKind::Dollar => history_before(t - 1),
            _ => history_before(t),
        };
        let sign = if bits[t] == 1 { 1 } else { -1 };
        score += kind.payoff_sign() as i32 * i32::from(space.action(k, acted)) * sign;
    }
    score
}

#[test]
fn allowed_transitions_for_three_bit_paths() {
    let expected: [[u8; 8]; 8] = [
        [1, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 0, 0, 1, 0, 0, 0],
        [0, 1, 0, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0, 1, 0],
        [0, 0, 1, 0, 0, 0, 1, 0],
        [0, 0, 0, 1, 0, 0, 0, 1],
        [0, 0, 0, 1, 0, 0, 0, 1],
    ];
    let got = TransitionMatrix::adjacency(3).unwrap();
    for (row, want) in got.iter().zip(expected) {
        assert_eq!(row.as_slice(), want.as_slice());
    }
}

#[test]
fn increment_table_labels() {
    let t = score_increment_table(GameKind::Minority, 2).unwrap();
    assert_eq!(
        t.at_labels(1, 1).unwrap(),
        vec![-1, -1, -1, -1, 1, 1, 1, 1]
    );
    // history 1 cannot be followed by history 1 (code 0 -> code 0 only)
    assert!(t.at_labels(2, 2).is_none());
    assert!(t.at_labels(0, 1).is_none());
    assert!(t.at_labels(5, 1).is_none());
    let maj = score_increment_table(GameKind::Majority, 2).unwrap();
    let dollar = score_increment_table(GameKind::Dollar, 2).unwrap();
    for acted in 1..=4 {
        for following in 1..=4 {
            let mg = t.at_labels(acted, following);
            let mj = maj.at_labels(acted, following);
            assert_eq!(mg.is_some(), mj.is_some());
            if let (Some(a), Some(b)) = (mg, mj) {
                assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
            }
            assert_eq!(maj.at_labels(acted, following), dollar.at_labels(acted, following));
        }
    }
    assert_eq!(dollar.lag(), 1);
    assert!(score_increment_table(GameKind::Minority, 7).is_err());
}

#[test]
fn single_step_window_scores_are_increments() {
    for kind in GameKind::ALL {
        let inc = score_increment_table(kind, 2).unwrap();
        let scores = path_score_table(kind, 2, 1).unwrap();
        let lag = kind.lag();
        for p in 0..scores.path_count() {
            for k in 0..8 {
                let acted = (p >> (1 + lag)) & 3;
                let want = inc.increment(k, acted, (p & 1) as u8);
                assert_eq!(scores.get(k, p), i32::from(want), "{kind} k={k} p={p}");
            }
        }
    }
}

#[test]
fn window_scores_match_replay() {
    for kind in GameKind::ALL {
        for (m, tau) in [(2, 3), (3, 2), (1, 4)] {
            let table = path_score_table(kind, m, tau).unwrap();
            for k in 0..table.strategy_count() {
                for p in 0..table.path_count() {
                    assert_eq!(table.get(k, p), replayed_score(kind, m, tau, k, p));
                }
            }
        }
    }
}

#[test]
fn window_scores_match_warm_started_engine() {
    let d = a4();
    for kind in GameKind::ALL {
        let tau = 3;
        let table = path_score_table(kind, 2, tau).unwrap();
        let c = SimConfig::new(kind, 31, 2, 2, tau);
        for p in 0..table.path_count() {
            let state = SimState::at_path(c.clone(), &d, p as u64).unwrap();
            for k in 0..8u32 {
                if let Some(s) = state.strategy_score(k) {
                    assert_eq!(s, i64::from(table.get(k as usize, p)));
                }
            }
        }
    }
}

#[test]
fn path_table_guards() {
    assert!(path_score_table(GameKind::Minority, 2, 15).is_err());
    assert!(path_score_table(GameKind::Minority, 2, 0).is_err());
    assert!(path_score_table(GameKind::Minority, 12, 4).is_err());
    assert_eq!(path_score_table(GameKind::Dollar, 2, 2).unwrap().path_bits(), 5);
}

#[test]
fn votes_match_engine_first_step() {
    let d = a4();
    for kind in GameKind::ALL {
        for tau in [1, 2] {
            let votes = decided_and_undecided(kind, &d, tau).unwrap();
            let c = SimConfig::new(kind, 31, 2, 2, tau);
            for p in 0..votes.a_d.len() {
                let mut state = SimState::at_path(c.clone(), &d, p as u64).unwrap();
                let rec = state.step();
                assert_eq!(rec.n_undecided as u32, votes.n_u[p], "{kind} p={p}");
                if votes.n_u[p] == 0 {
                    assert_eq!(rec.a, i64::from(votes.a_d[p]));
                } else {
                    assert!((rec.a - i64::from(votes.a_d[p])).abs() <= i64::from(votes.n_u[p]));
                }
            }
        }
    }
}

#[test]
fn fair_binomial_sums_to_one() {
    for n in [0, 1, 5, 31, 64] {
        let pmf = fair_binomial(n);
        assert_eq!(pmf.len(), n as usize + 1);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert_eq!(fair_binomial(2), vec![0.25, 0.5, 0.25]);
}

#[test]
fn transition_matrix_is_column_stochastic() {
    let d = a4();
    for kind in GameKind::ALL {
        let t = transition_matrix(kind, &d, 2).unwrap();
        let dense = t.to_dense().unwrap();
        for from in 0..t.size() {
            let col: f64 = dense.iter().map(|row| row[from]).sum();
            assert!((col - 1.0).abs() < 1e-12);
            let nonzero = dense.iter().filter(|row| row[from] > 0.0).count();
            assert!((1..=2).contains(&nonzero));
        }
    }
    let even = agents(2, &[[0, 1], [2, 3]]);
    assert!(transition_matrix(GameKind::Minority, &even, 1).is_err());
}

#[test]
fn uniform_chain_has_uniform_steady_state() {
    let t = TransitionMatrix::from_up_probabilities(4, vec![0.5; 16]).unwrap();
    let s = steady_state(&t).unwrap();
    assert!(s.probs.iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-12));
}

#[test]
fn alternating_chain_splits_between_two_states() {
    // next bit is the complement of the last one
    let up: Vec<f64> = (0..8).map(|p| if p & 1 == 0 { 1.0 } else { 0.0 }).collect();
    let t = TransitionMatrix::from_up_probabilities(3, up).unwrap();
    let s = steady_state(&t).unwrap();
    for (code, p) in s.probs.iter().enumerate() {
        let want = if code == 0b010 || code == 0b101 { 0.5 } else { 0.0 };
        assert!((p - want).abs() < 1e-9, "code {code}: {p}");
    }
    let applied = t.apply(&s.probs);
    assert!(applied.iter().zip(&s.probs).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn invalid_probabilities_rejected() {
    assert!(TransitionMatrix::from_up_probabilities(2, vec![0.5; 3]).is_err());
    assert!(TransitionMatrix::from_up_probabilities(2, vec![0.5, 0.5, 1.5, 0.0]).is_err());
}

#[test]
fn engine_transition_frequencies() {
    let d = a4();
    let kind = GameKind::Minority;
    let tau = 2;
    let t = transition_matrix(kind, &d, tau).unwrap();
    let bits = t.path_bits();
    let mut visits = vec![0u64; t.size()];
    let mut ups = vec![0u64; t.size()];
    let c = SimConfig::new(kind, 31, 2, 2, tau).with_seed(5);
    let mut state = SimState::new(c, &d).unwrap();
    for _ in 0..10 {
        state.step();
    }
    for _ in 0..1_000_000 {
        let from = (state.path() & ((1 << bits) - 1)) as usize;
        let rec = state.step();
        visits[from] += 1;
        ups[from] += u64::from(rec.winning_bit);
    }
    for p in 0..t.size() {
        if visits[p] < 500 {
            continue;
        }
        let q = t.up_probability(p);
        let freq = ups[p] as f64 / visits[p] as f64;
        let sd = (q * (1.0 - q) / visits[p] as f64).sqrt();
        assert!((freq - q).abs() <= 3.0 * sd + 1e-12, "p={p}: {freq} vs {q}");
    }
}

#[test]
fn lone_agent_gains() {
    // holding one strategy twice, the agent is never undecided and |A| = 1
    let d = agents(2, &[[3, 3]]);
    for tau in [1, 3] {
        let mg = MarkovAnalysis::new(GameKind::Minority, &d, tau).unwrap();
        assert!((mg.agent_gain() + 1.0).abs() < 1e-12);
        assert!((mg.determined_vote_gain() + 1.0).abs() < 1e-12);
        let maj = MarkovAnalysis::new(GameKind::Majority, &d, tau).unwrap();
        assert!((maj.agent_gain() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn complementary_holdings_earn_nothing_as_strategies() {
    let d = agents(2, &[[0, 7], [1, 6], [2, 5], [3, 4], [0, 7]]);
    for kind in GameKind::ALL {
        let a = MarkovAnalysis::new(kind, &d, 2).unwrap();
        assert!(a.strategy_gain().abs() < 1e-12);
        assert!(a.window_strategy_gain().abs() < 1e-12);
    }
}

#[test]
fn strategy_gain_routes_agree() {
    let d = a4();
    for kind in GameKind::ALL {
        for tau in [1, 2, 5] {
            let a = MarkovAnalysis::new(kind, &d, tau).unwrap();
            let per_step = a.strategy_gain();
            let window = a.window_strategy_gain();
            assert!(
                (window - tau as f64 * per_step).abs() < 1e-9,
                "{kind} tau={tau}: {window} vs {per_step}"
            );
            assert!((a.steady_state().probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn gain_signs_on_fixture() {
    let d = a4();
    let mg = MarkovAnalysis::new(GameKind::Minority, &d, 1).unwrap();
    assert!(mg.agent_gain() < 0.0);
    assert!(mg.agent_gain() < mg.strategy_gain());
    let maj = MarkovAnalysis::new(GameKind::Majority, &d, 1).unwrap();
    assert!(maj.agent_gain() > 0.0);
    assert!(maj.agent_gain() > maj.strategy_gain());
    assert_eq!(
        expected_agent_gain(GameKind::Minority, &d, 1).unwrap(),
        mg.agent_gain()
    );
    assert_eq!(
        expected_strategy_gain(GameKind::Majority, &d, 1).unwrap(),
        maj.strategy_gain()
    );
}

fn sampled(n: usize, m: u32, seed: u64) -> QuenchedDisorder {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_quenched_disorder(n, 2, StrategySpace::reduced(m).unwrap(), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn votes_have_parity_of_n(seed in any::<u64>(), half in 1usize..16, m in 1u32..4, tau in 1usize..4, k in 0usize..3) {
        let n = 2 * half + 1;
        let d = sampled(n, m, seed);
        let v = decided_and_undecided(GameKind::ALL[k], &d, tau).unwrap();
        for (a, u) in v.a_d.iter().zip(&v.n_u) {
            prop_assert!((*u as usize) <= n);
            prop_assert!(a.unsigned_abs() as usize + *u as usize <= n);
            prop_assert_eq!((a.rem_euclid(2) as usize + *u as usize) % 2, n % 2);
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point(seed in any::<u64>(), m in 1u32..4, tau in 1usize..4, k in 0usize..3) {
        let d = sampled(11, m, seed);
        let a = MarkovAnalysis::new(GameKind::ALL[k], &d, tau).unwrap();
        let mu = &a.steady_state().probs;
        prop_assert!(mu.iter().all(|p| *p >= -1e-15));
        prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let next = a.transition().apply(mu);
        let residual: f64 = next.iter().zip(mu).map(|(x, y)| (x - y).abs()).sum();
        prop_assert!(residual <= 1e-12);
        let g = a.agent_gain();
        prop_assert!(g.abs() <= 1.0 + 1e-12);
        prop_assert!((a.window_strategy_gain() - tau as f64 * a.strategy_gain()).abs() < 1e-9);
    }

    #[test]
    fn rows_are_strategy_actions(m in 1u32..8) {
        let t = action_table(m).unwrap();
        let space = StrategySpace::reduced(m).unwrap();
        prop_assert_eq!(t.size(), space.size());
        for k in 0..t.size() {
            prop_assert_eq!(t.rows()[k].clone(), space.table(k));
        }
    }
}
