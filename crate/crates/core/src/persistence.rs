// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Scale-dependent persistence of binary series.
//!
//! At scale `m_s`, every occurrence of an `m_s`-bit history is followed by
//! one bit. Each following bit is compared with the bit that followed the
//! previous occurrence of the same history; it is persistent if the two are
//! equal. Persistence is the fraction of persistent comparisons, so `0.5`
//! is what a random series gives, lower values are anti-persistent and
//! higher values persistent. At scale 0 the history is empty and the
//! measure is the fraction of adjacent equal bits.

use rayon::prelude::*;

use crate::engine::{run, GameKind, SimConfig};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::stats::MeanSe;
use crate::strategy::{mask, HistoryCode, Strategy};

/// Largest scale; one slot per history is allocated.
pub const MAX_SCALE: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BitSeries(Vec<u8>);

impl BitSeries {
    pub fn new(bits: Vec<u8>) -> Result<BitSeries> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::config(format!("series entry {b} is not a bit")));
        }
        Ok(BitSeries(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn complement(&self) -> BitSeries {
        BitSeries(self.0.iter().map(|b| b ^ 1).collect())
    }

    /// The series without its first `n` bits.
    pub fn skip(&self, n: usize) -> BitSeries {
        BitSeries(self.0[n.min(self.0.len())..].to_vec())
    }
}

impl From<BitSeries> for Vec<u8> {
    fn from(s: BitSeries) -> Vec<u8> {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistenceScore {
    pub scale: u32,
    pub value: f64,
    /// Following bits compared with an earlier one.
    pub comparisons: usize,
    pub persistent: usize,
}

impl PersistenceScore {
    pub fn antipersistence(&self) -> f64 {
        1.0 - self.value
    }
}

pub fn persistence(series: &BitSeries, scale: u32) -> Result<PersistenceScore> {
    persistence_of_bits(series.bits(), scale)
}

pub(crate) fn persistence_of_bits(bits: &[u8], scale: u32) -> Result<PersistenceScore> {
    if scale > MAX_SCALE {
        return Err(Error::config(format!("scale {scale} exceeds {MAX_SCALE}")));
    }
    let s = scale as usize;
    if bits.len() < s + 2 {
        return Err(Error::SeriesTooShort(format!(
            "{} bits cannot be scored at scale {scale}",
            bits.len()
        )));
    }
    // last following bit per history, 2 = not seen yet
    let mut last = vec![2u8; 1 << s];
    let m = mask(scale);
    let mut h = bits[..s].iter().fold(0usize, |h, &b| (h << 1) | b as usize);
    let (mut comparisons, mut persistent) = (0usize, 0usize);
    for &b in &bits[s..] {
        let prev = last[h];
        if prev != 2 {
            comparisons += 1;
            persistent += usize::from(prev == b);
        }
        last[h] = b;
        h = ((h << 1) | b as usize) & m;
    }
    if comparisons == 0 {
        return Err(Error::SeriesTooShort(format!(
            "no history recurs at scale {scale} in {} bits",
            bits.len()
        )));
    }
    Ok(PersistenceScore {
        scale,
        value: persistent as f64 / comparisons as f64,
        comparisons,
        persistent,
    })
}

/// Series from the two-table generator: on each occurrence of a history the
/// next bit is read from `seed_table`, or from its negation, alternating per
/// history, starting with `seed_table`. The series starts with the `m` bits
/// of `seed_history`, oldest first, and has `length` bits in all.
pub fn perfectly_antipersistent_series(
    seed_table: &Strategy,
    seed_history: HistoryCode,
    length: usize,
) -> BitSeries {
    let m = seed_table.memory();
    let mut bits: Vec<u8> = (0..m)
        .rev()
        .map(|age| ((seed_history.value() >> age) & 1) as u8)
        .collect();
    let mut toggled = vec![false; 1 << m];
    let mut h = seed_history;
    while bits.len() < length {
        let first = u8::from(seed_table.action(h) > 0);
        let bit = first ^ u8::from(toggled[h.value()]);
        toggled[h.value()] ^= true;
        bits.push(bit);
        h = h.push(bit, m);
    }
    bits.truncate(length);
    BitSeries(bits)
}

/// Ensemble settings for [`persistence_grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub s: usize,
    pub tau: usize,
    pub runs: usize,
    /// Bits per scored series.
    pub length: usize,
    /// Steps played before recording.
    pub warmup: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> GridConfig {
        GridConfig {
            n: 31,
            s: 2,
            tau: 100,
            runs: 100,
            length: 1000,
            warmup: 400,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub kind: GameKind,
    pub m: u32,
    pub scale: u32,
    pub persistence: MeanSe,
}

/// Mean persistence of game outcome series for every `(kind, m, scale)`,
/// ordered by kind, then `m`, then scale. Runs for one `(kind, m)` share
/// seeds across kinds, so the games see the same disorders.
pub fn persistence_grid(
    kinds: &[GameKind],
    memories: &[u32],
    scales: &[u32],
    config: &GridConfig,
) -> Result<Vec<GridCell>> {
    if config.runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }
    if let Some(&s) = scales.iter().find(|&&s| config.length < s as usize + 2) {
        return Err(Error::SeriesTooShort(format!(
            "series of {} bits cannot be scored at scale {s}",
            config.length
        )));
    }
    let jobs: Vec<(GameKind, u32)> = kinds
        .iter()
        .flat_map(|&k| memories.iter().map(move |&m| (k, m)))
        .collect();
    let per_job: Vec<Vec<GridCell>> = jobs
        .par_iter()
        .map(|&(kind, m)| grid_row(kind, m, scales, config))
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

fn grid_row(kind: GameKind, m: u32, scales: &[u32], config: &GridConfig) -> Result<Vec<GridCell>> {
    let base = SimConfig::new(kind, config.n, m, config.s, config.tau)
        .with_steps(config.warmup, config.length);
    let tag = format!("persistence/m{m}");
    let series: Vec<Vec<u8>> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let c = base.clone().with_seed(derive_seed(config.seed, &tag, i as u64));
            run(&c).map(|r| r.bit_series)
        })
        .collect::<Result<_>>()?;
    scales
        .iter()
        .map(|&scale| {
            let values = series
                .iter()
                .map(|bits| persistence_of_bits(bits, scale).map(|p| p.value))
                .collect::<Result<Vec<f64>>>()?;
            Ok(GridCell {
                kind,
                m,
                scale,
                persistence: MeanSe::from_samples(&values),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{SpaceKind, StrategySpace};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(bits: &[u8]) -> BitSeries {
        BitSeries::new(bits.to_vec()).unwrap()
    }

    /// Direct count: for each position, find the previous occurrence of the
    /// same history by scanning backwards.
    fn rescanned(bits: &[u8], s: usize) -> (usize, usize) {
        let (mut total, mut same) = (0, 0);
        for t in s..bits.len() {
            let prev = (s..t).rev().find(|&u| bits[u - s..u] == bits[t - s..t]);
            if let Some(u) = prev {
                total += 1;
                same += usize::from(bits[u] == bits[t]);
            }
        }
        (total, same)
    }

    #[test]
    fn constant_series_is_persistent() {
        for scale in 0..5 {
            let p = persistence(&series(&[0; 40]), scale).unwrap();
            assert_eq!(p.value, 1.0);
            assert_eq!(p.antipersistence(), 0.0);
        }
    }

    #[test]
    fn alternating_series() {
        let alt: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        // neighbouring bits always differ
        assert_eq!(persistence(&series(&alt), 0).unwrap().value, 0.0);
        // each one-bit history is always followed by the same bit
        assert_eq!(persistence(&series(&alt), 1).unwrap().value, 1.0);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            persistence(&series(&[0, 1, 0]), 2),
            Err(Error::SeriesTooShort(_))
        ));
        // long enough, but no 2-bit history recurs
        assert!(persistence(&series(&[0, 0, 1, 1]), 2).is_err());
        assert!(BitSeries::new(vec![0, 2]).is_err());
    }

    #[test]
    fn random_series_is_half_persistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let bits: Vec<u8> = (0..100_000).map(|_| rng.gen_range(0..2)).collect();
        let p = persistence(&series(&bits), 3).unwrap();
        let tol = 3.0 * 0.5 / ((100_000 - 3) as f64).sqrt();
        assert!((p.value - 0.5).abs() <= tol, "{}", p.value);
    }

    #[test]
    fn one_bit_generator_hand_trace() {
        let table = crate::strategy::Strategy::from_bits(&[1, 0]).unwrap();
        let s = perfectly_antipersistent_series(&table, HistoryCode::new(0, 1).unwrap(), 12);
        assert_eq!(s.bits(), &[0, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn generator_is_perfectly_antipersistent_at_its_memory() {
        let space = StrategySpace::new(SpaceKind::Full, 2).unwrap();
        for table in space.strategies() {
            for h in 0..4 {
                let s = perfectly_antipersistent_series(&table, HistoryCode::new(h, 2).unwrap(), 200);
                let p = persistence(&s.skip(16), 2).unwrap();
                assert_eq!(p.persistent, 0);
                assert!(p.comparisons > 100);
            }
        }
    }

    #[test]
    fn generator_at_another_scale() {
        let table = StrategySpace::reduced(2).unwrap().strategy(2);
        let s = perfectly_antipersistent_series(&table, HistoryCode::new(1, 2).unwrap(), 400);
        let p = persistence(&s.skip(16), 3).unwrap();
        assert_eq!((p.persistent, p.comparisons), rescanned(&s.bits()[16..], 3));
        // the settled series is periodic, so one more bit of history fixes the next bit
        assert_eq!(p.value, 1.0);
    }

    #[test]
    fn grid_shape_and_order() {
        let config = GridConfig {
            runs: 3,
            length: 200,
            tau: 5,
            ..GridConfig::default()
        };
        let kinds = [GameKind::Majority, GameKind::Minority];
        let grid = persistence_grid(&kinds, &[2, 3], &[1, 2, 3], &config).unwrap();
        assert_eq!(grid.len(), 12);
        assert_eq!((grid[0].kind, grid[0].m, grid[0].scale), (GameKind::Majority, 2, 1));
        assert_eq!((grid[11].kind, grid[11].m, grid[11].scale), (GameKind::Minority, 3, 3));
        assert!(grid.iter().all(|c| (0.0..=1.0).contains(&c.persistence.mean)));
        assert_eq!(grid, persistence_grid(&kinds, &[2, 3], &[1, 2, 3], &config).unwrap());
        let short = GridConfig { length: 4, ..config };
        assert!(persistence_grid(&kinds, &[2], &[3], &short).is_err());
    }

    proptest! {
        #[test]
        fn matches_direct_rescan(bits in proptest::collection::vec(0u8..2, 2..300), scale in 0u32..5) {
            let (total, same) = rescanned(&bits, scale as usize);
            match persistence(&series(&bits), scale) {
                Ok(p) => {
                    prop_assert_eq!((p.comparisons, p.persistent), (total, same));
                    prop_assert_eq!(p.value + p.antipersistence(), 1.0);
                }
                Err(_) => prop_assert_eq!(total, 0),
            }
        }

        #[test]
        fn complement_invariant(bits in proptest::collection::vec(0u8..2, 10..300), scale in 0u32..4) {
            let s = series(&bits);
            if let Ok(p) = persistence(&s, scale) {
                prop_assert_eq!(p, persistence(&s.complement(), scale).unwrap());
            }
        }

        #[test]
        fn scale_zero_counts_adjacent_repeats(bits in proptest::collection::vec(0u8..2, 2..300)) {
            let repeats = bits.windows(2).filter(|w| w[0] == w[1]).count();
            let p = persistence(&series(&bits), 0).unwrap();
            prop_assert_eq!(p.persistent, repeats);
            prop_assert_eq!(p.comparisons, bits.len() - 1);
        }
    }
}
