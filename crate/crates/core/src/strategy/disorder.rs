// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Quenched disorder: the once-and-for-all assignment of strategy tuples to
//! agents, and its plain-text tensor format.
//!
//! The text format is a header line `omega m=<m> S=<S> N=<N>` followed by
//! the dense count tensor, one line per leading index tuple (lexicographic
//! order) with the last axis laid out as space-separated integers. For the
//! usual `S = 2` that is one matrix row per line. Full-space tensors append
//! ` space=full` to the header; without it the reduced space is assumed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use super::{SpaceKind, StrategySpace};
use crate::error::{Error, Result};

/// Dense tensors larger than this are not written as text.
const MAX_TEXT_ENTRIES: usize = 1 << 22;

/// Strategy tuples held by each agent.
///
/// Tuples are stored sorted, since the order of strategies inside an agent
/// carries no meaning. Agents keep the order in which they were drawn; a
/// disorder parsed from text lists agents in tensor order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuenchedDisorder {
    space: StrategySpace,
    s: usize,
    agents: Vec<Vec<u32>>,
}

impl QuenchedDisorder {
    pub fn from_agents(space: StrategySpace, s: usize, agents: Vec<Vec<u32>>) -> Result<Self> {
        if s == 0 {
            return Err(Error::config("S must be at least 1"));
        }
        if agents.is_empty() {
            return Err(Error::config("a disorder needs at least one agent"));
        }
        let r = space.size();
        let agents = agents
            .into_iter()
            .map(|mut tuple| {
                if tuple.len() != s {
                    return Err(Error::DisorderMismatch(format!(
                        "agent holds {} strategies, expected {s}",
                        tuple.len()
                    )));
                }
                if let Some(&bad) = tuple.iter().find(|&&k| k as usize >= r) {
                    return Err(Error::DisorderMismatch(format!(
                        "strategy index {bad} outside a space of {r}"
                    )));
                }
                tuple.sort_unstable();
                Ok(tuple)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuenchedDisorder { space, s, agents })
    }

    /// Expands `(tuple, multiplicity)` entries into individual agents, in
    /// the order given.
    pub fn from_counts<I>(space: StrategySpace, s: usize, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u32)>,
    {
        let mut agents = Vec::new();
        for (tuple, count) in counts {
            for _ in 0..count {
                agents.push(tuple.clone());
            }
        }
        QuenchedDisorder::from_agents(space, s, agents)
    }

    /// Builds an `S = 2` disorder from a dense `R x R` count matrix, row-major.
    pub fn from_pair_matrix(space: StrategySpace, matrix: &[Vec<u32>]) -> Result<Self> {
        let r = space.size();
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::DisorderMismatch(format!("pair matrix must be {r}x{r}")));
        }
        let counts = matrix.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &c)| (vec![i as u32, j as u32], c))
        });
        QuenchedDisorder::from_counts(space, 2, counts)
    }

    pub fn space(&self) -> StrategySpace {
        self.space
    }

    pub fn memory(&self) -> u32 {
        self.space.memory()
    }

    pub fn strategies_per_agent(&self) -> usize {
        self.s
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[Vec<u32>] {
        &self.agents
    }

    /// The same disorder with agents listed in tensor (lexicographic) order,
    /// which is the order a round trip through text produces.
    pub fn canonical(&self) -> QuenchedDisorder {
        let mut agents = self.agents.clone();
        agents.sort();
        QuenchedDisorder {
            space: self.space,
            s: self.s,
            agents,
        }
    }

    /// Sparse count tensor: sorted tuple -> number of agents holding it.
    pub fn omega(&self) -> BTreeMap<Vec<u32>, u32> {
        let mut omega = BTreeMap::new();
        for tuple in &self.agents {
            *omega.entry(tuple.clone()).or_insert(0) += 1;
        }
        omega
    }

    /// Dense upper-triangular `R x R` count matrix for `S = 2`.
    pub fn pair_matrix(&self) -> Result<Vec<Vec<u32>>> {
        self.require_pairs()?;
        let r = self.space.size();
        if r * r > MAX_TEXT_ENTRIES {
            return Err(Error::config(format!("dense {r}x{r} matrix is too large")));
        }
        let mut dense = vec![vec![0u32; r]; r];
        for tuple in &self.agents {
            dense[tuple[0] as usize][tuple[1] as usize] += 1;
        }
        Ok(dense)
    }

    /// Symmetrized matrix `(Omega + Omega^T) / 2`.
    pub fn psi(&self) -> Result<Vec<Vec<f64>>> {
        let omega = self.pair_matrix()?;
        let r = omega.len();
        Ok((0..r)
            .map(|i| (0..r).map(|j| 0.5 * f64::from(omega[i][j] + omega[j][i])).collect())
            .collect())
    }

    pub(crate) fn require_pairs(&self) -> Result<()> {
        if self.s != 2 {
            return Err(Error::DisorderMismatch(format!(
                "operation needs S=2, disorder has S={}",
                self.s
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        let r = self.space.size();
        let entries = (r as u128).pow(self.s as u32);
        if entries > MAX_TEXT_ENTRIES as u128 {
            return Err(Error::config(format!(
                "tensor with {entries} entries is too large for the text format"
            )));
        }
        let mut dense = vec![0u32; entries as usize];
        for tuple in &self.agents {
            let flat = tuple.iter().fold(0usize, |acc, &k| acc * r + k as usize);
            dense[flat] += 1;
        }
        let mut out = format!(
            "omega m={} S={} N={}",
            self.memory(),
            self.s,
            self.agent_count()
        );
        if self.space.kind() == SpaceKind::Full {
            out.push_str(" space=full");
        }
        out.push('\n');
        for row in dense.chunks(r) {
            let mut first = true;
            for c in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{c}").expect("writing to a String");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        let header_err = |message: String| Error::Parse { line: 1, message };

        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("omega") {
            return Err(header_err("header must start with 'omega'".into()));
        }
        let (mut m, mut s, mut n, mut kind) = (None, None, None, SpaceKind::Reduced);
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| header_err(format!("expected key=value, got '{tok}'")))?;
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| header_err(format!("invalid value for {key}: '{value}'")))
            };
            match key {
                "m" => m = Some(int()?),
                "S" => s = Some(int()?),
                "N" => n = Some(int()?),
                "space" => kind = value.parse().map_err(|e: Error| header_err(e.to_string()))?,
                _ => return Err(header_err(format!("unknown header key '{key}'"))),
            }
        }
        let (m, s, n) = match (m, s, n) {
            (Some(m), Some(s), Some(n)) => (m, s, n),
            _ => return Err(header_err("header needs m, S and N".into())),
        };
        if s == 0 || s > 8 {
            return Err(header_err(format!("unsupported S={s}")));
        }
        let space = StrategySpace::new(kind, m as u32).map_err(|e| header_err(e.to_string()))?;
        let r = space.size();
        let rows = r.pow(s as u32 - 1);

        let mut counts = Vec::new();
        let mut total = 0usize;
        for row in 0..rows {
            let (line_no, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("expected {rows} tensor rows, found {row}"),
            })?;
            let values = line
                .split_whitespace()
                .map(|v| v.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad count: {e}"),
                })?;
            if values.len() != r {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {r} entries, found {}", values.len()),
                });
            }
            let mut lead = Vec::with_capacity(s);
            let mut rem = row;
            for _ in 0..s - 1 {
                lead.push((rem % r) as u32);
                rem /= r;
            }
            lead.reverse();
            for (k, &c) in values.iter().enumerate() {
                if c > 0 {
                    let mut tuple = lead.clone();
                    tuple.push(k as u32);
                    counts.push((tuple, c));
                    total += c as usize;
                }
            }
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::Parse {
                line: line_no,
                message: "trailing data after tensor".into(),
            });
        }
        if total != n {
            return Err(Error::Parse {
                line: 1,
                message: format!("tensor sums to {total}, header says N={n}"),
            });
        }
        QuenchedDisorder::from_counts(space, s, counts)
    }
}

/// Draws `n` agents, each with `s` strategies picked uniformly and
/// independently (with replacement) from `space`.
pub fn sample_quenched_disorder<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    space: StrategySpace,
    rng: &mut R,
) -> Result<QuenchedDisorder> {
    if n == 0 || s == 0 {
        return Err(Error::config(format!("need N >= 1 and S >= 1, got N={n} S={s}")));
    }
    let r = space.size() as u32;
    let agents = (0..n)
        .map(|_| (0..s).map(|_| rng.gen_range(0..r)).collect())
        .collect();
    QuenchedDisorder::from_agents(space, s, agents)
}

/// Number of times each strategy appears across all agents' tuples; a
/// strategy held twice by one agent counts twice. Sums to `S * N`.
pub fn strategy_counts(disorder: &QuenchedDisorder) -> Vec<u32> {
    let mut kappa = vec![0u32; disorder.space.size()];
    for tuple in &disorder.agents {
        for &k in tuple {
            kappa[k as usize] += 1;
        }
    }
    kappa
}
