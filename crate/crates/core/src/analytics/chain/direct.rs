// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense solution of the uniform-start limit of a small chain.

use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Nonzero moves out of each path.
fn moves(t: &TransitionMatrix, from: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    let up = t.up_probability(from);
    [(t.successor(from, 0), 1.0 - up), (t.successor(from, 1), up)]
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
}

/// Moves to a different path. Diagonal terms are built from these rather
/// than as `1 - stay`, which would round a rare escape away.
fn leaving(t: &TransitionMatrix, from: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
    moves(t, from).filter(move |&(to, _)| to != from)
}

struct Tarjan<'a> {
    t: &'a TransitionMatrix,
    index: Vec<usize>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next: usize,
    component: Vec<usize>,
    count: usize,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = self.next;
        self.low[v] = self.next;
        self.next += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        let out: Vec<usize> = moves(self.t, v).map(|(w, _)| w).collect();
        for w in out {
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.index[w]);
            }
        }
        if self.low[v] == self.index[v] {
            loop {
                let w = self.stack.pop().expect("tarjan stack");
                self.on_stack[w] = false;
                self.component[w] = self.count;
                if w == v {
                    break;
                }
            }
            self.count += 1;
        }
    }
}

/// Strongly connected component of every path, and the number of them.
fn components(t: &TransitionMatrix) -> (Vec<usize>, usize) {
    let n = t.size();
    let mut tarjan = Tarjan {
        t,
        index: vec![usize::MAX; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        component: vec![0; n],
        count: 0,
    };
    for v in 0..n {
        if tarjan.index[v] == usize::MAX {
            tarjan.visit(v);
        }
    }
    (tarjan.component, tarjan.count)
}

/// Solves `a x = b` for each column of `b` by elimination with partial
/// pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty system");
        if a[pivot][col] == 0.0 {
            return Err(Error::Numerical("singular system in the stationary solve".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            let (upper, lower) = b.split_at_mut(row);
            for (x, p) in lower[0].iter_mut().zip(&upper[col]) {
                *x -= f * p;
            }
        }
    }
    for col in (0..n).rev() {
        for k in 0..b[col].len() {
            let s: f64 = (col + 1..n).map(|j| a[col][j] * b[j][k]).sum();
            b[col][k] = (b[col][k] - s) / a[col][col];
        }
    }
    Ok(b)
}

/// Stationary vector of the chain restricted to a closed class.
fn class_stationary(t: &TransitionMatrix, members: &[usize], local: &[usize]) -> Result<Vec<f64>> {
    let k = members.len();
    let mut a = vec![vec![0.0; k]; k];
    for (i, &from) in members.iter().enumerate() {
        for (to, p) in leaving(t, from) {
            a[local[to]][i] += p;
            a[i][i] -= p;
        }
    }
    // one balance equation is redundant; normalisation replaces it
    a[k - 1] = vec![1.0; k];
    let mut b = vec![vec![0.0]; k];
    b[k - 1][0] = 1.0;
    Ok(solve(a, b)?.into_iter().map(|x| x[0].max(0.0)).collect())
}

/// Limit of the time-averaged distribution from the uniform start.
pub(super) fn uniform_start_limit(t: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = t.size();
    let (component, count) = components(t);
    let mut closed = vec![true; count];
    for from in 0..n {
        if moves(t, from).any(|(to, _)| component[to] != component[from]) {
            closed[component[from]] = false;
        }
    }
    let classes: Vec<usize> = (0..count).filter(|&c| closed[c]).collect();
    let transient: Vec<usize> = (0..n).filter(|&v| !closed[component[v]]).collect();

    // local index of each path within its closed class or the transient set
    let mut local = vec![0usize; n];
    let mut members = vec![Vec::new(); count];
    for v in 0..n {
        if closed[component[v]] {
            local[v] = members[component[v]].len();
            members[component[v]].push(v);
        }
    }
    for (i, &v) in transient.iter().enumerate() {
        local[v] = i;
    }

    // chance of ending in each closed class, from each transient path
    let column: Vec<usize> = {
        let mut col = vec![usize::MAX; count];
        for (j, &c) in classes.iter().enumerate() {
            col[c] = j;
        }
        col
    };
    let absorbed = if transient.is_empty() {
        Vec::new()
    } else {
        let r = transient.len();
        let mut a = vec![vec![0.0; r]; r];
        let mut b = vec![vec![0.0; classes.len()]; r];
        for (i, &from) in transient.iter().enumerate() {
            for (to, p) in leaving(t, from) {
                a[i][i] += p;
                if closed[component[to]] {
                    b[i][column[component[to]]] += p;
                } else {
                    a[i][local[to]] -= p;
                }
            }
        }
        solve(a, b)?
    };

    let mut mu = vec![0.0; n];
    for (j, &c) in classes.iter().enumerate() {
        let weight = (members[c].len() as f64 + absorbed.iter().map(|h| h[j]).sum::<f64>()) / n as f64;
        let pi = class_stationary(t, &members[c], &local)?;
        for (&v, p) in members[c].iter().zip(pi) {
            mu[v] = weight * p;
        }
    }
    Ok(mu)
}
