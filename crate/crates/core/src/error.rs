// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the supported range or inconsistent with another.
    #[error("configuration error: {0}")]
    Config(String),

    /// A quenched disorder does not match the simulation or analysis it was handed to.
    #[error("disorder mismatch: {0}")]
    DisorderMismatch(String),

    #[error("malformed disorder file (line {line}): {message}")]
    Parse { line: usize, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("series too short: {0}")]
    SeriesTooShort(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
