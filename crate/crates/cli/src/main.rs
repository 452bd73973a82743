// Copyright 2026 The thgame Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(thgame_cli::cli_dispatch(std::env::args_os()));
}
