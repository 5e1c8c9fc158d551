// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `nbspec`: spectra of non-backtracking matrices from the command line.
//!
//! Exit codes: 0 success, 1 an invariant failed, 2 invalid input,
//! 3 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbspec::linalg::{DEFAULT_DELTA_CLUSTER, DEFAULT_EPS_RANK, DEFAULT_MAX_DIM};
use nbspec::spectrum::SpectrumOptions;

use commands::{cmd_analyze, cmd_perturb, cmd_spectrum, cmd_verify, RunConfig, Which};

#[derive(Parser)]
#[command(name = "nbspec", version, about = "Spectra of non-backtracking matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full JSON report: shells, spectrum, multiplicity ledger, motifs.
    Analyze(Common),
    /// CSV of eigenvalues: re, im, class, am, gm.
    Spectrum(Common),
    /// Run one invariant suite and report pass/fail per check.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Add a node adjacent to the given nodes and locate the new Perron eigenvalue.
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Comma-separated node labels of the host.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        attach: Vec<i64>,
    },
}

#[derive(Args)]
struct Common {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPS_RANK)]
    tol_rank: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA_CLUSTER)]
    tol_cluster: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_band: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn config(self) -> RunConfig {
        RunConfig {
            input: self.input,
            output: self.output,
            options: SpectrumOptions {
                eps_rank: self.tol_rank,
                delta_cluster: self.tol_cluster,
                tau_band: self.tol_band,
                max_dim: self.max_dim,
            },
            seed: self.seed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, result) = match cli.command {
        Command::Analyze(c) => {
            let cfg = c.config();
            let r = cfg.validate().and_then(|_| cmd_analyze(&cfg));
            (cfg, r)
        }
        Command::Spectrum(c) => {
            let cfg = c.config();
            let r = cfg.validate().and_then(|_| cmd_spectrum(&cfg));
            (cfg, r)
        }
        Command::Verify { common, which } => {
            let cfg = common.config();
            let r = cfg.validate().and_then(|_| cmd_verify(&cfg, which));
            (cfg, r)
        }
        Command::Perturb { common, attach } => {
            let cfg = common.config();
            let r = cfg.validate().and_then(|_| cmd_perturb(&cfg, &attach));
            (cfg, r)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("nbspec: {}: at least one invariant failed", cfg.input.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("nbspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
