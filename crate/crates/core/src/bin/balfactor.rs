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

//! Command-line front end. Exit codes: 0 success, 2 input error,
//! 3 resource guard.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use balfactor::embed::Remainder;
use balfactor::graph::{load_colouring, random_balanced_colouring, PatternGraph};
use balfactor::harness::{
    bounds_report, configure_threads, oracle_report, solve_report, sweep, write_sweep_csv,
    SolveConfig, SweepConfig,
};
use balfactor::solver::{InitStrategy, SearchStrategy};
use balfactor::{Error, Palette};

#[derive(Parser, Debug)]
#[command(
    name = "balfactor",
    version,
    about = "Nearly colour-balanced H-factors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a (near-)balanced random colouring of K_n.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local search plus H-embedding; JSON report.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long, value_enum, default_value_t = StrategyArg::Best)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value_t = InitArg::Random)]
        init: InitArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Seed for random placement of leftover parts (identity if absent).
        #[arg(long)]
        remainder_seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact minimum deviation by exhaustive search.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Benchmark sweep over instance sizes; CSV output.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Best)]
        strategy: StrategyArg,
        /// Pattern file; defaults to K_r.
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the swap-space lattice facts and print the constants.
    VerifyBounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct PatternArgs {
    /// Pattern graph file.
    #[arg(long)]
    h: Option<PathBuf>,
    /// Use K_r as the pattern.
    #[arg(long)]
    h_complete: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Best,
    First,
}

impl From<StrategyArg> for SearchStrategy {
    fn from(s: StrategyArg) -> SearchStrategy {
        match s {
            StrategyArg::Best => SearchStrategy::Best,
            StrategyArg::First => SearchStrategy::First,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    Blocks,
    Random,
}

impl From<InitArg> for InitStrategy {
    fn from(s: InitArg) -> InitStrategy {
        match s {
            InitArg::Blocks => InitStrategy::Blocks,
            InitArg::Random => InitStrategy::Random,
        }
    }
}

enum Failure {
    Input(String),
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_resource_guard() {
            Failure::Guard(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("reports serialize");
    s.push(b'\n');
    s
}

fn load_pattern(p: &PatternArgs) -> Result<PatternGraph, Failure> {
    match (&p.h, p.h_complete) {
        (Some(path), _) => Ok(PatternGraph::parse(&read(path)?)?),
        (None, Some(r)) => Ok(PatternGraph::complete(r)?),
        (None, None) => Err(Failure::Input(
            "one of --h or --h-complete is required".into(),
        )),
    }
}

fn path_flag(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "-".into())
}

fn pattern_flags(flags: &mut BTreeMap<String, String>, p: &PatternArgs) {
    if let Some(h) = &p.h {
        flags.insert("h".into(), h.display().to_string());
    }
    if let Some(r) = p.h_complete {
        flags.insert("h_complete".into(), r.to_string());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { n, k, seed, out } => {
            let palette = Palette::simplex(k)?;
            let g = random_balanced_colouring(n, &palette, seed)?;
            emit(&out, g.to_colouring_string().as_bytes())?;
            let line = format!("alpha {}", g.balance_alpha());
            if out.is_some() {
                println!("{}", line);
            } else {
                eprintln!("{}", line);
            }
        }
        Command::Solve {
            input,
            pattern,
            strategy,
            init,
            seed,
            restarts,
            max_iters,
            remainder_seed,
            out,
        } => {
            let g = load_colouring(&read(&input)?)?;
            let h = load_pattern(&pattern)?;
            let cfg = SolveConfig {
                strategy: strategy.into(),
                init: init.into(),
                restarts,
                seed,
                max_iters,
                remainder: remainder_seed.map_or(Remainder::Identity, Remainder::Random),
            };
            let mut flags = BTreeMap::new();
            flags.insert("command".into(), "solve".into());
            flags.insert("input".into(), input.display().to_string());
            pattern_flags(&mut flags, &pattern);
            flags.insert("strategy".into(), format!("{:?}", strategy).to_lowercase());
            flags.insert("init".into(), format!("{:?}", init).to_lowercase());
            flags.insert("seed".into(), seed.to_string());
            flags.insert("restarts".into(), restarts.to_string());
            flags.insert(
                "max_iters".into(),
                max_iters.map_or_else(|| "-".into(), |m| m.to_string()),
            );
            flags.insert(
                "remainder_seed".into(),
                remainder_seed.map_or_else(|| "-".into(), |m| m.to_string()),
            );
            flags.insert("out".into(), path_flag(&out));
            let report = solve_report(&g, &h, &cfg, Some(input.display().to_string()), flags)?;
            emit(&out, &to_json(&report))?;
        }
        Command::Oracle {
            input,
            pattern,
            out,
        } => {
            let g = load_colouring(&read(&input)?)?;
            let h = load_pattern(&pattern)?;
            let mut flags = BTreeMap::new();
            flags.insert("command".into(), "oracle".into());
            flags.insert("input".into(), input.display().to_string());
            pattern_flags(&mut flags, &pattern);
            flags.insert("out".into(), path_flag(&out));
            let report = oracle_report(&g, &h, flags)?;
            emit(&out, &to_json(&report))?;
        }
        Command::Sweep {
            n_list,
            k,
            r,
            trials,
            seed,
            strategy,
            h,
            out,
        } => {
            let pattern = match &h {
                Some(path) => Some(PatternGraph::parse(&read(path)?)?),
                None => None,
            };
            let rows = sweep(&SweepConfig {
                n_list,
                k,
                r,
                trials,
                seed,
                strategy: strategy.into(),
                h: pattern,
            })?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            emit(&out, &buf)?;
        }
        Command::VerifyBounds { d, r, out } => {
            let mut flags = BTreeMap::new();
            flags.insert("command".into(), "verify-bounds".into());
            flags.insert("d".into(), d.to_string());
            flags.insert("r".into(), r.to_string());
            flags.insert("out".into(), path_flag(&out));
            let report = bounds_report(d, r, flags)?;
            emit(&out, &to_json(&report))?;
            if !report.pass {
                return Err(Failure::Input(format!(
                    "lattice facts failed for d = {}, r = {}",
                    d, r
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(3)
        }
    }
}
