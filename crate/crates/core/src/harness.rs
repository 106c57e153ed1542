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

//! End-to-end pipeline used by the command-line tool: restarts, embedding,
//! bound checks, sweeps and machine-readable reports.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`). A run with seed `s`
//! derives the seed of sub-task `i` as the first `u64` drawn from
//! `ChaCha8Rng::seed_from_u64(s)` with its stream set to `i`. Restart `i` of
//! a solve uses stream `i`; sweep row `(n, t)` uses stream `(n << 32) | t`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{clique_bound_check, constants};
use crate::embed::{
    embed_h_factor, embedding_error_bound, norm_within, scaled_gap_norm_sq, HEmbedding, Remainder,
};
use crate::error::{Error, Result};
use crate::graph::{
    check_divisible, random_balanced_colouring, CliqueFactor, ColouredGraph, DeviationReport,
    PatternGraph,
};
use crate::oracle::min_deviation_bruteforce;
use crate::palette::{ColourCounts, Palette};
use crate::scalar::{serialize_rational, Rational, Scalar};
use crate::solver::{
    initial_factor, local_search, InitStrategy, SearchOptions, SearchStrategy, SearchTrace,
    Termination,
};
use crate::VERSION;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BF_THREADS";

/// Seed for sub-task `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Size the global rayon pool from `BF_THREADS`, if set and valid.
pub fn configure_threads() {
    let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    else {
        return;
    };
    // Fails only if the pool was already built, which is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
}

#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    pub strategy: SearchStrategy,
    pub init: InitStrategy,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: Option<usize>,
    pub remainder: Remainder,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            strategy: SearchStrategy::Best,
            init: InitStrategy::Random,
            restarts: 1,
            seed: 0,
            max_iters: None,
            remainder: Remainder::Identity,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub factor: CliqueFactor,
    pub trace: SearchTrace,
    pub best_restart: usize,
    pub restarts_used: usize,
    pub clique: DeviationReport,
    pub embedding: HEmbedding,
    pub h: DeviationReport,
}

/// Local search from every restart, keep the smallest final `||w||^2`
/// (lowest restart index on ties), then embed `h`.
pub fn solve(g: &ColouredGraph, h: &PatternGraph, cfg: &SolveConfig) -> Result<SolveOutcome> {
    let n = g.n_vertices();
    let r = h.r();
    check_divisible(n, r)?;
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let runs: Vec<Result<(CliqueFactor, SearchTrace)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let f0 = initial_factor(n, r, cfg.init, derive_seed(cfg.seed, i as u64))?;
            local_search(
                g,
                &f0,
                SearchOptions {
                    strategy: cfg.strategy,
                    max_iters: cfg.max_iters,
                },
            )
        })
        .collect();
    let mut best: Option<(usize, CliqueFactor, SearchTrace)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let (f, trace) = run?;
        let better = best
            .as_ref()
            .is_none_or(|(_, _, t)| trace.final_norm_sq().cmp_value(&t.final_norm_sq()).is_lt());
        if better {
            best = Some((i, f, trace));
        }
    }
    let (best_restart, factor, trace) = best.expect("at least one restart");
    let mut clique = DeviationReport::from_counts(g, g.clique_factor_counts(&factor));
    clique.iterations = trace.scans;
    clique.improving_steps = trace.improving_steps();
    let (embedding, mut h_report) = embed_h_factor(g, &factor, h, cfg.remainder)?;
    h_report.iterations = trace.scans;
    h_report.improving_steps = trace.improving_steps();
    Ok(SolveOutcome {
        factor,
        trace,
        best_restart,
        restarts_used: cfg.restarts,
        clique,
        embedding,
        h: h_report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceDescriptor {
    pub n_v: usize,
    pub k: usize,
    pub r: usize,
    pub h_edges: usize,
    pub seed: Option<u64>,
    pub input: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    /// Natural log of the clique-factor constant; absent for explicit palettes.
    pub log_c: Option<f64>,
    pub log_rhs: Option<f64>,
    pub satisfied: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    /// `||H sum - e(H)/C(r,2) * clique sum||`.
    pub gap_norm: f64,
    pub bound: String,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub version: String,
    pub flags: BTreeMap<String, String>,
    pub instance: InstanceDescriptor,
    pub alpha: f64,
    pub clique_counts: ColourCounts,
    pub clique_norm_sq: Scalar,
    #[serde(serialize_with = "serialize_rational")]
    pub clique_deviation: Rational,
    pub h_counts: ColourCounts,
    #[serde(serialize_with = "serialize_rational")]
    pub h_deviation: Rational,
    pub h_norm: f64,
    pub iterations: usize,
    pub improving_steps: usize,
    pub terminated_reason: Termination,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub parts: Vec<Vec<usize>>,
    pub bound_check: BoundCheck,
    pub embedding_check: EmbeddingCheck,
    pub wall_time_ms: u64,
}

impl SolveReport {
    pub fn new(
        g: &ColouredGraph,
        h: &PatternGraph,
        out: &SolveOutcome,
        instance: InstanceDescriptor,
        flags: BTreeMap<String, String>,
        wall_time_ms: u64,
    ) -> Result<SolveReport> {
        let r = h.r();
        let bound_check = if g.palette().is_exact() {
            let table = constants(g.k(), r)?;
            let (rhs, ok) = clique_bound_check(
                table.log_c_clique,
                out.clique.norm(),
                out.clique.alpha,
                out.factor.num_parts(),
            );
            BoundCheck {
                log_c: Some(table.log_c_clique),
                log_rhs: Some(rhs),
                satisfied: Some(ok),
            }
        } else {
            BoundCheck {
                log_c: None,
                log_rhs: None,
                satisfied: None,
            }
        };
        let gap = scaled_gap_norm_sq(g, &out.h.counts, &out.clique.counts, h.edge_count(), r)?;
        let bound = embedding_error_bound(g.k(), r);
        let embedding_check = EmbeddingCheck {
            gap_norm: gap.to_f64().max(0.0).sqrt(),
            satisfied: norm_within(&gap, &bound),
            bound: bound.to_string(),
        };
        Ok(SolveReport {
            version: VERSION.to_string(),
            flags,
            instance,
            alpha: out.clique.alpha,
            clique_counts: out.clique.counts.clone(),
            clique_norm_sq: out.clique.norm_sq,
            clique_deviation: out.clique.deviation,
            h_counts: out.h.counts.clone(),
            h_deviation: out.h.deviation,
            h_norm: out.h.norm(),
            iterations: out.trace.scans,
            improving_steps: out.trace.improving_steps(),
            terminated_reason: out.trace.terminated_reason,
            restarts_used: out.restarts_used,
            best_restart: out.best_restart,
            parts: out.factor.parts().to_vec(),
            bound_check,
            embedding_check,
            wall_time_ms,
        })
    }
}

/// Solve and time, producing the report.
pub fn solve_report(
    g: &ColouredGraph,
    h: &PatternGraph,
    cfg: &SolveConfig,
    input: Option<String>,
    flags: BTreeMap<String, String>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let out = solve(g, h, cfg)?;
    let elapsed = start.elapsed().as_millis() as u64;
    let instance = InstanceDescriptor {
        n_v: g.n_vertices(),
        k: g.k(),
        r: h.r(),
        h_edges: h.edge_count(),
        seed: Some(cfg.seed),
        input,
    };
    SolveReport::new(g, h, &out, instance, flags, elapsed)
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub k: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub strategy: SearchStrategy,
    /// Defaults to `K_r`.
    pub h: Option<PatternGraph>,
}

/// One sweep measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
    pub alpha: f64,
    #[serde(serialize_with = "serialize_rational")]
    pub clique_deviation: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub h_deviation: Rational,
    pub iterations: usize,
    pub wall_time_ms: u64,
}

pub const SWEEP_HEADER: [&str; 9] = [
    "n",
    "k",
    "r",
    "seed",
    "alpha",
    "clique_deviation",
    "h_deviation",
    "iterations",
    "wall_time_ms",
];

/// Rows ordered by `(n, trial)` regardless of completion order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let palette = Palette::simplex(cfg.k)?;
    let h = match &cfg.h {
        Some(h) => h.clone(),
        None => PatternGraph::complete(cfg.r)?,
    };
    if h.r() != cfg.r {
        return Err(Error::Pattern(format!(
            "pattern has {} vertices, expected {}",
            h.r(),
            cfg.r
        )));
    }
    for &n in &cfg.n_list {
        check_divisible(n, cfg.r)?;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "n must be at least 2, got {}",
                n
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    jobs.par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(cfg.seed, ((n as u64) << 32) | t as u64);
            let start = Instant::now();
            let g = random_balanced_colouring(n, &palette, seed)?;
            let solve_cfg = SolveConfig {
                strategy: cfg.strategy,
                seed,
                ..SolveConfig::default()
            };
            let out = solve(&g, &h, &solve_cfg)?;
            Ok(SweepRow {
                n,
                k: cfg.k,
                r: cfg.r,
                seed,
                alpha: out.clique.alpha,
                clique_deviation: out.clique.deviation,
                h_deviation: out.h.deviation,
                iterations: out.trace.scans,
                wall_time_ms: start.elapsed().as_millis() as u64,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.n.to_string(),
            row.k.to_string(),
            row.r.to_string(),
            row.seed.to_string(),
            row.alpha.to_string(),
            crate::scalar::format_rational(&row.clique_deviation),
            crate::scalar::format_rational(&row.h_deviation),
            row.iterations.to_string(),
            row.wall_time_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{:?}", other))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub version: String,
    pub flags: BTreeMap<String, String>,
    pub n_v: usize,
    pub k: usize,
    pub r: usize,
    pub h_edges: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub min_deviation: Rational,
    pub counts: ColourCounts,
    pub witness_parts: Vec<Vec<usize>>,
    pub witness_edges: Vec<(usize, usize)>,
    pub visited: String,
}

pub fn oracle_report(
    g: &ColouredGraph,
    h: &PatternGraph,
    flags: BTreeMap<String, String>,
) -> Result<OracleReport> {
    let best = min_deviation_bruteforce(g, h)?;
    Ok(OracleReport {
        version: VERSION.to_string(),
        flags,
        n_v: g.n_vertices(),
        k: g.k(),
        r: h.r(),
        h_edges: h.edge_count(),
        min_deviation: best.deviation,
        counts: best.counts,
        witness_parts: best.embedding.assignments().to_vec(),
        witness_edges: best.embedding.edges(),
        visited: best.visited.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub version: String,
    pub flags: BTreeMap<String, String>,
    pub lattice: crate::bounds::LatticeFacts,
    pub table: crate::bounds::BoundsTable,
    pub pass: bool,
}

pub fn bounds_report(d: usize, r: usize, flags: BTreeMap<String, String>) -> Result<BoundsReport> {
    let lattice = crate::bounds::verify_lattice_facts(d, r)?;
    let table = constants(d + 1, r)?;
    Ok(BoundsReport {
        version: VERSION.to_string(),
        flags,
        pass: lattice.pass,
        lattice,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn restarts_never_worsen_the_result() {
        let g = random_balanced_colouring(24, &Palette::simplex(3).unwrap(), 5).unwrap();
        let h = PatternGraph::complete(3).unwrap();
        let one = solve(&g, &h, &SolveConfig::default()).unwrap();
        let many = solve(
            &g,
            &h,
            &SolveConfig {
                restarts: 4,
                ..SolveConfig::default()
            },
        )
        .unwrap();
        assert!(many
            .trace
            .final_norm_sq()
            .cmp_value(&one.trace.final_norm_sq())
            .is_le());
        assert_eq!(many.restarts_used, 4);
    }

    #[test]
    fn complete_pattern_keeps_clique_deviation() {
        let g = random_balanced_colouring(12, &Palette::simplex(4).unwrap(), 2).unwrap();
        let h = PatternGraph::complete(3).unwrap();
        let out = solve(&g, &h, &SolveConfig::default()).unwrap();
        assert_eq!(out.h.deviation, out.clique.deviation);
    }

    #[test]
    fn sweep_row_count_and_order() {
        let rows = sweep(&SweepConfig {
            n_list: vec![10, 20],
            k: 3,
            r: 2,
            trials: 2,
            seed: 7,
            strategy: SearchStrategy::Best,
            h: None,
        })
        .unwrap();
        assert_eq!(rows.len(), 4);
        let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![10, 10, 20, 20]);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER.join(","));
    }

    #[test]
    fn sweep_rejects_indivisible_n() {
        let err = sweep(&SweepConfig {
            n_list: vec![9],
            k: 3,
            r: 2,
            trials: 1,
            seed: 0,
            strategy: SearchStrategy::Best,
            h: None,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Divisibility { .. }));
    }
}
