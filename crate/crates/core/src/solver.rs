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

//! Swap-based descent on clique-factors.
//!
//! For a factor `F` with colour counts `b`, the weight vector is
//! `w = sum_i b_i q_i`. Swapping `u` and `v` (in distinct parts) removes the
//! `2(r-1)` factor edges at `u` and `v` and adds `2(r-1)` new ones; if `x` is
//! the removed-minus-added colour count vector, the squared norm drops by
//!
//! ```text
//! delta = 2 <w, g(x)> - ||g(x)||^2 = 2 b^T G x - x^T G x
//! ```
//!
//! which only depends on `b`, `x` and the Gram matrix `G`. For a simplex
//! palette `(k - 1) * delta` is an integer, so the descent terminates.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_divisible, CliqueFactor, ColouredGraph};
use crate::palette::{ColourCounts, Gram, Palette, REAL_TOLERANCE};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    Blocks,
    Random,
}

/// Starting factor. `Random` shuffles the vertices with ChaCha8 seeded
/// from `seed`.
pub fn initial_factor(
    n: usize,
    r: usize,
    strategy: InitStrategy,
    seed: u64,
) -> Result<CliqueFactor> {
    check_divisible(n, r)?;
    match strategy {
        InitStrategy::Blocks => CliqueFactor::blocks(n, r),
        InitStrategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CliqueFactor::random(n, r, &mut rng)
        }
    }
}

/// Removed-minus-added colour counts of a swap. Sums to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SwapVector(Vec<i64>);

impl SwapVector {
    pub fn new(x: Vec<i64>) -> SwapVector {
        SwapVector(x)
    }

    pub fn zeros(k: usize) -> SwapVector {
        SwapVector(vec![0; k])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Zero sum, `l1 <= 4(r-1)` and every `|x_i| <= 2(r-1)`.
    pub fn is_admissible(&self, r: usize) -> bool {
        let m = 2 * (r as i64 - 1);
        self.0.iter().sum::<i64>() == 0
            && self.l1_norm() <= 2 * m
            && self.0.iter().all(|x| x.abs() <= m)
    }

    pub fn negated(&self) -> SwapVector {
        SwapVector(self.0.iter().map(|x| -x).collect())
    }
}

fn check_swap(f: &CliqueFactor, u: usize, v: usize) -> Result<()> {
    let n = f.n_vertices();
    if u >= n || v >= n {
        return Err(Error::InvalidSwap {
            u,
            v,
            reason: "vertex out of range",
        });
    }
    if f.part_of(u) == f.part_of(v) {
        return Err(Error::InvalidSwap {
            u,
            v,
            reason: "vertices lie in the same part",
        });
    }
    Ok(())
}

#[inline]
fn fill_swap_vector(g: &ColouredGraph, f: &CliqueFactor, u: usize, v: usize, x: &mut [i64]) {
    x.iter_mut().for_each(|c| *c = 0);
    for &w in f.part(f.part_of(u)) {
        if w != u {
            x[g.colour(u, w)] += 1;
            x[g.colour(v, w)] -= 1;
        }
    }
    for &w in f.part(f.part_of(v)) {
        if w != v {
            x[g.colour(v, w)] += 1;
            x[g.colour(u, w)] -= 1;
        }
    }
}

/// Colour counts removed minus added by the swap `u <-> v`.
pub fn swap_vector(g: &ColouredGraph, f: &CliqueFactor, u: usize, v: usize) -> Result<SwapVector> {
    check_swap(f, u, v)?;
    let mut x = vec![0i64; g.k()];
    fill_swap_vector(g, f, u, v, &mut x);
    Ok(SwapVector(x))
}

/// Exact decrease of `||w||^2` caused by a swap with vector `x`.
pub fn swap_delta(p: &Palette, b: &ColourCounts, x: &SwapVector) -> Result<Scalar> {
    let bx = p.bilinear(b.as_slice(), x.as_slice())?;
    let xx = p.bilinear(x.as_slice(), x.as_slice())?;
    Ok(match (bx, xx) {
        (Scalar::Exact(bx), Scalar::Exact(xx)) => Scalar::Exact(bx * 2 - xx),
        (bx, xx) => Scalar::Real(2.0 * bx.to_f64() - xx.to_f64()),
    })
}

/// The factor obtained by exchanging `u` and `v`.
pub fn apply_swap(f: &CliqueFactor, u: usize, v: usize) -> Result<CliqueFactor> {
    let mut out = f.clone();
    out.swap(u, v)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    /// Apply the largest improvement; ties go to the lexicographically
    /// smallest `(u, v)`.
    #[default]
    Best,
    /// Apply the first improvement found in lexicographic `(u, v)` order.
    First,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LocalMinimum,
    MaxIters,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::LocalMinimum => f.write_str("local_minimum"),
            Termination::MaxIters => f.write_str("max_iters"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchTrace {
    /// `||w||^2` before the first swap and after each applied swap.
    pub norm_sq_history: Vec<Scalar>,
    pub swaps_applied: Vec<(usize, usize)>,
    pub terminated_reason: Termination,
    /// Neighbourhood scans performed, including the final one.
    pub scans: usize,
}

impl SearchTrace {
    pub fn improving_steps(&self) -> usize {
        self.swaps_applied.len()
    }

    pub fn final_norm_sq(&self) -> Scalar {
        *self.norm_sq_history.last().expect("history is never empty")
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    pub strategy: SearchStrategy,
    /// Cap on applied swaps. Real palettes default to
    /// `10 (k-1) ceil(||w(f0)||^2)`.
    pub max_iters: Option<usize>,
}

/// Candidate improvement in the evaluation domain: a scaled integer for
/// rational Gram matrices, a double otherwise.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
enum Gain {
    Scaled(i128),
    Real(f64),
}

impl Gain {
    fn improves(self) -> bool {
        match self {
            Gain::Scaled(d) => d > 0,
            Gain::Real(d) => d > REAL_TOLERANCE,
        }
    }

    fn beats(self, other: Gain) -> bool {
        match (self, other) {
            (Gain::Scaled(a), Gain::Scaled(b)) => a > b,
            (Gain::Real(a), Gain::Real(b)) => a > b,
            _ => unreachable!("mixed gain domains"),
        }
    }
}

/// Evaluates swap gains against fixed `(g, f, b)`.
struct Evaluator<'a> {
    g: &'a ColouredGraph,
    palette: &'a Palette,
    x: Vec<i64>,
}

impl<'a> Evaluator<'a> {
    fn new(g: &'a ColouredGraph) -> Evaluator<'a> {
        Evaluator {
            g,
            palette: g.palette(),
            x: vec![0; g.k()],
        }
    }

    #[inline]
    fn gain(&mut self, f: &CliqueFactor, b: &[i64], u: usize, v: usize) -> Gain {
        fill_swap_vector(self.g, f, u, v, &mut self.x);
        if self.x.iter().all(|&c| c == 0) {
            return match self.palette.gram() {
                Gram::Rational { .. } => Gain::Scaled(0),
                Gram::Real(_) => Gain::Real(0.0),
            };
        }
        match self.palette.gram() {
            Gram::Rational { .. } => {
                let bx = self.palette.scaled_bilinear(b, &self.x);
                let xx = self.palette.scaled_bilinear(&self.x, &self.x);
                Gain::Scaled(2 * bx - xx)
            }
            Gram::Real(_) => {
                let bx = self.palette.real_bilinear(b, &self.x);
                let xx = self.palette.real_bilinear(&self.x, &self.x);
                Gain::Real(2.0 * bx - xx)
            }
        }
    }
}

/// Scan cross-part pairs `u < v` lexicographically.
fn scan(
    eval: &mut Evaluator<'_>,
    f: &CliqueFactor,
    b: &[i64],
    strategy: SearchStrategy,
) -> Option<(usize, usize, Gain)> {
    let n = f.n_vertices();
    let mut best: Option<(usize, usize, Gain)> = None;
    for u in 0..n {
        let pu = f.part_of(u);
        for v in u + 1..n {
            if f.part_of(v) == pu {
                continue;
            }
            let gain = eval.gain(f, b, u, v);
            if !gain.improves() {
                continue;
            }
            match strategy {
                SearchStrategy::First => return Some((u, v, gain)),
                SearchStrategy::Best => {
                    if best.is_none_or(|(_, _, g)| gain.beats(g)) {
                        best = Some((u, v, gain));
                    }
                }
            }
        }
    }
    best
}

/// Descend from `f0` until no swap improves `||w||^2`.
pub fn local_search(
    g: &ColouredGraph,
    f0: &CliqueFactor,
    opts: SearchOptions,
) -> Result<(CliqueFactor, SearchTrace)> {
    if f0.n_vertices() != g.n_vertices() {
        return Err(Error::InvalidFactor(format!(
            "factor covers {} vertices, graph has {}",
            f0.n_vertices(),
            g.n_vertices()
        )));
    }
    let palette = g.palette();
    let mut f = f0.clone();
    let mut b = g.clique_factor_counts(&f);
    let start = palette.norm_sq_of_counts(&b)?;
    let max_iters = opts.max_iters.or_else(|| match start {
        Scalar::Exact(_) => None,
        Scalar::Real(x) => Some(10 * (g.k() - 1) * x.max(0.0).ceil() as usize),
    });

    let mut history = vec![start];
    let mut swaps = Vec::new();
    let mut scans = 0;
    let mut eval = Evaluator::new(g);
    let reason = loop {
        scans += 1;
        let Some((u, v, _)) = scan(&mut eval, &f, b.as_slice(), opts.strategy) else {
            break Termination::LocalMinimum;
        };
        if max_iters.is_some_and(|m| swaps.len() >= m) {
            break Termination::MaxIters;
        }
        let x = swap_vector(g, &f, u, v)?;
        let delta = swap_delta(palette, &b, &x)?;
        for (bi, xi) in b.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *bi -= xi;
        }
        f.swap(u, v)?;
        debug_assert_eq!(b, g.clique_factor_counts(&f));
        let prev = *history.last().unwrap();
        history.push(match (prev, delta) {
            (Scalar::Exact(p), Scalar::Exact(d)) => Scalar::Exact(p - d),
            _ => palette.norm_sq_of_counts(&b)?,
        });
        swaps.push((u, v));
    };

    Ok((
        f,
        SearchTrace {
            norm_sq_history: history,
            swaps_applied: swaps,
            terminated_reason: reason,
            scans,
        },
    ))
}

/// An improving swap of `f`, if any, found by an exhaustive scan that
/// recomputes each candidate from scratch.
pub fn find_improving_swap(
    g: &ColouredGraph,
    f: &CliqueFactor,
) -> Result<Option<(usize, usize, Scalar)>> {
    let p = g.palette();
    let before = p.norm_sq_of_counts(&g.clique_factor_counts(f))?;
    let n = f.n_vertices();
    for u in 0..n {
        for v in u + 1..n {
            if f.part_of(u) == f.part_of(v) {
                continue;
            }
            let after = p.norm_sq_of_counts(&g.clique_factor_counts(&apply_swap(f, u, v)?))?;
            let delta = before.checked_sub(&after);
            if delta.is_positive(REAL_TOLERANCE) {
                return Ok(Some((u, v, delta)));
            }
        }
    }
    Ok(None)
}

/// Both sides of `sum_{e in F} <c(e), w> = ||w||^2`, the left side summed
/// edge by edge through Gram rows.
pub fn weight_identity(g: &ColouredGraph, f: &CliqueFactor) -> Result<(Scalar, Scalar)> {
    let p = g.palette();
    let b = g.clique_factor_counts(f);
    let k = g.k();
    let mut lhs = match p.is_exact() {
        true => Scalar::Exact(Rational::from_integer(0)),
        false => Scalar::Real(0.0),
    };
    let mut unit = vec![0i64; k];
    for (u, v) in f.edges() {
        let c = g.colour(u, v);
        unit[c] = 1;
        let term = p.bilinear(&unit, b.as_slice())?;
        unit[c] = 0;
        lhs = match (lhs, term) {
            (Scalar::Exact(a), Scalar::Exact(t)) => Scalar::Exact(a + t),
            (a, t) => Scalar::Real(a.to_f64() + t.to_f64()),
        };
    }
    Ok((lhs, p.norm_sq_of_counts(&b)?))
}
