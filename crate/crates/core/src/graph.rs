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

//! Edge-coloured complete graphs, clique-factors, pattern graphs and the
//! balance statistics computed on them.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{self, Write};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::palette::{ColourCounts, Palette};
use crate::scalar::{serialize_rational, Rational, Scalar};

/// Colour index type. Palettes larger than `u16::MAX` colours are rejected.
pub type Colour = u16;

/// Rank of the unordered pair `{u, v}` in the row-major upper triangle.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Complete graph on `n` vertices with a total edge colouring.
#[derive(Clone, Debug)]
pub struct ColouredGraph {
    n: usize,
    colours: Vec<Colour>,
    palette: Palette,
}

impl ColouredGraph {
    /// `colours` is indexed by [`pair_index`].
    pub fn new(n: usize, palette: Palette, colours: Vec<Colour>) -> Result<ColouredGraph> {
        if n == 0 {
            return Err(Error::InvalidFactor(
                "graph needs at least one vertex".into(),
            ));
        }
        let m = n * (n - 1) / 2;
        if colours.len() != m {
            return Err(Error::Dimension {
                expected: m,
                found: colours.len(),
            });
        }
        if palette.k() > Colour::MAX as usize {
            return Err(Error::InvalidPalette(format!(
                "too many colours: {}",
                palette.k()
            )));
        }
        if let Some(&c) = colours.iter().find(|&&c| c as usize >= palette.k()) {
            return Err(Error::InvalidPalette(format!(
                "colour index {} out of range for {} colours",
                c,
                palette.k()
            )));
        }
        Ok(ColouredGraph {
            n,
            colours,
            palette,
        })
    }

    /// Build by evaluating `colour(u, v)` for every pair `u < v`.
    pub fn from_fn<F>(n: usize, palette: Palette, mut colour: F) -> Result<ColouredGraph>
    where
        F: FnMut(usize, usize) -> usize,
    {
        let mut colours = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                let c = colour(u, v);
                if c >= palette.k() {
                    return Err(Error::InvalidPalette(format!(
                        "colour index {} out of range for {} colours",
                        c,
                        palette.k()
                    )));
                }
                colours.push(c as Colour);
            }
        }
        ColouredGraph::new(n, palette, colours)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.colours.len()
    }

    pub fn k(&self) -> usize {
        self.palette.k()
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    /// Colour of the edge `{u, v}`. Panics if `u == v` or out of range.
    #[inline]
    pub fn colour(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.colours[pair_index(self.n, u, v)] as usize
    }

    pub fn try_colour(&self, u: usize, v: usize) -> Result<usize> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::Edge(u, v));
        }
        Ok(self.colour(u, v))
    }

    /// Iterate `(u, v, colour)` over all pairs `u < v` in pair-rank order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
            .zip(self.colours.iter())
            .map(|((u, v), &c)| (u, v, c as usize))
    }

    pub fn total_counts(&self) -> ColourCounts {
        let mut counts = ColourCounts::zeros(self.k());
        for &c in &self.colours {
            counts.add_colour(c as usize);
        }
        counts
    }

    /// Per-colour counts of the given edges.
    pub fn factor_counts<I>(&self, edges: I) -> Result<ColourCounts>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut counts = ColourCounts::zeros(self.k());
        for (u, v) in edges {
            counts.add_colour(self.try_colour(u, v)?);
        }
        Ok(counts)
    }

    /// `||sum_e c(e)||` over every edge of the graph.
    pub fn balance_alpha(&self) -> f64 {
        let norm_sq = self
            .palette
            .norm_sq_of_counts(&self.total_counts())
            .expect("palette and counts share k");
        norm_sq.to_f64().max(0.0).sqrt()
    }

    pub fn clique_factor_counts(&self, f: &CliqueFactor) -> ColourCounts {
        let mut counts = ColourCounts::zeros(self.k());
        for part in f.parts() {
            for (i, &u) in part.iter().enumerate() {
                for &v in &part[i + 1..] {
                    counts.add_colour(self.colour(u, v));
                }
            }
        }
        counts
    }

    /// Write in the line-oriented colouring format.
    pub fn write_colouring<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut buf = String::with_capacity(self.colours.len() * 8 + 16);
        writeln!(buf, "{} {}", self.n, self.k()).unwrap();
        for (u, v, c) in self.edges() {
            writeln!(buf, "{} {} {}", u, v, c).unwrap();
        }
        out.write_all(buf.as_bytes())
    }

    pub fn to_colouring_string(&self) -> String {
        let mut out = Vec::new();
        self.write_colouring(&mut out).expect("writing to a Vec");
        String::from_utf8(out).expect("ascii output")
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let body = body.trim();
        if body.is_empty() {
            None
        } else {
            Some((i + 1, body))
        }
    })
}

fn parse_fields<const N: usize>(line: usize, body: &str) -> Result<[usize; N]> {
    let mut out = [0usize; N];
    let mut tokens = body.split_whitespace();
    for slot in out.iter_mut() {
        let tok = tokens.next().ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected {} integers", N),
        })?;
        *slot = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not a non-negative integer: {:?}", tok),
        })?;
    }
    if tokens.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: format!("expected {} integers", N),
        });
    }
    Ok(out)
}

/// Parse the colouring format. The palette is the regular simplex on `k`
/// colours.
pub fn load_colouring(text: &str) -> Result<ColouredGraph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let [n, k] = parse_fields::<2>(hline, header)?;
    if n == 0 {
        return Err(Error::Parse {
            line: hline,
            msg: "graph needs at least one vertex".into(),
        });
    }
    let palette = Palette::simplex(k).map_err(|e| Error::Parse {
        line: hline,
        msg: e.to_string(),
    })?;
    if k > Colour::MAX as usize {
        return Err(Error::Parse {
            line: hline,
            msg: format!("too many colours: {}", k),
        });
    }
    let m = n * (n - 1) / 2;
    let mut colours: Vec<Option<Colour>> = vec![None; m];
    let mut last_line = hline;
    for (line, body) in lines {
        last_line = line;
        let [u, v, c] = parse_fields::<3>(line, body)?;
        if u == v {
            return Err(Error::Parse {
                line,
                msg: format!("loop at vertex {}", u),
            });
        }
        if u >= n || v >= n {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "vertex out of range in pair ({}, {}) for {} vertices",
                    u, v, n
                ),
            });
        }
        if u > v {
            return Err(Error::Parse {
                line,
                msg: format!("pair ({}, {}) must be written with u < v", u, v),
            });
        }
        if c >= k {
            return Err(Error::Parse {
                line,
                msg: format!("colour {} out of range for {} colours", c, k),
            });
        }
        let slot = &mut colours[pair_index(n, u, v)];
        if slot.is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate pair ({}, {})", u, v),
            });
        }
        *slot = Some(c as Colour);
    }
    if let Some(missing) = colours.iter().position(Option::is_none) {
        let (u, v) = pair_from_index(n, missing);
        return Err(Error::Parse {
            line: last_line,
            msg: format!("missing pair ({}, {})", u, v),
        });
    }
    ColouredGraph::new(
        n,
        palette,
        colours.into_iter().map(Option::unwrap).collect(),
    )
}

fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    for u in 0..n {
        let row = n - u - 1;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

/// Near-balanced colouring: per-colour totals differ by at most one, the
/// surplus colours are drawn uniformly, and the assignment to pairs is a
/// uniform shuffle. Deterministic in `seed` (ChaCha8).
pub fn random_balanced_colouring(n: usize, palette: &Palette, seed: u64) -> Result<ColouredGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_balanced_colouring_with(n, palette, &mut rng)
}

pub fn random_balanced_colouring_with<R: Rng + ?Sized>(
    n: usize,
    palette: &Palette,
    rng: &mut R,
) -> Result<ColouredGraph> {
    if n < 2 {
        return Err(Error::InvalidFactor(format!(
            "need at least 2 vertices, got {}",
            n
        )));
    }
    let k = palette.k();
    let m = n * (n - 1) / 2;
    let (q, rem) = (m / k, m % k);
    let mut surplus: Vec<usize> = (0..k).collect();
    surplus.shuffle(rng);
    let mut colours: Vec<Colour> = Vec::with_capacity(m);
    for c in 0..k {
        colours.extend(std::iter::repeat_n(c as Colour, q));
    }
    colours.extend(surplus[..rem].iter().map(|&c| c as Colour));
    colours.shuffle(rng);
    ColouredGraph::new(n, palette.clone(), colours)
}

/// Partition of the vertex set into parts of equal size `r`.
///
/// Part order and the slot order inside a part are preserved by swaps:
/// swapping `u` and `v` puts each into the other's slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueFactor {
    r: usize,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
}

impl CliqueFactor {
    pub fn new(parts: Vec<Vec<usize>>) -> Result<CliqueFactor> {
        let r = parts.first().map(Vec::len).unwrap_or(0);
        if r == 0 {
            return Err(Error::InvalidFactor(
                "a factor needs a non-empty part".into(),
            ));
        }
        let n: usize = parts.iter().map(Vec::len).sum();
        let mut part_of = vec![usize::MAX; n];
        for (i, part) in parts.iter().enumerate() {
            if part.len() != r {
                return Err(Error::InvalidFactor(format!(
                    "part {} has size {}, expected {}",
                    i,
                    part.len(),
                    r
                )));
            }
            for &v in part {
                if v >= n {
                    return Err(Error::InvalidFactor(format!(
                        "vertex {} out of range for {} vertices",
                        v, n
                    )));
                }
                if part_of[v] != usize::MAX {
                    return Err(Error::InvalidFactor(format!("vertex {} appears twice", v)));
                }
                part_of[v] = i;
            }
        }
        Ok(CliqueFactor { r, parts, part_of })
    }

    /// Parts `{0..r}`, `{r..2r}`, ...
    pub fn blocks(n: usize, r: usize) -> Result<CliqueFactor> {
        check_divisible(n, r)?;
        CliqueFactor::new((0..n / r).map(|i| (i * r..(i + 1) * r).collect()).collect())
    }

    /// Uniformly random partition: a shuffled vertex order cut into blocks.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<CliqueFactor> {
        check_divisible(n, r)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        CliqueFactor::new(order.chunks(r).map(<[usize]>::to_vec).collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n_vertices(&self) -> usize {
        self.part_of.len()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    /// Number of factor edges, `n/r * C(r, 2)`.
    pub fn n_edges(&self) -> usize {
        self.parts.len() * self.r * (self.r - 1) / 2
    }

    /// All factor edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for part in &self.parts {
            for (i, &u) in part.iter().enumerate() {
                for &v in &part[i + 1..] {
                    out.push((u.min(v), u.max(v)));
                }
            }
        }
        out
    }

    /// Exchange the parts of `u` and `v`.
    pub fn swap(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n_vertices();
        if u >= n || v >= n {
            return Err(Error::InvalidSwap {
                u,
                v,
                reason: "vertex out of range",
            });
        }
        let (pu, pv) = (self.part_of[u], self.part_of[v]);
        if pu == pv {
            return Err(Error::InvalidSwap {
                u,
                v,
                reason: "vertices lie in the same part",
            });
        }
        let iu = self.parts[pu].iter().position(|&x| x == u).unwrap();
        let iv = self.parts[pv].iter().position(|&x| x == v).unwrap();
        self.parts[pu][iu] = v;
        self.parts[pv][iv] = u;
        self.part_of[u] = pv;
        self.part_of[v] = pu;
        Ok(())
    }

    /// Parts sorted internally and then by first vertex; equal for equal
    /// set-partitions.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut parts: Vec<Vec<usize>> = self
            .parts
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.sort_unstable();
                p
            })
            .collect();
        parts.sort_unstable();
        parts
    }
}

pub(crate) fn check_divisible(n: usize, r: usize) -> Result<()> {
    if r == 0 || n == 0 || !n.is_multiple_of(r) {
        return Err(Error::Divisibility { n_v: n, r });
    }
    Ok(())
}

/// A simple graph `H` on vertices `0..r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternGraph {
    r: usize,
    edges: Vec<(usize, usize)>,
}

impl PatternGraph {
    pub fn new(r: usize, edges: Vec<(usize, usize)>) -> Result<PatternGraph> {
        if r < 2 {
            return Err(Error::Pattern(format!(
                "need at least 2 vertices, got {}",
                r
            )));
        }
        let mut seen = HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::Pattern(format!("loop at vertex {}", u)));
            }
            if u >= r || v >= r {
                return Err(Error::Pattern(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    u, v, r
                )));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::Pattern(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            norm.push(e);
        }
        norm.sort_unstable();
        Ok(PatternGraph { r, edges: norm })
    }

    pub fn complete(r: usize) -> Result<PatternGraph> {
        let edges = (0..r)
            .flat_map(|u| (u + 1..r).map(move |v| (u, v)))
            .collect();
        PatternGraph::new(r, edges)
    }

    pub fn path(r: usize) -> Result<PatternGraph> {
        PatternGraph::new(r, (1..r).map(|v| (v - 1, v)).collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.r * (self.r - 1) / 2
    }

    /// Parse `<r> <m>` followed by `m` lines `<u> <v>` with `u < v`.
    pub fn parse(text: &str) -> Result<PatternGraph> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let [r, m] = parse_fields::<2>(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        let mut last_line = hline;
        for (line, body) in lines {
            last_line = line;
            let [u, v] = parse_fields::<2>(line, body)?;
            if !(u < v && v < r) {
                return Err(Error::Parse {
                    line,
                    msg: format!("edge ({}, {}) must satisfy u < v < {}", u, v, r),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: last_line,
                msg: format!("expected {} edges, found {}", m, edges.len()),
            });
        }
        PatternGraph::new(r, edges).map_err(|e| Error::Parse {
            line: last_line,
            msg: e.to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.r, self.edges.len());
        for (u, v) in &self.edges {
            writeln!(s, "{} {}", u, v).unwrap();
        }
        s
    }
}

/// `sum_i |counts[i] - total / k|`, exactly.
pub fn deviation(counts: &ColourCounts, k: usize) -> Rational {
    let mean = Rational::new(counts.total() as i128, k as i128);
    counts
        .as_slice()
        .iter()
        .map(|&c| (Rational::from_integer(c as i128) - mean).abs())
        .fold(Rational::zero(), |a, b| a + b)
}

/// Balance statistics of a factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub counts: ColourCounts,
    pub n_edges: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub deviation: Rational,
    pub norm_sq: Scalar,
    pub alpha: f64,
    pub iterations: usize,
    pub improving_steps: usize,
}

impl DeviationReport {
    pub fn from_counts(g: &ColouredGraph, counts: ColourCounts) -> DeviationReport {
        let norm_sq = g
            .palette()
            .norm_sq_of_counts(&counts)
            .expect("palette and counts share k");
        DeviationReport {
            n_edges: counts.total() as usize,
            deviation: deviation(&counts, g.k()),
            norm_sq,
            alpha: g.balance_alpha(),
            counts,
            iterations: 0,
            improving_steps: 0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.to_f64().max(0.0).sqrt()
    }
}
