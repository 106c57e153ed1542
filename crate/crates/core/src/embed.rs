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

//! Lifting a clique-factor to an `H`-factor.
//!
//! Parts are grouped by their exact colour pattern. Within a group, parts
//! are cut (in ascending part index) into blocks of `r!`; the `i`-th part of
//! a block receives the `i`-th permutation of `0..r` in lexicographic order,
//! so across a block every clique edge position is covered equally often and
//! the block's `H` edges carry exactly `e(H) / C(r, 2)` of its clique colours.
//! The fewer than `r!` leftover parts of a group use the identity map.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CliqueFactor, Colour, ColouredGraph, DeviationReport, PatternGraph};
use crate::palette::ColourCounts;
use crate::scalar::{Rational, Scalar};

/// Colours of a part's `C(r, 2)` edges, vertices relabelled in ascending
/// order and pairs listed lexicographically.
pub fn clique_pattern(g: &ColouredGraph, part: &[usize]) -> Vec<Colour> {
    let sorted = sorted_part(part);
    let mut out = Vec::with_capacity(sorted.len() * sorted.len().saturating_sub(1) / 2);
    for (i, &u) in sorted.iter().enumerate() {
        for &v in &sorted[i + 1..] {
            out.push(g.colour(u, v) as Colour);
        }
    }
    out
}

fn sorted_part(part: &[usize]) -> Vec<usize> {
    let mut s = part.to_vec();
    s.sort_unstable();
    s
}

/// Parts grouped by identical colour pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueClassification {
    classes: BTreeMap<Vec<Colour>, Vec<usize>>,
}

impl CliqueClassification {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// `(pattern, ascending part indices)` ordered by pattern.
    pub fn iter(&self) -> impl Iterator<Item = (&[Colour], &[usize])> {
        self.classes
            .iter()
            .map(|(k, v)| (k.as_slice(), v.as_slice()))
    }
}

pub fn classify_cliques(g: &ColouredGraph, f: &CliqueFactor) -> CliqueClassification {
    let mut classes: BTreeMap<Vec<Colour>, Vec<usize>> = BTreeMap::new();
    for (i, part) in f.parts().iter().enumerate() {
        classes.entry(clique_pattern(g, part)).or_default().push(i);
    }
    CliqueClassification { classes }
}

/// `r!`, or `None` on overflow.
pub fn factorial(r: usize) -> Option<u128> {
    (1..=r as u128).try_fold(1u128, |acc, x| acc.checked_mul(x))
}

/// The `idx`-th permutation of `0..r` in lexicographic order.
pub fn nth_permutation(r: usize, mut idx: u128) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..r).collect();
    let mut out = Vec::with_capacity(r);
    for i in (0..r).rev() {
        let f = factorial(i).expect("permutation index within range");
        let pick = (idx / f) as usize;
        idx %= f;
        out.push(pool.remove(pick));
    }
    out
}

/// How leftover parts of a class place `H`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Remainder {
    #[default]
    Identity,
    /// Independent uniform bijections drawn from ChaCha8 with this seed.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingBlock {
    pub parts: Vec<usize>,
    /// `true` for a permutation block of exactly `r!` parts.
    pub full: bool,
}

/// One copy of `H` per part of a clique-factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HEmbedding {
    h: PatternGraph,
    /// `assignments[part][j]` is the host vertex of `H`-vertex `j`.
    assignments: Vec<Vec<usize>>,
    blocks: Vec<EmbeddingBlock>,
}

impl HEmbedding {
    pub fn new(h: PatternGraph, assignments: Vec<Vec<usize>>) -> HEmbedding {
        HEmbedding {
            h,
            assignments,
            blocks: Vec::new(),
        }
    }

    pub fn h(&self) -> &PatternGraph {
        &self.h
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    /// Full blocks and leftovers, one entry per class remainder.
    pub fn blocks(&self) -> &[EmbeddingBlock] {
        &self.blocks
    }

    pub fn part_edges(&self, part: usize) -> Vec<(usize, usize)> {
        let map = &self.assignments[part];
        self.h
            .edges()
            .iter()
            .map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b])))
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.assignments.len())
            .flat_map(|i| self.part_edges(i))
            .collect()
    }

    pub fn part_counts(&self, g: &ColouredGraph, part: usize) -> ColourCounts {
        let mut c = ColourCounts::zeros(g.k());
        for (u, v) in self.part_edges(part) {
            c.add_colour(g.colour(u, v));
        }
        c
    }

    pub fn counts(&self, g: &ColouredGraph) -> ColourCounts {
        let mut c = ColourCounts::zeros(g.k());
        for i in 0..self.assignments.len() {
            c.add_assign(&self.part_counts(g, i));
        }
        c
    }
}

/// Colour counts of a part's clique edges.
pub fn part_clique_counts(g: &ColouredGraph, part: &[usize]) -> ColourCounts {
    let mut c = ColourCounts::zeros(g.k());
    for (i, &u) in part.iter().enumerate() {
        for &v in &part[i + 1..] {
            c.add_colour(g.colour(u, v));
        }
    }
    c
}

/// Place a copy of `h` in every part of `f` by permutation blocks.
pub fn embed_h_factor(
    g: &ColouredGraph,
    f: &CliqueFactor,
    h: &PatternGraph,
    remainder: Remainder,
) -> Result<(HEmbedding, DeviationReport)> {
    let r = f.r();
    if h.r() != r {
        return Err(Error::Pattern(format!(
            "pattern has {} vertices but the factor has parts of size {}",
            h.r(),
            r
        )));
    }
    if f.n_vertices() != g.n_vertices() {
        return Err(Error::InvalidFactor(format!(
            "factor covers {} vertices, graph has {}",
            f.n_vertices(),
            g.n_vertices()
        )));
    }
    let block = factorial(r).unwrap_or(u128::MAX);
    let mut rng = match remainder {
        Remainder::Identity => None,
        Remainder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut assignments: Vec<Vec<usize>> = vec![Vec::new(); f.num_parts()];
    let mut blocks = Vec::new();
    for (_, members) in classify_cliques(g, f).iter() {
        let full_blocks = (members.len() as u128 / block) as usize;
        let block_len = if full_blocks > 0 { block as usize } else { 0 };
        for chunk in members[..full_blocks * block_len].chunks(block_len.max(1)) {
            for (i, &p) in chunk.iter().enumerate() {
                let sorted = sorted_part(f.part(p));
                assignments[p] = nth_permutation(r, i as u128)
                    .into_iter()
                    .map(|s| sorted[s])
                    .collect();
            }
            blocks.push(EmbeddingBlock {
                parts: chunk.to_vec(),
                full: true,
            });
        }
        let rest = &members[full_blocks * block_len..];
        for &p in rest {
            let mut sorted = sorted_part(f.part(p));
            if let Some(rng) = rng.as_mut() {
                sorted.shuffle(rng);
            }
            assignments[p] = sorted;
        }
        if !rest.is_empty() {
            blocks.push(EmbeddingBlock {
                parts: rest.to_vec(),
                full: false,
            });
        }
    }
    let embedding = HEmbedding {
        h: h.clone(),
        assignments,
        blocks,
    };
    let report = DeviationReport::from_counts(g, embedding.counts(g));
    Ok((embedding, report))
}

/// `2 k^C(r,2) r! C(r,2)`: worst-case norm gap between the embedded
/// `H`-factor's colour sum and the scaled clique-factor colour sum.
pub fn embedding_error_bound(k: usize, r: usize) -> BigUint {
    let pairs = r * r.saturating_sub(1) / 2;
    let mut out = BigUint::from(2u32) * BigUint::from(k).pow(pairs as u32) * BigUint::from(pairs);
    for i in 2..=r {
        out *= BigUint::from(i);
    }
    out
}

/// `||sum c(H edges) - e(H)/C(r,2) * sum c(clique edges)||^2`.
pub fn scaled_gap_norm_sq(
    g: &ColouredGraph,
    h_counts: &ColourCounts,
    clique_counts: &ColourCounts,
    h_edges: usize,
    r: usize,
) -> Result<Scalar> {
    let clique_edges = (r * (r - 1) / 2) as i128;
    let ratio = Rational::new(h_edges as i128, clique_edges);
    let diff: Vec<Rational> = h_counts
        .as_slice()
        .iter()
        .zip(clique_counts.as_slice())
        .map(|(&a, &b)| Rational::from_integer(a as i128) - ratio * b as i128)
        .collect();
    g.palette().norm_sq_of_weights(&diff)
}

/// Whether a norm with square `norm_sq` is at most `bound`.
pub fn norm_within(norm_sq: &Scalar, bound: &BigUint) -> bool {
    match (norm_sq, i128::try_from(bound.clone())) {
        (Scalar::Exact(q), Ok(b)) if b < (1i128 << 60) => *q <= Rational::from_integer(b * b),
        _ => {
            let b: f64 = bound.to_string().parse().unwrap_or(f64::INFINITY);
            norm_sq.to_f64().max(0.0).sqrt() <= b * (1.0 + 1e-12)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_balanced_colouring;
    use crate::palette::Palette;
    use crate::solver::{initial_factor, InitStrategy};
    use num_traits::Zero;

    #[test]
    fn permutations_in_lexicographic_order() {
        let all: Vec<Vec<usize>> = (0..6).map(|i| nth_permutation(3, i)).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(factorial(4), Some(24));
    }

    #[test]
    fn classification_examples() {
        let p = Palette::simplex(3).unwrap();
        let mono = ColouredGraph::from_fn(9, p.clone(), |_, _| 0).unwrap();
        let f = CliqueFactor::blocks(9, 3).unwrap();
        let cls = classify_cliques(&mono, &f);
        assert_eq!(cls.num_classes(), 1);
        assert_eq!(cls.iter().next().unwrap().1, &[0, 1, 2]);

        let g = random_balanced_colouring(20, &p, 4).unwrap();
        let f = CliqueFactor::blocks(20, 2).unwrap();
        let cls = classify_cliques(&g, &f);
        assert!(cls.num_classes() <= 3);
        for (pattern, parts) in cls.iter() {
            for &i in parts {
                let part = f.part(i);
                assert_eq!(pattern, &[g.colour(part[0], part[1]) as Colour]);
            }
        }
        let total: usize = cls.iter().map(|(_, p)| p.len()).sum();
        assert_eq!(total, 10);

        // Distinct patterns: part i has colour (i mod 3) on its only edge.
        let g = ColouredGraph::from_fn(
            6,
            p,
            |u, v| if v == u + 1 && u % 2 == 0 { u / 2 } else { 0 },
        )
        .unwrap();
        let f = CliqueFactor::blocks(6, 2).unwrap();
        assert_eq!(classify_cliques(&g, &f).num_classes(), 3);
    }

    #[test]
    fn complete_pattern_reproduces_clique_counts() {
        let p = Palette::simplex(3).unwrap();
        let g = random_balanced_colouring(12, &p, 8).unwrap();
        let f = initial_factor(12, 3, InitStrategy::Random, 2).unwrap();
        let h = PatternGraph::complete(3).unwrap();
        let (emb, report) = embed_h_factor(&g, &f, &h, Remainder::Identity).unwrap();
        assert_eq!(report.counts, g.clique_factor_counts(&f));
        assert_eq!(emb.edges().len(), 12);
    }

    #[test]
    fn single_edge_pattern_is_the_matching() {
        let p = Palette::simplex(2).unwrap();
        let g = random_balanced_colouring(8, &p, 1).unwrap();
        let f = initial_factor(8, 2, InitStrategy::Random, 5).unwrap();
        let h = PatternGraph::complete(2).unwrap();
        let (emb, _) = embed_h_factor(&g, &f, &h, Remainder::Identity).unwrap();
        let mut got = emb.edges();
        got.sort_unstable();
        let mut want = f.edges();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn path_on_six_identical_triangles() {
        // Six parts with identical pattern (01 -> 0, 02 -> 1, 12 -> 2):
        // colour c(u, v) depends only on the positions within the block.
        let p = Palette::simplex(3).unwrap();
        let g = ColouredGraph::from_fn(18, p, |u, v| {
            if u / 3 == v / 3 {
                (u % 3) + (v % 3) - 1
            } else {
                0
            }
        })
        .unwrap();
        let f = CliqueFactor::blocks(18, 3).unwrap();
        let h = PatternGraph::path(3).unwrap();
        let (emb, report) = embed_h_factor(&g, &f, &h, Remainder::Identity).unwrap();
        assert_eq!(emb.blocks().len(), 1);
        assert!(emb.blocks()[0].full);

        // Brute force: sum over all 6 relabellings of the path's two edges.
        let mut want = [0i64; 3];
        for perm in [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ] {
            for (a, b) in [(0usize, 1usize), (1, 2)] {
                let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                want[x + y - 1] += 1;
            }
        }
        assert_eq!(report.counts.as_slice(), &want);
        // (2/3) x block clique counts (6, 6, 6).
        assert_eq!(want, [4, 4, 4]);
        let gap =
            scaled_gap_norm_sq(&g, &report.counts, &g.clique_factor_counts(&f), 2, 3).unwrap();
        assert_eq!(gap, Scalar::Exact(Rational::zero()));
    }

    #[test]
    fn edgeless_pattern_gives_zero_counts() {
        let p = Palette::simplex(2).unwrap();
        let g = random_balanced_colouring(6, &p, 1).unwrap();
        let f = CliqueFactor::blocks(6, 3).unwrap();
        let h = PatternGraph::new(3, vec![]).unwrap();
        let (emb, report) = embed_h_factor(&g, &f, &h, Remainder::Identity).unwrap();
        assert!(emb.edges().is_empty());
        assert_eq!(report.counts.as_slice(), &[0, 0]);
        assert_eq!(report.deviation, Rational::zero());
    }

    #[test]
    fn pattern_size_mismatch() {
        let p = Palette::simplex(2).unwrap();
        let g = random_balanced_colouring(6, &p, 1).unwrap();
        let f = CliqueFactor::blocks(6, 3).unwrap();
        let h = PatternGraph::complete(2).unwrap();
        assert!(matches!(
            embed_h_factor(&g, &f, &h, Remainder::Identity),
            Err(Error::Pattern(_))
        ));
    }

    #[test]
    fn error_bound_examples() {
        assert_eq!(embedding_error_bound(2, 2), BigUint::from(8u32));
        assert_eq!(embedding_error_bound(3, 2), BigUint::from(12u32));
        assert_eq!(embedding_error_bound(2, 3), BigUint::from(288u32));
    }

    #[test]
    fn remainder_only_instance_is_far_below_bound() {
        // Five triangles (< 3!) all leftovers: gap <= 5 * 2 * 3 = 30 << 288.
        let p = Palette::simplex(2).unwrap();
        let g = random_balanced_colouring(15, &p, 3).unwrap();
        let f = CliqueFactor::blocks(15, 3).unwrap();
        let h = PatternGraph::path(3).unwrap();
        let (emb, report) = embed_h_factor(&g, &f, &h, Remainder::Identity).unwrap();
        assert!(emb.blocks().iter().all(|b| !b.full));
        let gap =
            scaled_gap_norm_sq(&g, &report.counts, &g.clique_factor_counts(&f), 2, 3).unwrap();
        assert!(gap.to_f64().sqrt() <= 30.0);
        assert!(norm_within(&gap, &embedding_error_bound(2, 3)));
    }

    #[test]
    fn random_remainder_is_seeded() {
        let p = Palette::simplex(3).unwrap();
        let g = random_balanced_colouring(12, &p, 3).unwrap();
        let f = CliqueFactor::blocks(12, 4).unwrap();
        let h = PatternGraph::path(4).unwrap();
        let a = embed_h_factor(&g, &f, &h, Remainder::Random(9)).unwrap().0;
        let b = embed_h_factor(&g, &f, &h, Remainder::Random(9)).unwrap().0;
        assert_eq!(a, b);
        for (i, part) in f.parts().iter().enumerate() {
            assert_eq!(sorted_part(&a.assignments()[i]), sorted_part(part));
        }
    }
}
