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

//! Exhaustive ground truth for small instances.

use std::collections::HashSet;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embed::{factorial, nth_permutation, HEmbedding};
use crate::error::{Error, Result};
use crate::graph::{
    check_divisible, deviation, random_balanced_colouring_with, CliqueFactor, ColouredGraph,
    PatternGraph,
};
use crate::palette::{ColourCounts, Palette};
use crate::scalar::Rational;

/// Largest number of candidates any exhaustive search will visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `n! / ((r!)^(n/r) (n/r)!)`, saturating at `u128::MAX`.
pub fn factor_count(n: usize, r: usize) -> u128 {
    if r == 0 || !n.is_multiple_of(r) {
        return 0;
    }
    let mut acc: u128 = 1;
    let mut left = n as u128;
    while left > 0 {
        let Some(c) = binomial(left - 1, r as u128 - 1) else {
            return u128::MAX;
        };
        acc = match acc.checked_mul(c) {
            Some(v) => v,
            None => return u128::MAX,
        };
        left -= r as u128;
    }
    acc
}

fn count_string(c: u128) -> String {
    if c == u128::MAX {
        format!(">= {}", c)
    } else {
        c.to_string()
    }
}

/// Streams every partition of `0..n` into `r`-sets exactly once. Each part
/// starts with the smallest vertex not used by earlier parts; the rest of the
/// part runs through combinations in lexicographic order.
#[derive(Clone, Debug)]
pub struct FactorEnumeration {
    n: usize,
    r: usize,
    /// Per level, indices into that level's pool (available vertices minus
    /// its minimum).
    combos: Vec<Vec<usize>>,
    parts: Vec<Vec<usize>>,
    state: EnumState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EnumState {
    Fresh,
    Running,
    Done,
}

impl FactorEnumeration {
    fn new(n: usize, r: usize) -> FactorEnumeration {
        let m = n / r;
        FactorEnumeration {
            n,
            r,
            combos: vec![Vec::new(); m],
            parts: vec![Vec::new(); m],
            state: EnumState::Fresh,
        }
    }

    fn available(&self, level: usize) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for part in &self.parts[..level] {
            for &v in part {
                used[v] = true;
            }
        }
        (0..self.n).filter(|&v| !used[v]).collect()
    }

    fn set_part(&mut self, level: usize, avail: &[usize]) {
        let mut part = Vec::with_capacity(self.r);
        part.push(avail[0]);
        part.extend(self.combos[level].iter().map(|&i| avail[1 + i]));
        self.parts[level] = part;
    }

    fn fill_from(&mut self, level: usize) {
        for l in level..self.parts.len() {
            let avail = self.available(l);
            self.combos[l] = (0..self.r - 1).collect();
            self.set_part(l, &avail);
        }
    }

    fn advance(&mut self) -> bool {
        for level in (0..self.parts.len()).rev() {
            let avail = self.available(level);
            let pool = avail.len() - 1;
            let combo = &mut self.combos[level];
            let t = combo.len();
            // Rightmost index that can still move.
            let Some(i) = (0..t).rev().find(|&i| combo[i] < pool - t + i) else {
                continue;
            };
            combo[i] += 1;
            for j in i + 1..t {
                combo[j] = combo[j - 1] + 1;
            }
            self.set_part(level, &avail);
            self.fill_from(level + 1);
            return true;
        }
        false
    }
}

impl Iterator for FactorEnumeration {
    type Item = CliqueFactor;

    fn next(&mut self) -> Option<CliqueFactor> {
        match self.state {
            EnumState::Done => return None,
            EnumState::Fresh => {
                self.fill_from(0);
                self.state = EnumState::Running;
            }
            EnumState::Running => {
                if !self.advance() {
                    self.state = EnumState::Done;
                    return None;
                }
            }
        }
        Some(CliqueFactor::new(self.parts.clone()).expect("enumeration yields valid factors"))
    }
}

/// All clique-factors of `K_n` with parts of size `r`, streamed.
pub fn enumerate_clique_factors(n: usize, r: usize) -> Result<FactorEnumeration> {
    check_divisible(n, r)?;
    let count = factor_count(n, r);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "factor enumeration",
            count: count_string(count),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(FactorEnumeration::new(n, r))
}

/// A minimum-deviation `H`-factor.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub deviation: Rational,
    pub counts: ColourCounts,
    pub factor: CliqueFactor,
    pub embedding: HEmbedding,
    /// Number of `(factor, embedding choice)` candidates visited.
    pub visited: u128,
}

/// Candidate count for [`min_deviation_bruteforce`]: factors times `r!` per
/// part, or just factors when `H` is complete.
pub fn bruteforce_size(n: usize, h: &PatternGraph) -> u128 {
    let r = h.r();
    let factors = factor_count(n, r);
    if h.is_complete() || h.edge_count() == 0 {
        return factors;
    }
    let per_part = factorial(r).unwrap_or(u128::MAX);
    (0..n / r).fold(factors, |acc, _| acc.saturating_mul(per_part))
}

/// Distinct colour-count vectors over all placements of `h` in `part`,
/// each with one witnessing bijection.
fn part_options(
    g: &ColouredGraph,
    h: &PatternGraph,
    part: &[usize],
) -> Vec<(ColourCounts, Vec<usize>)> {
    let r = h.r();
    let total = if h.is_complete() || h.edge_count() == 0 {
        1
    } else {
        factorial(r).expect("guarded by bruteforce_size")
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for idx in 0..total {
        let map: Vec<usize> = nth_permutation(r, idx)
            .into_iter()
            .map(|s| part[s])
            .collect();
        let mut counts = ColourCounts::zeros(g.k());
        for &(a, b) in h.edges() {
            counts.add_colour(g.colour(map[a], map[b]));
        }
        if seen.insert(counts.clone()) {
            out.push((counts, map));
        }
    }
    out
}

/// Exact minimum deviation over every `H`-factor of `g`.
pub fn min_deviation_bruteforce(g: &ColouredGraph, h: &PatternGraph) -> Result<OracleResult> {
    let n = g.n_vertices();
    let r = h.r();
    check_divisible(n, r)?;
    let size = bruteforce_size(n, h);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force search",
            count: count_string(size),
            limit: ENUMERATION_LIMIT,
        });
    }
    let k = g.k();
    let mut best: Option<OracleResult> = None;
    let mut visited: u128 = 0;
    for f in enumerate_clique_factors(n, r)? {
        let options: Vec<_> = f.parts().iter().map(|p| part_options(g, h, p)).collect();
        let mut choice = vec![0usize; options.len()];
        loop {
            visited += 1;
            let mut counts = ColourCounts::zeros(k);
            for (opts, &c) in options.iter().zip(&choice) {
                counts.add_assign(&opts[c].0);
            }
            let dev = deviation(&counts, k);
            if best.as_ref().is_none_or(|b| dev < b.deviation) {
                let assignments = options
                    .iter()
                    .zip(&choice)
                    .map(|(opts, &c)| opts[c].1.clone())
                    .collect();
                best = Some(OracleResult {
                    deviation: dev,
                    counts,
                    factor: f.clone(),
                    embedding: HEmbedding::new(h.clone(), assignments),
                    visited: 0,
                });
                if dev.is_zero() {
                    let mut b = best.unwrap();
                    b.visited = visited;
                    return Ok(b);
                }
            }
            // Odometer over per-part options.
            let mut i = 0;
            while i < choice.len() {
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    let mut b = best.expect("at least one factor exists");
    b.visited = visited;
    Ok(b)
}

/// Search random near-balanced colourings for one whose every `H`-factor is
/// unbalanced. Deterministic per `seed`.
pub fn find_unbalanced_colouring(
    n: usize,
    palette: &Palette,
    h: &PatternGraph,
    seed: u64,
    trials: u64,
) -> Result<Option<(ColouredGraph, Rational)>> {
    check_divisible(n, h.r())?;
    let size = bruteforce_size(n, h);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force search",
            count: count_string(size),
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let g = random_balanced_colouring_with(n, palette, &mut rng)?;
        let best = min_deviation_bruteforce(&g, h)?;
        if !best.deviation.is_zero() {
            return Ok(Some((g, best.deviation)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_balanced_colouring;
    use std::collections::BTreeSet;

    fn closed_form(n: u128, r: u128) -> u128 {
        let fact = |x: u128| (1..=x).product::<u128>();
        fact(n) / (fact(r).pow((n / r) as u32) * fact(n / r))
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_clique_factors(4, 2).unwrap().count(), 3);
        assert_eq!(enumerate_clique_factors(6, 2).unwrap().count(), 15);
        assert_eq!(enumerate_clique_factors(6, 3).unwrap().count(), 10);
        assert_eq!(enumerate_clique_factors(4, 4).unwrap().count(), 1);
    }

    #[test]
    fn enumeration_matches_closed_form_and_is_duplicate_free() {
        for n in 2..=12usize {
            for r in [2usize, 3, 4] {
                if n % r != 0 {
                    continue;
                }
                let want = closed_form(n as u128, r as u128);
                assert_eq!(factor_count(n, r), want);
                let mut seen = BTreeSet::new();
                let mut count = 0u128;
                for f in enumerate_clique_factors(n, r).unwrap() {
                    assert_eq!(f.r(), r);
                    assert!(seen.insert(f.canonical()));
                    count += 1;
                }
                assert_eq!(count, want, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn guard_names_the_count() {
        let err = enumerate_clique_factors(20, 2).unwrap_err();
        assert!(err.is_resource_guard());
        assert!(err.to_string().contains("654729075"), "{err}");
        let g = random_balanced_colouring(12, &Palette::simplex(2).unwrap(), 0).unwrap();
        let h = PatternGraph::path(3).unwrap();
        assert!(min_deviation_bruteforce(&g, &h)
            .unwrap_err()
            .is_resource_guard());
    }

    #[test]
    fn single_part_gives_its_histogram() {
        let p = Palette::simplex(3).unwrap();
        let g = random_balanced_colouring(4, &p, 7).unwrap();
        let h = PatternGraph::complete(4).unwrap();
        let best = min_deviation_bruteforce(&g, &h).unwrap();
        assert_eq!(best.counts, g.total_counts());
        assert_eq!(best.deviation, deviation(&g.total_counts(), 3));
    }

    #[test]
    fn k4_matching_minimum_is_zero() {
        // c: 01, 23, 02 -> 0; 13, 03, 12 -> 1. {02, 13} and {03, 12} are balanced.
        let g = ColouredGraph::from_fn(4, Palette::simplex(2).unwrap(), |u, v| match (u, v) {
            (0, 1) | (2, 3) | (0, 2) => 0,
            _ => 1,
        })
        .unwrap();
        let h = PatternGraph::complete(2).unwrap();
        let best = min_deviation_bruteforce(&g, &h).unwrap();
        assert!(best.deviation.is_zero());
        let mut edges = best.embedding.edges();
        edges.sort_unstable();
        assert!(edges == vec![(0, 2), (1, 3)] || edges == vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn k4_with_two_parallel_zero_edges() {
        // c(01) = c(23) = 0, rest 1: every perfect matching is monochromatic.
        let g = ColouredGraph::from_fn(4, Palette::simplex(2).unwrap(), |u, v| {
            usize::from(!((u, v) == (0, 1) || (u, v) == (2, 3)))
        })
        .unwrap();
        let h = PatternGraph::complete(2).unwrap();
        let best = min_deviation_bruteforce(&g, &h).unwrap();
        assert_eq!(best.deviation, Rational::from_integer(2));
        assert_eq!(best.visited, 3);
    }

    #[test]
    fn path_witness_is_consistent() {
        let g = random_balanced_colouring(6, &Palette::simplex(3).unwrap(), 2).unwrap();
        let h = PatternGraph::path(3).unwrap();
        let best = min_deviation_bruteforce(&g, &h).unwrap();
        assert_eq!(best.embedding.counts(&g), best.counts);
        assert_eq!(best.embedding.edges().len(), 4);
    }

    #[test]
    fn no_unbalanced_two_colouring_of_k4() {
        // Exhaustive: every 3/3 colouring of K4 has a balanced perfect matching.
        let p = Palette::simplex(2).unwrap();
        let h = PatternGraph::complete(2).unwrap();
        let mut checked = 0;
        for mask in 0u32..64 {
            if mask.count_ones() != 3 {
                continue;
            }
            let g = ColouredGraph::from_fn(4, p.clone(), |u, v| {
                ((mask >> crate::graph::pair_index(4, u, v)) & 1) as usize
            })
            .unwrap();
            assert!(min_deviation_bruteforce(&g, &h)
                .unwrap()
                .deviation
                .is_zero());
            checked += 1;
        }
        assert_eq!(checked, 20);
        assert!(find_unbalanced_colouring(4, &p, &h, 1, 200)
            .unwrap()
            .is_none());
    }

    #[test]
    fn zero_trials_finds_nothing() {
        let p = Palette::simplex(3).unwrap();
        let h = PatternGraph::complete(2).unwrap();
        assert!(find_unbalanced_colouring(6, &p, &h, 1, 0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn colour_relabelling_preserves_minimum() {
        let p = Palette::simplex(3).unwrap();
        let h = PatternGraph::complete(2).unwrap();
        for seed in 0..20 {
            let g = random_balanced_colouring(6, &p, seed).unwrap();
            let perm = [2usize, 0, 1];
            let relabelled =
                ColouredGraph::from_fn(6, p.clone(), |u, v| perm[g.colour(u, v)]).unwrap();
            assert_eq!(
                min_deviation_bruteforce(&g, &h).unwrap().deviation,
                min_deviation_bruteforce(&relabelled, &h).unwrap().deviation
            );
        }
    }
}
