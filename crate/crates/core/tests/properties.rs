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

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use balfactor::bounds::{clique_bound_check, constants};
use balfactor::embed::{embed_h_factor, Remainder};
use balfactor::graph::{random_balanced_colouring, ColouredGraph};
use balfactor::oracle::min_deviation_bruteforce;
use balfactor::solver::{
    apply_swap, find_improving_swap, initial_factor, local_search, swap_delta, swap_vector,
    weight_identity, InitStrategy, SearchOptions, Termination,
};
use balfactor::{deviation, deviation_upper_from_norm, Palette, PatternGraph, Scalar};

fn instance() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=4, 2usize..=4, 1usize..=5, any::<u64>())
        .prop_filter("at least two parts", |(r, _, m, _)| r * m >= 4)
        .prop_map(|(r, k, m, seed)| (r, k, r * m, seed))
}

fn circle_palette(k: usize, seed: u64) -> Palette {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..k)
        .map(|i| {
            let t = (i as f64 + rng.gen_range(0.1..0.9)) * std::f64::consts::TAU / k as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    Palette::explicit(vectors).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_matches_recount((r, k, n, seed) in instance(), explicit in any::<bool>()) {
        let palette = if explicit { circle_palette(k, seed) } else { Palette::simplex(k).unwrap() };
        let g = random_balanced_colouring(n, &palette, seed).unwrap();
        let f = initial_factor(n, r, InitStrategy::Random, seed ^ 1).unwrap();
        let b = g.clique_factor_counts(&f);
        for u in 0..n {
            for v in u + 1..n {
                if f.part_of(u) == f.part_of(v) {
                    prop_assert!(swap_vector(&g, &f, u, v).is_err());
                    continue;
                }
                let x = swap_vector(&g, &f, u, v).unwrap();
                let after = g.clique_factor_counts(&apply_swap(&f, u, v).unwrap());
                prop_assert_eq!(&(&b - &after), &balfactor::ColourCounts::new(x.as_slice().to_vec()));
                let delta = swap_delta(&palette, &b, &x).unwrap();
                let want = palette.norm_sq_of_counts(&b).unwrap()
                    .checked_sub(&palette.norm_sq_of_counts(&after).unwrap());
                if explicit {
                    prop_assert!((delta.to_f64() - want.to_f64()).abs() < 1e-9);
                } else {
                    prop_assert_eq!(delta, want);
                }
            }
        }
    }

    #[test]
    fn local_minimum_is_certified((r, k, n, seed) in instance(), explicit in any::<bool>()) {
        let palette = if explicit { circle_palette(k, seed) } else { Palette::simplex(k).unwrap() };
        let g = random_balanced_colouring(n, &palette, seed).unwrap();
        let f0 = initial_factor(n, r, InitStrategy::Random, seed).unwrap();
        let (f, trace) = local_search(&g, &f0, SearchOptions::default()).unwrap();
        if trace.terminated_reason == Termination::LocalMinimum {
            prop_assert!(find_improving_swap(&g, &f).unwrap().is_none());
        }
        let (lhs, rhs) = weight_identity(&g, &f).unwrap();
        prop_assert!((lhs.to_f64() - rhs.to_f64()).abs() < 1e-9);
        prop_assert_eq!(f.canonical().concat().len(), n);
    }

    #[test]
    fn clique_bound_holds_at_local_minimum((r, k, n, seed) in instance()) {
        prop_assume!(r <= 3);
        let g = random_balanced_colouring(n, &Palette::simplex(k).unwrap(), seed).unwrap();
        let f0 = initial_factor(n, r, InitStrategy::Random, seed).unwrap();
        let (f, _) = local_search(&g, &f0, SearchOptions::default()).unwrap();
        let norm = g.palette().norm_sq_of_counts(&g.clique_factor_counts(&f)).unwrap().to_f64().sqrt();
        let table = constants(k, r).unwrap();
        let (_, ok) = clique_bound_check(table.log_c_clique, norm, g.balance_alpha(), f.num_parts());
        prop_assert!(ok);
    }

    #[test]
    fn solver_never_beats_oracle((r, k, n, seed) in instance()) {
        prop_assume!(n <= 10);
        let g = random_balanced_colouring(n, &Palette::simplex(k).unwrap(), seed).unwrap();
        let h = PatternGraph::path(r).unwrap();
        let best = min_deviation_bruteforce(&g, &h).unwrap();
        let f0 = initial_factor(n, r, InitStrategy::Random, seed).unwrap();
        let (f, _) = local_search(&g, &f0, SearchOptions::default()).unwrap();
        let (emb, report) = embed_h_factor(&g, &f, &h, Remainder::Random(seed)).unwrap();
        prop_assert_eq!(emb.edges().len(), (n / r) * h.edge_count());
        prop_assert!(best.deviation <= report.deviation);
    }

    #[test]
    fn colour_relabelling_preserves_oracle((r, k, n, seed) in instance(), shift in 1usize..4) {
        prop_assume!(n <= 9);
        let palette = Palette::simplex(k).unwrap();
        let g = random_balanced_colouring(n, &palette, seed).unwrap();
        let g2 = ColouredGraph::from_fn(n, palette, |u, v| (g.colour(u, v) + shift) % k).unwrap();
        let h = PatternGraph::complete(r).unwrap();
        prop_assert_eq!(
            min_deviation_bruteforce(&g, &h).unwrap().deviation,
            min_deviation_bruteforce(&g2, &h).unwrap().deviation
        );
    }
}

#[test]
fn deviation_dominated_by_norm_bound_on_random_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..500 {
        let r = rng.gen_range(2..=4);
        let k = rng.gen_range(2..=5);
        let n = r * rng.gen_range(2..=10);
        let g = random_balanced_colouring(n, &Palette::simplex(k).unwrap(), rng.gen()).unwrap();
        let f = initial_factor(n, r, InitStrategy::Random, rng.gen()).unwrap();
        let counts = g.clique_factor_counts(&f);
        let dev = balfactor::scalar::rational_to_f64(&deviation(&counts, k));
        let norm = match g.palette().norm_sq_of_weights(&counts.centred()).unwrap() {
            Scalar::Exact(q) => balfactor::scalar::rational_to_f64(&q).sqrt(),
            Scalar::Real(x) => x.sqrt(),
        };
        assert!(dev <= deviation_upper_from_norm(k, norm) + 1e-9);
    }
}
