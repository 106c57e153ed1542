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

//! Closed-form constants for the simplex palette and the two lattice facts
//! they rest on, checked by enumerating the swap space.
//!
//! The swap space `X` holds every integer `x` with coordinates in
//! `[2 - 2r, 2r - 2]`, `sum x = 0` and `sum |x| <= 4(r - 1)`; `g(x)` is the
//! vector `sum x_i s_i`, so `||g(x)||^2 = x^T G x`. Tower-sized constants are
//! reported as natural logarithms.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::embed::embedding_error_bound;
use crate::error::{Error, Result};
use crate::palette::Palette;
use crate::scalar::{serialize_rational, Rational, Scalar};
use crate::solver::SwapVector;

/// Guard on the size of the enumeration box `(4r - 3)^k`.
pub const SWAP_SPACE_LIMIT: u128 = 100_000_000;

fn check_kr(k: usize, r: usize) -> Result<()> {
    if k < 2 || r < 2 {
        return Err(Error::InvalidArgument(format!(
            "need k >= 2 and r >= 2, got k = {}, r = {}",
            k, r
        )));
    }
    Ok(())
}

fn box_size(k: usize, r: usize) -> u128 {
    let side = (4 * r - 3) as u128;
    (0..k).fold(1u128, |acc, _| acc.saturating_mul(side))
}

/// Every vector of the swap space for `k` colours and parts of size `r`, in
/// lexicographic order.
pub fn enumerate_swap_space(k: usize, r: usize) -> Result<Vec<SwapVector>> {
    check_kr(k, r)?;
    let size = box_size(k, r);
    if size > SWAP_SPACE_LIMIT {
        return Err(Error::TooLarge {
            what: "swap space enumeration",
            count: size.to_string(),
            limit: SWAP_SPACE_LIMIT,
        });
    }
    let m = 2 * (r as i64 - 1);
    let mut out = Vec::new();
    let mut x = vec![0i64; k];
    fill(&mut x, 0, 0, 0, m, &mut out);
    Ok(out)
}

fn fill(x: &mut [i64], i: usize, sum: i64, l1: i64, m: i64, out: &mut Vec<SwapVector>) {
    let k = x.len();
    if i == k {
        if sum == 0 {
            out.push(SwapVector::new(x.to_vec()));
        }
        return;
    }
    let budget = 2 * m - l1;
    for v in -m..=m {
        if v.abs() > budget {
            continue;
        }
        // The remaining coordinates must be able to cancel the running sum.
        let rest = (k - i - 1) as i64;
        let s = sum + v;
        if s.abs() > rest * m || s.abs() > budget - v.abs() {
            continue;
        }
        x[i] = v;
        fill(x, i + 1, s, l1 + v.abs(), m, out);
    }
}

/// `|X|` by dynamic programming over `(running sum, l1)`.
pub fn swap_space_size(k: usize, r: usize) -> u128 {
    let m = 2 * (r as i64 - 1);
    let mut states: HashMap<(i64, i64), u128> = HashMap::new();
    states.insert((0, 0), 1);
    for _ in 0..k {
        let mut next: HashMap<(i64, i64), u128> = HashMap::new();
        for (&(s, l), &c) in &states {
            for v in -m..=m {
                let l2 = l + v.abs();
                if l2 > 2 * m {
                    continue;
                }
                *next.entry((s + v, l2)).or_insert(0) += c;
            }
        }
        states = next;
    }
    states
        .iter()
        .filter(|((s, _), _)| *s == 0)
        .map(|(_, &c)| c)
        .sum()
}

/// Extremes of `||g(x)||` over the swap space of the simplex with
/// `d + 1` colours.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeFacts {
    pub d: usize,
    pub r: usize,
    pub x_count: usize,
    /// Minimum of `||g(x)||^2` over nonzero `x`.
    #[serde(serialize_with = "serialize_rational")]
    pub min_norm_sq: Rational,
    pub argmin: SwapVector,
    #[serde(serialize_with = "serialize_rational")]
    pub max_norm_sq: Rational,
    pub max_norm: f64,
    /// `min_norm_sq == 2 + 2/d` and `max_norm <= 4(r - 1) <= 4r`.
    pub pass: bool,
}

pub fn verify_lattice_facts(d: usize, r: usize) -> Result<LatticeFacts> {
    if d < 1 {
        return Err(Error::InvalidArgument(format!("need d >= 1, got {}", d)));
    }
    let k = d + 1;
    let palette = Palette::simplex(k)?;
    let xs = enumerate_swap_space(k, r)?;
    let mut min: Option<(Rational, &SwapVector)> = None;
    let mut max = Rational::from_integer(0);
    for x in &xs {
        if x.is_zero() {
            continue;
        }
        let Scalar::Exact(n) = palette.bilinear(x.as_slice(), x.as_slice())? else {
            unreachable!("simplex palettes are exact")
        };
        if min.is_none_or(|(m, _)| n < m) {
            min = Some((n, x));
        }
        if n > max {
            max = n;
        }
    }
    let (min_norm_sq, argmin) = min.expect("swap space has nonzero vectors for r >= 2");
    let expected_min = Rational::from_integer(2) + Rational::new(2, d as i128);
    let cap = 4 * (r as i128 - 1);
    let pass = min_norm_sq == expected_min && max <= Rational::from_integer(cap * cap);
    Ok(LatticeFacts {
        d,
        r,
        x_count: xs.len(),
        min_norm_sq,
        argmin: argmin.clone(),
        max_norm_sq: max,
        max_norm: crate::scalar::rational_to_f64(&max).sqrt(),
        pass,
    })
}

/// Constants for `k` simplex colours (`d = k - 1`) and parts of size `r`.
/// Fields named `log_*` are natural logarithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsTable {
    pub k: usize,
    pub r: usize,
    pub d: usize,
    /// Threshold of the contradictory-swap criterion, `8(r - 1)^2`.
    pub l: u64,
    pub beta0: u64,
    /// `-d ln(8dr)`.
    pub log_beta1: f64,
    /// `3 d^2 ln(8dr)`.
    pub log_eta: f64,
    /// Exact size of the swap space.
    pub x_count: u128,
    /// `ln(beta0) + (|X| - 1) log_eta - log_beta1`.
    pub log_c_clique: f64,
    /// `(8dr)^(d+1) ln(8dr)`.
    pub log_c_thm_main: f64,
    /// `(8kr)^k ln(8kr)`.
    pub log_c_thm_kcolour: f64,
    #[serde(serialize_with = "serialize_biguint")]
    pub h_embed_term: BigUint,
}

fn serialize_biguint<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn constants(k: usize, r: usize) -> Result<BoundsTable> {
    check_kr(k, r)?;
    let d = k - 1;
    let l = 8 * (r as u64 - 1).pow(2);
    let base = (8 * d * r) as f64;
    let log_beta1 = -(d as f64) * base.ln();
    let log_eta = 3.0 * (d * d) as f64 * base.ln();
    let x_count = swap_space_size(k, r);
    let log_c_clique = (l as f64).ln() + (x_count as f64 - 1.0) * log_eta - log_beta1;
    let log_c_thm_main = base.powi(d as i32 + 1) * base.ln();
    let kbase = (8 * k * r) as f64;
    let log_c_thm_kcolour = kbase.powi(k as i32) * kbase.ln();
    Ok(BoundsTable {
        k,
        r,
        d,
        l,
        beta0: l,
        log_beta1,
        log_eta,
        x_count,
        log_c_clique,
        log_c_thm_main,
        log_c_thm_kcolour,
        h_embed_term: embedding_error_bound(k, r),
    })
}

/// Check `ln ||w|| <= ln C + ln(1 + 2 alpha / (n C))` for a clique-factor
/// with `n` parts, `C = exp(log_c)`. Returns the right-hand side and the
/// verdict.
pub fn clique_bound_check(log_c: f64, norm: f64, alpha: f64, n_parts: usize) -> (f64, bool) {
    let slack = 2.0 * alpha / (n_parts.max(1) as f64) * (-log_c).exp();
    let rhs = log_c + slack.ln_1p();
    let lhs = if norm > 0.0 {
        norm.ln()
    } else {
        f64::NEG_INFINITY
    };
    (rhs, lhs <= rhs)
}
