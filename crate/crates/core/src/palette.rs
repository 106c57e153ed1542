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

//! Colour palettes: unit vectors accessed only through their Gram matrix.
//!
//! A simplex palette stores its Gram matrix as integers over the common
//! denominator `k - 1`, so every norm, inner product and swap delta derived
//! from it is an exact rational. Explicit palettes carry real coordinates
//! and a floating-point Gram matrix.

use std::ops::{Index, Sub};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Tolerance for unit-norm, duplicate and Gram consistency checks.
pub const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaletteMode {
    Simplex,
    Explicit,
}

#[derive(Clone, Debug)]
pub(crate) enum Gram {
    /// Entry `(i, j)` is `scaled[i * k + j] / denom`.
    Rational {
        scaled: Vec<i64>,
        denom: i64,
    },
    Real(Vec<f64>),
}

/// `k` unit colour vectors in `R^dim`.
#[derive(Clone, Debug)]
pub struct Palette {
    k: usize,
    dim: usize,
    gram: Gram,
    vectors: Option<Vec<Vec<f64>>>,
}

impl Palette {
    /// Vertices of a regular simplex inscribed in the unit sphere of `R^(k-1)`.
    /// No coordinates are materialized.
    pub fn simplex(k: usize) -> Result<Palette> {
        if k < 2 {
            return Err(Error::InvalidPalette(format!(
                "a simplex palette needs at least 2 colours, got {}",
                k
            )));
        }
        let denom = (k - 1) as i64;
        let mut scaled = vec![-1i64; k * k];
        for i in 0..k {
            scaled[i * k + i] = denom;
        }
        Ok(Palette {
            k,
            dim: k - 1,
            gram: Gram::Rational { scaled, denom },
            vectors: None,
        })
    }

    /// Palette from explicit unit vectors of a common dimension.
    pub fn explicit(vectors: Vec<Vec<f64>>) -> Result<Palette> {
        let k = vectors.len();
        if k < 2 {
            return Err(Error::InvalidPalette(format!(
                "need at least 2 colours, got {}",
                k
            )));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::InvalidPalette("dimension must be at least 1".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidPalette(format!(
                    "colour {} has dimension {}, expected {}",
                    i,
                    v.len(),
                    dim
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPalette(format!("colour {} is not finite", i)));
            }
            let norm = dot(v, v).sqrt();
            if (norm - 1.0).abs() > REAL_TOLERANCE {
                return Err(Error::InvalidPalette(format!(
                    "colour {} has norm {}, expected a unit vector",
                    i, norm
                )));
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                let dist_sq: f64 = vectors[i]
                    .iter()
                    .zip(&vectors[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if dist_sq.sqrt() <= REAL_TOLERANCE {
                    return Err(Error::InvalidPalette(format!(
                        "colours {} and {} coincide",
                        i, j
                    )));
                }
            }
        }
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                gram[i * k + j] = dot(&vectors[i], &vectors[j]);
            }
        }
        Ok(Palette {
            k,
            dim,
            gram: Gram::Real(gram),
            vectors: Some(vectors),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> PaletteMode {
        match self.gram {
            Gram::Rational { .. } => PaletteMode::Simplex,
            Gram::Real(_) => PaletteMode::Explicit,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode() == PaletteMode::Simplex
    }

    /// Coordinates, for explicit palettes only.
    pub fn vectors(&self) -> Option<&[Vec<f64>]> {
        self.vectors.as_deref()
    }

    pub(crate) fn gram(&self) -> &Gram {
        &self.gram
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> Scalar {
        let k = self.k;
        match &self.gram {
            Gram::Rational { scaled, denom } => {
                Scalar::Exact(Rational::new(scaled[i * k + j] as i128, *denom as i128))
            }
            Gram::Real(g) => Scalar::Real(g[i * k + j]),
        }
    }

    pub fn gram_matrix(&self) -> Vec<Vec<Scalar>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.gram_entry(i, j)).collect())
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.k {
            return Err(Error::Dimension {
                expected: self.k,
                found: len,
            });
        }
        Ok(())
    }

    /// `a^T G b` for integer coefficient vectors.
    pub fn bilinear(&self, a: &[i64], b: &[i64]) -> Result<Scalar> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(match &self.gram {
            Gram::Rational { denom, .. } => {
                Scalar::Exact(Rational::new(self.scaled_bilinear(a, b), *denom as i128))
            }
            Gram::Real(_) => Scalar::Real(self.real_bilinear(a, b)),
        })
    }

    /// `||sum_i b_i q_i||^2 = b^T G b`.
    pub fn norm_sq_of_counts(&self, b: &ColourCounts) -> Result<Scalar> {
        self.bilinear(b.as_slice(), b.as_slice())
    }

    /// `w^T G w` for rational coefficients.
    pub fn norm_sq_of_weights(&self, w: &[Rational]) -> Result<Scalar> {
        self.check_len(w.len())?;
        let k = self.k;
        Ok(match &self.gram {
            Gram::Rational { scaled, denom } => {
                let mut acc = Rational::zero();
                for i in 0..k {
                    if w[i].is_zero() {
                        continue;
                    }
                    let mut row = Rational::zero();
                    for j in 0..k {
                        row += w[j] * scaled[i * k + j] as i128;
                    }
                    acc += w[i] * row;
                }
                Scalar::Exact(acc / *denom as i128)
            }
            Gram::Real(g) => {
                let wf: Vec<f64> = w.iter().map(crate::scalar::rational_to_f64).collect();
                let mut acc = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        acc += wf[i] * g[i * k + j] * wf[j];
                    }
                }
                Scalar::Real(acc)
            }
        })
    }

    /// Numerator of `a^T G b` over the common denominator. Rational Gram only.
    pub(crate) fn scaled_bilinear(&self, a: &[i64], b: &[i64]) -> i128 {
        let Gram::Rational { scaled, .. } = &self.gram else {
            unreachable!("scaled_bilinear on a real palette")
        };
        let k = self.k;
        let mut acc: i128 = 0;
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            let row = &scaled[i * k..(i + 1) * k];
            let mut s: i128 = 0;
            for j in 0..k {
                s += row[j] as i128 * b[j] as i128;
            }
            acc += a[i] as i128 * s;
        }
        acc
    }

    pub(crate) fn real_bilinear(&self, a: &[i64], b: &[i64]) -> f64 {
        let Gram::Real(g) = &self.gram else {
            unreachable!("real_bilinear on a rational palette")
        };
        let k = self.k;
        let mut acc = 0.0;
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            let row = &g[i * k..(i + 1) * k];
            let s: f64 = row.iter().zip(b).map(|(g, &y)| g * y as f64).sum();
            acc += a[i] as f64 * s;
        }
        acc
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Upper bound on `sum_i |b_i - e(F)/k|` given `||sum_i b_i q_i|| <= norm`
/// for the simplex palette.
pub fn deviation_upper_from_norm(k: usize, norm: f64) -> f64 {
    ((k as f64) - 1.0).sqrt() * norm
}

/// Per-colour edge counts. Signed so that differences are representable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ColourCounts(Vec<i64>);

impl ColourCounts {
    pub fn new(counts: Vec<i64>) -> ColourCounts {
        ColourCounts(counts)
    }

    pub fn zeros(k: usize) -> ColourCounts {
        ColourCounts(vec![0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn add_colour(&mut self, colour: usize) {
        self.0[colour] += 1;
    }

    pub fn add_assign(&mut self, other: &ColourCounts) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scaled(&self, factor: i64) -> ColourCounts {
        ColourCounts(self.0.iter().map(|x| x * factor).collect())
    }

    /// `counts[i] - total / k` as exact rationals.
    pub fn centred(&self) -> Vec<Rational> {
        let k = self.0.len() as i128;
        let mean = Rational::new(self.total() as i128, k.max(1));
        self.0
            .iter()
            .map(|&c| Rational::from_integer(c as i128) - mean)
            .collect()
    }
}

impl Index<usize> for ColourCounts {
    type Output = i64;

    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Sub for &ColourCounts {
    type Output = ColourCounts;

    fn sub(self, rhs: &ColourCounts) -> ColourCounts {
        ColourCounts(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<i64>> for ColourCounts {
    fn from(v: Vec<i64>) -> ColourCounts {
        ColourCounts(v)
    }
}
