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

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Exact rational used for every quantity derived from a simplex palette.
pub type Rational = Ratio<i128>;

/// A value that is exact for rational Gram matrices and a double otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Real(f64),
}

impl Scalar {
    pub fn zero_like(&self) -> Scalar {
        match self {
            Scalar::Exact(_) => Scalar::Exact(Rational::zero()),
            Scalar::Real(_) => Scalar::Real(0.0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Real(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(q) => Some(*q),
            Scalar::Real(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Strictly positive, with `tol` applied to reals only.
    pub fn is_positive(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Real(x) => *x > tol,
        }
    }

    pub fn checked_sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Real(self.to_f64() - other.to_f64()),
        }
    }

    /// Exact comparison when both sides are exact, float otherwise.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{}", format_rational(q)),
            Scalar::Real(x) => write!(f, "{}", x),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => serializer.serialize_str(&format_rational(q)),
            Scalar::Real(x) => serializer.serialize_f64(*x),
        }
    }
}

/// `p` for integers, `p/q` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64()
        .unwrap_or_else(|| *q.numer() as f64 / *q.denom() as f64)
}

pub(crate) fn serialize_rational<S: Serializer>(
    q: &Rational,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&format_rational(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_integers_without_denominator() {
        assert_eq!(format_rational(&Rational::from_integer(6)), "6");
        assert_eq!(format_rational(&Rational::new(4, 6)), "2/3");
        assert_eq!(format_rational(&Rational::new(-3, 2)), "-3/2");
    }

    #[test]
    fn positivity_tolerance_only_applies_to_reals() {
        assert!(Scalar::Exact(Rational::new(1, 1_000_000_000_000)).is_positive(1e-9));
        assert!(!Scalar::Real(1e-12).is_positive(1e-9));
        assert!(!Scalar::Exact(Rational::zero()).is_positive(0.0));
    }
}
