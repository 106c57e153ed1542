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

//! Nearly colour-balanced H-factors of edge-coloured complete graphs.
//!
//! Colours are unit vectors (by default the vertices of a regular simplex).
//! A clique-factor is driven to a swap-local minimum of the squared norm of
//! its colour sum, then each clique is populated with a copy of `H` using
//! permutation blocks so that the colour balance carries over.
//!
//! The main entry points are [`solver::local_search`],
//! [`embed::embed_h_factor`] and [`harness::solve`]. [`oracle`] provides
//! brute-force ground truth for small instances and [`bounds`] computes
//! the closed-form constants.

pub mod bounds;
pub mod embed;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod palette;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{deviation, CliqueFactor, ColouredGraph, DeviationReport, PatternGraph};
pub use palette::{deviation_upper_from_norm, ColourCounts, Palette, PaletteMode};
pub use scalar::{Rational, Scalar};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
