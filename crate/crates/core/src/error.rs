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

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid palette: {0}")]
    InvalidPalette(String),

    #[error("dimension mismatch: expected length {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid edge ({0}, {1})")]
    Edge(usize, usize),

    #[error("{n_v} vertices cannot be partitioned into parts of size {r}")]
    Divisibility { n_v: usize, r: usize },

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("invalid swap {u} <-> {v}: {reason}")]
    InvalidSwap {
        u: usize,
        v: usize,
        reason: &'static str,
    },

    #[error("invalid pattern graph: {0}")]
    Pattern(String),

    #[error("{what} too large: {count} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        count: String,
        limit: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error is a resource guard rather than bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
