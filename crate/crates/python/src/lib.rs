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

//! Python bindings. Exact rationals come back as `fractions.Fraction`;
//! reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use balfactor::embed::{embed_h_factor, Remainder};
use balfactor::graph;
use balfactor::harness::{self, SolveConfig};
use balfactor::solver::{self, InitStrategy, SearchOptions, SearchStrategy};
use balfactor::{bounds, oracle, Error, Rational, Scalar};

type EmbedResult<'py> = (Vec<(usize, usize)>, Vec<i64>, Bound<'py, PyAny>);
type OracleTuple<'py> = (Bound<'py, PyAny>, Vec<i64>, Vec<Vec<usize>>);

create_exception!(pybalfactor, BalfactorError, PyValueError);
create_exception!(pybalfactor, ResourceGuardError, BalfactorError);

fn err(e: Error) -> PyErr {
    if e.is_resource_guard() {
        ResourceGuardError::new_err(e.to_string())
    } else {
        BalfactorError::new_err(e.to_string())
    }
}

fn fraction<'py>(py: Python<'py>, q: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((*q.numer(), *q.denom()))
}

fn scalar<'py>(py: Python<'py>, s: &Scalar) -> PyResult<Bound<'py, PyAny>> {
    match s {
        Scalar::Exact(q) => fraction(py, q),
        Scalar::Real(x) => Ok(x.into_pyobject(py)?.into_any()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| BalfactorError::new_err(e.to_string()))?;
    py.import("json")?.getattr("loads")?.call1((text,))
}

fn parse_strategy(s: &str) -> PyResult<SearchStrategy> {
    match s {
        "best" => Ok(SearchStrategy::Best),
        "first" => Ok(SearchStrategy::First),
        _ => Err(BalfactorError::new_err(format!("unknown strategy {:?}", s))),
    }
}

/// A finite colour set on the unit sphere.
#[pyclass(name = "Palette", module = "pybalfactor", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPalette {
    inner: balfactor::Palette,
}

#[pymethods]
impl PyPalette {
    /// Regular simplex palette on `k` colours (exact arithmetic).
    #[staticmethod]
    fn simplex(k: usize) -> PyResult<Self> {
        Ok(PyPalette {
            inner: balfactor::Palette::simplex(k).map_err(err)?,
        })
    }

    /// Explicit unit vectors (floating point).
    #[staticmethod]
    fn explicit(vectors: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyPalette {
            inner: balfactor::Palette::explicit(vectors).map_err(err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn gram_entry<'py>(&self, py: Python<'py>, i: usize, j: usize) -> PyResult<Bound<'py, PyAny>> {
        if i >= self.inner.k() || j >= self.inner.k() {
            return Err(BalfactorError::new_err("colour index out of range"));
        }
        scalar(py, &self.inner.gram_entry(i, j))
    }

    /// Squared norm of the colour sum for the given per-colour counts.
    fn norm_sq<'py>(&self, py: Python<'py>, counts: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
        let s = self.inner.norm_sq_of_counts(&counts.into()).map_err(err)?;
        scalar(py, &s)
    }

    fn __repr__(&self) -> String {
        format!(
            "Palette(k={}, exact={})",
            self.inner.k(),
            self.inner.is_exact()
        )
    }
}

/// An edge-coloured complete graph.
#[pyclass(
    name = "ColouredGraph",
    module = "pybalfactor",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyColouredGraph {
    inner: graph::ColouredGraph,
}

#[pymethods]
impl PyColouredGraph {
    /// Near-balanced uniformly random simplex colouring of `K_n`.
    #[staticmethod]
    fn random(n: usize, k: usize, seed: u64) -> PyResult<Self> {
        let p = balfactor::Palette::simplex(k).map_err(err)?;
        Ok(PyColouredGraph {
            inner: graph::random_balanced_colouring(n, &p, seed).map_err(err)?,
        })
    }

    /// Parse the text colouring format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyColouredGraph {
            inner: graph::load_colouring(text).map_err(err)?,
        })
    }

    /// Build from a palette and `colour(u, v)` for every pair `u < v`,
    /// listed in lexicographic pair order.
    #[staticmethod]
    fn from_colours(n: usize, palette: &PyPalette, colours: Vec<u16>) -> PyResult<Self> {
        Ok(PyColouredGraph {
            inner: graph::ColouredGraph::new(n, palette.inner.clone(), colours).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_colouring_string()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn palette(&self) -> PyPalette {
        PyPalette {
            inner: self.inner.palette().clone(),
        }
    }

    fn colour(&self, u: usize, v: usize) -> PyResult<usize> {
        self.inner.try_colour(u, v).map_err(err)
    }

    fn total_counts(&self) -> Vec<i64> {
        self.inner.total_counts().into_vec()
    }

    fn balance_alpha(&self) -> f64 {
        self.inner.balance_alpha()
    }

    /// Colour counts over the edges of a clique-factor.
    fn factor_counts(&self, factor: &PyCliqueFactor) -> PyResult<Vec<i64>> {
        if factor.inner.n_vertices() != self.inner.n_vertices() {
            return Err(err(Error::Dimension {
                expected: self.inner.n_vertices(),
                found: factor.inner.n_vertices(),
            }));
        }
        Ok(self.inner.clique_factor_counts(&factor.inner).into_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "ColouredGraph(n={}, k={})",
            self.inner.n_vertices(),
            self.inner.k()
        )
    }
}

/// A partition of the vertices into cliques of equal size.
#[pyclass(name = "CliqueFactor", module = "pybalfactor", skip_from_py_object)]
#[derive(Clone)]
pub struct PyCliqueFactor {
    inner: graph::CliqueFactor,
}

#[pymethods]
impl PyCliqueFactor {
    #[new]
    fn new(parts: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyCliqueFactor {
            inner: graph::CliqueFactor::new(parts).map_err(err)?,
        })
    }

    /// Consecutive blocks `{0..r}, {r..2r}, ...`.
    #[staticmethod]
    fn blocks(n: usize, r: usize) -> PyResult<Self> {
        Ok(PyCliqueFactor {
            inner: graph::CliqueFactor::blocks(n, r).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(n: usize, r: usize, seed: u64) -> PyResult<Self> {
        Ok(PyCliqueFactor {
            inner: solver::initial_factor(n, r, InitStrategy::Random, seed).map_err(err)?,
        })
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn parts(&self) -> Vec<Vec<usize>> {
        self.inner.parts().to_vec()
    }

    fn part_of(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.n_vertices() {
            return Err(BalfactorError::new_err("vertex out of range"));
        }
        Ok(self.inner.part_of(v))
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    /// Exchange `u` and `v` between their parts, in place.
    fn swap(&mut self, u: usize, v: usize) -> PyResult<()> {
        self.inner.swap(u, v).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("CliqueFactor({:?})", self.inner.parts())
    }
}

/// The pattern graph `H` on `r` vertices.
#[pyclass(
    name = "PatternGraph",
    module = "pybalfactor",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyPatternGraph {
    inner: balfactor::PatternGraph,
}

#[pymethods]
impl PyPatternGraph {
    #[new]
    fn new(r: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyPatternGraph {
            inner: balfactor::PatternGraph::new(r, edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn complete(r: usize) -> PyResult<Self> {
        Ok(PyPatternGraph {
            inner: balfactor::PatternGraph::complete(r).map_err(err)?,
        })
    }

    #[staticmethod]
    fn path(r: usize) -> PyResult<Self> {
        Ok(PyPatternGraph {
            inner: balfactor::PatternGraph::path(r).map_err(err)?,
        })
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "PatternGraph(r={}, edges={:?})",
            self.inner.r(),
            self.inner.edges()
        )
    }
}

/// `sum_i |counts[i] - total / k|` as a Fraction.
#[pyfunction]
fn deviation<'py>(py: Python<'py>, counts: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
    let k = counts.len();
    if k == 0 {
        return Err(BalfactorError::new_err("empty counts"));
    }
    fraction(py, &graph::deviation(&counts.into(), k))
}

/// Colour-count change `x` for swapping `u` and `v`.
#[pyfunction]
fn swap_vector(
    g: &PyColouredGraph,
    factor: &PyCliqueFactor,
    u: usize,
    v: usize,
) -> PyResult<Vec<i64>> {
    Ok(solver::swap_vector(&g.inner, &factor.inner, u, v)
        .map_err(err)?
        .into_vec())
}

/// Decrease in `||w||^2` from swapping `u` and `v`.
#[pyfunction]
fn swap_delta<'py>(
    py: Python<'py>,
    g: &PyColouredGraph,
    factor: &PyCliqueFactor,
    u: usize,
    v: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let x = solver::swap_vector(&g.inner, &factor.inner, u, v).map_err(err)?;
    let b = g.inner.clique_factor_counts(&factor.inner);
    scalar(
        py,
        &solver::swap_delta(g.inner.palette(), &b, &x).map_err(err)?,
    )
}

/// Swap local search. Returns `(factor, trace)`.
#[pyfunction]
#[pyo3(signature = (g, factor, strategy = "best", max_iters = None))]
fn local_search<'py>(
    py: Python<'py>,
    g: &PyColouredGraph,
    factor: &PyCliqueFactor,
    strategy: &str,
    max_iters: Option<usize>,
) -> PyResult<(PyCliqueFactor, Bound<'py, PyAny>)> {
    let opts = SearchOptions {
        strategy: parse_strategy(strategy)?,
        max_iters,
    };
    let (f, trace) = py
        .detach(|| solver::local_search(&g.inner, &factor.inner, opts))
        .map_err(err)?;
    Ok((PyCliqueFactor { inner: f }, to_dict(py, &trace)?))
}

/// Embed one copy of `h` per part. Returns `(edges, counts, deviation)`.
#[pyfunction]
#[pyo3(signature = (g, factor, h, remainder_seed = None))]
fn embed<'py>(
    py: Python<'py>,
    g: &PyColouredGraph,
    factor: &PyCliqueFactor,
    h: &PyPatternGraph,
    remainder_seed: Option<u64>,
) -> PyResult<EmbedResult<'py>> {
    let remainder = remainder_seed.map_or(Remainder::Identity, Remainder::Random);
    let (emb, report) =
        embed_h_factor(&g.inner, &factor.inner, &h.inner, remainder).map_err(err)?;
    Ok((
        emb.edges(),
        report.counts.into_vec(),
        fraction(py, &report.deviation)?,
    ))
}

/// Exact minimum deviation over all `H`-factors (exhaustive).
/// Returns `(deviation, counts, parts)`.
#[pyfunction]
fn min_deviation<'py>(
    py: Python<'py>,
    g: &PyColouredGraph,
    h: &PyPatternGraph,
) -> PyResult<OracleTuple<'py>> {
    let best = py
        .detach(|| oracle::min_deviation_bruteforce(&g.inner, &h.inner))
        .map_err(err)?;
    Ok((
        fraction(py, &best.deviation)?,
        best.counts.into_vec(),
        best.embedding.assignments().to_vec(),
    ))
}

/// Restarted local search plus embedding; the report as a dict.
#[pyfunction]
#[pyo3(signature = (g, h, seed = 0, restarts = 1, strategy = "best", init = "random", max_iters = None, remainder_seed = None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    g: &PyColouredGraph,
    h: &PyPatternGraph,
    seed: u64,
    restarts: usize,
    strategy: &str,
    init: &str,
    max_iters: Option<usize>,
    remainder_seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let init = match init {
        "blocks" => InitStrategy::Blocks,
        "random" => InitStrategy::Random,
        _ => return Err(BalfactorError::new_err(format!("unknown init {:?}", init))),
    };
    let cfg = SolveConfig {
        strategy: parse_strategy(strategy)?,
        init,
        restarts,
        seed,
        max_iters,
        remainder: remainder_seed.map_or(Remainder::Identity, Remainder::Random),
    };
    let report = py
        .detach(|| harness::solve_report(&g.inner, &h.inner, &cfg, None, Default::default()))
        .map_err(err)?;
    to_dict(py, &report)
}

/// Bound constants for `k` colours and cliques of size `r`.
#[pyfunction]
fn constants<'py>(py: Python<'py>, k: usize, r: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &bounds::constants(k, r).map_err(err)?)
}

/// Check the swap-space lattice facts for the `(d+1)`-simplex.
#[pyfunction]
fn verify_lattice_facts<'py>(py: Python<'py>, d: usize, r: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &bounds::verify_lattice_facts(d, r).map_err(err)?)
}

#[pymodule]
fn pybalfactor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", balfactor::VERSION)?;
    m.add("BalfactorError", m.py().get_type::<BalfactorError>())?;
    m.add(
        "ResourceGuardError",
        m.py().get_type::<ResourceGuardError>(),
    )?;
    m.add_class::<PyPalette>()?;
    m.add_class::<PyColouredGraph>()?;
    m.add_class::<PyCliqueFactor>()?;
    m.add_class::<PyPatternGraph>()?;
    m.add_function(wrap_pyfunction!(deviation, m)?)?;
    m.add_function(wrap_pyfunction!(swap_vector, m)?)?;
    m.add_function(wrap_pyfunction!(swap_delta, m)?)?;
    m.add_function(wrap_pyfunction!(local_search, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(min_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lattice_facts, m)?)?;
    Ok(())
}
