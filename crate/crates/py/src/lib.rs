//! Python bindings: the instance model, the online coloring algorithms, the
//! small-graph oracles, and both analysis pipelines, driven in-process.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use onlinecolor::analyze_lower as lower;
use onlinecolor::analyze_upper as upper;
use onlinecolor::bipartite;
use onlinecolor::forest::RootedForest;
use onlinecolor::gen;
use onlinecolor::general::{self, AlgoParams, RunOutcome};
use onlinecolor::k4;
use onlinecolor::ledger::{validate_coloring, ColoringLedger, ValidationReport};
use onlinecolor::oracle;
use onlinecolor::stream::ArrivalStream;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// An online instance: vertex i arrives with its back-edges to 0..i.
#[pyclass(name = "Stream", from_py_object)]
#[derive(Clone)]
struct PyStream {
    inner: ArrivalStream,
}

#[pymethods]
impl PyStream {
    /// Build a stream from per-vertex neighbor lists.
    #[new]
    fn new(events: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self {
            inner: ArrivalStream::from_events(events).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ArrivalStream::from_json(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ArrivalStream::from_text(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        self.inner.neighbors(v).to_vec()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Stream(n={}, edges={})",
            self.inner.len(),
            self.inner.edge_count()
        )
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// The bipartite family on which FirstFit burns n/2 colors.
#[pyfunction]
fn gen_firstfit_adversary(n: usize) -> PyResult<PyStream> {
    Ok(PyStream {
        inner: gen::gen_firstfit_adversary(n).map_err(value_err)?,
    })
}

/// Planted k-colorable instance with cross-part density.
#[pyfunction]
fn gen_random_k_colorable(n: usize, k: u32, density: f64, seed: u64) -> PyResult<PyStream> {
    Ok(PyStream {
        inner: gen::gen_random_k_colorable(n, k, density, seed).map_err(value_err)?,
    })
}

/// The randomized bipartite adversary with 4·2^h − 2 vertices.
#[pyfunction]
fn gen_grade_instance(h: u32, seed: u64) -> PyStream {
    PyStream {
        inner: gen::gen_grade_instance(h, seed),
    }
}

/// The grade structure wired adversarially against the deterministic
/// component algorithm.
#[pyfunction]
fn gen_grade_adversarial_instance(h: u32, seed: u64) -> PyStream {
    PyStream {
        inner: gen::gen_grade_adversarial_instance(h, seed),
    }
}

/// A stream whose component-merge forest equals the given parent links.
#[pyfunction]
fn gen_tree_merge_instance(parents: Vec<Option<usize>>, seed: u64) -> PyResult<PyStream> {
    let forest = RootedForest::from_parents(&parents).map_err(value_err)?;
    Ok(PyStream {
        inner: gen::gen_tree_merge_instance(&forest, seed),
    })
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Exact chromatic number of a small graph (n up to the cap).
#[pyfunction]
#[pyo3(signature = (n, edges, cap = 12))]
fn chromatic_number(n: usize, edges: Vec<(usize, usize)>, cap: usize) -> PyResult<u32> {
    let g = oracle::SmallGraph::new(n, &edges).map_err(value_err)?;
    oracle::chromatic_number(&g, cap).map_err(value_err)
}

/// Whether some proper k-coloring uses at most l colors on the subset.
#[pyfunction]
#[pyo3(signature = (n, edges, subset, k, l, cap = 12))]
fn is_l_color_set(
    n: usize,
    edges: Vec<(usize, usize)>,
    subset: Vec<usize>,
    k: u32,
    l: u32,
    cap: usize,
) -> PyResult<bool> {
    let g = oracle::SmallGraph::new(n, &edges).map_err(value_err)?;
    oracle::is_l_color_set(&g, &subset, k, l, cap).map_err(value_err)
}

#[pyfunction]
fn is_bipartite(n: usize, edges: Vec<(usize, usize)>) -> bool {
    oracle::is_bipartite(n, &edges)
}

/// Checks a full coloring against the stream; returns None when proper, or
/// a description of the first problem.
#[pyfunction]
fn validate(stream: &PyStream, colors: Vec<u32>) -> Option<String> {
    let mut ledger = ColoringLedger::new();
    for (v, &c) in colors.iter().enumerate().take(stream.inner.len()) {
        ledger.assign(v, c);
    }
    match validate_coloring(&stream.inner, &ledger) {
        ValidationReport::Ok => None,
        ValidationReport::Incomplete { vertex } => Some(format!("vertex {vertex} uncolored")),
        ValidationReport::Violation { u, v } => Some(format!("edge ({u}, {v}) monochromatic")),
    }
}

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

/// FirstFit with a fixed palette; None marks vertices with no color available.
#[pyfunction]
fn first_fit(stream: &PyStream, palette: u32) -> Vec<Option<u32>> {
    general::first_fit(&stream.inner, palette)
}

fn lst_dict<'py>(py: Python<'py>, run: &bipartite::LstRun) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("colors", &run.colors)?;
    d.set_item("levels", &run.levels)?;
    d.set_item("colors_used", run.colors_used())?;
    d.set_item("max_color", run.max_color())?;
    d.set_item("max_level", run.max_level())?;
    Ok(d)
}

/// The deterministic component-merging bipartite algorithm.
#[pyfunction]
fn lst89<'py>(py: Python<'py>, stream: &PyStream) -> PyResult<Bound<'py, PyDict>> {
    lst_dict(py, &bipartite::lst89(&stream.inner))
}

/// Its randomized variant.
#[pyfunction]
fn randomized_lst<'py>(py: Python<'py>, stream: &PyStream, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    lst_dict(py, &bipartite::randomized_lst(&stream.inner, seed))
}

fn params_with(scale: f64, improved: bool) -> AlgoParams {
    AlgoParams {
        scale,
        improved_epsilon: improved,
        ..AlgoParams::default()
    }
}

fn outcome_dict<'py>(py: Python<'py>, outcome: RunOutcome, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match outcome {
        RunOutcome::Complete { ledger } => {
            d.set_item("complete", true)?;
            d.set_item("colors_used", ledger.colors_used())?;
            let colors: Vec<Option<u32>> = (0..n).map(|v| ledger.color_of(v)).collect();
            d.set_item("colors", colors)?;
        }
        RunOutcome::Aborted {
            at,
            certificate,
            ledger,
        } => {
            d.set_item("complete", false)?;
            d.set_item("aborted_at", at)?;
            d.set_item("colors_used", ledger.colors_used())?;
            if let Some(cert) = certificate {
                d.set_item("witness", cert.witness)?;
                d.set_item("witness_s", cert.witness_s)?;
            }
        }
    }
    Ok(d)
}

/// The algorithm for locally ℓ-colorable graphs; aborts carry a verified
/// witness.
#[pyfunction]
#[pyo3(signature = (stream, ell, scale = 1.0))]
fn color_locally<'py>(
    py: Python<'py>,
    stream: &PyStream,
    ell: u32,
    scale: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let outcome = general::color_locally_l(&stream.inner, ell, &params_with(scale, false))
        .map_err(runtime_err)?;
    outcome_dict(py, outcome, stream.inner.len())
}

/// The pipeline for k-colorable graphs (k = 2 delegates to the component
/// algorithm; improved mode routes k = 4 through the dedicated pipeline).
#[pyfunction]
#[pyo3(signature = (stream, k, scale = 1.0, improved = false))]
fn color_k<'py>(
    py: Python<'py>,
    stream: &PyStream,
    k: u32,
    scale: f64,
    improved: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let outcome = general::color_k_colorable(&stream.inner, k, &params_with(scale, improved))
        .map_err(runtime_err)?;
    outcome_dict(py, outcome, stream.inner.len())
}

/// The dedicated 4-colorable pipeline; always completes.
#[pyfunction]
#[pyo3(signature = (stream, scale = 1.0))]
fn color_4<'py>(py: Python<'py>, stream: &PyStream, scale: f64) -> PyResult<Bound<'py, PyDict>> {
    let run =
        k4::color_4_colorable(&stream.inner, &params_with(scale, false)).map_err(runtime_err)?;
    let d = outcome_dict(py, run.outcome, stream.inner.len())?;
    d.set_item(
        "extras",
        serde_json::to_string(&run.extras).map_err(runtime_err)?,
    )?;
    Ok(d)
}

/// The competitive wrapper: locally-(½·log log n) with fresh colors after an
/// abort; always completes.
#[pyfunction]
#[pyo3(signature = (stream, scale = 1.0))]
fn competitive<'py>(py: Python<'py>, stream: &PyStream, scale: f64) -> PyResult<Bound<'py, PyDict>> {
    let ledger = general::competitive_wrapper(&stream.inner, &params_with(scale, false))
        .map_err(runtime_err)?;
    let d = PyDict::new(py);
    d.set_item("colors_used", ledger.colors_used())?;
    let colors: Vec<Option<u32>> = (0..stream.inner.len()).map(|v| ledger.color_of(v)).collect();
    d.set_item("colors", colors)?;
    Ok(d)
}

// ---------------------------------------------------------------------------
// Analysis pipelines
// ---------------------------------------------------------------------------

/// Exact per-vertex level distributions over a merge forest, as
/// {vertex: [(level, numerator, denominator), ...]}.
#[pyfunction]
fn exact_level_distribution(parents: Vec<Option<usize>>) -> PyResult<Vec<Vec<(u32, i64, i64)>>> {
    let forest = RootedForest::from_parents(&parents).map_err(value_err)?;
    let dists = upper::exact_level_distribution(&forest, upper::DEFAULT_FOREST_CAP)
        .map_err(value_err)?;
    Ok(dists
        .into_iter()
        .map(|d| {
            d.into_iter()
                .map(|(l, p)| (l, *p.numer(), *p.denom()))
                .collect()
        })
        .collect())
}

/// One row of the color-coefficient table: γ' and the coefficient, both as
/// the printed round-up strings.
#[pyfunction]
#[pyo3(signature = (l, b = None, log2_d = 30))]
fn gamma_upper_bound<'py>(
    py: Python<'py>,
    l: u32,
    b: Option<usize>,
    log2_d: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let b = b.unwrap_or((1usize << (2 * l + 2)) + 1);
    let g = upper::gamma_upper_bound(l, b, upper::RoundCtx::new(log2_d));
    let d = PyDict::new(py);
    d.set_item("l", g.l)?;
    d.set_item("b", g.b_window)?;
    d.set_item("gamma", g.gamma_printed)?;
    d.set_item("coefficient", g.coefficient_printed)?;
    d.set_item("argmax_m", g.argmax_m)?;
    Ok(d)
}

fn parse_potential(name: &str) -> PyResult<lower::Potential> {
    Ok(match name {
        "phi1" => lower::Potential::Phi1,
        "phi2" => lower::Potential::Phi2,
        "phiA" | "phia" => lower::Potential::PhiA,
        "phiB" | "phib" => lower::Potential::PhiB,
        "phiA'" | "phiap" => lower::Potential::PhiAPrime,
        other => return Err(PyValueError::new_err(format!("unknown potential {other:?}"))),
    })
}

/// Potential value of a component state (X, Y) given as color lists.
#[pyfunction]
fn potential(name: &str, xs: Vec<u32>, ys: Vec<u32>) -> PyResult<(i64, i64)> {
    let pot = parse_potential(name)?;
    let v = pot.eval(lower::State::from_colors(&xs, &ys));
    Ok((*v.numer(), *v.denom()))
}

/// The guaranteed single-merge potential increase from the empty pair.
#[pyfunction]
fn lower_anchor(name: &str) -> PyResult<(i64, i64)> {
    let v = lower::lower_anchor(parse_potential(name)?);
    Ok((*v.numer(), *v.denom()))
}

/// The two-phase expectimax over four component states.
#[pyfunction]
fn potential_increase(
    states: Vec<(Vec<u32>, Vec<u32>)>,
    pot_a: &str,
    pot_b: &str,
) -> PyResult<(i64, i64)> {
    if states.len() != 4 {
        return Err(PyValueError::new_err("exactly four states required"));
    }
    let cs: Vec<lower::State> = states
        .iter()
        .map(|(x, y)| lower::State::from_colors(x, y))
        .collect();
    let v = lower::potential_increase(
        [cs[0], cs[1], cs[2], cs[3]],
        parse_potential(pot_a)?,
        parse_potential(pot_b)?,
    );
    Ok((*v.numer(), *v.denom()))
}

/// The full state-matrix search ("phi2" or "phiab"); returns the counts and
/// the minimum expectimax value as a fraction string.
#[pyfunction]
#[pyo3(signature = (mode, workers = 0))]
fn search_bad_matrices<'py>(
    py: Python<'py>,
    mode: &str,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        "phi2" => lower::SearchMode::Phi2,
        "phiab" => lower::SearchMode::PhiAB,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let mut cfg = lower::SearchConfig::new(mode);
    cfg.workers = workers;
    let res = py.detach(|| lower::search_bad_matrices(&cfg));
    let d = PyDict::new(py);
    d.set_item("pruned_pass", res.count_pruned_pass)?;
    d.set_item("rows_with_1_and_2", res.count_rows_with_1_and_2)?;
    d.set_item("threshold_pass", res.count_threshold_pass)?;
    d.set_item("min_potential_increase", res.min_potential_increase)?;
    Ok(d)
}

#[pymodule]
fn onlinecolor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyStream>()?;
    m.add_function(wrap_pyfunction!(gen_firstfit_adversary, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_k_colorable, m)?)?;
    m.add_function(wrap_pyfunction!(gen_grade_instance, m)?)?;
    m.add_function(wrap_pyfunction!(gen_grade_adversarial_instance, m)?)?;
    m.add_function(wrap_pyfunction!(gen_tree_merge_instance, m)?)?;
    m.add_function(wrap_pyfunction!(chromatic_number, m)?)?;
    m.add_function(wrap_pyfunction!(is_l_color_set, m)?)?;
    m.add_function(wrap_pyfunction!(is_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(first_fit, m)?)?;
    m.add_function(wrap_pyfunction!(lst89, m)?)?;
    m.add_function(wrap_pyfunction!(randomized_lst, m)?)?;
    m.add_function(wrap_pyfunction!(color_locally, m)?)?;
    m.add_function(wrap_pyfunction!(color_k, m)?)?;
    m.add_function(wrap_pyfunction!(color_4, m)?)?;
    m.add_function(wrap_pyfunction!(competitive, m)?)?;
    m.add_function(wrap_pyfunction!(exact_level_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(lower_anchor, m)?)?;
    m.add_function(wrap_pyfunction!(potential_increase, m)?)?;
    m.add_function(wrap_pyfunction!(search_bad_matrices, m)?)?;
    Ok(())
}
