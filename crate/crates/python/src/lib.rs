//! Python bindings: exact values come back as `fractions.Fraction`, Monte
//! Carlo runs as `Estimate` objects, and solved reveal policies as `Policy`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lupus::engine::{run_game, EngineError, GameConfig, Winner, WolfStrategy};
use lupus::exact::{self, ExactError, Probability};
use lupus::mc::{self, McError};
use lupus::pbe::{self, InformationSet, Node, PbeError, TieBreak};
use lupus::rng::RngStream;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pbe_err(e: PbeError) -> PyErr {
    match e {
        PbeError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn fraction<'py>(py: Python<'py>, p: &Probability) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((p.to_string(),))
}

/// Accepts a Fraction, an int or a "p/q" string.
fn to_probability(value: &Bound<'_, PyAny>) -> PyResult<Probability> {
    value.str()?.to_str()?.parse().map_err(value_err)
}

#[pyfunction]
fn w_plus(py: Python<'_>, n: u32, m: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &exact::w_plus(n, m).map_err(|e: ExactError| value_err(e))?)
}

#[pyfunction]
fn v_random(py: Python<'_>, n: u32, m: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &exact::v_random(n, m).map_err(value_err)?)
}

#[pyfunction]
fn w_selfkill(py: Python<'_>, n: u32, m: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &exact::w_selfkill(n, m).map_err(value_err)?)
}

/// A binomial win-rate estimate.
#[pyclass(frozen, skip_from_py_object, module = "pylupus")]
#[derive(Clone)]
struct Estimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    successes: u64,
    #[pyo3(get)]
    trials: u64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    ci95: (f64, f64),
}

impl From<mc::Estimate> for Estimate {
    fn from(e: mc::Estimate) -> Self {
        Estimate {
            mean: e.mean,
            successes: e.successes,
            trials: e.trials,
            std_error: e.std_error,
            ci95: e.ci95,
        }
    }
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(mean={:.6}, ci95=({:.6}, {:.6}), trials={})",
            self.mean, self.ci95.0, self.ci95.1, self.trials
        )
    }
}

fn strategy(name: &str) -> PyResult<WolfStrategy> {
    match name {
        "plus" => Ok(WolfStrategy::RandomPlus),
        "random" => Ok(WolfStrategy::Random),
        other => Err(value_err(format!("unknown strategy {other:?}; use \"plus\" or \"random\""))),
    }
}

fn config(
    villagers: u32,
    wolves: u32,
    prophet: bool,
    reveal_round: Option<u32>,
    wolf_strategy: &str,
) -> PyResult<GameConfig> {
    let config = GameConfig::new(villagers, wolves, prophet)
        .with_reveal_round(reveal_round)
        .with_strategy(strategy(wolf_strategy)?);
    config.validate().map_err(|e: EngineError| value_err(e))?;
    Ok(config)
}

fn mc_err(e: McError) -> PyErr {
    value_err(e)
}

/// Citizen win rate over `trials` seeded games.
#[pyfunction]
#[pyo3(signature = (villagers, wolves, prophet=false, reveal_round=None, strategy="plus", trials=100_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    villagers: u32,
    wolves: u32,
    prophet: bool,
    reveal_round: Option<u32>,
    strategy: &str,
    trials: u64,
    seed: u64,
) -> PyResult<Estimate> {
    let config = config(villagers, wolves, prophet, reveal_round, strategy)?;
    py.detach(|| mc::win_rate(&config, Winner::CitizenGroup, trials, seed))
        .map(Estimate::from)
        .map_err(mc_err)
}

/// Citizen win rate when the prophet reveals on day `reveal_round`.
#[pyfunction]
#[pyo3(signature = (villagers, wolves, reveal_round, trials=100_000, seed=0))]
fn estimate_h(
    py: Python<'_>,
    villagers: u32,
    wolves: u32,
    reveal_round: Option<u32>,
    trials: u64,
    seed: u64,
) -> PyResult<Estimate> {
    py.detach(|| mc::estimate_h(villagers, wolves, reveal_round, trials, seed))
        .map(Estimate::from)
        .map_err(mc_err)
}

/// Exact citizen win probability for a fixed reveal day.
#[pyfunction]
#[pyo3(signature = (villagers, wolves, reveal_round))]
fn exact_h(py: Python<'_>, villagers: u32, wolves: u32, reveal_round: Option<u32>) -> PyResult<Bound<'_, PyAny>> {
    let p = pbe::fixed_round_value(villagers, wolves, reveal_round).map_err(pbe_err)?;
    fraction(py, &p)
}

/// Searches every reveal day; returns a dict with `best_round`,
/// `best_estimate`, `per_round` and `tie_rounds`.
#[pyfunction]
#[pyo3(signature = (villagers, wolves, trials_per_round=100_000, seed=2024))]
fn optimal_reveal(
    py: Python<'_>,
    villagers: u32,
    wolves: u32,
    trials_per_round: u64,
    seed: u64,
) -> PyResult<Bound<'_, PyDict>> {
    let r = py
        .detach(|| mc::optimal_reveal(villagers, wolves, trials_per_round, seed))
        .map_err(mc_err)?;
    let out = PyDict::new(py);
    out.set_item("best_round", r.best_round)?;
    out.set_item("best_estimate", Estimate::from(r.best_estimate))?;
    let per_round: Vec<(u32, Estimate)> = r.per_round.into_iter().map(|(k, e)| (k, e.into())).collect();
    out.set_item("per_round", per_round)?;
    out.set_item("tie_rounds", r.tie_rounds)?;
    Ok(out)
}

/// Transcript of one seeded game, one line per event.
#[pyfunction]
#[pyo3(signature = (villagers, wolves, prophet=false, reveal_round=None, strategy="plus", seed=0))]
fn transcript(
    villagers: u32,
    wolves: u32,
    prophet: bool,
    reveal_round: Option<u32>,
    strategy: &str,
    seed: u64,
) -> PyResult<Vec<String>> {
    let config = config(villagers, wolves, prophet, reveal_round, strategy)?;
    let record = run_game(config, &mut RngStream::new(seed, 0)).map_err(value_err)?;
    Ok(record.transcript())
}

/// The prophet's optimal hide/reveal decision at every reachable belief.
#[pyclass(frozen, module = "pylupus")]
struct Policy {
    inner: pbe::Policy,
}

/// `(weight, (N, M, n, m))` pairs as passed from Python.
type Entries<'py> = Vec<(Bound<'py, PyAny>, (u32, u32, u32, u32))>;

fn information_set(entries: Entries<'_>) -> PyResult<InformationSet> {
    let mut nodes = Vec::with_capacity(entries.len());
    for (weight, (a, b, c, d)) in entries {
        nodes.push((to_probability(&weight)?, Node::new(a, b, c, d)));
    }
    InformationSet::new(nodes).map_err(pbe_err)
}

#[pymethods]
impl Policy {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Policy> {
        pbe::policy_from_json(text)
            .map(|inner| Policy { inner })
            .map_err(pbe_err)
    }

    #[getter]
    fn villagers(&self) -> u32 {
        self.inner.villagers
    }

    #[getter]
    fn wolves(&self) -> u32 {
        self.inner.wolves
    }

    #[getter]
    fn root_value<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.root_value)
    }

    /// "Revealing", "Hiding" or None for a set given as
    /// `[(weight, (N, M, n, m)), ...]`.
    fn action(&self, entries: Entries<'_>) -> PyResult<Option<&'static str>> {
        let set = information_set(entries)?;
        Ok(self.inner.action(&set).map(|a| match a {
            pbe::Action::Revealing => "Revealing",
            pbe::Action::Hiding => "Hiding",
        }))
    }

    fn to_json(&self) -> String {
        pbe::policy_to_json(&self.inner)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        pbe::export_policy(&self.inner, &path).map_err(pbe_err)
    }

    /// Plays seeded games in which the prophet follows this policy.
    #[pyo3(signature = (trials=100_000, seed=0))]
    fn simulate(&self, py: Python<'_>, trials: u64, seed: u64) -> PyResult<Estimate> {
        py.detach(|| mc::simulate_policy(&self.inner, trials, seed))
            .map(Estimate::from)
            .map_err(mc_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Policy(villagers={}, wolves={}, root_value={}, sets={})",
            self.inner.villagers,
            self.inner.wolves,
            self.inner.root_value,
            self.inner.len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (villagers, wolves, tie_break="reveal"))]
fn solve(py: Python<'_>, villagers: u32, wolves: u32, tie_break: &str) -> PyResult<Policy> {
    let tie = match tie_break {
        "reveal" => TieBreak::Reveal,
        "hide" => TieBreak::Hide,
        other => return Err(value_err(format!("unknown tie break {other:?}; use \"reveal\" or \"hide\""))),
    };
    py.detach(|| pbe::solve_with(villagers, wolves, tie))
        .map(|inner| Policy { inner })
        .map_err(pbe_err)
}

#[pymodule]
fn pylupus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(w_plus, m)?)?;
    m.add_function(wrap_pyfunction!(v_random, m)?)?;
    m.add_function(wrap_pyfunction!(w_selfkill, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_h, m)?)?;
    m.add_function(wrap_pyfunction!(exact_h, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_reveal, m)?)?;
    m.add_function(wrap_pyfunction!(transcript, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_class::<Estimate>()?;
    m.add_class::<Policy>()?;
    Ok(())
}
