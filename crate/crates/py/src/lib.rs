use detox_core::campaign::{CampaignOptions, CampaignResult};
use detox_core::interp::{self, Mode, DEFAULT_TIMEOUT_FACTOR};
use detox_core::predict::Counts;
use detox_core::search::{self, GaParams};
use detox_core::{lang, oracle, predict, render, Configuration, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Golden(e) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn config(s: &str) -> PyResult<Configuration> {
    s.parse().map_err(to_py)
}

fn counts_dict<'py>(py: Python<'py>, c: &Counts, config: &Configuration) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("config", config.to_string())?;
    d.set_item("sdc", c.sdc)?;
    d.set_item("detected", c.detected)?;
    d.set_item("benign", c.benign)?;
    d.set_item("trap", c.trap)?;
    d.set_item("timeout", c.timeout)?;
    d.set_item("runtime", c.runtime)?;
    d.set_item("area", c.area)?;
    Ok(d)
}

/// A parsed workload.
#[pyclass(name = "Program", frozen)]
struct PyProgram {
    inner: lang::Program,
}

#[pymethods]
impl PyProgram {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(PyProgram { inner: lang::parse(source).map_err(|e| to_py(e.into()))? })
    }

    /// `(index, id, cost)` per assertion, in configuration bit order.
    fn assertions(&self) -> Vec<(usize, String, u32)> {
        lang::list_assertions(&self.inner).into_iter().map(|a| (a.index, a.id, a.cost)).collect()
    }

    fn source(&self) -> String {
        lang::render_source(&self.inner)
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn golden<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let g = interp::golden_run(&self.inner).map_err(|e| to_py(e.into()))?;
        let d = PyDict::new(py);
        d.set_item("T", g.total_steps)?;
        d.set_item("workload_steps", g.workload_steps)?;
        d.set_item("total_bits", g.total_bits())?;
        let windows: Vec<(usize, u64, u64, u64)> =
            g.windows.iter().map(|w| (w.assertion, w.instance, w.t_start, w.t_end)).collect();
        d.set_item("windows", windows)?;
        d.set_item("outputs", g.outputs.clone())?;
        Ok(d)
    }

    /// Injects one bit flip. `config=None` runs in discovery mode.
    #[pyo3(signature = (t, bit, config=None, timeout_factor=DEFAULT_TIMEOUT_FACTOR))]
    fn run_experiment<'py>(
        &self,
        py: Python<'py>,
        t: u64,
        bit: u64,
        config: Option<&str>,
        timeout_factor: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mode = match config {
            None => Mode::Discovery,
            Some(s) => Mode::Deployment(self::config(s)?),
        };
        let r = interp::run_experiment(&self.inner, t, bit, &mode, timeout_factor).map_err(to_py)?;
        let d = PyDict::new(py);
        let detectors: Vec<(usize, u64)> = r.detectors.iter().map(|d| (d.assertion, d.step)).collect();
        d.set_item("detectors", detectors)?;
        d.set_item("outcome", r.outcome.map_or("DETECTED", |o| o.as_str()))?;
        Ok(d)
    }

    #[pyo3(signature = (timeout_factor=DEFAULT_TIMEOUT_FACTOR, jobs=0))]
    fn campaign(&self, py: Python<'_>, timeout_factor: f64, jobs: usize) -> PyResult<PyCampaign> {
        let opts = CampaignOptions { timeout_factor, jobs };
        let inner = py.detach(|| detox_core::run_discovery(&self.inner, &opts)).map_err(to_py)?;
        Ok(PyCampaign { inner })
    }

    #[pyo3(signature = (config, timeout_factor=DEFAULT_TIMEOUT_FACTOR, jobs=0))]
    fn ground_truth<'py>(
        &self,
        py: Python<'py>,
        config: &str,
        timeout_factor: f64,
        jobs: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let c = self::config(config)?;
        let opts = CampaignOptions { timeout_factor, jobs };
        let counts = py.detach(|| oracle::ground_truth(&self.inner, &c, &opts)).map_err(to_py)?;
        let d = counts_dict(py, &counts, &c)?;
        d.set_item("source", "oracle")?;
        Ok(d)
    }

    fn strip(&self, config: &str) -> PyResult<PyProgram> {
        let v = oracle::strip(&self.inner, &self::config(config)?).map_err(to_py)?;
        Ok(PyProgram { inner: v.program })
    }

    fn __repr__(&self) -> String {
        format!("Program(vars={}, assertions={})", self.inner.vars.len(), self.inner.n_assertions())
    }
}

/// Results of the all-enabled discovery campaign.
#[pyclass(name = "Campaign", frozen)]
struct PyCampaign {
    inner: CampaignResult,
}

#[pymethods]
impl PyCampaign {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyCampaign { inner: CampaignResult::load(path).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(PyCampaign { inner: CampaignResult::from_jsonl(text).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    #[getter]
    fn n_assertions(&self) -> usize {
        self.inner.n_assertions()
    }

    #[getter]
    fn total_steps(&self) -> u64 {
        self.inner.total_steps
    }

    #[getter]
    fn total_bits(&self) -> u64 {
        self.inner.total_bits
    }

    #[getter]
    fn n_records(&self) -> usize {
        self.inner.records.len()
    }

    fn excluded_times(&self, config: &str) -> PyResult<Vec<(u64, u64)>> {
        predict::excluded_times(&self.inner, &self::config(config)?).map_err(to_py)
    }

    fn predict<'py>(&self, py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
        let c = self::config(config)?;
        let counts = predict::predict(&self.inner, &c).map_err(to_py)?;
        counts_dict(py, &counts, &c)
    }

    /// Predictions for every configuration, keyed by bit string.
    fn predict_all<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let all = predict::predict_all(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        for (c, counts) in &all {
            d.set_item(c.to_string(), counts_dict(py, counts, c)?)?;
        }
        Ok(d)
    }

    #[pyo3(signature = (method="exhaustive", seed=1, population=32, generations=100))]
    fn search<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        seed: u64,
        population: usize,
        generations: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let outcome = match method {
            "exhaustive" => search::exhaustive(&self.inner).map_err(to_py)?,
            "greedy" => search::greedy(&self.inner),
            "ga" => {
                let params = GaParams { population, generations, seed, ..GaParams::default() };
                search::ga(&self.inner, &params).map_err(to_py)?
            }
            other => return Err(PyValueError::new_err(format!("unknown search method `{other}`"))),
        };
        let d = PyDict::new(py);
        d.set_item("method", method)?;
        d.set_item("best_config", outcome.best.to_string())?;
        d.set_item("counts", counts_dict(py, &outcome.best_counts, &outcome.best)?)?;
        d.set_item("evaluations", outcome.evaluations)?;
        Ok(d)
    }

    fn render_svg(&self, config: &str) -> PyResult<String> {
        render::render_svg(&self.inner, &self::config(config)?).map_err(to_py)
    }
}

#[pyfunction]
fn parse(source: &str) -> PyResult<PyProgram> {
    PyProgram::new(source)
}

#[pymodule]
fn detox(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProgram>()?;
    m.add_class::<PyCampaign>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    Ok(())
}
