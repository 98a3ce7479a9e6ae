//! Python bindings for `zsb`.

use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::OnceLock;
use zsb::evolution::{self, DemoConfig, GridState, Mkdv};
use zsb::frequencies::Frequencies;
use zsb::pipeline::Pipeline;
use zsb::roots_products::Side;
use zsb::{potential, ZsbError};

create_exception!(zsb_py, ZsbPyError, PyValueError);

fn err(e: ZsbError) -> PyErr {
    ZsbPyError::new_err(e.to_string())
}

/// Serializable value → plain Python objects.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| err(e.into()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn side(s: Option<&str>) -> PyResult<Option<Side>> {
    match s {
        None => Ok(None),
        Some("plus") => Ok(Some(Side::Plus)),
        Some("minus") => Ok(Some(Side::Minus)),
        Some(o) => Err(PyValueError::new_err(format!("side must be 'plus' or 'minus', got '{o}'"))),
    }
}

/// Fourier coefficients of a 1-periodic pair `(φ₋, φ₊)`.
#[pyclass(name = "Potential", module = "zsb_py", frozen)]
struct PyPotential(potential::Potential);

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn zero() -> Self {
        Self(potential::Potential::zero())
    }

    #[staticmethod]
    fn constant(a: f64) -> Self {
        Self(potential::Potential::constant(a))
    }

    /// `u = Σ 2a_k cos 2πkx` from `[(k, a_k), …]`.
    #[staticmethod]
    fn cosines(terms: Vec<(i64, f64)>) -> Self {
        Self(potential::Potential::cosines(&terms))
    }

    /// `φ = (u, u)` from the coefficients of a real `u`.
    #[staticmethod]
    fn real_u(coeffs: BTreeMap<i64, C64>) -> PyResult<Self> {
        potential::Potential::real_u(coeffs).map(Self).map_err(err)
    }

    /// Real-type pair with the given `φ₋` coefficients.
    #[staticmethod]
    fn real_type(coeffs: BTreeMap<i64, C64>) -> Self {
        Self(potential::Potential::real_type(coeffs))
    }

    #[staticmethod]
    fn pair(minus: BTreeMap<i64, C64>, plus: BTreeMap<i64, C64>) -> Self {
        Self(potential::Potential::new(minus, plus))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        potential::Potential::from_json_str(s).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        potential::Potential::load(&path).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    /// `(φ₋(x), φ₊(x))`.
    fn __call__(&self, x: f64) -> (C64, C64) {
        self.0.eval(x)
    }

    fn minus(&self, n: i64) -> C64 {
        self.0.minus(n)
    }

    fn plus(&self, n: i64) -> C64 {
        self.0.plus(n)
    }

    fn is_real_type(&self) -> bool {
        self.0.is_real_type()
    }

    fn is_er(&self) -> bool {
        self.0.is_er()
    }

    fn truncated(&self, k: usize) -> Self {
        Self(self.0.truncated(k))
    }

    fn scaled(&self, s: f64) -> Self {
        Self(self.0.scaled(s))
    }

    /// `[H₁, H₂, H₃, H₄]`.
    fn hamiltonians(&self) -> Vec<C64> {
        potential::hamiltonians(&self.0).as_array().to_vec()
    }

    fn fl_norm(&self, p: f64) -> PyResult<f64> {
        potential::fl_norm(&self.0, p).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.0.to_json_string())
    }
}

/// `Δ`, `Δ̇`, `det M` and the fundamental matrix at `λ`.
#[pyfunction]
fn transfer<'py>(py: Python<'py>, phi: &PyPotential, lam: C64) -> PyResult<Bound<'py, PyDict>> {
    let t = py.detach(|| zsb::zs_core::transfer(&phi.0, lam)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("delta", t.delta())?;
    d.set_item("delta_dot", t.ddelta())?;
    d.set_item("det", t.det())?;
    d.set_item("m", [[t.m11, t.m12], [t.m21, t.m22]])?;
    Ok(d)
}

/// Located spectrum of a potential with the product, abelian-integral and
/// frequency machinery built on top of it.
#[pyclass(name = "Spectrum", module = "zsb_py", frozen)]
struct PySpectrum {
    pipe: Pipeline,
    tol: f64,
    freqs: OnceLock<Frequencies>,
}

impl PySpectrum {
    fn freqs(&self, py: Python<'_>) -> PyResult<&Frequencies> {
        if let Some(f) = self.freqs.get() {
            return Ok(f);
        }
        let f = py.detach(|| self.pipe.frequencies(self.tol)).map_err(err)?;
        Ok(self.freqs.get_or_init(|| f))
    }
}

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (phi, n, m = None, tol = 1e-10))]
    fn new(py: Python<'_>, phi: &PyPotential, n: usize, m: Option<usize>, tol: f64) -> PyResult<Self> {
        let pipe = py.detach(|| Pipeline::new(&phi.0, n, m, tol)).map_err(err)?;
        Ok(PySpectrum { pipe, tol, freqs: OnceLock::new() })
    }

    #[getter]
    fn n_max(&self) -> i64 {
        self.pipe.sd.n_max
    }

    #[getter]
    fn lam_minus(&self) -> Vec<C64> {
        self.pipe.sd.lam_minus.clone()
    }

    #[getter]
    fn lam_plus(&self) -> Vec<C64> {
        self.pipe.sd.lam_plus.clone()
    }

    #[getter]
    fn tau(&self) -> Vec<C64> {
        self.pipe.sd.tau.clone()
    }

    #[getter]
    fn gamma(&self) -> Vec<C64> {
        self.pipe.sd.gamma.clone()
    }

    #[getter]
    fn open_gaps(&self) -> Vec<i64> {
        self.pipe.sd.open_gaps()
    }

    /// The full spectral record as a dict.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &*self.pipe.sd)
    }

    /// `F(λ)`, or `F_n(λ)` when `n` is given.
    #[pyo3(signature = (lam, n = None, side = None))]
    fn abelian(&self, lam: C64, n: Option<i64>, side: Option<&str>) -> PyResult<C64> {
        let s = self::side(side)?;
        match n {
            Some(n) => self.pipe.ab.f_n(n, lam, s),
            None => self.pipe.ab.f(lam, s),
        }
        .map_err(err)
    }

    /// Hamiltonians from the large-λ expansion of `F`.
    #[pyo3(signature = (jmin = None, jmax = None, powers = 14))]
    fn laurent<'py>(&self, py: Python<'py>, jmin: Option<usize>, jmax: Option<usize>, powers: usize) -> PyResult<Bound<'py, PyAny>> {
        let k = self.pipe.sd.n_phi.max(0) as usize;
        let jmin = jmin.unwrap_or((2 * k).max(6));
        let fit = py.detach(|| self.pipe.ab.laurent_fit(jmin, jmax.unwrap_or(jmin + 74), powers)).map_err(err)?;
        to_py(py, &fit)
    }

    /// Actions by both contour formulas, for the given indices (default: the
    /// whole window).
    #[pyo3(signature = (ns = None))]
    fn actions<'py>(&self, py: Python<'py>, ns: Option<Vec<i64>>) -> PyResult<Bound<'py, PyAny>> {
        let fr = self.freqs(py)?;
        let ns = ns.unwrap_or_else(|| self.pipe.sd.indices().collect());
        let rows = ns.iter().map(|&n| fr.action(n)).collect::<zsb::Result<Vec<_>>>().map_err(err)?;
        to_py(py, &rows)
    }

    /// Actions, renormalized and `ω★` frequencies, and diagnostics.
    fn frequencies<'py>(&self, py: Python<'py>, ns: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
        let fr = self.freqs(py)?;
        let fs = py.detach(|| fr.frequency_spectrum(&ns)).map_err(err)?;
        to_py(py, &fs)
    }
}

/// Integrates mKdV (or mKdV# when `sharp`) from a real potential; returns
/// the final grid values and the sampled conserved quantities.
#[pyfunction]
#[pyo3(signature = (phi, t_end, grid = 256, dt = 1e-5, sharp = false, sample_every = 100))]
fn evolve<'py>(
    py: Python<'py>,
    phi: &PyPotential,
    t_end: f64,
    grid: usize,
    dt: f64,
    sharp: bool,
    sample_every: usize,
) -> PyResult<(Vec<f64>, Bound<'py, PyAny>)> {
    let (end, samples) = py
        .detach(|| {
            let gs = GridState::from_potential(&phi.0, grid)?;
            Mkdv::new(grid, sharp).evolve(&gs, t_end, dt, sample_every)
        })
        .map_err(err)?;
    Ok((end.u, to_py(py, &samples)?))
}

/// Compares mKdV# with the shifted mKdV solution at time `t`.
#[pyfunction]
#[pyo3(signature = (phi, t, grid = 256, dt = 1e-5))]
fn shift_check<'py>(py: Python<'py>, phi: &PyPotential, t: f64, grid: usize, dt: f64) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| evolution::shift_equivalence_check(&GridState::from_potential(&phi.0, grid)?, t, dt))
        .map_err(err)?;
    to_py(py, &rep)
}

/// `H₁` and `ω★` along truncations of the model Fourier–Lebesgue datum.
#[pyfunction]
#[pyo3(signature = (p = 4.0, alpha = 0.3, kmin = 8, kmax = 512, amplitude = 0.1, ns = vec![1, 2]))]
fn illposed_demo<'py>(
    py: Python<'py>,
    p: f64,
    alpha: f64,
    kmin: usize,
    kmax: usize,
    amplitude: f64,
    ns: Vec<i64>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = DemoConfig { p, alpha, kmin, kmax, amplitude, ns, ..DemoConfig::default() };
    let table = py.detach(|| evolution::illposedness_demo(&cfg)).map_err(err)?;
    to_py(py, &table)
}

/// Runs acceptance criteria (all when `only` is absent) as
/// `(id, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (only = None))]
fn validate(py: Python<'_>, only: Option<Vec<u32>>) -> Vec<(u32, bool, String)> {
    py.detach(|| {
        zsb::acceptance::CHECKS
            .iter()
            .enumerate()
            .filter(|(i, _)| only.as_ref().is_none_or(|o| o.contains(&(*i as u32 + 1))))
            .map(|(_, f)| {
                let c = f();
                (c.id, c.passed, c.detail)
            })
            .collect()
    })
}

#[pymodule]
fn zsb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ZsbError", m.py().get_type::<ZsbPyError>())?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(transfer, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(shift_check, m)?)?;
    m.add_function(wrap_pyfunction!(illposed_demo, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
