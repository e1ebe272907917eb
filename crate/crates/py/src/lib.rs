//! Python module `bzl`: models, ladder offsets, sweeps and dynamics of
//! `bzl-core`. Heavy calls release the GIL.

use bzl_core::dynamics::{self, EvolveSetup, LatticeState};
use bzl_core::lattice::{ModelKind, ModelSpec};
use bzl_core::spectrum::{self, DeltaRange, KGrid, SweepOptions};
use bzl_core::walk::{self, QwParams, QwState};
use bzl_core::C64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    bzl,
    NumericalGuardError,
    PyRuntimeError,
    "Boundary contamination or convergence failure."
);

fn to_py(e: bzl_core::Error) -> PyErr {
    if e.is_numerical_guard() {
        NumericalGuardError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn lower_name<T: std::fmt::Debug>(x: T) -> String {
    format!("{x:?}").to_lowercase()
}

/// Continuous-time two-band lattice: `Model("model1" | "rice-mele", t1, t2, delta)`.
#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: ModelSpec,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (kind, t1, t2, delta = 0.0))]
    fn new(kind: &str, t1: f64, t2: f64, delta: f64) -> PyResult<Self> {
        let kind: ModelKind = kind.parse().map_err(to_py)?;
        Ok(Self {
            inner: ModelSpec::new(kind, t1, t2, delta).map_err(to_py)?,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn t1(&self) -> f64 {
        self.inner.t1
    }

    #[getter]
    fn t2(&self) -> f64 {
        self.inner.t2
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn with_delta(&self, delta: f64) -> Self {
        Self {
            inner: self.inner.with_delta(delta),
        }
    }

    /// `H(k)` as nested lists `[[h11, h12], [h21, h22]]`.
    fn bloch_hamiltonian(&self, k: f64) -> [[C64; 2]; 2] {
        let h = self.inner.bloch_hamiltonian(k);
        [[h.a11, h.a12], [h.a21, h.a22]]
    }

    fn dispersion(&self, k: f64) -> (C64, C64) {
        self.inner.dispersion(k)
    }

    fn pt_threshold(&self) -> f64 {
        self.inner.pt_threshold()
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!("Model('{}', t1={}, t2={}, delta={})", m.kind, m.t1, m.t2, m.delta)
    }
}

/// Forced two-step quantum walk: `Walk(beta1, beta2, delta, m)`.
#[pyclass(name = "Walk", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyWalk {
    inner: QwParams,
}

#[pymethods]
impl PyWalk {
    #[new]
    #[pyo3(signature = (beta1, beta2, delta, m))]
    fn new(beta1: f64, beta2: f64, delta: f64, m: u32) -> PyResult<Self> {
        Ok(Self {
            inner: QwParams::new(beta1, beta2, delta, m).map_err(to_py)?,
        })
    }

    #[getter]
    fn beta1(&self) -> f64 {
        self.inner.beta1
    }

    #[getter]
    fn beta2(&self) -> f64 {
        self.inner.beta2
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    fn force(&self) -> f64 {
        self.inner.force()
    }

    fn with_delta(&self, delta: f64) -> Self {
        Self {
            inner: self.inner.with_delta(delta),
        }
    }

    /// Quasi-energy per step at quasi-momentum `q`.
    #[pyo3(signature = (q = 0.0))]
    fn quasi_energy(&self, q: f64) -> C64 {
        walk::qw_quasi_energy(q, &self.inner)
    }

    /// Largest spread of the quasi-energy over the q-grid (0 for flat bands).
    #[pyo3(signature = (n_q = 64))]
    fn band_spread(&self, py: Python<'_>, n_q: usize) -> PyResult<f64> {
        py.detach(|| walk::qw_band_collapse_check(&self.inner, n_q))
            .map_err(to_py)
    }

    #[pyo3(signature = (n_q = 64))]
    fn static_band_spread(&self, n_q: usize) -> PyResult<f64> {
        walk::qw_static_band_spread(&self.inner, n_q).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Walk(beta1={}, beta2={}, delta={}, m={})",
            p.beta1, p.beta2, p.delta, p.m
        )
    }
}

/// Ladder offset `θ` with its Floquet angle and periods.
#[pyclass(name = "WsResult", frozen, get_all, skip_from_py_object)]
pub struct PyWsResult {
    theta: C64,
    phi: C64,
    force: f64,
    t1: f64,
    t2: Option<f64>,
    n_k: usize,
}

#[pymethods]
impl PyWsResult {
    fn __repr__(&self) -> String {
        format!("WsResult(theta={}, force={}, n_k={})", self.theta, self.force, self.n_k)
    }
}

/// Gain/loss sweep with its sharp/smooth classification.
#[pyclass(name = "SweepCurve", frozen, get_all, skip_from_py_object)]
pub struct PySweepCurve {
    deltas: Vec<f64>,
    theta: Vec<C64>,
    theta_wkb: Vec<Option<C64>>,
    classification: String,
    transition: Option<f64>,
}

impl From<spectrum::SweepCurve> for PySweepCurve {
    fn from(c: spectrum::SweepCurve) -> Self {
        Self {
            deltas: c.points.iter().map(|p| p.delta).collect(),
            theta: c.points.iter().map(|p| p.theta).collect(),
            theta_wkb: c.points.iter().map(|p| p.theta_wkb).collect(),
            classification: lower_name(c.classification),
            transition: c.transition,
        }
    }
}

/// Sampled continuous-time run; amplitudes are normalized.
#[pyclass(name = "Trajectory", frozen, get_all, skip_from_py_object)]
pub struct PyTrajectory {
    times: Vec<f64>,
    cells: Vec<i64>,
    abs_a: Vec<Vec<f64>>,
    abs_b: Vec<Vec<f64>>,
    log_amp: Vec<f64>,
    revival_cell: i64,
    revival: Vec<f64>,
    force: f64,
}

#[pymethods]
impl PyTrajectory {
    /// Periodicity of the revival trace: `("periodic" | "aperiodic", mismatch)`.
    #[pyo3(signature = (transient_periods = 3.0, tol = 0.05))]
    fn classify(&self, transient_periods: f64, tol: f64) -> PyResult<(String, f64)> {
        let t1 = 2.0 * std::f64::consts::PI / self.force;
        let dt = if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        };
        let rep = dynamics::periodicity_classify(&self.revival, dt, t1, transient_periods * t1, tol).map_err(to_py)?;
        Ok((lower_name(rep.kind), rep.mismatch))
    }
}

/// Recorded quantum-walk pulse dynamics.
#[pyclass(name = "WalkTrajectory", frozen, get_all, skip_from_py_object)]
pub struct PyWalkTrajectory {
    steps: Vec<i64>,
    sites: Vec<i64>,
    u_abs: Vec<Vec<f64>>,
    v_abs: Vec<Vec<f64>>,
    recurrence: Vec<f64>,
    log_amp: Vec<f64>,
    m: u32,
}

#[pymethods]
impl PyWalkTrajectory {
    /// Periodicity of the recurrence trace with `M` samples per period.
    #[pyo3(signature = (transient_periods = 3, tol = 0.05))]
    fn classify(&self, transient_periods: usize, tol: f64) -> PyResult<(String, f64)> {
        let m = self.m as usize;
        let rep =
            dynamics::periodicity_classify_samples(&self.recurrence, m, transient_periods * m, tol).map_err(to_py)?;
        Ok((lower_name(rep.kind), rep.mismatch))
    }
}

/// Exact `θ` from the k-ordered exponential, refining `n_k` until converged.
#[pyfunction]
#[pyo3(signature = (model, force, n_k = 4096, tol = 1e-9))]
fn theta_exact(py: Python<'_>, model: &PyModel, force: f64, n_k: usize, tol: f64) -> PyResult<PyWsResult> {
    let grid = KGrid {
        n_k,
        tol,
        ..KGrid::default()
    };
    let r = py
        .detach(|| spectrum::theta_exact(&model.inner, force, grid))
        .map_err(to_py)?;
    Ok(PyWsResult {
        theta: r.theta,
        phi: r.phi,
        force: r.force,
        t1: r.t1,
        t2: r.t2,
        n_k: r.n_k,
    })
}

/// Adiabatic estimate of `θ`.
#[pyfunction]
#[pyo3(signature = (model, n_k = 4096))]
fn theta_wkb(model: &PyModel, n_k: usize) -> PyResult<C64> {
    Ok(spectrum::theta_wkb(&model.inner, n_k).map_err(to_py)?.theta)
}

/// Dense real-space eigenvalues as `(value, edge_weight, interior)` tuples.
#[pyfunction]
#[pyo3(signature = (model, force, n_cells = 200))]
fn ws_ladder_eigenvalues(
    py: Python<'_>,
    model: &PyModel,
    force: f64,
    n_cells: usize,
) -> PyResult<Vec<(C64, f64, bool)>> {
    let eigs = py
        .detach(|| spectrum::ws_ladder_eigenvalues(&model.inner, force, n_cells, spectrum::DEFAULT_MAX_DENSE_CELLS))
        .map_err(to_py)?;
    Ok(eigs.into_iter().map(|e| (e.value, e.edge_weight, e.interior)).collect())
}

/// `θ` on `n_points` evenly spaced gain/loss values in `[delta_min, delta_max]`.
#[pyfunction]
#[pyo3(signature = (model, force, delta_min, delta_max, n_points, with_wkb = true, n_k = 4096, eps_floor = 1e-6))]
#[allow(clippy::too_many_arguments)]
fn sweep_delta(
    py: Python<'_>,
    model: &PyModel,
    force: f64,
    delta_min: f64,
    delta_max: f64,
    n_points: usize,
    with_wkb: bool,
    n_k: usize,
    eps_floor: f64,
) -> PyResult<PySweepCurve> {
    let range = DeltaRange::new(delta_min, delta_max, n_points).map_err(to_py)?;
    let opts = SweepOptions {
        grid: KGrid {
            n_k,
            ..KGrid::default()
        },
        with_wkb,
        eps_floor,
    };
    Ok(py
        .detach(|| spectrum::sweep_delta(&model.inner, range, force, opts))
        .map_err(to_py)?
        .into())
}

/// Sharp/smooth classification of `(Δ, Im θ)` samples.
#[pyfunction]
#[pyo3(signature = (deltas, im_theta, eps_floor = 1e-6))]
fn classify_transition(deltas: Vec<f64>, im_theta: Vec<f64>, eps_floor: f64) -> PyResult<(String, Option<f64>)> {
    if deltas.len() != im_theta.len() {
        return Err(PyValueError::new_err("deltas and im_theta differ in length"));
    }
    let samples: Vec<(f64, f64)> = deltas.into_iter().zip(im_theta).collect();
    let (kind, at) = spectrum::classify_transition(&samples, eps_floor);
    Ok((lower_name(kind), at))
}

/// RK4 run from a single excitation of sublattice A at cell 0.
#[pyfunction]
#[pyo3(signature = (model, force, periods = 10.0, n_cells = None, dt = None, sample_every = None, revival_offset = 0))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    model: &PyModel,
    force: f64,
    periods: f64,
    n_cells: Option<usize>,
    dt: Option<f64>,
    sample_every: Option<usize>,
    revival_offset: i64,
) -> PyResult<PyTrajectory> {
    let m = model.inner;
    let traj = py
        .detach(|| {
            let mut setup = EvolveSetup::auto(&m, force, periods)?;
            if let Some(n) = n_cells {
                setup.n_cells = n;
            }
            if let Some(dt) = dt {
                setup.sample_every = ((setup.dt * setup.sample_every as f64) / dt).round().max(1.0) as usize;
                setup.dt = dt;
            }
            if let Some(s) = sample_every {
                setup.sample_every = s;
            }
            let init = LatticeState::centered_excitation(setup.n_cells)?;
            dynamics::evolve(
                &m,
                force,
                init,
                setup.t_end,
                setup.dt,
                setup.sample_every,
                revival_offset,
            )
        })
        .map_err(to_py)?;
    Ok(PyTrajectory {
        times: traj.times,
        cells: traj.cells,
        abs_a: traj.abs_a,
        abs_b: traj.abs_b,
        log_amp: traj.log_amp,
        revival_cell: traj.revival_cell,
        revival: traj.revival,
        force,
    })
}

/// Periodicity of an evenly sampled series with an integer number of
/// samples per period: `("periodic" | "aperiodic", mismatch)`.
#[pyfunction]
#[pyo3(signature = (series, samples_per_period, transient_samples, tol = 0.05))]
fn periodicity_classify(
    series: Vec<f64>,
    samples_per_period: usize,
    transient_samples: usize,
    tol: f64,
) -> PyResult<(String, f64)> {
    let rep =
        dynamics::periodicity_classify_samples(&series, samples_per_period, transient_samples, tol).map_err(to_py)?;
    Ok((lower_name(rep.kind), rep.mismatch))
}

/// Unforced PT threshold of the walk.
#[pyfunction]
fn qw_pt_threshold(beta1: f64, beta2: f64) -> PyResult<f64> {
    walk::qw_pt_threshold(beta1, beta2).map_err(to_py)
}

/// Walk quasi-energy at `q = 0` over a gain/loss range.
#[pyfunction]
#[pyo3(signature = (walk, delta_min, delta_max, n_points, eps_floor = 1e-6))]
fn qw_sweep_delta(
    py: Python<'_>,
    walk: &PyWalk,
    delta_min: f64,
    delta_max: f64,
    n_points: usize,
    eps_floor: f64,
) -> PyResult<PySweepCurve> {
    let range = DeltaRange::new(delta_min, delta_max, n_points).map_err(to_py)?;
    Ok(py
        .detach(|| walk::qw_sweep_delta(&walk.inner, range, eps_floor))
        .map_err(to_py)?
        .into())
}

/// Pulse dynamics from `u_n = δ_{n,0}`; `steps` defaults to `10·M`.
#[pyfunction]
#[pyo3(signature = (walk, steps = None, record_maps = false))]
fn qw_evolve(py: Python<'_>, walk: &PyWalk, steps: Option<usize>, record_maps: bool) -> PyResult<PyWalkTrajectory> {
    let p = walk.inner;
    let steps = steps.unwrap_or(10 * p.m as usize);
    let tr = py
        .detach(|| {
            walk::qw_evolve(
                &p,
                QwState::single_pulse(QwState::n_max_for(steps), 0)?,
                steps,
                0,
                record_maps,
            )
        })
        .map_err(to_py)?;
    Ok(PyWalkTrajectory {
        steps: tr.steps,
        sites: tr.sites,
        u_abs: tr.u_abs,
        v_abs: tr.v_abs,
        recurrence: tr.recurrence,
        log_amp: tr.log_amp,
        m: p.m,
    })
}

#[pymodule]
fn bzl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("NumericalGuardError", m.py().get_type::<NumericalGuardError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyWalk>()?;
    m.add_class::<PyWsResult>()?;
    m.add_class::<PySweepCurve>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyWalkTrajectory>()?;
    m.add_function(wrap_pyfunction!(theta_exact, m)?)?;
    m.add_function(wrap_pyfunction!(theta_wkb, m)?)?;
    m.add_function(wrap_pyfunction!(ws_ladder_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_delta, m)?)?;
    m.add_function(wrap_pyfunction!(classify_transition, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(periodicity_classify, m)?)?;
    m.add_function(wrap_pyfunction!(qw_pt_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(qw_sweep_delta, m)?)?;
    m.add_function(wrap_pyfunction!(qw_evolve, m)?)?;
    Ok(())
}
