//! Python bindings for the interferometer simulator.

use std::collections::BTreeMap;

use mzi_paradox as mzi;
use mzi_paradox::interferometry::joint_probability;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn table(dist: &mzi::OutcomeDistribution) -> BTreeMap<String, f64> {
    dist.iter().map(|(l, p)| (l.to_string(), p)).collect()
}

/// Symmetric beamsplitter with transmission `t` and reflection `r`.
#[pyclass(name = "BeamSplitter", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyBeamSplitter(mzi::BeamSplitterParams);

#[pymethods]
impl PyBeamSplitter {
    #[new]
    fn new(r: f64) -> PyResult<Self> {
        mzi::BeamSplitterParams::from_reflection(r)
            .map(Self)
            .map_err(value_error)
    }

    #[staticmethod]
    fn balanced() -> Self {
        Self(mzi::BeamSplitterParams::balanced())
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    fn __repr__(&self) -> String {
        format!("BeamSplitter(t={}, r={})", self.0.t(), self.0.r())
    }
}

/// Outcome table of the single interferometer, keyed by detector name.
#[pyfunction]
fn run_ev(bs: &PyBeamSplitter, bomb: bool) -> BTreeMap<String, f64> {
    table(&mzi::run_ev(&bs.0, bomb))
}

#[pyfunction]
fn ev_retest_efficiency(bs: &PyBeamSplitter) -> f64 {
    mzi::ev_retest_efficiency(&bs.0)
}

/// Joint outcome table of the annihilation-coupled pair.
#[pyfunction]
#[pyo3(signature = (bs, u_plus=false, u_minus=false))]
fn run_annihilation(
    bs: &PyBeamSplitter,
    u_plus: bool,
    u_minus: bool,
) -> PyResult<BTreeMap<String, f64>> {
    let cfg = mzi::ExperimentConfig::annihilation(bs.0, u_plus, u_minus);
    mzi::run_annihilation(&cfg)
        .map(|d| table(&d))
        .map_err(value_error)
}

/// Joint outcome table of the phase-coupled pair.
#[pyfunction]
#[pyo3(signature = (bs, phi, u1=false, u2=false))]
fn run_phase(bs: &PyBeamSplitter, phi: f64, u1: bool, u2: bool) -> PyResult<BTreeMap<String, f64>> {
    let cfg = mzi::ExperimentConfig::phase(bs.0, phi, u1, u2);
    mzi::run_phase(&cfg).map(|d| table(&d)).map_err(value_error)
}

#[pyfunction]
fn dark_port_coefficient(bs: &PyBeamSplitter, phi: f64) -> Complex64 {
    mzi::dark_port_coefficient(&bs.0, phi)
}

#[pyfunction]
fn gravity_phase(mass: f64, length: f64, distance: f64) -> PyResult<f64> {
    let g = mzi::GravityParams::new(mass, length, distance).map_err(value_error)?;
    Ok(mzi::gravity_phase(&g))
}

/// Bell terms, violation and local-model verdict at `(r, phi)`.
#[pyfunction]
fn bell_report(bs: &PyBeamSplitter, phi: f64) -> PyResult<BTreeMap<&'static str, f64>> {
    let behavior = mzi::behavior_from_phase_setup(&bs.0, phi).map_err(value_error)?;
    let rep = mzi::bell_violation(&behavior).map_err(value_error)?;
    Ok(BTreeMap::from([
        ("p_u1u2", rep.p_u1u2),
        ("p_u1_notc2", rep.p_u1_notc2),
        ("p_notc1_u2", rep.p_notc1_u2),
        ("p_c1c2", rep.p_c1c2),
        ("violation", rep.violation),
    ]))
}

/// Whether a mixture of local deterministic strategies reproduces the
/// behavior at `(r, phi)`.
#[pyfunction]
fn lhv_feasible(bs: &PyBeamSplitter, phi: f64) -> PyResult<bool> {
    let behavior = mzi::behavior_from_phase_setup(&bs.0, phi).map_err(value_error)?;
    mzi::lhv_membership(&behavior)
        .map(|v| v.is_feasible())
        .map_err(value_error)
}

#[pyfunction]
fn hardy_constants() -> BTreeMap<&'static str, f64> {
    let c = mzi::hardy_constants();
    BTreeMap::from([
        ("qubit_max", c.qubit_max),
        ("golden_inverse_fifth", c.golden_inverse_fifth),
        ("tuned_phase_probability", c.tuned_phase_probability),
    ])
}

type SweepRow = (f64, f64, f64, f64, f64);

/// Rows of `(r, phi, p_u1u2, p_c1c2, violation)` in row-major order.
#[pyfunction]
#[pyo3(signature = (r_min=0.05, r_max=0.95, r_steps=200, phi_min=0.0, phi_max=std::f64::consts::TAU, phi_steps=200))]
fn sweep(
    r_min: f64,
    r_max: f64,
    r_steps: usize,
    phi_min: f64,
    phi_max: f64,
    phi_steps: usize,
) -> PyResult<Vec<SweepRow>> {
    let grid = mzi::SweepGrid::new(r_min, r_max, r_steps, phi_min, phi_max, phi_steps)
        .map_err(value_error)?;
    let cells = mzi::sweep(&grid).map_err(value_error)?;
    Ok(cells
        .iter()
        .map(|c| (c.r, c.phi, c.p_u1u2, c.p_c1c2, c.violation))
        .collect())
}

/// Optimum of the violation on the default grid as
/// `(r_star, phi_star, violation_star, boundary, converged)`.
#[pyfunction]
#[pyo3(signature = (refine_tol=1e-8))]
fn find_max_violation(refine_tol: f64) -> PyResult<(f64, f64, f64, bool, bool)> {
    let o = mzi::find_max_violation(&mzi::SweepGrid::default(), refine_tol).map_err(value_error)?;
    Ok((
        o.r_star,
        o.phi_star,
        o.violation_star,
        o.boundary,
        o.converged,
    ))
}

/// Reflection coefficient that darkens the `C1 C2` port at `phi`, if any.
#[pyfunction]
fn find_dark_port_tuning(phi: f64) -> Option<f64> {
    mzi::find_dark_port_tuning(phi)
}

/// Selected joint and marginal probabilities of a phase-coupled run.
#[pyfunction]
#[pyo3(signature = (bs, phi, u1=false, u2=false))]
fn phase_joint(
    bs: &PyBeamSplitter,
    phi: f64,
    u1: bool,
    u2: bool,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let cfg = mzi::ExperimentConfig::phase(bs.0, phi, u1, u2);
    let dist = mzi::run_phase(&cfg).map_err(value_error)?;
    Ok(BTreeMap::from([
        (
            "u1_u2",
            joint_probability(&dist, mzi::Port::AbsorbedU, mzi::Port::AbsorbedU),
        ),
        (
            "c1_c2",
            joint_probability(&dist, mzi::Port::C, mzi::Port::C),
        ),
        ("d1", dist.marginal(mzi::Particle::First, mzi::Port::D)),
        ("d2", dist.marginal(mzi::Particle::Second, mzi::Port::D)),
    ]))
}

#[pymodule]
#[pyo3(name = "mzi_paradox")]
fn mzi_paradox_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBeamSplitter>()?;
    m.add_function(wrap_pyfunction!(run_ev, m)?)?;
    m.add_function(wrap_pyfunction!(ev_retest_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(run_annihilation, m)?)?;
    m.add_function(wrap_pyfunction!(run_phase, m)?)?;
    m.add_function(wrap_pyfunction!(phase_joint, m)?)?;
    m.add_function(wrap_pyfunction!(dark_port_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(gravity_phase, m)?)?;
    m.add_function(wrap_pyfunction!(bell_report, m)?)?;
    m.add_function(wrap_pyfunction!(lhv_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_constants, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(find_max_violation, m)?)?;
    m.add_function(wrap_pyfunction!(find_dark_port_tuning, m)?)?;
    Ok(())
}
