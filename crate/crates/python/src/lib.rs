//! Python bindings for the `josephson_cavity` crate.

use josephson_cavity as jc;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: jc::Error) -> PyErr {
    match err {
        jc::Error::PoleApproach { .. }
        | jc::Error::StepLimitExceeded { .. }
        | jc::Error::EulerViolation { .. } => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Dimensionless junction parameters (r, Ã, B, C) with a constant pump.
#[pyclass(name = "ReducedParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReducedParams {
    inner: jc::ReducedParams,
}

#[pymethods]
impl PyReducedParams {
    #[new]
    #[pyo3(signature = (r, tilt, b, c))]
    fn new(r: f64, tilt: f64, b: f64, c: f64) -> PyResult<Self> {
        let inner = jc::ReducedParams::new(r, tilt, b, c).map_err(to_py)?;
        Ok(PyReducedParams { inner })
    }

    /// The bare junction: no cavity tilt.
    #[staticmethod]
    fn uncoupled(r: f64) -> PyResult<Self> {
        let inner = jc::ReducedParams::uncoupled(r).map_err(to_py)?;
        Ok(PyReducedParams { inner })
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn tilt(&self) -> f64 {
        self.inner.tilt()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    fn with_tilt(&self, tilt: f64) -> PyResult<Self> {
        let inner = self.inner.with_tilt(tilt).map_err(to_py)?;
        Ok(PyReducedParams { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "ReducedParams(r={}, tilt={}, b={}, c={})",
            self.inner.r(),
            self.inner.tilt(),
            self.inner.b(),
            self.inner.c()
        )
    }
}

/// Laboratory parameters in rad/s.
#[pyclass(name = "PhysicalParams", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyPhysicalParams {
    tunneling: f64,
    interaction: f64,
    atom_number: u64,
    light_shift: f64,
    overlap_left: f64,
    overlap_right: f64,
    cavity_frequency: f64,
    pump_frequency: f64,
    loss_rate: f64,
    pump_amplitude: f64,
}

impl PyPhysicalParams {
    fn to_rust(&self) -> jc::PhysicalParams {
        jc::PhysicalParams {
            tunneling: self.tunneling,
            interaction: self.interaction,
            atom_number: self.atom_number,
            light_shift: Some(self.light_shift),
            bare_coupling: None,
            atomic_frequency: None,
            overlap_left: self.overlap_left,
            overlap_right: self.overlap_right,
            cavity_frequency: self.cavity_frequency,
            pump_frequency: self.pump_frequency,
            loss_rate: self.loss_rate,
            pump_amplitude: self.pump_amplitude,
        }
    }
}

#[pymethods]
impl PyPhysicalParams {
    #[new]
    #[pyo3(signature = (*, tunneling, interaction, atom_number, light_shift, overlap_left, overlap_right, cavity_frequency, pump_frequency, loss_rate, pump_amplitude))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        tunneling: f64,
        interaction: f64,
        atom_number: u64,
        light_shift: f64,
        overlap_left: f64,
        overlap_right: f64,
        cavity_frequency: f64,
        pump_frequency: f64,
        loss_rate: f64,
        pump_amplitude: f64,
    ) -> Self {
        PyPhysicalParams {
            tunneling,
            interaction,
            atom_number,
            light_shift,
            overlap_left,
            overlap_right,
            cavity_frequency,
            pump_frequency,
            loss_rate,
            pump_amplitude,
        }
    }

    /// Maps to reduced parameters. With a constant pump the tilt is s·A².
    fn reduce(&self) -> PyResult<PyReducedParams> {
        let reduced = jc::reduce_params(&self.to_rust()).map_err(to_py)?;
        let inner = jc::ReducedParams::new(reduced.r(), reduced.tilt(), reduced.b(), reduced.c())
            .map_err(to_py)?;
        Ok(PyReducedParams { inner })
    }

    /// |α|² for the atom split (N₁, N₂).
    fn photon_number(&self, n_left: f64, n_right: f64) -> PyResult<f64> {
        let alpha = jc::steady_state_field(&self.to_rust(), n_left, n_right, 0.0).map_err(to_py)?;
        Ok(alpha.norm_sqr())
    }
}

#[pyclass(name = "StationaryPoint", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyStationaryPoint {
    z: f64,
    phi: f64,
    branch: &'static str,
    kind: &'static str,
    energy: f64,
    f_derivative: f64,
}

impl From<&jc::StationaryPoint> for PyStationaryPoint {
    fn from(p: &jc::StationaryPoint) -> Self {
        PyStationaryPoint {
            z: p.z,
            phi: p.branch.phase(),
            branch: p.branch.name(),
            kind: p.kind.name(),
            energy: p.energy,
            f_derivative: p.f_derivative,
        }
    }
}

#[pymethods]
impl PyStationaryPoint {
    fn __repr__(&self) -> String {
        format!(
            "StationaryPoint(z={}, branch='{}', kind='{}', energy={})",
            self.z, self.branch, self.kind, self.energy
        )
    }
}

#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    inner: jc::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn z(&self) -> Vec<f64> {
        self.inner.z().to_vec()
    }

    /// Unwrapped phase.
    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.inner.phi().to_vec()
    }

    #[getter]
    fn energy(&self) -> Vec<f64> {
        self.inner.energies().to_vec()
    }

    #[getter]
    fn photon(&self) -> Vec<f64> {
        self.inner.photons().to_vec()
    }

    fn energy_drift(&self) -> f64 {
        self.inner.energy_drift()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn hamiltonian(z: f64, phi: f64, params: &PyReducedParams) -> PyResult<f64> {
    let state = jc::PhaseState::new(z, phi).map_err(to_py)?;
    Ok(jc::hamiltonian(&state, &params.inner, 0.0))
}

/// `(dz/dt, dφ/dt)`.
#[pyfunction]
fn flow(z: f64, phi: f64, params: &PyReducedParams) -> PyResult<(f64, f64)> {
    jc::flow_at(z, phi, &params.inner, 0.0).map_err(to_py)
}

/// Photon number in units of 2Ω/(δU₀).
#[pyfunction]
fn photon_number(z: f64, params: &PyReducedParams) -> f64 {
    jc::photon_number_reduced(z, &params.inner, 0.0)
}

#[pyfunction]
#[pyo3(signature = (params, grid_n = jc::fixedpoints::DEFAULT_GRID_N))]
fn stationary_points(params: &PyReducedParams, grid_n: usize) -> PyResult<Vec<PyStationaryPoint>> {
    let points = jc::find_stationary_points(&params.inner, grid_n).map_err(to_py)?;
    Ok(points.iter().map(PyStationaryPoint::from).collect())
}

#[pyfunction]
fn uncoupled_stationary_points(r: f64) -> PyResult<Vec<PyStationaryPoint>> {
    let points = jc::uncoupled_analytic(r).map_err(to_py)?.points;
    Ok(points.iter().map(PyStationaryPoint::from).collect())
}

/// `(minima, saddles, maxima)`; raises if the Euler relation fails.
#[pyfunction]
#[pyo3(signature = (params, grid_n = jc::fixedpoints::DEFAULT_GRID_N))]
fn morse_counts(params: &PyReducedParams, grid_n: usize) -> PyResult<(usize, usize, usize)> {
    let analysis = jc::analyze_stationary_points(&params.inner, grid_n).map_err(to_py)?;
    let c = analysis.counts;
    if c.euler_sum() != 2 {
        return Err(to_py(jc::Error::EulerViolation { counts: c }));
    }
    Ok((c.minima, c.saddles, c.maxima))
}

#[pyfunction]
#[pyo3(signature = (z0, phi0, params, t_end, samples = 2000, rtol = 1e-10, atol = 1e-12))]
fn integrate(
    z0: f64,
    phi0: f64,
    params: &PyReducedParams,
    t_end: f64,
    samples: usize,
    rtol: f64,
    atol: f64,
) -> PyResult<PyTrajectory> {
    let state = jc::PhaseState::new(z0, phi0).map_err(to_py)?;
    let config = jc::IntegratorConfig {
        samples,
        rtol,
        atol,
        ..jc::IntegratorConfig::default()
    };
    let inner = jc::integrate(&state, &params.inner, t_end, &config).map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

/// `(period, spread, cycles)` from mean-level crossings of z.
#[pyfunction]
fn estimate_period(traj: &PyTrajectory) -> PyResult<(f64, f64, usize)> {
    let p = jc::estimate_period(&traj.inner).map_err(to_py)?;
    Ok((p.period, p.spread, p.cycles))
}

#[pyfunction]
fn classify_mode(traj: &PyTrajectory, params: &PyReducedParams) -> PyResult<String> {
    let points = jc::find_stationary_points(&params.inner, jc::fixedpoints::DEFAULT_GRID_N)
        .map_err(to_py)?;
    let levels = jc::separatrix_levels(&points);
    let label = jc::classify_mode(&traj.inner, &params.inner, &levels).map_err(to_py)?;
    Ok(format!("{label:?}"))
}

#[pyfunction]
fn separatrix_levels(params: &PyReducedParams) -> PyResult<Vec<f64>> {
    let points = jc::find_stationary_points(&params.inner, jc::fixedpoints::DEFAULT_GRID_N)
        .map_err(to_py)?;
    Ok(jc::separatrix_levels(&points))
}

type GridTriple = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Row-major energy grid: `(z, phi, values)` with `values[i][j] = H(z[i], phi[j])`.
#[pyfunction]
fn energy_grid(params: &PyReducedParams, n_z: usize, n_phi: usize) -> PyResult<GridTriple> {
    let grid = jc::sample_grid(&params.inner, n_z, n_phi, 0.0).map_err(to_py)?;
    let values = (0..grid.n_z())
        .map(|i| (0..grid.n_phi()).map(|j| grid.value(i, j)).collect())
        .collect();
    Ok((grid.z.clone(), grid.phi.clone(), values))
}

/// Number of connected contour components of the level on the sphere.
#[pyfunction]
#[pyo3(signature = (params, level, n = 512))]
fn contour_components(params: &PyReducedParams, level: f64, n: usize) -> PyResult<usize> {
    let grid = jc::sample_grid(&params.inner, n + 1, n, 0.0).map_err(to_py)?;
    Ok(jc::contour_level(&grid, level).map_err(to_py)?.components)
}

/// `(J₁, J₂, δ)` for a Gaussian mode of waist `w`.
#[pyfunction]
fn coupling_from_transverse_offset(
    waist: f64,
    x_left: f64,
    x_right: f64,
) -> PyResult<(f64, f64, f64)> {
    let o = jc::coupling_from_transverse_offset(waist, x_left, x_right).map_err(to_py)?;
    Ok((o.left, o.right, o.difference))
}

#[pymodule]
fn bjj_cavity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReducedParams>()?;
    m.add_class::<PyPhysicalParams>()?;
    m.add_class::<PyStationaryPoint>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(flow, m)?)?;
    m.add_function(wrap_pyfunction!(photon_number, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_points, m)?)?;
    m.add_function(wrap_pyfunction!(uncoupled_stationary_points, m)?)?;
    m.add_function(wrap_pyfunction!(morse_counts, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_period, m)?)?;
    m.add_function(wrap_pyfunction!(classify_mode, m)?)?;
    m.add_function(wrap_pyfunction!(separatrix_levels, m)?)?;
    m.add_function(wrap_pyfunction!(energy_grid, m)?)?;
    m.add_function(wrap_pyfunction!(contour_components, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_from_transverse_offset, m)?)?;
    Ok(())
}
