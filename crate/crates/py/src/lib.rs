//! Python module `obsentropy`.
//!
//! Matrices cross the boundary as nested lists of Python `complex` (or
//! anything convertible to it); results come back as plain lists, floats
//! and dicts.

use num_complex::Complex64;
use obsent_core::classical::{classical_sim as run_classical, AreaPreservingMap, ClassicalSimConfig, PartitionSpec};
use obsent_core::coarse::{self, CoarseGraining as CoreCg, LocalCoarseGraining as CoreLocal, MultiCoarseGraining};
use obsent_core::entropy::{self, BoundTarget, EntropyReport as CoreReport};
use obsent_core::linalg::{CMat, CVec};
use obsent_core::povm::{self, PovmCoarseGraining, PovmQcOptions};
use obsent_core::quarrelation::{self, QcOptions};
use obsent_core::series::TimeSeries;
use obsent_core::thermo::{self, SecondLawConfig};
use obsent_core::{DensityMatrix as CoreRho, Tolerances};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(obsentropy, ObsentError, PyValueError, "Invalid input to an observational entropy routine.");

fn err(e: obsent_core::Error) -> PyErr {
    ObsentError::new_err(e.to_string())
}

fn to_matrix(rows: &[Vec<Complex64>]) -> PyResult<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(ObsentError::new_err("matrix rows have different lengths"));
    }
    Ok(CMat::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_matrix(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn series_dict<'py>(py: Python<'py>, ts: &TimeSeries) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item(ts.index_name.as_str(), ts.index.clone())?;
    for (name, col) in &ts.columns {
        d.set_item(name.as_str(), col.clone())?;
    }
    Ok(d)
}

#[pyclass(name = "DensityMatrix", module = "obsentropy", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDensityMatrix {
    inner: CoreRho,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validates a Hermitian, positive, unit-trace matrix.
    #[new]
    #[pyo3(signature = (rows, subsystem_dims=None))]
    fn new(rows: Vec<Vec<Complex64>>, subsystem_dims: Option<Vec<usize>>) -> PyResult<Self> {
        let rho = CoreRho::new(to_matrix(&rows)?).map_err(err)?;
        Self::with_dims(rho, subsystem_dims)
    }

    #[staticmethod]
    #[pyo3(signature = (amplitudes, subsystem_dims=None))]
    fn pure(amplitudes: Vec<Complex64>, subsystem_dims: Option<Vec<usize>>) -> PyResult<Self> {
        let rho = CoreRho::pure(&CVec::from_vec(amplitudes)).map_err(err)?;
        Self::with_dims(rho, subsystem_dims)
    }

    #[staticmethod]
    #[pyo3(signature = (probabilities, subsystem_dims=None))]
    fn diagonal(probabilities: Vec<f64>, subsystem_dims: Option<Vec<usize>>) -> PyResult<Self> {
        Self::with_dims(CoreRho::diagonal(&probabilities).map_err(err)?, subsystem_dims)
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self { inner: CoreRho::maximally_mixed(dim) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn subsystem_dims(&self) -> Option<Vec<usize>> {
        self.inner.subsystem_dims().map(<[usize]>::to_vec)
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        from_matrix(self.inner.matrix())
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    /// Partial trace onto the listed subsystems.
    fn reduce(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: obsent_core::reduce(&self.inner, &keep).map_err(err)? })
    }

    fn vn_entropy(&self) -> f64 {
        entropy::vn_entropy(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={}, subsystem_dims={:?})", self.inner.dim(), self.inner.subsystem_dims())
    }
}

impl PyDensityMatrix {
    fn with_dims(rho: CoreRho, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let inner = match dims {
            Some(d) => rho.with_subsystems(d).map_err(err)?,
            None => rho,
        };
        Ok(Self { inner })
    }
}

#[pyclass(name = "CoarseGraining", module = "obsentropy", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyCoarseGraining {
    inner: CoreCg,
}

#[pymethods]
impl PyCoarseGraining {
    /// Blocks of computational-basis indices.
    #[staticmethod]
    fn from_blocks(dim: usize, blocks: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self { inner: CoreCg::from_blocks(dim, &blocks).map_err(err)? })
    }

    #[staticmethod]
    fn computational(dim: usize) -> Self {
        Self { inner: CoreCg::computational(dim) }
    }

    #[staticmethod]
    fn trivial(dim: usize) -> Self {
        Self { inner: CoreCg::trivial(dim) }
    }

    /// One rank-1 projector per column of a unitary.
    #[staticmethod]
    fn from_unitary(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self { inner: CoreCg::from_unitary(&to_matrix(&rows)?) })
    }

    #[staticmethod]
    fn from_projectors(matrices: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let ms = matrices.iter().map(|m| to_matrix(m)).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: CoreCg::from_matrices(ms, &Tolerances::default()).map_err(err)? })
    }

    /// Projectors onto the eigenspaces of a Hermitian matrix.
    #[staticmethod]
    #[pyo3(signature = (rows, degeneracy_tol=1e-10))]
    fn spectral(rows: Vec<Vec<Complex64>>, degeneracy_tol: f64) -> PyResult<Self> {
        let q = obsent_core::Observable::new(to_matrix(&rows)?).map_err(err)?;
        Ok(Self { inner: coarse::spectral_coarse_graining(&q, degeneracy_tol) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn volumes(&self) -> Vec<f64> {
        self.inner.volumes()
    }

    fn projectors(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.projectors().iter().map(|p| from_matrix(p.matrix())).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("CoarseGraining(dim={}, volumes={:?})", self.inner.dim(), self.inner.volumes())
    }
}

#[pyclass(name = "LocalCoarseGraining", module = "obsentropy", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyLocalCoarseGraining {
    inner: CoreLocal,
}

#[pymethods]
impl PyLocalCoarseGraining {
    #[new]
    fn new(factors: Vec<PyCoarseGraining>, subsystem_dims: Vec<usize>) -> PyResult<Self> {
        let fs = factors.into_iter().map(|f| f.inner).collect();
        Ok(Self { inner: coarse::tensor_local(fs, &subsystem_dims).map_err(err)? })
    }

    fn expand(&self) -> PyCoarseGraining {
        PyCoarseGraining { inner: self.inner.expand() }
    }

    fn volumes(&self) -> Vec<f64> {
        self.inner.volumes()
    }

    fn shape(&self) -> Vec<usize> {
        self.inner.shape()
    }
}

#[pyclass(name = "EntropyReport", module = "obsentropy", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyEntropyReport {
    total: f64,
    shannon_term: f64,
    boltzmann_term: f64,
    probabilities: Vec<f64>,
    volumes: Vec<f64>,
    unit: String,
}

impl From<CoreReport> for PyEntropyReport {
    fn from(r: CoreReport) -> Self {
        Self {
            total: r.total,
            shannon_term: r.shannon_term,
            boltzmann_term: r.boltzmann_term,
            probabilities: r.probabilities,
            volumes: r.volumes,
            unit: r.unit,
        }
    }
}

#[pymethods]
impl PyEntropyReport {
    fn in_bits(&self) -> Self {
        let f = std::f64::consts::LN_2;
        Self {
            total: self.total / f,
            shannon_term: self.shannon_term / f,
            boltzmann_term: self.boltzmann_term / f,
            probabilities: self.probabilities.clone(),
            volumes: self.volumes.clone(),
            unit: "bits".into(),
        }
    }

    fn __float__(&self) -> f64 {
        self.total
    }

    fn __repr__(&self) -> String {
        format!("EntropyReport(total={}, unit={:?})", self.total, self.unit)
    }
}

#[pyfunction]
fn observational_entropy(rho: &PyDensityMatrix, cg: &PyCoarseGraining) -> PyResult<PyEntropyReport> {
    Ok(entropy::observational_entropy(&rho.inner, &cg.inner).map_err(err)?.into())
}

#[pyfunction]
fn local_entropy(rho: &PyDensityMatrix, local: &PyLocalCoarseGraining) -> PyResult<PyEntropyReport> {
    Ok(entropy::local_entropy(&rho.inner, &local.inner).map_err(err)?.into())
}

/// Entropy of a sequence of coarse-grainings measured in order.
#[pyfunction]
fn multi_cg_entropy(rho: &PyDensityMatrix, sequence: Vec<PyCoarseGraining>) -> PyResult<PyEntropyReport> {
    let seq = MultiCoarseGraining::new(sequence.into_iter().map(|c| c.inner).collect()).map_err(err)?;
    Ok(entropy::multi_cg_entropy(&rho.inner, &seq).map_err(err)?.into())
}

#[pyfunction]
fn vn_entropy(rho: &PyDensityMatrix) -> f64 {
    entropy::vn_entropy(&rho.inner)
}

#[pyfunction]
fn probabilities(rho: &PyDensityMatrix, cg: &PyCoarseGraining) -> PyResult<Vec<f64>> {
    coarse::probabilities(&rho.inner, &cg.inner).map_err(err)
}

#[pyfunction]
fn is_coarser(coarse: &PyCoarseGraining, fine: &PyCoarseGraining) -> PyResult<bool> {
    coarse::is_coarser(&coarse.inner, &fine.inner, &Tolerances::default()).map_err(err)
}

#[pyfunction]
fn joint(a: &PyCoarseGraining, b: &PyCoarseGraining) -> PyResult<PyCoarseGraining> {
    Ok(PyCoarseGraining { inner: coarse::joint(&a.inner, &b.inner, &Tolerances::default()).map_err(err)? })
}

/// Marginal entropies, mutual information and their total.
#[pyfunction]
fn local_decomposition<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    local: &PyLocalCoarseGraining,
) -> PyResult<Bound<'py, PyDict>> {
    let d = entropy::local_decomposition(&rho.inner, &local.inner).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("marginal_entropies", d.marginal_entropies)?;
    out.set_item("mutual_information", d.mutual_information)?;
    out.set_item("total", d.total)?;
    Ok(out)
}

/// Slack in `S_VN <= S_C <= ln dim`.
#[pyfunction]
fn bound_margin<'py>(py: Python<'py>, rho: &PyDensityMatrix, cg: &PyCoarseGraining) -> PyResult<Bound<'py, PyDict>> {
    let m = entropy::bound_margin(&rho.inner, BoundTarget::Single(&cg.inner), &Tolerances::default()).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("lower_slack", m.lower_slack)?;
    out.set_item("upper_slack", m.upper_slack)?;
    out.set_item("lower_equality", m.lower_equality)?;
    out.set_item("finer_than_state", m.finer_than_state)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (rho, dims, restarts=16, seed=0, max_sweeps=200))]
fn qc_entropy<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    dims: Vec<usize>,
    restarts: usize,
    seed: u64,
    max_sweeps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = QcOptions { restarts, seed, max_sweeps, ..QcOptions::default() };
    let r = py.detach(|| quarrelation::qc_entropy(&rho.inner, &dims, &opts)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("value", r.value)?;
    out.set_item("best_entropy", r.best_entropy)?;
    out.set_item("vn_entropy", r.vn_entropy)?;
    out.set_item("restarts_used", r.restarts_used)?;
    out.set_item("converged", r.converged)?;
    out.set_item("best_bases", r.best_bases.iter().map(from_matrix).collect::<Vec<_>>())?;
    Ok(out)
}

#[pyfunction]
fn entanglement_entropy(amplitudes: Vec<Complex64>, dim_a: usize, dim_b: usize) -> PyResult<f64> {
    quarrelation::entanglement_entropy_pure_bipartite(&CVec::from_vec(amplitudes), (dim_a, dim_b)).map_err(err)
}

/// Entropy of a trace-preserving set of Kraus operators.
#[pyfunction]
fn povm_entropy(rho: &PyDensityMatrix, kraus: Vec<Vec<Vec<Complex64>>>) -> PyResult<PyEntropyReport> {
    let ks = kraus.iter().map(|k| to_matrix(k)).collect::<PyResult<Vec<_>>>()?;
    let k = PovmCoarseGraining::new(ks).map_err(err)?;
    Ok(povm::povm_entropy(&rho.inner, &k).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (rho, dims, outcomes=None, restarts=4, seed=0))]
fn qc_entropy_povm<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    dims: Vec<usize>,
    outcomes: Option<Vec<usize>>,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = PovmQcOptions {
        projective: QcOptions { seed, ..QcOptions::default() },
        outcomes,
        restarts,
        seed,
        ..PovmQcOptions::default()
    };
    let r = py.detach(|| povm::qc_entropy_povm(&rho.inner, &dims, &opts)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("value", r.value)?;
    out.set_item("projective_value", r.projective.value)?;
    out.set_item("vn_entropy", r.vn_entropy)?;
    out.set_item("converged", r.converged)?;
    Ok(out)
}

/// Coarse-grained and Gibbs entropy of a mixing run on the unit torus.
#[pyfunction]
#[pyo3(signature = (map="baker", steps=50, cells=64, partition="quadrants", k=1.0))]
fn classical_sim<'py>(
    py: Python<'py>,
    map: &str,
    steps: usize,
    cells: usize,
    partition: &str,
    k: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let map = match map {
        "baker" => AreaPreservingMap::Baker,
        "cat" => AreaPreservingMap::Cat,
        "standard" => AreaPreservingMap::Standard { k },
        other => return Err(ObsentError::new_err(format!("unknown map `{other}`"))),
    };
    let partition: PartitionSpec = partition.parse().map_err(|e: obsent_core::Error| err(e))?;
    let cfg = ClassicalSimConfig { cells, partition, ..ClassicalSimConfig::new(map, steps) };
    let ts = py.detach(|| run_classical(&cfg)).map_err(err)?;
    series_dict(py, &ts)
}

/// Runs a closed-system experiment from a JSON config; `None` runs the
/// reference chain.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn second_law_run<'py>(py: Python<'py>, config_json: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let cfg: SecondLawConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(|e| ObsentError::new_err(e.to_string()))?,
        None => SecondLawConfig::reference(),
    };
    let ts = py.detach(|| thermo::second_law_run(&cfg)).map_err(err)?;
    series_dict(py, &ts)
}

#[pyfunction]
fn reference_second_law_config() -> String {
    serde_json::to_string_pretty(&SecondLawConfig::reference()).expect("config serializes")
}

#[pymodule]
fn obsentropy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ObsentError", m.py().get_type::<ObsentError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyCoarseGraining>()?;
    m.add_class::<PyLocalCoarseGraining>()?;
    m.add_class::<PyEntropyReport>()?;
    m.add_function(wrap_pyfunction!(observational_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(local_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(multi_cg_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(vn_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(is_coarser, m)?)?;
    m.add_function(wrap_pyfunction!(joint, m)?)?;
    m.add_function(wrap_pyfunction!(local_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(bound_margin, m)?)?;
    m.add_function(wrap_pyfunction!(qc_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(povm_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(qc_entropy_povm, m)?)?;
    m.add_function(wrap_pyfunction!(classical_sim, m)?)?;
    m.add_function(wrap_pyfunction!(second_law_run, m)?)?;
    m.add_function(wrap_pyfunction!(reference_second_law_config, m)?)?;
    Ok(())
}
