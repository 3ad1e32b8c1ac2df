//! Python bindings. Reports come back as plain dicts.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kmono::boolfn::{self, BooleanFunction, MonotoneSpec};
use kmono::distinguisher::{self, DistinguisherParams};
use kmono::estimator::{self, Accuracy, Estimation, ExampleStream};
use kmono::learner::{self, Hypothesis, LearnerParams};
use kmono::slice_basis::{self, TopSet};
use kmono::slice_fourier;
use kmono::{io, oracle, verify};

fn err(e: kmono::Error) -> PyErr {
    match e {
        kmono::Error::InvalidArgument(_) | kmono::Error::DimensionTooLarge { .. } | kmono::Error::ConstantFunction => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn parse_spec(spec: Option<&str>) -> PyResult<MonotoneSpec> {
    match spec {
        Some(s) => serde_json::from_str(s).map_err(|e| PyValueError::new_err(format!("bad spec: {e}"))),
        None => Ok(MonotoneSpec::default()),
    }
}

fn parse_estimation(s: &str) -> PyResult<Estimation> {
    match s {
        "exact" => Ok(Estimation::Exact),
        "sampled" => Ok(Estimation::Sampled),
        _ => Err(PyValueError::new_err(format!("estimation must be 'exact' or 'sampled', got {s:?}"))),
    }
}

fn accuracy(epsilon: Option<f64>) -> Accuracy {
    epsilon.map_or(Accuracy::DeskScale, |epsilon| Accuracy::Absolute { epsilon })
}

/// A truth table `{0,1}^n -> {+1,-1}` with `0 -> +1`, `1 -> -1`.
#[pyclass(name = "BooleanFunction", module = "kmono", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyBooleanFunction {
    inner: BooleanFunction,
}

#[pymethods]
impl PyBooleanFunction {
    #[staticmethod]
    fn constant(n: u32, sign: i8) -> PyResult<Self> {
        Ok(Self {
            inner: BooleanFunction::constant(n, sign).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_signs(n: u32, signs: Vec<i8>) -> PyResult<Self> {
        Ok(Self {
            inner: BooleanFunction::from_signs(n, &signs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn majority(n: u32) -> PyResult<Self> {
        Ok(Self {
            inner: BooleanFunction::majority(n).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parity(n: u32) -> PyResult<Self> {
        Ok(Self {
            inner: BooleanFunction::parity(n).map_err(err)?,
        })
    }

    /// Coordinate `i` is 1-based.
    #[staticmethod]
    fn dictator(n: u32, i: u32) -> PyResult<Self> {
        Ok(Self {
            inner: BooleanFunction::dictator(n, i).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(n: u32, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: boolfn::random_function(n, seed).map_err(err)?,
        })
    }

    /// Parity of `k` monotone draws; `spec` is the JSON form of a
    /// monotone family.
    #[staticmethod]
    #[pyo3(signature = (n, k, seed, spec=None))]
    fn random_k_monotone(n: u32, k: usize, seed: u64, spec: Option<&str>) -> PyResult<Self> {
        let spec = parse_spec(spec)?;
        Ok(Self {
            inner: boolfn::random_k_monotone(n, k, &spec, seed).map_err(err)?.into_combined(),
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: io::parse_function_file(data).map_err(err)?.function().clone(),
        })
    }

    fn to_bytes(&self) -> Vec<u8> {
        io::table_to_bytes(&self.inner)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __call__(&self, x: u64) -> PyResult<i8> {
        if x >= self.inner.len() as u64 {
            return Err(PyValueError::new_err(format!("point {x} outside the cube")));
        }
        Ok(self.inner.value(x))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("BooleanFunction(n={}, negatives={})", self.inner.n(), self.inner.count_negative())
    }

    fn signs(&self) -> Vec<i8> {
        self.inner.signs().collect()
    }

    fn is_monotone(&self) -> bool {
        self.inner.is_monotone()
    }

    fn alternating_number(&self) -> u32 {
        boolfn::alternating_number(&self.inner)
    }

    fn monotone_part_count(&self) -> u32 {
        boolfn::monotone_part_count(&self.inner)
    }

    fn markov_negations<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &boolfn::markov_negations(&self.inner).map_err(err)?)
    }

    /// Monotone parts whose product is this function, plus the flag for
    /// a global negation.
    fn decompose(&self) -> PyResult<(Vec<PyBooleanFunction>, bool)> {
        let k = boolfn::decompose_k_alternating(&self.inner).map_err(err)?;
        let parts = k.parts().iter().map(|p| PyBooleanFunction { inner: p.clone() }).collect();
        Ok((parts, k.negated()))
    }

    /// Standard cube Fourier coefficients indexed by subset mask.
    fn cube_expand(&self) -> PyResult<Vec<f64>> {
        Ok(oracle::cube_expand(&self.inner).map_err(err)?.coeffs)
    }
}

/// Top sets of degree `d` on `[n]`, lexicographic.
#[pyfunction]
fn top_sets(n: u32, d: u32) -> PyResult<Vec<Vec<u32>>> {
    Ok(slice_basis::enumerate_top_sets(n, d)
        .map_err(err)?
        .into_iter()
        .map(Vec::from)
        .collect())
}

#[pyfunction]
fn chi_b(b: Vec<u32>, x: u64) -> PyResult<i128> {
    Ok(slice_basis::chi_b(&TopSet::new(b).map_err(err)?, x))
}

#[pyfunction]
fn chi_norm_sq(b: Vec<u32>, n: u32, r: u32) -> PyResult<f64> {
    let slice = slice_basis::SliceIndex::new(n, r).map_err(err)?;
    slice_basis::chi_norm_sq_f64(&TopSet::new(b).map_err(err)?, slice).map_err(err)
}

/// Young-Fourier expansion of `f|_r` as a dict with `terms`.
#[pyfunction]
#[pyo3(signature = (f, r, degree=None))]
fn expand<'py>(py: Python<'py>, f: &PyBooleanFunction, r: u32, degree: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let g = slice_fourier::restrict(&f.inner, r).map_err(err)?;
    let e = slice_fourier::expand_to_degree(&g, degree.unwrap_or(f.inner.n())).map_err(err)?;
    to_dict(py, &e)
}

#[pyfunction]
fn level_weights(f: &PyBooleanFunction, r: u32) -> PyResult<Vec<f64>> {
    let g = slice_fourier::restrict(&f.inner, r).map_err(err)?;
    Ok(slice_fourier::level_weights(&slice_fourier::expand(&g).map_err(err)?))
}

/// `(combinatorial, spectral)` total influence of `f|_r`.
#[pyfunction]
fn total_influence(f: &PyBooleanFunction, r: u32) -> PyResult<(f64, f64)> {
    let g = slice_fourier::restrict(&f.inner, r).map_err(err)?;
    let e = slice_fourier::expand(&g).map_err(err)?;
    Ok((slice_fourier::total_influence(&g), slice_fourier::spectral_influence(&e)))
}

#[pyfunction]
fn sample_size(epsilon: f64, delta: f64, low: f64, high: f64) -> PyResult<u64> {
    estimator::sample_size(epsilon, delta, low, high).map_err(err)
}

#[pyfunction]
fn slice_probability(n: u32, r: u32) -> f64 {
    estimator::slice_probability(n, r)
}

#[pyfunction]
fn k_monotone_params(n: u32, k: u32) -> PyResult<(u32, u32)> {
    let p = distinguisher::k_monotone_params(n, k).map_err(err)?;
    Ok((p.t, p.d))
}

#[pyfunction]
fn learner_params(n: u32, k: u32) -> PyResult<(u32, u32)> {
    learner::learner_params(n, k).map_err(err)
}

/// One distinguisher run on the example stream of `f`.
#[pyfunction]
#[pyo3(signature = (f, t, d, estimation="exact", epsilon=None, seed=0))]
fn distinguish<'py>(
    py: Python<'py>,
    f: &PyBooleanFunction,
    t: u32,
    d: u32,
    estimation: &str,
    epsilon: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = DistinguisherParams {
        estimation: parse_estimation(estimation)?,
        accuracy: accuracy(epsilon),
        seed,
        ..DistinguisherParams::new(t, d)
    };
    let mut stream = ExampleStream::from_table(Arc::new(f.inner.clone()), seed);
    to_dict(py, &distinguisher::run(&mut stream, &p).map_err(err)?)
}

#[pyclass(name = "Hypothesis", module = "kmono", frozen)]
pub struct PyHypothesis {
    inner: Hypothesis,
}

#[pymethods]
impl PyHypothesis {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Hypothesis::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn __call__(&self, x: u64) -> i8 {
        self.inner.eval(x)
    }

    #[getter]
    fn r_star(&self) -> Option<u32> {
        self.inner.r_star
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn fallback(&self) -> bool {
        self.inner.fallback
    }

    /// Exact disagreement with `f` over the whole cube.
    fn error(&self, f: &PyBooleanFunction) -> PyResult<f64> {
        learner::evaluate_hypothesis(&self.inner, &f.inner).map_err(err)
    }

    fn decomposition<'py>(&self, py: Python<'py>, f: &PyBooleanFunction) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &learner::error_decomposition(&self.inner, &f.inner).map_err(err)?)
    }
}

/// Runs the learner on `f`; returns `(hypothesis, report dict)`.
#[pyfunction]
#[pyo3(signature = (f, t, d, estimation="exact", epsilon=None, seed=0))]
fn learn<'py>(
    py: Python<'py>,
    f: &PyBooleanFunction,
    t: u32,
    d: u32,
    estimation: &str,
    epsilon: Option<f64>,
    seed: u64,
) -> PyResult<(PyHypothesis, Bound<'py, PyAny>)> {
    let p = LearnerParams {
        estimation: parse_estimation(estimation)?,
        accuracy: accuracy(epsilon),
        seed,
        ..LearnerParams::new(t, d)
    };
    let mut stream = ExampleStream::from_table(Arc::new(f.inner.clone()), seed);
    let rep = learner::learn(&mut stream, &p).map_err(err)?;
    let dict = to_dict(py, &rep)?;
    Ok((PyHypothesis { inner: rep.hypothesis }, dict))
}

#[pyfunction]
#[pyo3(signature = (max_n=6, samples=20, seed=0))]
fn run_verify<'py>(py: Python<'py>, max_n: u32, samples: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let opts = verify::VerifyOptions {
        max_n,
        samples,
        seed,
        norm_perturbation: None,
    };
    to_dict(py, &verify::run(&opts).map_err(err)?)
}

#[pymodule]
#[pyo3(name = "kmono")]
fn kmono_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBooleanFunction>()?;
    m.add_class::<PyHypothesis>()?;
    m.add_function(wrap_pyfunction!(top_sets, m)?)?;
    m.add_function(wrap_pyfunction!(chi_b, m)?)?;
    m.add_function(wrap_pyfunction!(chi_norm_sq, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(level_weights, m)?)?;
    m.add_function(wrap_pyfunction!(total_influence, m)?)?;
    m.add_function(wrap_pyfunction!(sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(slice_probability, m)?)?;
    m.add_function(wrap_pyfunction!(k_monotone_params, m)?)?;
    m.add_function(wrap_pyfunction!(learner_params, m)?)?;
    m.add_function(wrap_pyfunction!(distinguish, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add("FORMAT_VERSION", kmono::FORMAT_VERSION)?;
    Ok(())
}
