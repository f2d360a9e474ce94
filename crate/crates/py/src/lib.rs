//! Python bindings.  Structured results cross the boundary as JSON
//! strings so the Python side stays schema-compatible with the CLI.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cluster_consensus::decision::pair_state_bound;
use cluster_consensus::document;
use cluster_consensus::ergodicity::{dobrushin, tau_c};
use cluster_consensus::simulator::{
    detect_cluster_consensus, run, witness_initial_state, SwitchingPolicy,
};
use cluster_consensus::{decide, decide_necessary_only, verify_witness, DecideOptions, Witness};

fn to_py_err(e: cluster_consensus::Error) -> PyErr {
    match e {
        cluster_consensus::Error::Io { .. }
        | cluster_consensus::Error::InternalInconsistency { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A validated instance: named matrices plus the target clustering.
#[pyclass(frozen)]
struct MatrixSet {
    inner: cluster_consensus::MatrixSet,
}

impl MatrixSet {
    fn named(&self, name: &str) -> PyResult<&cluster_consensus::StochasticMatrix> {
        self.inner
            .by_name(name)
            .ok_or_else(|| PyValueError::new_err(format!("no matrix named {name:?}")))
    }
}

#[pymethods]
impl MatrixSet {
    /// Parse and validate an instance document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = document::parse_set(text).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        document::set_to_json(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names()
    }

    #[getter]
    fn clusters(&self) -> Vec<Vec<usize>> {
        let c = self.inner.clustering();
        (0..c.k()).map(|k| c.members(k).to_vec()).collect()
    }

    fn rows(&self, name: &str) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.named(name)?.rows())
    }

    /// Structural assumption report as JSON.
    fn assumptions_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.check_assumptions())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn has_common_influence(&self) -> bool {
        self.inner.has_common_influence()
    }

    /// Cluster ergodicity coefficient of one matrix:
    /// `(value, cluster, i, j)`.
    fn tau(&self, name: &str) -> PyResult<(f64, usize, usize, usize)> {
        let v = tau_c(self.named(name)?, self.inner.clustering());
        Ok((v.value, v.arg_cluster, v.arg_pair.0, v.arg_pair.1))
    }

    /// Classical coefficient of ergodicity: `(value, i, j)`.
    fn dobrushin(&self, name: &str) -> PyResult<(f64, usize, usize)> {
        let v = dobrushin(self.named(name)?);
        Ok((v.value, v.arg_pair.0, v.arg_pair.1))
    }

    /// Run the exact decision; the result JSON carries `verdict`,
    /// `stats` and, on rejection, `witness`.
    #[pyo3(signature = (necessary_only = false, state_budget = None))]
    fn decide_json(&self, necessary_only: bool, state_budget: Option<usize>) -> PyResult<String> {
        let mut opts = DecideOptions::default();
        if let Some(budget) = state_budget {
            opts.state_budget = budget;
        }
        let result = if necessary_only {
            decide_necessary_only(&self.inner, &opts)
        } else {
            decide(&self.inner, &opts)
        }
        .map_err(to_py_err)?;
        serde_json::to_string(&result).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Check a witness against this set: `(valid, violation)`.
    fn verify(&self, witness_json: &str) -> PyResult<(bool, Option<String>)> {
        let witness = Witness::from_json(witness_json).map_err(to_py_err)?;
        let report = verify_witness(&witness, &self.inner).map_err(to_py_err)?;
        Ok((report.valid, report.violation.map(|v| v.to_string())))
    }

    /// Simulate under uniform random switching from an all-distinct
    /// start; returns the consensus profile as JSON.
    #[pyo3(signature = (horizon = 200, seed = 0, eps = 1e-6))]
    fn simulate_random_json(&self, horizon: usize, seed: u64, eps: f64) -> PyResult<String> {
        let n = self.inner.n();
        let x0: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let trajectory = run(
            &self.inner,
            &SwitchingPolicy::UniformRandom { seed },
            &x0,
            horizon,
        )
        .map_err(to_py_err)?;
        let profile = detect_cluster_consensus(&trajectory, self.inner.clustering(), eps);
        serde_json::to_string(&profile).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Replay a witness from its canonical split start; returns
    /// `(final_spread, min_spread)`.  A valid witness keeps both away
    /// from zero forever.
    #[pyo3(signature = (witness_json, horizon = 200))]
    fn replay(&self, witness_json: &str, horizon: usize) -> PyResult<(f64, f64)> {
        let witness = Witness::from_json(witness_json).map_err(to_py_err)?;
        let x0 = witness_initial_state(&witness, self.inner.n());
        let trajectory = run(
            &self.inner,
            &SwitchingPolicy::WitnessReplay(witness),
            &x0,
            horizon,
        )
        .map_err(to_py_err)?;
        Ok((trajectory.final_spread(), trajectory.min_spread()))
    }
}

/// Number of ordered disjoint pair states over `n` vertices; witness
/// cycles never exceed it.
#[pyfunction]
fn state_bound(n: usize) -> u128 {
    pair_state_bound(n)
}

#[pymodule]
fn cluster_consensus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MatrixSet>()?;
    m.add_function(wrap_pyfunction!(state_bound, m)?)?;
    Ok(())
}
