//! Python bindings for the entlink library: two-qubit states,
//! measurement bases, secret-key rates, distillation trajectories and
//! the optimal-depth search.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use entlink::kopt::EtaMode;
use entlink::strategy;
use entlink::{
    BellDiagonalState, DensityOperator4, MeasurementBasis, ProtocolKind, StrategyKind, Subsystem,
};

fn value_err(e: entlink::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_protocol(name: &str) -> PyResult<ProtocolKind> {
    match name {
        "bbpssw" => Ok(ProtocolKind::bbpssw()),
        "dejmps" => Ok(ProtocolKind::dejmps()),
        _ => Err(PyValueError::new_err(format!(
            "unknown protocol {name:?}, expected \"bbpssw\" or \"dejmps\""
        ))),
    }
}

fn parse_strategy(name: &str) -> PyResult<StrategyKind> {
    match name {
        "asym" => Ok(StrategyKind::AsymmetricOptimal),
        "sym" => Ok(StrategyKind::Symmetric),
        _ => Err(PyValueError::new_err(format!(
            "unknown strategy {name:?}, expected \"asym\" or \"sym\""
        ))),
    }
}

fn parse_eta_mode(name: &str, eta: f64) -> PyResult<EtaMode> {
    match name {
        "fixed" => Ok(EtaMode::Fixed(eta)),
        "scaled" => Ok(EtaMode::Scaled(eta)),
        _ => Err(PyValueError::new_err(format!(
            "unknown eta mode {name:?}, expected \"fixed\" or \"scaled\""
        ))),
    }
}

/// A measurement basis: an orthonormal pair of single-qubit states.
#[pyclass(name = "Basis", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBasis {
    inner: MeasurementBasis,
}

#[pymethods]
impl PyBasis {
    /// The computational basis {|0>, |1>}.
    #[staticmethod]
    fn computational() -> Self {
        Self {
            inner: MeasurementBasis::computational(),
        }
    }

    /// Basis at the given Bloch angles.
    #[staticmethod]
    fn bloch(theta: f64, phi: f64) -> Self {
        Self {
            inner: MeasurementBasis::bloch(theta, phi),
        }
    }

    /// Entrywise complex conjugate basis.
    fn conjugate(&self) -> Self {
        Self {
            inner: self.inner.conjugate(),
        }
    }

    /// Amplitudes as ((re, im) pairs) of the two basis vectors.
    fn amplitudes(&self) -> [[(f64, f64); 2]; 2] {
        let row = |v: &entlink::StateVector2| [(v.c0().re, v.c0().im), (v.c1().re, v.c1().im)];
        [row(self.inner.first()), row(self.inner.second())]
    }

    fn __repr__(&self) -> String {
        let a = self.amplitudes();
        format!(
            "Basis([{:.4}{:+.4}j, {:.4}{:+.4}j], [{:.4}{:+.4}j, {:.4}{:+.4}j])",
            a[0][0].0, a[0][0].1, a[0][1].0, a[0][1].1, a[1][0].0, a[1][0].1, a[1][1].0, a[1][1].1
        )
    }
}

/// A validated two-qubit density operator.
#[pyclass(name = "State", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: DensityOperator4,
}

#[pymethods]
impl PyState {
    /// Overlap with the target Bell state.
    fn fidelity(&self) -> f64 {
        self.inner.fidelity()
    }

    /// Von Neumann entropy in bits.
    fn von_neumann_entropy(&self) -> f64 {
        self.inner.von_neumann_entropy()
    }

    /// CHSH value under the standard observable quartet.
    fn chsh_value(&self) -> f64 {
        entlink::chsh_value(&self.inner)
    }

    /// Matrix entries as (re, im) pairs, row major.
    fn entries(&self) -> Vec<Vec<(f64, f64)>> {
        let m = self.inner.matrix();
        (0..4)
            .map(|i| (0..4).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("State(fidelity={:.6})", self.fidelity())
    }
}

/// The maximally entangled target state.
#[pyfunction]
fn bell_phi_plus() -> PyState {
    PyState {
        inner: entlink::bell_phi_plus(),
    }
}

/// Werner state of the given fidelity.
#[pyfunction]
fn werner(fidelity: f64) -> PyResult<PyState> {
    Ok(PyState {
        inner: entlink::werner_from_fidelity(fidelity).map_err(value_err)?,
    })
}

/// Bell-diagonal state with the given projector weights.
#[pyfunction]
fn bell_diagonal(f: f64, delta: f64, epsilon: f64, tau: f64) -> PyResult<PyState> {
    let s = BellDiagonalState::new(f, delta, epsilon, tau).map_err(value_err)?;
    Ok(PyState {
        inner: s.to_operator(),
    })
}

/// The four CHSH bases as (B_A1, B_A2, B_B1, B_B2).
#[pyfunction]
fn chsh_bases() -> (PyBasis, PyBasis, PyBasis, PyBasis) {
    let [a1, a2, b1, b2] = strategy::chsh_quartet();
    (
        PyBasis { inner: a1 },
        PyBasis { inner: a2 },
        PyBasis { inner: b1 },
        PyBasis { inner: b2 },
    )
}

/// Closed-form optimal key rate of a Werner state.
#[pyfunction]
fn optimal_rate_werner(fidelity: f64) -> PyResult<f64> {
    entlink::optimal_rate_werner(fidelity).map_err(value_err)
}

/// Secret-key rate of a basis pair, as a dict with the rate and its
/// mutual-information and Holevo parts.
#[pyfunction]
fn devetak_winter_rate<'py>(
    py: Python<'py>,
    state: &PyState,
    basis_a: &PyBasis,
    basis_b: &PyBasis,
) -> PyResult<Bound<'py, PyDict>> {
    let report = entlink::devetak_winter_rate(&state.inner, &basis_a.inner, &basis_b.inner);
    let d = PyDict::new(py);
    d.set_item("rate", report.rate)?;
    d.set_item("mutual_information", report.mutual_information)?;
    d.set_item("holevo", report.holevo)?;
    d.set_item("conditional_entropy_term", report.conditional_entropy_term)?;
    Ok(d)
}

/// Brute-force basis search over a Bloch-angle grid.
#[pyfunction]
fn basis_grid_oracle<'py>(
    py: Python<'py>,
    state: &PyState,
    grid_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let result = entlink::basis_grid_oracle(&state.inner, grid_steps).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("rate", result.rate)?;
    d.set_item("theta_a", result.angles.0)?;
    d.set_item("phi_a", result.angles.1)?;
    d.set_item("theta_b", result.angles.2)?;
    d.set_item("phi_b", result.angles.3)?;
    Ok(d)
}

/// Joint outcome probabilities of a basis pair as a 2x2 nested list.
#[pyfunction]
fn joint_distribution(state: &PyState, basis_a: &PyBasis, basis_b: &PyBasis) -> [[f64; 2]; 2] {
    entlink::joint_distribution(&state.inner, &basis_a.inner, &basis_b.inner).entries()
}

/// The 3x3 basis-choice probability table, indexed [alice][bob].
#[pyfunction]
fn probability_table(eta: f64, gamma: f64) -> PyResult<[[f64; 3]; 3]> {
    strategy::probability_table(eta, gamma).map_err(value_err)
}

/// Closed-form optimal asymmetric processing rate.
#[pyfunction]
fn asymmetric_optimal_rate(fidelity: f64, eta: f64) -> PyResult<f64> {
    strategy::asymmetric_optimal_rate(fidelity, eta).map_err(value_err)
}

/// Best symmetric processing rate over the four allowed shared bases.
#[pyfunction]
fn symmetric_rate(fidelity: f64, eta: f64) -> PyResult<f64> {
    strategy::symmetric_rate_best(fidelity, eta).map_err(value_err)
}

/// Key rate of the cross-party CHSH pair (B_Ai, B_Bj) on a Werner state.
#[pyfunction]
fn suboptimal_pair_rate(fidelity: f64, i: usize, j: usize) -> PyResult<f64> {
    strategy::suboptimal_pair_rate(fidelity, i, j).map_err(value_err)
}

/// Key rate when both parties draw distinct bases from one party's CHSH
/// set ("a" or "b"); never positive.
#[pyfunction]
fn wasted_pair_rate(fidelity: f64, i: usize, j: usize, side: &str) -> PyResult<f64> {
    let side = match side {
        "a" | "A" => Subsystem::A,
        "b" | "B" => Subsystem::B,
        _ => return Err(PyValueError::new_err("side must be \"a\" or \"b\"")),
    };
    strategy::wasted_pair_rate(fidelity, i, j, side).map_err(value_err)
}

/// Distillation trajectory from a Werner input: a list of per-depth
/// dicts with the Bell weights, step success probability and
/// cumulative yield.
#[pyfunction]
fn distill_trajectory<'py>(
    py: Python<'py>,
    f0: f64,
    k: u32,
    protocol: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let protocol = parse_protocol(protocol)?;
    let t = entlink::trajectory(f0, k, protocol).map_err(value_err)?;
    let mut rows = Vec::with_capacity(t.states().len());
    let mut cumulative = 1.0;
    for (d, state) in t.states().iter().enumerate() {
        let row = PyDict::new(py);
        let [f, delta, epsilon, tau] = state.coefficients();
        row.set_item("d", d)?;
        row.set_item("coefficients", (f, delta, epsilon, tau))?;
        row.set_item("fidelity", f)?;
        let p = if d == 0 {
            1.0
        } else {
            t.success_probabilities()[d - 1]
        };
        if d > 0 {
            cumulative *= p / 2.0;
        }
        row.set_item("p_ent", p)?;
        row.set_item("r_ent", cumulative)?;
        rows.push(row);
    }
    Ok(rows)
}

/// Bounded search for the optimal distillation depth. Returns a dict
/// with the window bounds, the optimum and the full rate curve.
#[pyfunction]
#[pyo3(signature = (f0, eta, protocol, strategy="asym", eta_mode="fixed", k_max=30))]
fn find_k_opt<'py>(
    py: Python<'py>,
    f0: f64,
    eta: f64,
    protocol: &str,
    strategy: &str,
    eta_mode: &str,
    k_max: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let protocol = parse_protocol(protocol)?;
    let strategy = parse_strategy(strategy)?;
    let mode = parse_eta_mode(eta_mode, eta)?;
    let result = entlink::find_k_opt(f0, protocol, &strategy, mode, k_max).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("k_loc", result.k_loc)?;
    d.set_item("kappa1", result.kappa1)?;
    d.set_item("kappa2", result.kappa2)?;
    d.set_item("kappa", result.kappa)?;
    d.set_item("k_opt", result.k_opt)?;
    d.set_item("rate", result.rate)?;
    d.set_item("no_key", result.no_key)?;
    d.set_item("saturated", result.saturated)?;
    let curve: Vec<(u32, f64, f64, f64)> = result
        .rate_curve
        .iter()
        .map(|p| (p.k, p.r_ent, p.r_proc, p.r_total))
        .collect();
    d.set_item("curve", curve)?;
    Ok(d)
}

/// One region-map row: (eta, F, asym_rate, sym_rate, label).
type RegionRow = (f64, f64, f64, f64, String);

/// Strategy comparison over an (eta, F) grid.
#[pyfunction]
fn region_map(
    eta_min: f64,
    eta_max: f64,
    f_min: f64,
    f_max: f64,
    steps: usize,
) -> PyResult<Vec<RegionRow>> {
    let points =
        strategy::region_map((eta_min, eta_max), (f_min, f_max), steps).map_err(value_err)?;
    Ok(points
        .into_iter()
        .map(|p| {
            (
                p.eta,
                p.fidelity,
                p.asym_rate,
                p.sym_rate,
                p.label.as_str().to_string(),
            )
        })
        .collect())
}

#[pymodule]
fn entlink_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(bell_phi_plus, m)?)?;
    m.add_function(wrap_pyfunction!(werner, m)?)?;
    m.add_function(wrap_pyfunction!(bell_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_bases, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_rate_werner, m)?)?;
    m.add_function(wrap_pyfunction!(devetak_winter_rate, m)?)?;
    m.add_function(wrap_pyfunction!(basis_grid_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(joint_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(probability_table, m)?)?;
    m.add_function(wrap_pyfunction!(asymmetric_optimal_rate, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_rate, m)?)?;
    m.add_function(wrap_pyfunction!(suboptimal_pair_rate, m)?)?;
    m.add_function(wrap_pyfunction!(wasted_pair_rate, m)?)?;
    m.add_function(wrap_pyfunction!(distill_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(find_k_opt, m)?)?;
    m.add_function(wrap_pyfunction!(region_map, m)?)?;
    Ok(())
}
