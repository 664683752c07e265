//! Python bindings. A `Sieve` owns the tables; counts and sums are methods on it.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyComplex;

use prisq_core::asymptotics::{self, RegimeConfig};
use prisq_core::counting::{self, ResidueCounter};
use prisq_core::exp_sums;
use prisq_core::sweep::{self, APolicy, Ladder, SweepSpec};
use prisq_core::{arith, selftest, Error, ModulusContext, ProblemInstance, SieveTables};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(a_exponent: f64, epsilon: f64, o1: f64) -> PyResult<RegimeConfig> {
    let cfg = RegimeConfig {
        a_exponent,
        epsilon,
        o1_factor: o1,
        ..RegimeConfig::default()
    };
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn modulus(q: u64) -> PyResult<ModulusContext> {
    arith::build_modulus_context(q).map_err(py_err)
}

#[pyclass(name = "CountReport", frozen, get_all)]
struct PyCountReport {
    a: u64,
    q: u64,
    p_bound: u64,
    s_bound: u64,
    exact: u64,
    main_term: f64,
    abs_error: f64,
    envelope: f64,
    normalized_error: f64,
    regime: String,
    d: f64,
}

#[pymethods]
impl PyCountReport {
    fn __repr__(&self) -> String {
        format!(
            "CountReport(a={}, q={}, P={}, S={}, exact={}, main_term={}, regime={})",
            self.a, self.q, self.p_bound, self.s_bound, self.exact, self.main_term, self.regime
        )
    }
}

#[pyclass(name = "KloostermanValue", frozen, get_all)]
struct PyKloosterman {
    a: u64,
    q: u64,
    x: u64,
    re: f64,
    im: f64,
    modulus_abs: f64,
    trivial_bound: u64,
    regime_bound: Option<f64>,
}

#[pymethods]
impl PyKloosterman {
    #[getter]
    fn value<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        PyComplex::from_doubles(py, self.re, self.im)
    }

    fn ratio_to_trivial(&self) -> f64 {
        self.modulus_abs / self.trivial_bound as f64
    }

    fn ratio_to_bound(&self) -> Option<f64> {
        self.regime_bound.map(|b| self.modulus_abs / b)
    }

    fn __repr__(&self) -> String {
        format!(
            "KloostermanValue(a={}, q={}, x={}, value=({}{:+}j))",
            self.a, self.q, self.x, self.re, self.im
        )
    }
}

#[pyclass(name = "Sieve", frozen)]
struct PySieve {
    tables: SieveTables,
}

#[pymethods]
impl PySieve {
    #[new]
    fn new(limit: u64) -> PyResult<Self> {
        Ok(Self {
            tables: arith::build_sieve(limit).map_err(py_err)?,
        })
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.tables.limit()
    }

    fn mobius(&self, n: u64) -> i8 {
        self.tables.mobius(n)
    }

    fn is_squarefree(&self, n: u64) -> bool {
        self.tables.is_squarefree(n)
    }

    fn is_prime(&self, n: u64) -> bool {
        self.tables.is_prime(n)
    }

    fn primes_up_to(&self, bound: u64) -> Vec<u32> {
        self.tables.primes_up_to(bound).to_vec()
    }

    fn pi_q(&self, q: u64, p_bound: u64) -> PyResult<u64> {
        counting::pi_q(&self.tables, p_bound, &modulus(q)?).map_err(py_err)
    }

    fn s_q(&self, q: u64, s_bound: u64) -> PyResult<u64> {
        counting::s_q(&self.tables, s_bound, &modulus(q)?).map_err(py_err)
    }

    fn count_exact(&self, a: u64, q: u64, p_bound: u64, s_bound: u64) -> PyResult<u64> {
        let inst = ProblemInstance::new(a, q, p_bound, s_bound).map_err(py_err)?;
        counting::count_exact(&self.tables, &inst).map_err(py_err)
    }

    fn count_pairs_all(&self, a: u64, q: u64, p_bound: u64, s_bound: u64) -> PyResult<u64> {
        let inst = ProblemInstance::new(a, q, p_bound, s_bound).map_err(py_err)?;
        counting::count_pairs_all(&self.tables, &inst).map_err(py_err)
    }

    fn count_n_q(&self, q: u64, p_bound: u64, s_bound: u64) -> PyResult<u64> {
        counting::count_n_q(&self.tables, p_bound, s_bound, &modulus(q)?).map_err(py_err)
    }

    #[pyo3(signature = (a, q, p_bound, s_bound, d_cap=None))]
    fn count_via_mobius(
        &self,
        a: u64,
        q: u64,
        p_bound: u64,
        s_bound: u64,
        d_cap: Option<u64>,
    ) -> PyResult<i64> {
        let inst = ProblemInstance::new(a, q, p_bound, s_bound).map_err(py_err)?;
        Ok(counting::count_via_mobius(&self.tables, &inst, d_cap)
            .map_err(py_err)?
            .value)
    }

    /// Counts for every reduced residue, in ascending order of `a`.
    fn counts_by_residue(&self, q: u64, p_bound: u64, s_bound: u64) -> PyResult<Vec<(u64, u64)>> {
        let ctx = modulus(q)?;
        let counter = ResidueCounter::new(&self.tables, &ctx, p_bound, s_bound).map_err(py_err)?;
        Ok(ctx
            .iter_reduced()
            .map(|a| (a, counter.count_exact(a)))
            .collect())
    }

    fn main_term(&self, q: u64, p_bound: u64, s_bound: u64) -> PyResult<f64> {
        asymptotics::main_term(&self.tables, &modulus(q)?, p_bound, s_bound).map_err(py_err)
    }

    #[pyo3(signature = (a, q, p_bound, s_bound, a_exponent=2.0, epsilon=0.01, o1=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        a: u64,
        q: u64,
        p_bound: u64,
        s_bound: u64,
        a_exponent: f64,
        epsilon: f64,
        o1: f64,
    ) -> PyResult<PyCountReport> {
        let inst = ProblemInstance::new(a, q, p_bound, s_bound).map_err(py_err)?;
        let r = asymptotics::build_report(&self.tables, &inst, &config(a_exponent, epsilon, o1)?)
            .map_err(py_err)?;
        Ok(PyCountReport {
            a,
            q,
            p_bound,
            s_bound,
            exact: r.exact,
            main_term: r.main_term,
            abs_error: r.abs_error,
            envelope: r.envelope,
            normalized_error: r.normalized_error,
            regime: r.regime.to_string(),
            d: r.d,
        })
    }

    #[pyo3(signature = (a, q, x, a_exponent=2.0, epsilon=0.01, o1=1.0))]
    fn kloosterman(
        &self,
        a: u64,
        q: u64,
        x: u64,
        a_exponent: f64,
        epsilon: f64,
        o1: f64,
    ) -> PyResult<PyKloosterman> {
        let cfg = config(a_exponent, epsilon, o1)?;
        let k = exp_sums::kloosterman_prime_sum(&self.tables, a, &modulus(q)?, x, &cfg)
            .map_err(py_err)?;
        Ok(PyKloosterman {
            a,
            q,
            x,
            re: k.value.re,
            im: k.value.im,
            modulus_abs: k.modulus_abs,
            trivial_bound: k.trivial_bound,
            regime_bound: k.regime_bound,
        })
    }

    /// `(lhs, rhs)` of the orthogonality identity.
    fn parseval(&self, q: u64, x: u64) -> PyResult<(f64, f64)> {
        let p = exp_sums::parseval_check(&self.tables, &modulus(q)?, x).map_err(py_err)?;
        Ok((p.lhs, p.rhs))
    }

    fn discrepancy(&self, a: u64, q: u64, p_bound: u64) -> PyResult<f64> {
        Ok(
            exp_sums::inverse_residue_discrepancy(&self.tables, a, &modulus(q)?, p_bound)
                .map_err(py_err)?
                .value,
        )
    }

    fn interval_count_error(&self, a: u64, q: u64, p_bound: u64, s_bound: u64) -> PyResult<f64> {
        exp_sums::interval_count_error(&self.tables, a, &modulus(q)?, p_bound, s_bound)
            .map_err(py_err)
    }

    fn uniform_count_error(&self, a: u64, q: u64, p_bound: u64, s_bound: u64) -> PyResult<f64> {
        exp_sums::uniform_count_error(&self.tables, a, &modulus(q)?, p_bound, s_bound)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Sieve(limit={})", self.tables.limit())
    }
}

#[pyfunction]
fn mod_inverse(x: i64, q: u64) -> PyResult<u64> {
    arith::mod_inverse(x, q).map_err(py_err)
}

#[pyfunction]
fn segmented_primes(lo: u64, hi: u64) -> PyResult<Vec<u64>> {
    arith::segmented_primes(lo, hi).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (q, p_bound, a_exponent=2.0))]
fn classify_regime(q: u64, p_bound: u64, a_exponent: f64) -> PyResult<String> {
    let cfg = config(a_exponent, 0.01, 1.0)?;
    Ok(asymptotics::classify_regime(q, p_bound, &cfg)
        .map_err(py_err)?
        .to_string())
}

#[pyfunction]
#[pyo3(signature = (x, a_exponent=2.0))]
fn regime_thresholds(x: u64, a_exponent: f64) -> PyResult<(f64, f64)> {
    Ok(asymptotics::regime_thresholds(
        x,
        &config(a_exponent, 0.01, 1.0)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (q, p_bound, a_exponent=2.0, epsilon=0.01, o1=1.0))]
fn envelope_e(q: u64, p_bound: u64, a_exponent: f64, epsilon: f64, o1: f64) -> PyResult<f64> {
    asymptotics::envelope_e(q, p_bound, &config(a_exponent, epsilon, o1)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (q, x, a_exponent=2.0, epsilon=0.01, o1=1.0))]
fn bound_b(q: u64, x: u64, a_exponent: f64, epsilon: f64, o1: f64) -> PyResult<f64> {
    asymptotics::bound_b(q, x, &config(a_exponent, epsilon, o1)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (q, p_bound, s_bound, a_exponent=2.0, epsilon=0.01, o1=1.0))]
fn choose_d(
    q: u64,
    p_bound: u64,
    s_bound: u64,
    a_exponent: f64,
    epsilon: f64,
    o1: f64,
) -> PyResult<f64> {
    asymptotics::choose_d(q, p_bound, s_bound, &config(a_exponent, epsilon, o1)?).map_err(py_err)
}

/// Run a sweep and return it rendered as CSV.
#[pyfunction]
#[pyo3(signature = (q_values, p_ladder, s_ladder=None, a=None, sample=None, seed=0, max_instances=sweep::DEFAULT_MAX_INSTANCES, threads=None))]
#[allow(clippy::too_many_arguments)]
fn sweep_csv(
    q_values: &str,
    p_ladder: &str,
    s_ladder: Option<&str>,
    a: Option<u64>,
    sample: Option<usize>,
    seed: u64,
    max_instances: u64,
    threads: Option<usize>,
) -> PyResult<String> {
    let p: Ladder = p_ladder.parse().map_err(py_err)?;
    let a_policy = match (a, sample) {
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err("pass at most one of a and sample"))
        }
        (Some(a), None) => APolicy::Fixed(a),
        (None, Some(n)) => APolicy::Sample { n, seed },
        (None, None) => APolicy::AllReduced,
    };
    let spec = SweepSpec {
        q_values: sweep::parse_q_values(q_values).map_err(py_err)?,
        p_ladder: p,
        s_ladder: s_ladder.map_or(Ok(p), str::parse).map_err(py_err)?,
        a_policy,
        cfg: RegimeConfig::default(),
        max_instances,
    };
    let rows = sweep::run_sweep(&spec, threads).map_err(py_err)?;
    let mut out = Vec::new();
    sweep::write_csv(&rows, &mut out).map_err(py_err)?;
    String::from_utf8(out).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// `(passed, report_text)`.
#[pyfunction]
fn run_selftest() -> PyResult<(bool, String)> {
    let report = selftest::run_selftest().map_err(py_err)?;
    Ok((report.passed(), report.to_string()))
}

#[pymodule]
pub fn prisq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySieve>()?;
    m.add_class::<PyCountReport>()?;
    m.add_class::<PyKloosterman>()?;
    m.add_function(wrap_pyfunction!(mod_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(segmented_primes, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(regime_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_e, m)?)?;
    m.add_function(wrap_pyfunction!(bound_b, m)?)?;
    m.add_function(wrap_pyfunction!(choose_d, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
