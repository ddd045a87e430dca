//! Python bindings: parse and generate circuits, run the model checker,
//! drive the SAT solver directly.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fraig_bmc::aiger::{self, AigNetwork, ParseOptions};
use fraig_bmc::bmc::{validate_counterexample, Bmc, BmcOptions, BmcOutcome};
use fraig_bmc::constraints::{ConstraintMode, PatternOptions};
use fraig_bmc::sat::{Lit, SolveResult, Solver as CoreSolver, Var};
use fraig_bmc::testgen::{self, ConstraintSpec, Family, GenSpec};
use fraig_bmc::unroll::ReduceOptions;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed or generated AIGER circuit.
#[pyclass(name = "Network", frozen)]
pub struct Network {
    net: AigNetwork,
}

#[pymethods]
impl Network {
    #[staticmethod]
    #[pyo3(signature = (data, outputs_as_bads = true))]
    fn parse(data: &[u8], outputs_as_bads: bool) -> PyResult<Network> {
        let net = aiger::parse_with(data, ParseOptions { outputs_as_bads }).map_err(value_error)?;
        Ok(Network { net })
    }

    #[getter]
    fn num_inputs(&self) -> usize {
        self.net.inputs().len()
    }

    #[getter]
    fn num_latches(&self) -> usize {
        self.net.latches().len()
    }

    #[getter]
    fn num_ands(&self) -> usize {
        self.net.ands().len()
    }

    #[getter]
    fn num_bads(&self) -> usize {
        self.net.bads().len()
    }

    #[getter]
    fn num_constraints(&self) -> usize {
        self.net.constraints().len()
    }

    fn to_ascii(&self) -> String {
        aiger::write_ascii(&self.net)
    }

    fn to_binary(&self) -> PyResult<Vec<u8>> {
        aiger::write_binary(&self.net).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(inputs={}, latches={}, ands={}, bads={}, constraints={})",
            self.num_inputs(),
            self.num_latches(),
            self.num_ands(),
            self.num_bads(),
            self.num_constraints()
        )
    }
}

/// Outcome of a model checking run.
#[pyclass(name = "CheckResult", frozen, get_all)]
pub struct CheckResult {
    /// "safe", "unsafe" or "limit"
    verdict: String,
    /// Violation bound, last safe bound, or the bound hit by the limit.
    bound: usize,
    bad_index: Option<usize>,
    witness: Option<String>,
    stats_csv: String,
}

#[pymethods]
impl CheckResult {
    fn __repr__(&self) -> String {
        format!("CheckResult(verdict={:?}, bound={})", self.verdict, self.bound)
    }
}

fn parse_mode(mode: &str) -> PyResult<ConstraintMode> {
    match mode {
        "off" => Ok(ConstraintMode::Off),
        "filter" => Ok(ConstraintMode::Filter),
        "sample" => Ok(ConstraintMode::Sample),
        "auto" => Ok(ConstraintMode::Auto),
        _ => Err(PyValueError::new_err(format!("unknown constraint mode {mode:?}"))),
    }
}

/// Runs bounded model checking on `network`.
#[pyfunction]
#[pyo3(signature = (network, max_bound = 100, fraig = true, seed = None, constraint_mode = "auto", ec_limit = 8, sim_words = 4, timings = false))]
#[allow(clippy::too_many_arguments)]
fn check(
    py: Python<'_>,
    network: &Network,
    max_bound: usize,
    fraig: bool,
    seed: Option<u64>,
    constraint_mode: &str,
    ec_limit: usize,
    sim_words: usize,
    timings: bool,
) -> PyResult<CheckResult> {
    if ec_limit == 0 || sim_words == 0 {
        return Err(PyValueError::new_err("ec_limit and sim_words must be positive"));
    }
    let defaults = ReduceOptions::default();
    let opts = BmcOptions {
        max_bound,
        reduce: ReduceOptions {
            reduce: fraig,
            ec_limit,
            sim_words,
            seed: seed.unwrap_or(defaults.seed),
            ..defaults
        },
        patterns: PatternOptions { mode: parse_mode(constraint_mode)?, ..PatternOptions::default() },
        time_limit: None,
    };
    let net = &network.net;
    py.detach(|| {
        let mut bmc = Bmc::new(net, opts);
        let outcome = bmc.run().map_err(value_error)?;
        let stats_csv = bmc.stats().to_csv(timings);
        Ok(match outcome {
            BmcOutcome::Safe { upto } => CheckResult {
                verdict: "safe".into(),
                bound: upto,
                bad_index: None,
                witness: None,
                stats_csv,
            },
            BmcOutcome::Unsafe(cex) => {
                debug_assert!(validate_counterexample(net, &cex));
                CheckResult {
                    verdict: "unsafe".into(),
                    bound: cex.bound,
                    bad_index: Some(cex.bad_index),
                    witness: Some(aiger::write_witness(&cex, net)),
                    stats_csv,
                }
            }
            BmcOutcome::Limit { bound } => CheckResult {
                verdict: "limit".into(),
                bound,
                bad_index: None,
                witness: None,
                stats_csv,
            },
        })
    })
}

/// Checks that `witness` replays to a violation on `network`.
#[pyfunction]
fn validate_witness(network: &Network, witness: &str) -> PyResult<bool> {
    let cex = aiger::parse_witness(witness).map_err(value_error)?;
    Ok(validate_counterexample(&network.net, &cex))
}

fn parse_family(family: &str) -> PyResult<Family> {
    match family {
        "random" => Ok(Family::Random),
        "counter" => Ok(Family::Counter),
        "self-miter" => Ok(Family::SelfMiter),
        "shadow" => Ok(Family::Shadow),
        "retimed-pair" => Ok(Family::RetimedPair),
        _ => Err(PyValueError::new_err(format!("unknown family {family:?}"))),
    }
}

/// Generates a benchmark circuit.
#[pyfunction]
#[pyo3(signature = (family, seed = 1, gates = 30, latches = 8, inputs = 4, cube = None))]
fn generate(family: &str, seed: u64, gates: usize, latches: usize, inputs: usize, cube: Option<usize>) -> PyResult<Network> {
    let spec = GenSpec {
        seed,
        family: parse_family(family)?,
        gates,
        latches,
        inputs,
        constraint: cube.map_or(ConstraintSpec::None, ConstraintSpec::Cube),
    };
    Ok(Network { net: testgen::generate(&spec) })
}

/// First violated bound by explicit-state search, or None.
#[pyfunction]
fn bfs_oracle(network: &Network, max_bound: usize) -> PyResult<Option<usize>> {
    testgen::bfs_oracle(&network.net, max_bound).map_err(value_error)
}

/// The incremental CDCL solver with DIMACS-style integer literals.
#[pyclass(name = "Solver")]
pub struct Solver {
    inner: CoreSolver,
}

fn to_lit(s: &CoreSolver, d: i64) -> PyResult<Lit> {
    let v = d.unsigned_abs();
    if d == 0 || v > s.num_vars() as u64 {
        return Err(PyValueError::new_err(format!("literal {d} is not allocated")));
    }
    Ok(Var::from_index(v as u32).lit(d < 0))
}

#[pymethods]
impl Solver {
    #[new]
    fn new() -> Solver {
        Solver { inner: CoreSolver::new() }
    }

    /// Allocates a variable and returns its positive literal.
    fn new_var(&mut self) -> i64 {
        self.inner.new_var().to_dimacs()
    }

    fn add_clause(&mut self, lits: Vec<i64>) -> PyResult<()> {
        let lits = lits.iter().map(|&d| to_lit(&self.inner, d)).collect::<PyResult<Vec<_>>>()?;
        self.inner.add_clause(&lits).map_err(value_error)
    }

    /// Returns True (sat), False (unsat) or None (conflict limit hit).
    #[pyo3(signature = (assumptions = Vec::new(), conflict_limit = None))]
    fn solve(&mut self, assumptions: Vec<i64>, conflict_limit: Option<u64>) -> PyResult<Option<bool>> {
        let lits = assumptions.iter().map(|&d| to_lit(&self.inner, d)).collect::<PyResult<Vec<_>>>()?;
        Ok(match self.inner.solve_limited(&lits, conflict_limit) {
            SolveResult::Sat => Some(true),
            SolveResult::Unsat => Some(false),
            SolveResult::Unknown => None,
        })
    }

    fn model_value(&self, lit: i64) -> PyResult<bool> {
        let l = to_lit(&self.inner, lit)?;
        self.inner.model_value(l).map_err(value_error)
    }

    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.num_vars()
    }
}

#[pymodule]
fn fraig_bmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<CheckResult>()?;
    m.add_class::<Solver>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(validate_witness, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_oracle, m)?)?;
    Ok(())
}
