//! Python bindings: a `bnctrl` extension module exposing network parsing,
//! attractor enumeration, minimal-control enumeration, verification, and the
//! maximum-forbidden-length query.

use bnctrl_core::builder::ModelContext;
use bnctrl_core::cnf::ClauseSet;
use bnctrl_core::dynamics::{self, ControlVector};
use bnctrl_core::network;
use bnctrl_core::solver::BranchAndBound;
use bnctrl_core::verify::{self, FeasibilityVerdict, MaxLenResult, MinimalityVerdict, VerifyCache};
use bnctrl_core::{benders, benders::EnumerateOptions, benders::Strategy};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::time::Duration;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// One attractor: its length, the visited states as bitmasks, and whether it
/// violates the phenotype somewhere.
#[pyclass(get_all, skip_from_py_object)]
#[derive(Clone)]
struct Attractor {
    length: usize,
    states: Vec<u64>,
    forbidden: bool,
}

#[pymethods]
impl Attractor {
    fn __repr__(&self) -> String {
        format!(
            "Attractor(length={}, states={:?}, forbidden={})",
            self.length, self.states, self.forbidden
        )
    }
}

/// Result of a minimal-control enumeration run.
#[pyclass(get_all)]
struct EnumerationResult {
    /// Each control as a sorted list of `gene=value` strings.
    controls: Vec<Vec<String>>,
    /// `complete` or `timeout-partial`.
    status: String,
    /// `exact` or `heuristic`.
    mode: String,
    master_solves: u64,
    /// The full report as a JSON string.
    json: String,
}

#[pymethods]
impl EnumerationResult {
    fn __repr__(&self) -> String {
        format!(
            "EnumerationResult(controls={:?}, status={:?}, mode={:?})",
            self.controls, self.status, self.mode
        )
    }
}

/// A synchronous Boolean network augmented with its phenotype gene.
#[pyclass]
struct BooleanNetwork {
    ctx: ModelContext,
}

impl BooleanNetwork {
    fn control(&self, items: Vec<String>) -> PyResult<ControlVector> {
        ControlVector::parse_strings(&self.ctx.bn, &items)
            .ok_or_else(|| err(format!("cannot parse control {items:?}")))
    }
}

#[pymethods]
impl BooleanNetwork {
    /// Parses model-file text with a `# phenotype:` directive.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let bn = network::parse_and_augment(text).map_err(err)?;
        let clauses = ClauseSet::from_network(&bn).map_err(err)?;
        Ok(BooleanNetwork { ctx: ModelContext::new(bn, clauses) })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::parse(&text)
    }

    /// Gene names in file order, including the appended phenotype gene.
    #[getter]
    fn gene_names(&self) -> Vec<String> {
        self.ctx.bn.gene_names().to_vec()
    }

    #[getter]
    fn controllable_genes(&self) -> Vec<String> {
        self.ctx
            .bn
            .controllable_genes()
            .into_iter()
            .map(|g| self.ctx.bn.gene_name(g).to_string())
            .collect()
    }

    #[getter]
    fn phenotype_gene(&self) -> String {
        self.ctx.bn.gene_name(self.ctx.phenotype()).to_string()
    }

    /// One synchronous update step on a state bitmask (bit i = gene i).
    fn step(&self, state: u64) -> u64 {
        self.ctx.bn.step(state)
    }

    /// Model-file text for this network.
    fn source(&self) -> String {
        self.ctx.bn.print()
    }

    /// All attractors under an optional control, shortest-state-first, with
    /// exact length at most `t_max` (None = unbounded).
    #[pyo3(signature = (control=None, t_max=None))]
    fn attractors(
        &self,
        control: Option<Vec<String>>,
        t_max: Option<usize>,
    ) -> PyResult<Vec<Attractor>> {
        let d = self.control(control.unwrap_or_default())?;
        let phi = self.ctx.phenotype();
        let attrs = dynamics::enumerate_attractors(&self.ctx.bn, &d, t_max).map_err(err)?;
        Ok(attrs
            .into_iter()
            .map(|a| Attractor {
                length: a.length,
                forbidden: a.is_forbidden(phi),
                states: a.states,
            })
            .collect())
    }

    /// Brute-force enumeration of all inclusion-minimal feasible controls.
    #[pyo3(signature = (t_max=None, max_size=7, accept_no_attractor=false))]
    fn oracle_minimal_controls(
        &self,
        t_max: Option<usize>,
        max_size: usize,
        accept_no_attractor: bool,
    ) -> PyResult<Vec<Vec<String>>> {
        let controls =
            dynamics::oracle_minimal_controls(&self.ctx.bn, t_max, max_size, accept_no_attractor)
                .map_err(err)?;
        Ok(controls.iter().map(|c| c.to_strings(&self.ctx.bn)).collect())
    }

    /// Cut-generation enumeration of all inclusion-minimal feasible controls.
    #[pyo3(signature = (t_max=5, use_ts_cut=false, strategy="DEC", max_size=7,
                        time_limit=600.0, accept_no_attractor=false))]
    fn enumerate(
        &self,
        t_max: usize,
        use_ts_cut: bool,
        strategy: &str,
        max_size: usize,
        time_limit: f64,
        accept_no_attractor: bool,
    ) -> PyResult<EnumerationResult> {
        if t_max == 0 {
            return Err(err("t_max must be at least 1"));
        }
        let strategy = match strategy {
            "DEC" | "dec" => Strategy::Dec,
            "AGG" | "agg" => Strategy::Agg,
            other => return Err(err(format!("unknown strategy {other:?}"))),
        };
        let opts = EnumerateOptions {
            t_max,
            use_ts_cut,
            strategy,
            max_size,
            time_limit: Some(Duration::from_secs_f64(time_limit)),
            accept_no_attractor,
        };
        let report = benders::enumerate(&self.ctx, &opts, &BranchAndBound).map_err(err)?;
        Ok(EnumerationResult {
            controls: report.controls.iter().map(|r| r.control.to_strings(&self.ctx.bn)).collect(),
            status: match report.status {
                benders::RunStatus::Complete => "complete".into(),
                benders::RunStatus::TimedOut => "timeout-partial".into(),
            },
            mode: report.mode_label().into(),
            master_solves: report.master_solves,
            json: serde_json::to_string_pretty(&report.to_json(&self.ctx)).unwrap(),
        })
    }

    /// Re-checks one control: `feasible`, `infeasible`, `no-attractor`, or
    /// `indeterminate`.
    #[pyo3(signature = (control, t_check=100))]
    fn verify_feasibility(&self, control: Vec<String>, t_check: usize) -> PyResult<String> {
        let d = self.control(control)?;
        let mut cache = VerifyCache::in_memory();
        let v = verify::verify_feasibility(&self.ctx, &d, t_check, &BranchAndBound, &mut cache, None)
            .map_err(err)?;
        Ok(match v {
            FeasibilityVerdict::Feasible => "feasible".into(),
            FeasibilityVerdict::Infeasible(_) => "infeasible".into(),
            FeasibilityVerdict::NoAttractor => "no-attractor".into(),
            FeasibilityVerdict::Indeterminate => "indeterminate".into(),
        })
    }

    /// Checks inclusion-minimality of a feasible control: `minimal`,
    /// `non-minimal`, or `indeterminate`.
    #[pyo3(signature = (control, t_check=100, accept_no_attractor=false))]
    fn verify_minimality(
        &self,
        control: Vec<String>,
        t_check: usize,
        accept_no_attractor: bool,
    ) -> PyResult<String> {
        let d = self.control(control)?;
        let mut cache = VerifyCache::in_memory();
        let v = verify::verify_minimality(
            &self.ctx,
            &d,
            t_check,
            accept_no_attractor,
            &BranchAndBound,
            &mut cache,
            None,
        )
        .map_err(err)?;
        Ok(match v {
            MinimalityVerdict::Minimal => "minimal".into(),
            MinimalityVerdict::NonMinimal(_) => "non-minimal".into(),
            MinimalityVerdict::Indeterminate => "indeterminate".into(),
        })
    }

    /// Longest phenotype-violating attractor over all controls of size at
    /// most `lambda_max`, searched up to length `t_max`; None when no
    /// forbidden attractor exists.
    #[pyo3(signature = (lambda_max=7, t_max=8))]
    fn max_forbidden_length(&self, lambda_max: usize, t_max: usize) -> PyResult<Option<usize>> {
        match verify::max_forbidden_length(&self.ctx, lambda_max, t_max, &BranchAndBound, None)
            .map_err(err)?
        {
            MaxLenResult::Optimum { length, .. } => Ok(Some(length)),
            MaxLenResult::LowerBound { length, .. } => Ok(Some(length)),
            MaxLenResult::NoForbidden => Ok(None),
            MaxLenResult::Indeterminate => Err(err("timed out without a bound")),
        }
    }
}

#[pymodule]
fn bnctrl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BooleanNetwork>()?;
    m.add_class::<Attractor>()?;
    m.add_class::<EnumerationResult>()?;
    Ok(())
}
