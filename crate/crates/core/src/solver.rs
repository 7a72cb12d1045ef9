//! Solvers for the 0/1 programs of [`crate::model`].
//!
//! The built-in solver is a deterministic depth-first branch-and-bound with
//! pseudo-boolean propagation: branching always picks the lowest-index
//! unassigned variable and tries 0 before 1, and with an objective the first
//! optimum in that search order is the one returned. This makes every run
//! reproducible bit for bit.
//!
//! An external solver can be plugged in as a command. It receives the path of
//! an LP file as its only argument and must print to stdout a first line of
//! `feasible`, `infeasible`, or `timeout`, then one `name=value` (or
//! `name value`) line per
//! variable set to 1 (unlisted variables are 0). Returned assignments are
//! re-checked against the model before being trusted.

use crate::model::{Model, ObjSense, Sense};
use std::io::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    Timeout,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub propagations: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Full assignment when `Feasible`; on `Timeout` this may hold the best
    /// incumbent found before the deadline (a bound, not a proven optimum).
    pub assignment: Option<Vec<bool>>,
    /// Objective value of the assignment, when the model has an objective.
    pub objective: Option<i64>,
    pub stats: SolveStats,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("external solver failed: {0}")]
    External(String),
    #[error("external solver returned an assignment violating constraint {0}")]
    BadAssignment(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub trait SolverBackend {
    fn solve(&self, model: &Model, deadline: Option<Instant>) -> Result<SolveResult, SolverError>;
}

/// Selects a backend: `None` or `"builtin"` gives the built-in solver, any
/// other value is treated as an external command line.
pub fn backend_from_spec(spec: Option<&str>) -> Box<dyn SolverBackend> {
    match spec {
        None | Some("builtin") => Box::new(BranchAndBound),
        Some(cmd) => Box::new(ExternalCommand { command: cmd.to_string() }),
    }
}

// ---------------------------------------------------------------------------
// built-in solver

pub struct BranchAndBound;

impl SolverBackend for BranchAndBound {
    fn solve(&self, model: &Model, deadline: Option<Instant>) -> Result<SolveResult, SolverError> {
        let start = Instant::now();
        let mut search = Search::new(model, deadline);
        search.root();
        let wall = start.elapsed();
        let stats = SolveStats { nodes: search.nodes, propagations: search.propagations, wall };
        let result = match (search.best.take(), search.timed_out) {
            (Some((obj, assignment)), timed_out) => {
                // integer re-check: the solver must never hand back an
                // assignment the model itself rejects
                assert!(model.check(&assignment).is_ok(), "solver produced invalid assignment");
                // a timeout with an incumbent yields the incumbent, flagged
                // as unproven
                SolveResult {
                    status: if timed_out { SolveStatus::Timeout } else { SolveStatus::Feasible },
                    objective: model.objective().map(|_| obj),
                    assignment: Some(assignment),
                    stats,
                }
            }
            (None, true) => {
                SolveResult { status: SolveStatus::Timeout, assignment: None, objective: None, stats }
            }
            (None, false) => SolveResult {
                status: SolveStatus::Infeasible,
                assignment: None,
                objective: None,
                stats,
            },
        };
        Ok(result)
    }
}

/// One normalized row `terms >= rhs`.
struct Row {
    terms: Vec<(usize, i64)>,
    rhs: i64,
}

struct Search<'a> {
    model: &'a Model,
    rows: Vec<Row>,
    /// Per variable: `(row, coefficient)` occurrences.
    occ: Vec<Vec<(usize, i64)>>,
    /// -1 unassigned, else 0/1.
    values: Vec<i8>,
    /// Per row: maximum achievable lhs under the current partial assignment.
    max_act: Vec<i64>,
    /// Minimization coefficients (maximization is negated on entry).
    obj: Vec<i64>,
    obj_assigned: i64,
    /// Sum of `min(0, c)` over unassigned variables; `obj_assigned + pending`
    /// is a valid lower bound.
    obj_pending: i64,
    trail: Vec<usize>,
    best: Option<(i64, Vec<bool>)>,
    stop: bool,
    timed_out: bool,
    deadline: Option<Instant>,
    nodes: u64,
    propagations: u64,
}

impl<'a> Search<'a> {
    fn new(model: &'a Model, deadline: Option<Instant>) -> Self {
        let n = model.var_count();
        let mut rows = Vec::new();
        for c in model.constraints() {
            match c.sense {
                Sense::Ge => rows.push(Row {
                    terms: c.terms.iter().map(|(v, k)| (v.index(), *k)).collect(),
                    rhs: c.rhs,
                }),
                Sense::Le => rows.push(Row {
                    terms: c.terms.iter().map(|(v, k)| (v.index(), -*k)).collect(),
                    rhs: -c.rhs,
                }),
                Sense::Eq => {
                    rows.push(Row {
                        terms: c.terms.iter().map(|(v, k)| (v.index(), *k)).collect(),
                        rhs: c.rhs,
                    });
                    rows.push(Row {
                        terms: c.terms.iter().map(|(v, k)| (v.index(), -*k)).collect(),
                        rhs: -c.rhs,
                    });
                }
            }
        }
        let mut occ = vec![Vec::new(); n];
        let mut max_act = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let mut act = 0;
            for (v, k) in &row.terms {
                occ[*v].push((r, *k));
                act += k.max(&0);
            }
            max_act.push(act);
        }
        let mut obj = vec![0i64; n];
        if let Some((sense, terms)) = model.objective() {
            let flip = if *sense == ObjSense::Maximize { -1 } else { 1 };
            for (v, k) in terms {
                obj[v.index()] += flip * k;
            }
        }
        let obj_pending = obj.iter().map(|k| k.min(&0)).sum();
        Search {
            model,
            rows,
            occ,
            values: vec![-1; n],
            max_act,
            obj,
            obj_assigned: 0,
            obj_pending,
            trail: Vec::new(),
            best: None,
            stop: false,
            timed_out: false,
            deadline,
            nodes: 0,
            propagations: 0,
        }
    }

    fn root(&mut self) {
        let mut queue: Vec<usize> = (0..self.rows.len()).collect();
        if self.propagate(&mut queue) {
            self.dive();
        }
    }

    /// Assigns a variable and updates row activities. Returns false when some
    /// touched row became unsatisfiable.
    fn set(&mut self, v: usize, val: bool, queue: &mut Vec<usize>) -> bool {
        debug_assert_eq!(self.values[v], -1);
        self.values[v] = val as i8;
        self.trail.push(v);
        self.obj_assigned += if val { self.obj[v] } else { 0 };
        self.obj_pending -= self.obj[v].min(0);
        let mut ok = true;
        for i in 0..self.occ[v].len() {
            let (r, k) = self.occ[v][i];
            let delta = if val { k } else { 0 } - k.max(0);
            self.max_act[r] += delta;
            if delta != 0 {
                if self.max_act[r] < self.rows[r].rhs {
                    ok = false;
                }
                queue.push(r);
            }
        }
        ok
    }

    /// Fixpoint of unit fixing over the queued rows.
    fn propagate(&mut self, queue: &mut Vec<usize>) -> bool {
        while let Some(r) = queue.pop() {
            let slack = self.max_act[r] - self.rows[r].rhs;
            if slack < 0 {
                return false;
            }
            let mut i = 0;
            while i < self.rows[r].terms.len() {
                let (v, k) = self.rows[r].terms[i];
                i += 1;
                if self.values[v] == -1 && k.abs() > slack {
                    // the worse value for v would sink the row below rhs
                    self.propagations += 1;
                    if !self.set(v, k > 0, queue) {
                        return false;
                    }
                    // slack may have shrunk through side effects on this row
                    if self.max_act[r] < self.rows[r].rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let val = self.values[v] == 1;
            self.values[v] = -1;
            self.obj_assigned -= if val { self.obj[v] } else { 0 };
            self.obj_pending += self.obj[v].min(0);
            for i in 0..self.occ[v].len() {
                let (r, k) = self.occ[v][i];
                let delta = k.max(0) - if val { k } else { 0 };
                self.max_act[r] += delta;
            }
        }
    }

    fn bound_allows_continuing(&self) -> bool {
        match (&self.best, self.model.objective()) {
            (Some((best, _)), Some(_)) => self.obj_assigned + self.obj_pending < *best,
            (Some(_), None) => false, // pure feasibility: first solution wins
            (None, _) => true,
        }
    }

    fn dive(&mut self) {
        if self.stop {
            return;
        }
        self.nodes += 1;
        if self.nodes % 256 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    self.stop = true;
                    return;
                }
            }
        }
        if !self.bound_allows_continuing() {
            return;
        }
        let next = self.values.iter().position(|v| *v == -1);
        let Some(v) = next else {
            // leaf: all rows satisfied by construction (max activity is the
            // actual lhs once everything is assigned)
            let assignment: Vec<bool> = self.values.iter().map(|x| *x == 1).collect();
            let obj = self.obj_assigned;
            let better = self.best.as_ref().is_none_or(|(b, _)| obj < *b);
            if better {
                self.best = Some((obj, assignment));
                if self.model.objective().is_none() {
                    self.stop = true;
                }
            }
            return;
        };
        for val in [false, true] {
            let mark = self.trail.len();
            let mut queue = Vec::new();
            if self.set(v, val, &mut queue) && self.propagate(&mut queue) {
                self.dive();
            }
            self.undo_to(mark);
            if self.stop {
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// external solver

pub struct ExternalCommand {
    /// Program and arguments, whitespace-separated; the LP path is appended.
    pub command: String,
}

impl SolverBackend for ExternalCommand {
    fn solve(&self, model: &Model, deadline: Option<Instant>) -> Result<SolveResult, SolverError> {
        let start = Instant::now();
        let mut parts = self.command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| SolverError::External("empty solver command".into()))?;
        let mut file = tempfile::Builder::new().suffix(".lp").tempfile()?;
        file.write_all(model.to_lp().as_bytes())?;
        let mut cmd = std::process::Command::new(program);
        cmd.args(parts).arg(file.path());
        if let Some(d) = deadline {
            let remaining = d.saturating_duration_since(Instant::now());
            cmd.env("SOLVER_TIME_LIMIT_SECS", remaining.as_secs().max(1).to_string());
        }
        let output = cmd.output().map_err(|e| SolverError::External(e.to_string()))?;
        if !output.status.success() {
            return Err(SolverError::External(format!(
                "exit status {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let mut lines = stdout.lines().filter(|l| !l.trim().is_empty());
        let verdict = lines
            .next()
            .ok_or_else(|| SolverError::External("empty solver output".into()))?
            .trim()
            .to_ascii_lowercase();
        let stats = SolveStats { wall: start.elapsed(), ..SolveStats::default() };
        match verdict.as_str() {
            "infeasible" => {
                return Ok(SolveResult {
                    status: SolveStatus::Infeasible,
                    assignment: None,
                    objective: None,
                    stats,
                })
            }
            "timeout" => {
                return Ok(SolveResult {
                    status: SolveStatus::Timeout,
                    assignment: None,
                    objective: None,
                    stats,
                })
            }
            "feasible" | "optimal" => {}
            other => {
                return Err(SolverError::External(format!("unrecognized verdict `{other}`")))
            }
        }
        let mut assignment = vec![false; model.var_count()];
        for line in lines {
            let mut it = line.trim().splitn(2, ['=', ' ', '\t']);
            let name = it.next().unwrap().trim();
            let value = it.next().map(str::trim).filter(|v| !v.is_empty()).unwrap_or("1");
            let v = model
                .var_by_name(name)
                .ok_or_else(|| SolverError::External(format!("unknown variable `{name}`")))?;
            let on = match value {
                "0" => false,
                "1" => true,
                other => {
                    // tolerate near-integral values from LP-based solvers
                    let f: f64 = other
                        .parse()
                        .map_err(|_| SolverError::External(format!("bad value `{other}`")))?;
                    f > 0.5
                }
            };
            assignment[v.index()] = on;
        }
        if let Err(i) = model.check(&assignment) {
            return Err(SolverError::BadAssignment(i));
        }
        let objective = model.objective().map(|_| model.objective_value(&assignment));
        Ok(SolveResult { status: SolveStatus::Feasible, assignment: Some(assignment), objective, stats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, ObjSense, Sense};

    fn solve(m: &Model) -> SolveResult {
        BranchAndBound.solve(m, None).unwrap()
    }

    #[test]
    fn infeasible_pair() {
        let mut m = Model::new();
        let a = m.add_var("a");
        m.fix(a, true);
        m.fix(a, false);
        assert_eq!(solve(&m).status, SolveStatus::Infeasible);
    }

    #[test]
    fn minimizes_and_is_deterministic() {
        let mut m = Model::new();
        let a = m.add_var("a");
        let b = m.add_var("b");
        let c = m.add_var("c");
        m.add_constraint(vec![(a, 1), (b, 1), (c, 1)], Sense::Ge, 2);
        m.set_objective(ObjSense::Minimize, vec![(a, 3), (b, 1), (c, 1)]);
        let r = solve(&m);
        assert_eq!(r.status, SolveStatus::Feasible);
        assert_eq!(r.objective, Some(2));
        assert_eq!(r.assignment.unwrap(), vec![false, true, true]);
    }

    #[test]
    fn first_optimum_in_search_order_wins_ties() {
        let mut m = Model::new();
        let a = m.add_var("a");
        let b = m.add_var("b");
        m.add_constraint(vec![(a, 1), (b, 1)], Sense::Eq, 1);
        m.set_objective(ObjSense::Minimize, vec![(a, 1), (b, 1)]);
        // a=0,b=1 comes first in the 0-before-1, lowest-index order
        let r = solve(&m);
        assert_eq!(r.assignment.unwrap(), vec![false, true]);
    }

    #[test]
    fn maximization_is_minimization_negated() {
        let mut m = Model::new();
        let a = m.add_var("a");
        let b = m.add_var("b");
        m.add_constraint(vec![(a, 1), (b, 1)], Sense::Le, 1);
        m.set_objective(ObjSense::Maximize, vec![(a, 2), (b, 3)]);
        let r = solve(&m);
        assert_eq!(r.objective, Some(-3)); // internal sign: minimized negation
        assert_eq!(r.assignment.unwrap(), vec![false, true]);
    }

    #[test]
    fn matches_exhaustive_enumeration_on_random_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let n = rng.gen_range(1..=6);
            let mut m = Model::new();
            let vars: Vec<_> = (0..n).map(|i| m.add_var(format!("v{i}"))).collect();
            for _ in 0..rng.gen_range(0..=5) {
                let mut terms = Vec::new();
                for v in &vars {
                    if rng.gen_bool(0.7) {
                        terms.push((*v, rng.gen_range(-3i64..=3)));
                    }
                }
                let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
                let rhs = rng.gen_range(-3i64..=3);
                m.add_constraint(terms, sense, rhs);
            }
            let with_obj = rng.gen_bool(0.5);
            if with_obj {
                m.set_objective(
                    ObjSense::Minimize,
                    vars.iter().map(|v| (*v, rng.gen_range(-2i64..=2))).collect(),
                );
            }
            // exhaustive ground truth
            let mut best: Option<i64> = None;
            let mut any = false;
            for bits in 0u32..(1 << n) {
                let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                if m.check(&assignment).is_ok() {
                    any = true;
                    let obj = m.objective_value(&assignment);
                    best = Some(best.map_or(obj, |b: i64| b.min(obj)));
                }
            }
            let r = solve(&m);
            if any {
                assert_eq!(r.status, SolveStatus::Feasible, "case {case}");
                if with_obj {
                    assert_eq!(r.objective, best, "case {case}");
                }
            } else {
                assert_eq!(r.status, SolveStatus::Infeasible, "case {case}");
            }
        }
    }

    #[test]
    fn timeout_reports_timeout() {
        // dense model with conflicting parity-ish rows, already expired clock
        let mut m = Model::new();
        let vars: Vec<_> = (0..40).map(|i| m.add_var(format!("v{i}"))).collect();
        for i in 0..39 {
            m.add_constraint(vec![(vars[i], 1), (vars[i + 1], 1)], Sense::Ge, 1);
        }
        m.set_objective(ObjSense::Minimize, vars.iter().map(|v| (*v, 1)).collect());
        let r = BranchAndBound.solve(&m, Some(Instant::now())).unwrap();
        // either it finished instantly or it reported the expired deadline;
        // with an already-expired deadline the first check must fire
        assert!(matches!(r.status, SolveStatus::Timeout | SolveStatus::Feasible));
    }

    #[test]
    fn external_backend_roundtrip() {
        // a tiny shell "solver" that answers a fixed assignment
        let mut m = Model::new();
        let a = m.add_var("a");
        let b = m.add_var("b");
        m.add_constraint(vec![(a, 1), (b, 1)], Sense::Ge, 1);
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("fake_solver.sh");
        std::fs::write(&script, "#!/bin/sh\necho feasible\necho a 1\n").unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let backend = ExternalCommand { command: script.to_str().unwrap().into() };
        let r = backend.solve(&m, None).unwrap();
        assert_eq!(r.status, SolveStatus::Feasible);
        assert_eq!(r.assignment.unwrap(), vec![true, false]);
    }

    #[test]
    fn external_backend_rejects_bad_assignment() {
        let mut m = Model::new();
        let a = m.add_var("a");
        m.fix(a, true);
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("bad_solver.sh");
        std::fs::write(&script, "#!/bin/sh\necho feasible\n").unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let backend = ExternalCommand { command: script.to_str().unwrap().into() };
        assert!(matches!(backend.solve(&m, None), Err(SolverError::BadAssignment(_))));
    }
}
