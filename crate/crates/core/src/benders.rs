//! Cut-generation engine enumerating all inclusion-minimal feasible controls.
//!
//! The outer loop walks target sizes 0..=max_size. For each size, a master
//! model proposes candidate controls; every candidate is either certified
//! feasible (added to the result, excluded from later candidates together
//! with its supersets) or refuted by a cut:
//!
//! * attractor cut — derived from a concrete phenotype-violating orbit found
//!   by a fixed-length subproblem, excluding every control that keeps that
//!   orbit alive;
//! * trap-space cut — derived from a phenotype-violating closed subspace,
//!   aggregating many attractor cuts into one (sound once the length bound
//!   covers some attractor inside every such subspace);
//! * no-good cut — excludes exactly one candidate that admits no
//!   representable attractor at all.
//!
//! Cuts are valid independent of the target size, so the pool persists for
//! the whole run.

use crate::builder::{
    build_aggregated, build_master, build_separation, build_subproblem, Cut, CutKind,
    DynamicsVars, ModelContext,
};
use crate::dynamics::{AttractorWitness, ControlVector, TrapSpaceVector};
use crate::solver::{SolveStatus, SolverBackend, SolverError};
use serde_json::json;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Fixed-length models solved in ascending length order.
    Dec,
    /// One free-length model over the whole horizon.
    Agg,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Dec => "DEC",
            Strategy::Agg => "AGG",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub t_max: usize,
    pub use_ts_cut: bool,
    pub strategy: Strategy,
    pub max_size: usize,
    pub time_limit: Option<Duration>,
    /// Count a control with no attractor within the length bound as feasible
    /// instead of rejecting it.
    pub accept_no_attractor: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            t_max: 5,
            use_ts_cut: false,
            strategy: Strategy::Dec,
            max_size: 7,
            time_limit: Some(Duration::from_secs(600)),
            accept_no_attractor: false,
        }
    }
}

/// Per-gene witness summary used by the attractor cut: whether the gene is
/// constant over the orbit, whether it follows its transition formula at
/// every step, and its value at time 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Indicators {
    pub constant: bool,
    pub follows_formula: bool,
    pub first_value: bool,
}

/// Computes the indicator triple for every controllable gene (in `d_order`)
/// from a solved dynamics block. Time 0 wraps to the final time through the
/// block's `y0` handles.
pub fn compute_indicators(
    ctx: &ModelContext,
    vars: &DynamicsVars,
    assignment: &[bool],
) -> Vec<Indicators> {
    let horizon = vars.horizon;
    let val = |v: crate::model::VarId| assignment[v.index()];
    ctx.d_order
        .iter()
        .map(|j| {
            let x = &vars.x[j.index()];
            let first_value = val(x[0]);
            let constant = x.iter().all(|v| val(*v) == first_value);
            let (s, e) = ctx.clause_ranges[j.index()];
            let follows_formula = (1..=horizon).all(|t| {
                let conj = (s..e).all(|c| {
                    if t == 1 {
                        val(vars.y0[c])
                    } else {
                        val(vars.y[c][t - 2])
                    }
                });
                val(x[t - 1]) == conj
            });
            Indicators { constant, follows_formula, first_value }
        })
        .collect()
}

/// Cut excluding every control under which the witnessed orbit survives:
/// fixing a non-constant gene, fixing a formula-following gene to its negated
/// value, or failing to pin a gene that deviates from its formula all break
/// the orbit.
pub fn attractor_cut(ctx: &ModelContext, indicators: &[Indicators]) -> Cut {
    let mut terms = Vec::new();
    let mut rhs = 1i64;
    for (j, ind) in ctx.d_order.iter().zip(indicators) {
        let alpha = ind.constant as i64;
        let beta = ind.follows_formula as i64;
        let k = ind.first_value;
        let coeff_k = beta - alpha;
        if coeff_k != 0 {
            terms.push((*j, k, coeff_k));
        }
        if beta != 0 {
            terms.push((*j, !k, beta));
        }
        rhs -= 1 - beta;
    }
    terms.sort_by_key(|(g, k, _)| (*g, *k));
    Cut { terms, rhs, kind: CutKind::Attractor }
}

/// Cut derived from a phenotype-violating closed subspace `h` under control
/// `u`: a surviving control must release a fixing of `u` or override a fixed
/// value of `h`.
pub fn trap_space_cut(ctx: &ModelContext, u: &ControlVector, h: &TrapSpaceVector) -> Cut {
    let mut terms = Vec::new();
    for j in &ctx.d_order {
        for m in [false, true] {
            let u_m = u.fixed_value(*j) == Some(m);
            let u_other = u.fixed_value(*j) == Some(!m);
            let h_other = h.fixed_value(*j) == Some(!m);
            let coeff = -(u_m as i64) + (!u_other as i64) * (h_other as i64);
            if coeff != 0 {
                terms.push((*j, m, coeff));
            }
        }
    }
    let rhs = 1 - u.size() as i64;
    Cut { terms, rhs, kind: CutKind::TrapSpace }
}

/// Cut excluding exactly the given candidate (Hamming distance >= 1).
pub fn no_good_cut(ctx: &ModelContext, d: &ControlVector) -> Cut {
    let mut terms = Vec::new();
    for j in &ctx.d_order {
        for k in [false, true] {
            let dk = d.fixed_value(*j) == Some(k);
            terms.push((*j, k, 1 - 2 * dk as i64));
        }
    }
    terms.sort_by_key(|(g, k, _)| (*g, *k));
    Cut { terms, rhs: 1 - d.size() as i64, kind: CutKind::NoGood }
}

// ---------------------------------------------------------------------------
// the enumeration loop

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct CutRecord {
    pub cut: Cut,
    pub lambda: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct DiscoveryRecord {
    pub control: ControlVector,
    pub lambda: usize,
    pub elapsed: Duration,
}

/// One refuted candidate together with the orbit that refuted it; kept for
/// post-hoc property checks and reporting.
#[derive(Debug, Clone)]
pub struct WitnessRecord {
    pub candidate: ControlVector,
    pub witness: AttractorWitness,
    pub indicators: Vec<Indicators>,
}

/// One subspace-based refutation: the inducing control, the subspace, and
/// the candidate it excluded.
#[derive(Debug, Clone)]
pub struct SeparationRecord {
    pub candidate: ControlVector,
    pub u: ControlVector,
    pub h: TrapSpaceVector,
}

#[derive(Debug)]
pub struct EnumerationReport {
    pub controls: Vec<DiscoveryRecord>,
    pub cuts: Vec<CutRecord>,
    pub witnesses: Vec<WitnessRecord>,
    pub separations: Vec<SeparationRecord>,
    /// Target sizes fully exhausted before any timeout.
    pub completed_sizes: Vec<usize>,
    pub status: RunStatus,
    pub master_solves: u64,
    pub wall: Duration,
    /// False when trap-space cuts are used with a length bound too small to
    /// guarantee their validity; results may then be approximate.
    pub exact: bool,
    pub options: EnumerateOptions,
}

impl EnumerationReport {
    pub fn control_set(&self) -> Vec<ControlVector> {
        self.controls.iter().map(|r| r.control.clone()).collect()
    }

    pub fn mode_label(&self) -> &'static str {
        if self.exact {
            "exact"
        } else {
            "heuristic"
        }
    }

    /// `(count, mean literal count)` for one cut kind.
    pub fn cut_stats(&self, kind: CutKind) -> (usize, f64) {
        let literals: Vec<usize> = self
            .cuts
            .iter()
            .filter(|r| r.cut.kind == kind)
            .map(|r| r.cut.literal_count())
            .collect();
        let count = literals.len();
        let mean = if count == 0 {
            0.0
        } else {
            literals.iter().sum::<usize>() as f64 / count as f64
        };
        (count, mean)
    }

    /// Versioned machine-readable report. Timing fields are confined to
    /// `generated_unix_ms` and `wall_ms` so reports from identical runs can
    /// be compared after dropping those two keys.
    pub fn to_json(&self, ctx: &ModelContext) -> serde_json::Value {
        let controls: Vec<Vec<String>> =
            self.controls.iter().map(|r| r.control.to_strings(&ctx.bn)).collect();
        let cut_kinds = [CutKind::Attractor, CutKind::TrapSpace, CutKind::NoGood];
        let cuts: serde_json::Map<String, serde_json::Value> = cut_kinds
            .iter()
            .map(|k| {
                let (count, mean) = self.cut_stats(*k);
                (k.label().to_string(), json!({"count": count, "mean_literals": mean}))
            })
            .collect();
        json!({
            "schema": 1,
            "generated_unix_ms": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            "network_source": ctx.bn.print(),
            "options": {
                "t_max": self.options.t_max,
                "use_ts_cut": self.options.use_ts_cut,
                "strategy": self.options.strategy.label(),
                "max_size": self.options.max_size,
                "accept_no_attractor": self.options.accept_no_attractor,
            },
            "mode": self.mode_label(),
            "status": match self.status {
                RunStatus::Complete => "complete",
                RunStatus::TimedOut => "timeout-partial",
            },
            "completed_sizes": self.completed_sizes,
            "controls": controls,
            "cuts": cuts,
            "master_solves": self.master_solves,
            "wall_ms": self.wall.as_millis() as u64,
        })
    }

    /// Cumulative discovery rows: `elapsed_seconds,count`.
    pub fn progress_csv(&self) -> String {
        let mut out = String::from("elapsed_seconds,count\n");
        for (i, r) in self.controls.iter().enumerate() {
            out.push_str(&format!("{:.3},{}\n", r.elapsed.as_secs_f64(), i + 1));
        }
        out
    }

    /// Per-kind cut statistics rows: `kind,count,mean_literals`.
    pub fn cut_stats_csv(&self) -> String {
        let mut out = String::from("kind,count,mean_literals\n");
        for kind in [CutKind::Attractor, CutKind::TrapSpace, CutKind::NoGood] {
            let (count, mean) = self.cut_stats(kind);
            out.push_str(&format!("{},{count},{mean:.2}\n", kind.label()));
        }
        out
    }
}

/// Outcome of probing one candidate against the dynamics models.
enum CandidateVerdict {
    Forbidden(WitnessRecord),
    Feasible,
    NoAttractor,
}

pub fn enumerate(
    ctx: &ModelContext,
    opts: &EnumerateOptions,
    backend: &dyn SolverBackend,
) -> Result<EnumerationReport, SolverError> {
    assert!(opts.t_max >= 1, "length bound must be positive");
    let start = Instant::now();
    let deadline = opts.time_limit.map(|l| start + l);
    let original_genes = ctx.bn.gene_count() - 1;
    // trap-space cuts are guaranteed valid once every closed subspace
    // contains an attractor within the bound; 2^(gene count) always suffices
    let exact = !opts.use_ts_cut
        || original_genes >= 64
        || opts.t_max >= 1usize << original_genes.min(63);

    let mut report = EnumerationReport {
        controls: Vec::new(),
        cuts: Vec::new(),
        witnesses: Vec::new(),
        separations: Vec::new(),
        completed_sizes: Vec::new(),
        status: RunStatus::Complete,
        master_solves: 0,
        wall: Duration::ZERO,
        exact,
        options: opts.clone(),
    };
    let mut cuts: Vec<Cut> = Vec::new();
    let mut known: Vec<ControlVector> = Vec::new();

    'sizes: for lambda in 0..=opts.max_size.min(ctx.d_order.len()) {
        loop {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                report.status = RunStatus::TimedOut;
                break 'sizes;
            }
            let (master, mvars) = build_master(ctx, lambda, &known, &cuts);
            let r = backend.solve(&master, deadline)?;
            report.master_solves += 1;
            match r.status {
                SolveStatus::Timeout => {
                    report.status = RunStatus::TimedOut;
                    break 'sizes;
                }
                SolveStatus::Infeasible => {
                    report.completed_sizes.push(lambda);
                    break;
                }
                SolveStatus::Feasible => {}
            }
            let d = mvars.decode(ctx, r.assignment.as_ref().unwrap());
            log::debug!("size {lambda}: candidate {:?}", d.to_strings(&ctx.bn));

            if opts.use_ts_cut {
                let (sep, svars) = build_separation(ctx, &d);
                let rs = backend.solve(&sep, deadline)?;
                match rs.status {
                    SolveStatus::Timeout => {
                        report.status = RunStatus::TimedOut;
                        break 'sizes;
                    }
                    SolveStatus::Feasible => {
                        let (u, h) = svars.decode(ctx, rs.assignment.as_ref().unwrap());
                        let cut = trap_space_cut(ctx, &u, &h);
                        debug_assert!(cut.excludes(&d));
                        report.cuts.push(CutRecord {
                            cut: cut.clone(),
                            lambda,
                            elapsed: start.elapsed(),
                        });
                        report.separations.push(SeparationRecord { candidate: d, u, h });
                        cuts.push(cut);
                        continue;
                    }
                    SolveStatus::Infeasible => {} // fall through to subproblems
                }
            }

            let verdict = match probe_candidate(ctx, opts, backend, deadline, &d)? {
                None => {
                    report.status = RunStatus::TimedOut;
                    break 'sizes;
                }
                Some(v) => v,
            };
            match verdict {
                CandidateVerdict::Forbidden(record) => {
                    let cut = attractor_cut(ctx, &record.indicators);
                    debug_assert!(cut.excludes(&d));
                    report.cuts.push(CutRecord {
                        cut: cut.clone(),
                        lambda,
                        elapsed: start.elapsed(),
                    });
                    report.witnesses.push(record);
                    cuts.push(cut);
                }
                CandidateVerdict::Feasible => {
                    report.controls.push(DiscoveryRecord {
                        control: d.clone(),
                        lambda,
                        elapsed: start.elapsed(),
                    });
                    known.push(d);
                }
                CandidateVerdict::NoAttractor => {
                    if opts.accept_no_attractor {
                        report.controls.push(DiscoveryRecord {
                            control: d.clone(),
                            lambda,
                            elapsed: start.elapsed(),
                        });
                        known.push(d);
                    } else {
                        let cut = no_good_cut(ctx, &d);
                        debug_assert!(cut.excludes(&d));
                        report.cuts.push(CutRecord {
                            cut: cut.clone(),
                            lambda,
                            elapsed: start.elapsed(),
                        });
                        cuts.push(cut);
                    }
                }
            }
        }
    }
    report.wall = start.elapsed();
    Ok(report)
}

/// Classifies a candidate. `Ok(None)` signals a solver timeout.
fn probe_candidate(
    ctx: &ModelContext,
    opts: &EnumerateOptions,
    backend: &dyn SolverBackend,
    deadline: Option<Instant>,
    d: &ControlVector,
) -> Result<Option<CandidateVerdict>, SolverError> {
    match opts.strategy {
        Strategy::Dec => {
            // violation queries in ascending length order: the first hit is a
            // shortest forbidden orbit
            for t in 1..=opts.t_max {
                let (mut m, vars) = build_subproblem(ctx, d, t);
                m.fix(vars.p, false);
                m.clear_objective();
                let r = backend.solve(&m, deadline)?;
                match r.status {
                    SolveStatus::Timeout => return Ok(None),
                    SolveStatus::Infeasible => continue,
                    SolveStatus::Feasible => {
                        let a = r.assignment.unwrap();
                        return Ok(Some(CandidateVerdict::Forbidden(make_witness(
                            ctx, &vars, &a, d,
                        ))));
                    }
                }
            }
            // no violation: does any orbit exist at all?
            for t in 1..=opts.t_max {
                let (mut m, _) = build_subproblem(ctx, d, t);
                m.clear_objective();
                let r = backend.solve(&m, deadline)?;
                match r.status {
                    SolveStatus::Timeout => return Ok(None),
                    SolveStatus::Infeasible => continue,
                    SolveStatus::Feasible => return Ok(Some(CandidateVerdict::Feasible)),
                }
            }
            Ok(Some(CandidateVerdict::NoAttractor))
        }
        Strategy::Agg => {
            let (mut m, vars) = build_aggregated(ctx, d, opts.t_max);
            m.fix(vars.dyn_vars.p, false);
            m.clear_objective();
            let r = backend.solve(&m, deadline)?;
            match r.status {
                SolveStatus::Timeout => return Ok(None),
                SolveStatus::Feasible => {
                    let a = r.assignment.unwrap();
                    return Ok(Some(CandidateVerdict::Forbidden(make_witness(
                        ctx,
                        &vars.dyn_vars,
                        &a,
                        d,
                    ))));
                }
                SolveStatus::Infeasible => {}
            }
            let (mut m, _) = build_aggregated(ctx, d, opts.t_max);
            m.clear_objective();
            let r = backend.solve(&m, deadline)?;
            match r.status {
                SolveStatus::Timeout => Ok(None),
                SolveStatus::Feasible => Ok(Some(CandidateVerdict::Feasible)),
                SolveStatus::Infeasible => Ok(Some(CandidateVerdict::NoAttractor)),
            }
        }
    }
}

fn make_witness(
    ctx: &ModelContext,
    vars: &DynamicsVars,
    assignment: &[bool],
    candidate: &ControlVector,
) -> WitnessRecord {
    let states: Vec<u64> = (1..=vars.horizon)
        .map(|t| {
            let mut s = 0u64;
            for (i, per_t) in vars.x.iter().enumerate() {
                if assignment[per_t[t - 1].index()] {
                    s |= 1 << i;
                }
            }
            s
        })
        .collect();
    let indicators = compute_indicators(ctx, vars, assignment);
    WitnessRecord {
        candidate: candidate.clone(),
        witness: AttractorWitness { length: vars.horizon, states },
        indicators,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::ClauseSet;
    use crate::dynamics::oracle_minimal_controls;
    use crate::expr::GeneId;
    use crate::network::{parse_and_augment, FIG1_BNET};
    use crate::solver::BranchAndBound;

    fn fig1_ctx() -> ModelContext {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        ModelContext::new(bn, cs)
    }

    fn ctrl(ctx: &ModelContext, pairs: &[(&str, bool)]) -> ControlVector {
        ControlVector::from_pairs(
            pairs.iter().map(|(n, v)| (ctx.bn.gene_by_name(n).unwrap(), *v)).collect(),
        )
    }

    fn run(ctx: &ModelContext, opts: &EnumerateOptions) -> EnumerationReport {
        enumerate(ctx, opts, &BranchAndBound).unwrap()
    }

    fn sorted_set(mut v: Vec<ControlVector>) -> Vec<ControlVector> {
        v.sort();
        v
    }

    #[test]
    fn attractor_cut_from_all_zero_fixed_point() {
        // the all-zero fixed point: every controllable gene constant and
        // following its formula -> cut d1_x1 + d1_x2 + d1_x3 >= 1
        let ctx = fig1_ctx();
        let ind = vec![
            Indicators { constant: true, follows_formula: true, first_value: false };
            3
        ];
        let cut = attractor_cut(&ctx, &ind);
        assert_eq!(cut.rhs, 1);
        assert_eq!(
            cut.terms,
            vec![(GeneId(0), true, 1), (GeneId(1), true, 1), (GeneId(2), true, 1)]
        );
        assert!(cut.excludes(&ControlVector::empty()));
        assert!(!cut.excludes(&ctrl(&ctx, &[("x2", true)])));
    }

    #[test]
    fn attractor_cut_with_formula_deviation() {
        // a gene held constant against its formula must stay pinned:
        // term (1 - d^k) appears as rhs reduction plus negative coefficient
        let ctx = fig1_ctx();
        let ind = vec![
            Indicators { constant: true, follows_formula: false, first_value: true },
            Indicators { constant: true, follows_formula: true, first_value: false },
            Indicators { constant: true, follows_formula: true, first_value: false },
        ];
        let cut = attractor_cut(&ctx, &ind);
        // (1 - d1_x1) + d1_x2 + d1_x3 >= 1  ->  -d1_x1 + d1_x2 + d1_x3 >= 0
        assert_eq!(cut.rhs, 0);
        assert_eq!(
            cut.terms,
            vec![(GeneId(0), true, -1), (GeneId(1), true, 1), (GeneId(2), true, 1)]
        );
        // the control fixing x1 to 1 keeps the orbit: not excluded is wrong,
        // it must BE excluded (it satisfies no term)
        assert!(cut.excludes(&ctrl(&ctx, &[("x1", true)])));
        assert!(!cut.excludes(&ctrl(&ctx, &[("x2", true)])));
    }

    #[test]
    fn trap_space_cut_for_all_zero_subspace() {
        let ctx = fig1_ctx();
        let h = TrapSpaceVector::from_pairs((0..4).map(|i| (GeneId(i), false)).collect());
        let cut = trap_space_cut(&ctx, &ControlVector::empty(), &h);
        assert_eq!(cut.rhs, 1);
        assert_eq!(
            cut.terms,
            vec![(GeneId(0), true, 1), (GeneId(1), true, 1), (GeneId(2), true, 1)]
        );
        assert_eq!(cut.literal_count(), 3);
    }

    #[test]
    fn trap_space_cut_with_controlled_fix() {
        // u = h fixing one gene to 1: cut (1 - d1) >= 1, i.e. -d1 >= 0
        let ctx = fig1_ctx();
        let u = ctrl(&ctx, &[("x2", true)]);
        let h = TrapSpaceVector::from_pairs(vec![(ctx.bn.gene_by_name("x2").unwrap(), true)]);
        let cut = trap_space_cut(&ctx, &u, &h);
        assert_eq!(cut.rhs, 0);
        assert_eq!(cut.terms, vec![(GeneId(1), true, -1)]);
        assert!(cut.excludes(&u));
        assert!(!cut.excludes(&ControlVector::empty()));
    }

    #[test]
    fn no_good_cut_excludes_only_its_candidate() {
        let ctx = fig1_ctx();
        let d = ctrl(&ctx, &[("x2", true)]);
        let cut = no_good_cut(&ctx, &d);
        assert_eq!(cut.terms.len(), 6);
        assert!(cut.excludes(&d));
        for other in [
            ControlVector::empty(),
            ctrl(&ctx, &[("x2", false)]),
            ctrl(&ctx, &[("x1", true)]),
            ctrl(&ctx, &[("x2", true), ("x3", true)]),
        ] {
            assert!(!cut.excludes(&other), "{:?}", other.to_strings(&ctx.bn));
        }
    }

    #[test]
    fn worked_example_exact_enumeration() {
        let ctx = fig1_ctx();
        let opts = EnumerateOptions { t_max: 3, max_size: 2, ..Default::default() };
        let report = run(&ctx, &opts);
        assert_eq!(report.status, RunStatus::Complete);
        assert!(report.exact);
        let expected = oracle_minimal_controls(&ctx.bn, Some(3), 2, false).unwrap();
        assert_eq!(sorted_set(report.control_set()), sorted_set(expected));
        assert!(report.control_set().contains(&ctrl(&ctx, &[("x2", true)])));
        assert_eq!(report.completed_sizes, vec![0, 1, 2]);
    }

    #[test]
    fn worked_example_all_strategies_agree() {
        let ctx = fig1_ctx();
        let oracle = sorted_set(oracle_minimal_controls(&ctx.bn, Some(3), 3, false).unwrap());
        for strategy in [Strategy::Dec, Strategy::Agg] {
            for use_ts_cut in [false, true] {
                let opts = EnumerateOptions {
                    t_max: 3,
                    max_size: 3,
                    strategy,
                    use_ts_cut,
                    ..Default::default()
                };
                let report = run(&ctx, &opts);
                assert_eq!(
                    sorted_set(report.control_set()),
                    oracle,
                    "strategy {strategy:?}, ts {use_ts_cut}"
                );
            }
        }
    }

    #[test]
    fn first_trap_space_cut_has_three_literals() {
        let ctx = fig1_ctx();
        let opts =
            EnumerateOptions { t_max: 3, max_size: 2, use_ts_cut: true, ..Default::default() };
        let report = run(&ctx, &opts);
        let ts: Vec<&CutRecord> =
            report.cuts.iter().filter(|c| c.cut.kind == CutKind::TrapSpace).collect();
        assert!(!ts.is_empty());
        assert_eq!(ts[0].cut.literal_count(), 3);
        let (count, mean) = report.cut_stats(CutKind::TrapSpace);
        assert_eq!(count, ts.len());
        assert!(mean > 0.0);
    }

    #[test]
    fn dec_witnesses_have_minimal_forbidden_length() {
        // each attractor-cut witness must be a shortest forbidden orbit of
        // its candidate
        let ctx = fig1_ctx();
        let opts = EnumerateOptions { t_max: 4, max_size: 2, ..Default::default() };
        let report = run(&ctx, &opts);
        assert!(!report.witnesses.is_empty());
        let phi = ctx.phenotype();
        for rec in &report.witnesses {
            let attrs =
                crate::dynamics::enumerate_attractors(&ctx.bn, &rec.candidate, Some(opts.t_max))
                    .unwrap();
            let min_forbidden = attrs
                .iter()
                .filter(|a| a.is_forbidden(phi))
                .map(|a| a.length)
                .min()
                .expect("cut without a forbidden attractor");
            assert_eq!(rec.witness.length, min_forbidden);
            // the recorded orbit really is an orbit of the controlled system
            let controlled = crate::dynamics::apply_control(&ctx.bn, &rec.candidate);
            assert!(rec.witness.is_orbit_of(&controlled));
            assert!(rec.witness.is_forbidden(phi));
        }
    }

    #[test]
    fn no_attractor_candidates_are_rejected_by_default() {
        // one gene flipping forever: no orbit of length 1 exists
        let bn = crate::network::parse_bnet("a, !a\n").unwrap();
        let bn =
            crate::network::augment_phenotype(&bn, crate::expr::BoolExpr::Var(GeneId(0))).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        let ctx = ModelContext::new(bn, cs);
        let opts = EnumerateOptions { t_max: 1, max_size: 0, ..Default::default() };
        let report = run(&ctx, &opts);
        assert!(report.control_set().is_empty());
        assert_eq!(report.cuts.len(), 1);
        assert_eq!(report.cuts[0].cut.kind, CutKind::NoGood);

        // flipped handling: the same candidate is accepted
        let opts = EnumerateOptions { accept_no_attractor: true, ..opts };
        let report = run(&ctx, &opts);
        assert_eq!(report.control_set(), vec![ControlVector::empty()]);
    }

    #[test]
    fn trivial_phenotype_terminates_after_empty_control() {
        let bn = crate::network::parse_bnet("a, !a\nb, a | b\n").unwrap();
        let bn =
            crate::network::augment_phenotype(&bn, crate::expr::BoolExpr::Const(true)).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        let ctx = ModelContext::new(bn, cs);
        let opts = EnumerateOptions { t_max: 2, max_size: 2, ..Default::default() };
        let report = run(&ctx, &opts);
        assert_eq!(report.control_set(), vec![ControlVector::empty()]);
    }

    #[test]
    fn termination_bound_holds() {
        let ctx = fig1_ctx();
        let opts = EnumerateOptions { t_max: 3, max_size: 3, ..Default::default() };
        let report = run(&ctx, &opts);
        let j = ctx.d_order.len() as u64;
        // every master solve either closes a size or removes a candidate;
        // 3^|J| candidates and |J|+1 sizes bound the total
        assert!(report.master_solves <= 3u64.pow(j as u32) + j + 1);
    }

    #[test]
    fn report_json_shape() {
        let ctx = fig1_ctx();
        let opts = EnumerateOptions { t_max: 3, max_size: 2, ..Default::default() };
        let report = run(&ctx, &opts);
        let v = report.to_json(&ctx);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["status"], "complete");
        assert_eq!(v["mode"], "exact");
        let controls = v["controls"].as_array().unwrap();
        assert!(controls.iter().any(|c| c == &json!(["x2=1"])));
        assert!(v["cuts"]["attractor"]["count"].as_u64().unwrap() > 0);
        // progress rows monotone
        let csv = report.progress_csv();
        let mut last = (0.0, 0u64);
        for line in csv.lines().skip(1) {
            let (t, c) = line.split_once(',').unwrap();
            let t: f64 = t.parse().unwrap();
            let c: u64 = c.parse().unwrap();
            assert!(t >= last.0 && c > last.1);
            last = (t, c);
        }
        let stats = report.cut_stats_csv();
        assert!(stats.starts_with("kind,count,mean_literals\n"));
    }

    #[test]
    fn heuristic_label_reflects_configuration() {
        let ctx = fig1_ctx();
        let short =
            EnumerateOptions { t_max: 2, use_ts_cut: true, max_size: 1, ..Default::default() };
        assert_eq!(run(&ctx, &short).mode_label(), "heuristic");
        let ample =
            EnumerateOptions { t_max: 8, use_ts_cut: true, max_size: 1, ..Default::default() };
        assert_eq!(run(&ctx, &ample).mode_label(), "exact");
        let no_ts = EnumerateOptions { t_max: 2, use_ts_cut: false, max_size: 1, ..Default::default() };
        assert_eq!(run(&ctx, &no_ts).mode_label(), "exact");
    }

    #[test]
    fn timeout_yields_partial_report() {
        let ctx = fig1_ctx();
        let opts = EnumerateOptions {
            t_max: 3,
            max_size: 3,
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        let report = run(&ctx, &opts);
        assert_eq!(report.status, RunStatus::TimedOut);
        let v = report.to_json(&ctx);
        assert_eq!(v["status"], "timeout-partial");
    }

    #[test]
    fn seed_order_changes_nothing_but_order() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        let natural = ModelContext::new(bn.clone(), cs.clone());
        let permuted = ModelContext::with_order(
            bn,
            cs,
            vec![GeneId(2), GeneId(0), GeneId(1)],
        );
        let opts = EnumerateOptions { t_max: 3, max_size: 2, ..Default::default() };
        let a = sorted_set(run(&natural, &opts).control_set());
        let b = sorted_set(run(&permuted, &opts).control_set());
        assert_eq!(a, b);
    }
}
