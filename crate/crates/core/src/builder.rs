//! Builders for the integer linear models of the enumeration engine.
//!
//! All models share one encoding of the synchronous dynamics over a horizon
//! `1..=T`: gene state variables `x[i][t]`, clause truth variables `y[c][t]`
//! for every clause of every transition formula, a length selector `w[t]`,
//! and a phenotype conjunction variable `p`. Clause variables at time 0 close
//! the cycle: a fixed-length model substitutes `y[c][0] = y[c][T]`, while the
//! free-length model keeps `y[c][0]` as variables tied to the selected length
//! by the wrap constraints.

use crate::cnf::{Clause, ClauseSet};
use crate::dynamics::{ControlVector, TrapSpaceVector};
use crate::expr::GeneId;
use crate::model::{Model, ObjSense, Sense, VarId};
use crate::network::BooleanNetwork;
use serde::{Deserialize, Serialize};

/// Immutable data shared by all model builders for one network.
pub struct ModelContext {
    pub bn: BooleanNetwork,
    pub clauses: ClauseSet,
    /// Controllable genes in the order their `d` variables are created; this
    /// order drives the deterministic candidate enumeration.
    pub d_order: Vec<GeneId>,
    /// Flattened clause list of all transition formulas.
    pub clause_list: Vec<(GeneId, Clause)>,
    /// Per gene: `(start, end)` range into `clause_list`.
    pub clause_ranges: Vec<(usize, usize)>,
}

impl ModelContext {
    pub fn new(bn: BooleanNetwork, clauses: ClauseSet) -> Self {
        let d_order = bn.controllable_genes();
        Self::with_order(bn, clauses, d_order)
    }

    /// `d_order` must be a permutation of the controllable genes.
    pub fn with_order(bn: BooleanNetwork, clauses: ClauseSet, d_order: Vec<GeneId>) -> Self {
        {
            let mut sorted = d_order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, bn.controllable_genes(), "d_order must permute controllable genes");
        }
        let mut clause_list = Vec::new();
        let mut clause_ranges = Vec::with_capacity(bn.gene_count());
        for i in 0..bn.gene_count() {
            let start = clause_list.len();
            for c in clauses.clauses_of(GeneId(i), true) {
                clause_list.push((GeneId(i), c.clone()));
            }
            clause_ranges.push((start, clause_list.len()));
        }
        ModelContext { bn, clauses, d_order, clause_list, clause_ranges }
    }

    pub fn phenotype(&self) -> GeneId {
        self.bn.phenotype_gene().expect("context requires an augmented network")
    }

    fn clause_range(&self, g: GeneId) -> std::ops::Range<usize> {
        let (s, e) = self.clause_ranges[g.index()];
        s..e
    }
}

/// A linear inequality `sum(coeff * d) >= rhs` over the control variables,
/// recorded independently of any concrete model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    /// `(gene, value, coefficient)` with nonzero coefficients only.
    pub terms: Vec<(GeneId, bool, i64)>,
    pub rhs: i64,
    pub kind: CutKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    Attractor,
    TrapSpace,
    NoGood,
}

impl CutKind {
    pub fn label(self) -> &'static str {
        match self {
            CutKind::Attractor => "attractor",
            CutKind::TrapSpace => "trap-space",
            CutKind::NoGood => "no-good",
        }
    }
}

impl Cut {
    /// Number of control variables appearing with a nonzero coefficient.
    pub fn literal_count(&self) -> usize {
        self.terms.len()
    }

    pub fn excludes(&self, control: &ControlVector) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .map(|(g, k, c)| if control.fixed_value(*g) == Some(*k) { *c } else { 0 })
            .sum();
        lhs < self.rhs
    }
}

// ---------------------------------------------------------------------------
// shared pieces

/// Variable handles of a dynamics block over `t = 1..=horizon`.
pub struct DynamicsVars {
    pub horizon: usize,
    /// `x[i][t-1]`: state of gene `i` at time `t`.
    pub x: Vec<Vec<VarId>>,
    /// `y[c][t-1]`: truth of flattened clause `c` at time `t`.
    pub y: Vec<Vec<VarId>>,
    /// Clause truth at time 0; either its own variables (free-length models)
    /// or aliases of `y[c][horizon-1]` (fixed-length models).
    pub y0: Vec<VarId>,
    pub p: VarId,
}

impl DynamicsVars {
    pub fn x_at(&self, i: GeneId, t: usize) -> VarId {
        self.x[i.index()][t - 1]
    }
}

/// Creates x/y variables and posts the transition, clause-definition, and
/// phenotype constraints. `control` fixes controlled genes as data; pass the
/// empty control and `d_vars` to keep the control symbolic.
struct DynamicsBuilder<'a> {
    ctx: &'a ModelContext,
    horizon: usize,
    /// `Some`: control is data. `None`: control appears via `d_vars`.
    control: Option<&'a ControlVector>,
    /// `(d0, d1)` per controllable gene, aligned with `ctx.d_order`.
    d_vars: Option<&'a [(VarId, VarId)]>,
}

impl<'a> DynamicsBuilder<'a> {
    fn d_pair(&self, j: GeneId) -> (VarId, VarId) {
        let pos = self.ctx.d_order.iter().position(|g| *g == j).unwrap();
        self.d_vars.unwrap()[pos]
    }

    fn build(&self, m: &mut Model, free_y0: bool) -> DynamicsVars {
        let ctx = self.ctx;
        let n = ctx.bn.gene_count();
        let horizon = self.horizon;
        // time-major creation: the solver branches in creation order, so the
        // whole state at time 1 comes first and later times mostly propagate
        let mut x: Vec<Vec<VarId>> = vec![Vec::with_capacity(horizon); n];
        let mut y: Vec<Vec<VarId>> = vec![Vec::with_capacity(horizon); ctx.clause_list.len()];
        for t in 1..=horizon {
            for (i, per_gene) in x.iter_mut().enumerate() {
                per_gene.push(m.add_var(format!("x_{}_t{t}", ctx.bn.gene_name(GeneId(i)))));
            }
            for (c, per_clause) in y.iter_mut().enumerate() {
                per_clause.push(m.add_var(format!("y{c}_t{t}")));
            }
        }
        let y0: Vec<VarId> = if free_y0 {
            (0..ctx.clause_list.len()).map(|c| m.add_var(format!("y{c}_t0"))).collect()
        } else {
            // wrap by substitution: time 0 is time `horizon`
            y.iter().map(|per_t| per_t[horizon - 1]).collect()
        };
        let p = m.add_var("p");

        let y_at = |c: usize, t: usize| if t == 0 { y0[c] } else { y[c][t - 1] };

        for i in 0..n {
            let g = GeneId(i);
            let controllable = ctx.bn.is_controllable(g);
            let fixed = self.control.and_then(|d| d.fixed_value(g));
            let range = ctx.clause_range(g);
            for t in 1..=horizon {
                let xv = x[i][t - 1];
                if let Some(k) = fixed {
                    // controlled gene: activation level pinned, transition
                    // constraints vacuous
                    m.fix(xv, k);
                    continue;
                }
                if controllable && self.d_vars.is_some() {
                    let (d0, d1) = self.d_pair(g);
                    // x <= 1 - d0 ; x >= d1
                    m.add_constraint(vec![(xv, 1), (d0, 1)], Sense::Le, 1);
                    m.add_constraint(vec![(xv, 1), (d1, -1)], Sense::Ge, 0);
                    // x <= y_{c,t-1} + d0 + d1
                    for c in range.clone() {
                        m.add_constraint(
                            vec![(xv, 1), (y_at(c, t - 1), -1), (d0, -1), (d1, -1)],
                            Sense::Le,
                            0,
                        );
                    }
                    // x >= 1 - sum(1 - y) - d0 - d1
                    let mut terms = vec![(xv, 1), (d0, 1), (d1, 1)];
                    for c in range.clone() {
                        terms.push((y_at(c, t - 1), -1));
                    }
                    m.add_constraint(terms, Sense::Ge, 1 - range.len() as i64);
                } else {
                    // uncontrolled transition: x <-> conjunction of clauses
                    for c in range.clone() {
                        m.add_constraint(vec![(xv, 1), (y_at(c, t - 1), -1)], Sense::Le, 0);
                    }
                    let mut terms = vec![(xv, 1)];
                    for c in range.clone() {
                        terms.push((y_at(c, t - 1), -1));
                    }
                    m.add_constraint(terms, Sense::Ge, 1 - range.len() as i64);
                }
            }
        }

        // clause definitions: y <-> disjunction of its literals, t = 1..=T
        for (c, (_, clause)) in ctx.clause_list.iter().enumerate() {
            for t in 1..=horizon {
                let yv = y[c][t - 1];
                let mut upper = vec![(yv, 1)];
                for l in &clause.pos {
                    let xv = x[l.index()][t - 1];
                    m.add_constraint(vec![(yv, 1), (xv, -1)], Sense::Ge, 0);
                    upper.push((xv, -1));
                }
                let mut neg_count = 0;
                for l in &clause.neg {
                    let xv = x[l.index()][t - 1];
                    m.add_constraint(vec![(yv, 1), (xv, 1)], Sense::Ge, 1);
                    upper.push((xv, 1));
                    neg_count += 1;
                }
                m.add_constraint(upper, Sense::Le, neg_count);
            }
        }

        // phenotype conjunction: p <-> all x_phi
        let phi = ctx.phenotype();
        let mut lower = vec![(p, 1)];
        for t in 1..=horizon {
            let xv = x[phi.index()][t - 1];
            m.add_constraint(vec![(p, 1), (xv, -1)], Sense::Le, 0);
            lower.push((xv, -1));
        }
        m.add_constraint(lower, Sense::Ge, 1 - horizon as i64);

        DynamicsVars { horizon, x, y, y0, p }
    }
}

// ---------------------------------------------------------------------------
// the fixed-length subproblem

/// Fixed-length model: attractors of exact length dividing `t` under the
/// given control, minimizing the phenotype indicator `p`.
pub fn build_subproblem(
    ctx: &ModelContext,
    control: &ControlVector,
    t: usize,
) -> (Model, DynamicsVars) {
    assert!(t >= 1);
    let mut m = Model::new();
    let vars = DynamicsBuilder { ctx, horizon: t, control: Some(control), d_vars: None }
        .build(&mut m, false);
    m.set_objective(ObjSense::Minimize, vec![(vars.p, 1)]);
    (m, vars)
}

/// Free-length model over `1..=t_max` with the length selector `w` and the
/// wrap constraints tying clause values at time 0 to the selected length.
pub struct AggregatedVars {
    pub dyn_vars: DynamicsVars,
    pub w: Vec<VarId>,
}

pub fn build_aggregated(
    ctx: &ModelContext,
    control: &ControlVector,
    t_max: usize,
) -> (Model, AggregatedVars) {
    assert!(t_max >= 1);
    let mut m = Model::new();
    let dyn_vars = DynamicsBuilder { ctx, horizon: t_max, control: Some(control), d_vars: None }
        .build(&mut m, true);
    let w = add_length_selector(&mut m, &dyn_vars, t_max);
    m.set_objective(ObjSense::Minimize, vec![(dyn_vars.p, 1)]);
    (m, AggregatedVars { dyn_vars, w })
}

fn add_length_selector(m: &mut Model, dyn_vars: &DynamicsVars, t_max: usize) -> Vec<VarId> {
    let w: Vec<VarId> = (1..=t_max).map(|t| m.add_var(format!("w_t{t}"))).collect();
    m.add_constraint(w.iter().map(|v| (*v, 1)).collect(), Sense::Eq, 1);
    // -(1 - w_t) <= y_{c,0} - y_{c,t} <= (1 - w_t)
    for (c, y0) in dyn_vars.y0.iter().enumerate() {
        for t in 1..=t_max {
            let yt = dyn_vars.y[c][t - 1];
            m.add_constraint(vec![(*y0, 1), (yt, -1), (w[t - 1], 1)], Sense::Le, 1);
            m.add_constraint(vec![(yt, 1), (*y0, -1), (w[t - 1], 1)], Sense::Le, 1);
        }
    }
    w
}

// ---------------------------------------------------------------------------
// the master problem

pub struct MasterVars {
    /// `(d0, d1)` per controllable gene, aligned with `ctx.d_order`.
    pub d: Vec<(VarId, VarId)>,
}

impl MasterVars {
    pub fn d_var(&self, ctx: &ModelContext, g: GeneId, k: bool) -> VarId {
        let pos = ctx.d_order.iter().position(|h| *h == g).expect("not a controllable gene");
        if k {
            self.d[pos].1
        } else {
            self.d[pos].0
        }
    }

    /// Decodes a master assignment into a control.
    pub fn decode(&self, ctx: &ModelContext, assignment: &[bool]) -> ControlVector {
        let mut fixes = Vec::new();
        for (pos, g) in ctx.d_order.iter().enumerate() {
            let (d0, d1) = self.d[pos];
            if assignment[d0.index()] {
                fixes.push((*g, false));
            }
            if assignment[d1.index()] {
                fixes.push((*g, true));
            }
        }
        ControlVector::from_pairs(fixes)
    }
}

/// Candidate-control model: exclusivity, exact target size, superset
/// exclusion for each known minimal control, and the accumulated cuts.
pub fn build_master(
    ctx: &ModelContext,
    lambda: usize,
    known_minimal: &[ControlVector],
    cuts: &[Cut],
) -> (Model, MasterVars) {
    let mut m = Model::new();
    let d: Vec<(VarId, VarId)> = ctx
        .d_order
        .iter()
        .map(|g| {
            let name = ctx.bn.gene_name(*g);
            (m.add_var(format!("d0_{name}")), m.add_var(format!("d1_{name}")))
        })
        .collect();
    let vars = MasterVars { d };
    for (d0, d1) in &vars.d {
        m.add_constraint(vec![(*d0, 1), (*d1, 1)], Sense::Le, 1);
    }
    let all: Vec<(VarId, i64)> =
        vars.d.iter().flat_map(|(d0, d1)| [(*d0, 1), (*d1, 1)]).collect();
    m.add_constraint(all, Sense::Eq, lambda as i64);
    // no candidate may contain a known minimal control
    for known in known_minimal {
        let terms: Vec<(VarId, i64)> = known
            .fixes()
            .iter()
            .map(|(g, k)| (vars.d_var(ctx, *g, *k), -1))
            .collect();
        let rhs = 1 - known.size() as i64;
        m.add_constraint(terms, Sense::Ge, rhs);
    }
    for cut in cuts {
        let terms: Vec<(VarId, i64)> =
            cut.terms.iter().map(|(g, k, c)| (vars.d_var(ctx, *g, *k), *c)).collect();
        m.add_constraint(terms, Sense::Ge, cut.rhs);
    }
    (m, vars)
}

// ---------------------------------------------------------------------------
// the subspace separation

pub struct SeparationVars {
    /// `(u0, u1)` per controllable gene, aligned with `ctx.d_order`.
    pub u: Vec<(VarId, VarId)>,
    /// `(h0, h1)` per gene.
    pub h: Vec<(VarId, VarId)>,
}

impl SeparationVars {
    pub fn decode(
        &self,
        ctx: &ModelContext,
        assignment: &[bool],
    ) -> (ControlVector, TrapSpaceVector) {
        let mut u_fixes = Vec::new();
        for (pos, g) in ctx.d_order.iter().enumerate() {
            let (u0, u1) = self.u[pos];
            if assignment[u0.index()] {
                u_fixes.push((*g, false));
            }
            if assignment[u1.index()] {
                u_fixes.push((*g, true));
            }
        }
        let mut h_fixes = Vec::new();
        for (i, (h0, h1)) in self.h.iter().enumerate() {
            if assignment[h0.index()] {
                h_fixes.push((GeneId(i), false));
            }
            if assignment[h1.index()] {
                h_fixes.push((GeneId(i), true));
            }
        }
        (ControlVector::from_pairs(u_fixes), TrapSpaceVector::from_pairs(h_fixes))
    }
}

/// Searches for a control `u` and a phenotype-violating subspace `h` that is
/// closed under the controlled dynamics, minimizing the number of fixed
/// controllable entries (the literal count of the resulting cut). The
/// candidate `control` enters as data so the derived cut always excludes it.
pub fn build_separation(ctx: &ModelContext, control: &ControlVector) -> (Model, SeparationVars) {
    let mut m = Model::new();
    let u: Vec<(VarId, VarId)> = ctx
        .d_order
        .iter()
        .map(|g| {
            let name = ctx.bn.gene_name(*g);
            (m.add_var(format!("u0_{name}")), m.add_var(format!("u1_{name}")))
        })
        .collect();
    let h: Vec<(VarId, VarId)> = (0..ctx.bn.gene_count())
        .map(|i| {
            let name = ctx.bn.gene_name(GeneId(i));
            (m.add_var(format!("h0_{name}")), m.add_var(format!("h1_{name}")))
        })
        .collect();
    let vars = SeparationVars { u, h };

    for (u0, u1) in &vars.u {
        m.add_constraint(vec![(*u0, 1), (*u1, 1)], Sense::Le, 1);
    }
    for (h0, h1) in &vars.h {
        m.add_constraint(vec![(*h0, 1), (*h1, 1)], Sense::Le, 1);
    }
    // a controlled gene is fixed in the subspace
    for (pos, g) in ctx.d_order.iter().enumerate() {
        let (u0, u1) = vars.u[pos];
        let (h0, h1) = vars.h[g.index()];
        m.add_constraint(vec![(u0, 1), (h0, -1)], Sense::Le, 0);
        m.add_constraint(vec![(u1, 1), (h1, -1)], Sense::Le, 0);
    }
    // closure: a gene fixed to k (and not controlled) requires every clause
    // of the matching CNF to contain a literal fixed true by h
    for i in 0..ctx.bn.gene_count() {
        let g = GeneId(i);
        let controllable = ctx.bn.is_controllable(g);
        let u_pair = ctx.d_order.iter().position(|x| *x == g).map(|pos| vars.u[pos]);
        for k in [false, true] {
            let hk = if k { vars.h[i].1 } else { vars.h[i].0 };
            for clause in ctx.clauses.clauses_of(g, k) {
                let mut terms = vec![(hk, 1)];
                if controllable {
                    let (u0, u1) = u_pair.unwrap();
                    terms.push((if k { u1 } else { u0 }, -1));
                }
                for l in &clause.pos {
                    terms.push((vars.h[l.index()].1, -1));
                }
                for l in &clause.neg {
                    terms.push((vars.h[l.index()].0, -1));
                }
                m.add_constraint(terms, Sense::Le, 0);
            }
        }
    }
    // the subspace must pin the phenotype gene to 0
    let phi = ctx.phenotype();
    m.fix(vars.h[phi.index()].0, true);
    // the derived cut must exclude the candidate control
    for (pos, g) in ctx.d_order.iter().enumerate() {
        for k in [false, true] {
            let uk = if k { vars.u[pos].1 } else { vars.u[pos].0 };
            let hk = if k { vars.h[g.index()].1 } else { vars.h[g.index()].0 };
            if control.fixed_value(*g) == Some(!k) {
                // u_k + (1 - h_k) >= 1
                m.add_constraint(vec![(uk, 1), (hk, -1)], Sense::Ge, 0);
            }
            if control.fixed_value(*g) != Some(k) {
                m.fix(uk, false); // u_k <= d_k = 0
            }
        }
    }
    let obj: Vec<(VarId, i64)> = ctx
        .d_order
        .iter()
        .flat_map(|g| {
            let (h0, h1) = vars.h[g.index()];
            [(h0, 1), (h1, 1)]
        })
        .collect();
    m.set_objective(ObjSense::Minimize, obj);
    (m, vars)
}

// ---------------------------------------------------------------------------
// maximum forbidden length

pub struct MaxLenVars {
    pub dyn_vars: DynamicsVars,
    pub w: Vec<VarId>,
    pub d: Vec<(VarId, VarId)>,
}

impl MaxLenVars {
    /// Selected length of a solution.
    pub fn length_of(&self, assignment: &[bool]) -> usize {
        self.w
            .iter()
            .position(|v| assignment[v.index()])
            .map(|i| i + 1)
            .expect("no length selected")
    }

    pub fn decode_control(&self, ctx: &ModelContext, assignment: &[bool]) -> ControlVector {
        let mut fixes = Vec::new();
        for (pos, g) in ctx.d_order.iter().enumerate() {
            let (d0, d1) = self.d[pos];
            if assignment[d0.index()] {
                fixes.push((*g, false));
            }
            if assignment[d1.index()] {
                fixes.push((*g, true));
            }
        }
        ControlVector::from_pairs(fixes)
    }
}

/// Maximizes the exact length of a phenotype-violating attractor over all
/// controls of size at most `lambda_max`. Sub-cycle elimination forces the
/// state at the selected length to be the first recurrence of the state at
/// time 1, so the reported length is exact rather than a multiple.
pub fn build_max_forbidden_length(
    ctx: &ModelContext,
    t_max: usize,
    lambda_max: usize,
) -> (Model, MaxLenVars) {
    assert!(t_max >= 1);
    let mut m = Model::new();
    let d: Vec<(VarId, VarId)> = ctx
        .d_order
        .iter()
        .map(|g| {
            let name = ctx.bn.gene_name(*g);
            (m.add_var(format!("d0_{name}")), m.add_var(format!("d1_{name}")))
        })
        .collect();
    let dyn_vars = DynamicsBuilder { ctx, horizon: t_max, control: None, d_vars: Some(&d) }
        .build(&mut m, true);
    let w = add_length_selector(&mut m, &dyn_vars, t_max);

    for (d0, d1) in &d {
        m.add_constraint(vec![(*d0, 1), (*d1, 1)], Sense::Le, 1);
    }
    m.fix(dyn_vars.p, false);
    let all_d: Vec<(VarId, i64)> = d.iter().flat_map(|(d0, d1)| [(*d0, 1), (*d1, 1)]).collect();
    m.add_constraint(all_d, Sense::Le, lambda_max as i64);

    // q_t = 1 iff the selected length exceeds t
    let q: Vec<VarId> = (1..t_max).map(|t| m.add_var(format!("q_t{t}"))).collect();
    for t in 1..t_max {
        let mut terms = vec![(q[t - 1], 1)];
        for r in (t + 1)..=t_max {
            terms.push((w[r - 1], -1));
        }
        m.add_constraint(terms, Sense::Eq, 0);
    }
    // delta_{i,t} = |x_{i,t} - x_{i,1}|
    let n = ctx.bn.gene_count();
    let mut delta = vec![Vec::with_capacity(t_max); n];
    for i in 0..n {
        for t in 1..=t_max {
            let dv = m.add_var(format!("dl_{}_t{t}", ctx.bn.gene_name(GeneId(i))));
            let xt = dyn_vars.x[i][t - 1];
            let x1 = dyn_vars.x[i][0];
            m.add_constraint(vec![(dv, 1), (xt, -1), (x1, 1)], Sense::Ge, 0);
            m.add_constraint(vec![(dv, 1), (x1, -1), (xt, 1)], Sense::Ge, 0);
            m.add_constraint(vec![(dv, 1), (xt, -1), (x1, -1)], Sense::Le, 0);
            m.add_constraint(vec![(dv, 1), (xt, 1), (x1, 1)], Sense::Le, 2);
            delta[i].push(dv);
        }
    }
    // while the selected length is still ahead, the state must differ from
    // the state at time 1
    for t in 2..=t_max {
        let mut terms: Vec<(VarId, i64)> = (0..n).map(|i| (delta[i][t - 1], 1)).collect();
        terms.push((q[t - 2], -1));
        m.add_constraint(terms, Sense::Ge, 0);
    }

    let obj: Vec<(VarId, i64)> = (1..=t_max).map(|t| (w[t - 1], t as i64)).collect();
    m.set_objective(ObjSense::Maximize, obj);
    (m, MaxLenVars { dyn_vars, w, d })
}
