//! Exhaustive ground truth for small networks: synchronous simulation,
//! attractor enumeration, trap-space checks, and brute-force enumeration of
//! minimal controls. Everything here is independent of the linear models and
//! serves as the oracle the Benders engine is validated against.

use crate::cnf::ClauseSet;
use crate::expr::{BoolExpr, GeneId};
use crate::network::BooleanNetwork;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// State-space bound for exhaustive routes.
pub const EXHAUSTIVE_GENE_BOUND: usize = 24;
/// Gene bound for the brute-force minimal-control sweep.
pub const ORACLE_GENE_BOUND: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("network has {0} genes; exhaustive route is bounded at {EXHAUSTIVE_GENE_BOUND}")]
    StateSpaceTooLarge(usize),
    #[error("network has {0} genes; the control sweep is bounded at {ORACLE_GENE_BOUND}")]
    SweepTooLarge(usize),
    #[error("network has no phenotype gene; augment it first")]
    NotAugmented,
}

/// A fixing in {unfixed, fix-to-0, fix-to-1} per gene. Controls only ever fix
/// controllable genes; exclusivity is inherent in the representation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ControlVector {
    fixes: Vec<(GeneId, bool)>, // sorted by gene
}

impl ControlVector {
    pub fn empty() -> Self {
        ControlVector::default()
    }

    pub fn from_pairs(mut fixes: Vec<(GeneId, bool)>) -> Self {
        fixes.sort_unstable();
        fixes.dedup();
        let genes: Vec<GeneId> = fixes.iter().map(|(g, _)| *g).collect();
        for w in genes.windows(2) {
            assert_ne!(w[0], w[1], "gene fixed to both 0 and 1");
        }
        ControlVector { fixes }
    }

    pub fn fixes(&self) -> &[(GeneId, bool)] {
        &self.fixes
    }

    pub fn fixed_value(&self, g: GeneId) -> Option<bool> {
        self.fixes.iter().find(|(h, _)| *h == g).map(|(_, v)| *v)
    }

    /// Number of fixed genes.
    pub fn size(&self) -> usize {
        self.fixes.len()
    }

    /// True when every fixing of `self` also occurs in `other`.
    pub fn is_subset_of(&self, other: &ControlVector) -> bool {
        self.fixes.iter().all(|f| other.fixes.contains(f))
    }

    /// Canonical `gene=value` strings in gene order.
    pub fn to_strings(&self, bn: &BooleanNetwork) -> Vec<String> {
        self.fixes
            .iter()
            .map(|(g, v)| format!("{}={}", bn.gene_name(*g), *v as u8))
            .collect()
    }

    pub fn parse_strings(bn: &BooleanNetwork, items: &[String]) -> Option<ControlVector> {
        let mut fixes = Vec::new();
        for item in items {
            let (name, value) = item.split_once('=')?;
            let g = bn.gene_by_name(name)?;
            let v = match value {
                "0" => false,
                "1" => true,
                _ => return None,
            };
            fixes.push((g, v));
        }
        Some(ControlVector::from_pairs(fixes))
    }
}

/// A subspace fixing: per gene a value in {unfixed, 0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TrapSpaceVector {
    fixes: Vec<(GeneId, bool)>, // sorted by gene
}

impl TrapSpaceVector {
    pub fn from_pairs(mut fixes: Vec<(GeneId, bool)>) -> Self {
        fixes.sort_unstable();
        fixes.dedup();
        let genes: Vec<GeneId> = fixes.iter().map(|(g, _)| *g).collect();
        for w in genes.windows(2) {
            assert_ne!(w[0], w[1], "gene fixed to both 0 and 1");
        }
        TrapSpaceVector { fixes }
    }

    pub fn fixes(&self) -> &[(GeneId, bool)] {
        &self.fixes
    }

    pub fn fixed_value(&self, g: GeneId) -> Option<bool> {
        self.fixes.iter().find(|(h, _)| *h == g).map(|(_, v)| *v)
    }

    pub fn contains_state(&self, state: u64) -> bool {
        self.fixes.iter().all(|(g, v)| (state >> g.index() & 1 == 1) == *v)
    }
}

/// A periodic orbit: `states[t]` is the state at time `t + 1`; the selected
/// length is `states.len()` and the successor of the last state is the first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttractorWitness {
    pub length: usize,
    pub states: Vec<u64>,
}

impl AttractorWitness {
    pub fn state_at(&self, t: usize) -> u64 {
        debug_assert!((1..=self.length).contains(&t));
        self.states[t - 1]
    }

    pub fn gene_value(&self, g: GeneId, t: usize) -> bool {
        self.state_at(t) >> g.index() & 1 == 1
    }

    /// Checks the successive-state law under the given controlled network.
    pub fn is_orbit_of(&self, bn: &BooleanNetwork) -> bool {
        (0..self.length).all(|t| bn.step(self.states[t]) == self.states[(t + 1) % self.length])
    }

    /// True when the phenotype gene is 0 at some time.
    pub fn is_forbidden(&self, phi: GeneId) -> bool {
        self.states.iter().any(|s| s >> phi.index() & 1 == 0)
    }

    /// Rotates so the lexicographically smallest state sits at time 1.
    pub fn canonicalize(&mut self) {
        let min_pos = self
            .states
            .iter()
            .enumerate()
            .min_by_key(|(_, s)| **s)
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.states.rotate_left(min_pos);
    }
}

/// Replaces the transitions of fixed genes with constants.
pub fn apply_control(bn: &BooleanNetwork, control: &ControlVector) -> BooleanNetwork {
    let mut out = bn.clone();
    for (g, v) in control.fixes() {
        debug_assert!(bn.is_controllable(*g), "control fixes uncontrollable gene");
        out.set_transition(*g, BoolExpr::Const(*v));
    }
    out
}

/// Enumerates all attractors of the controlled network with exact length at
/// most `t_cap` (`None` = unbounded). Each attractor appears once, in its
/// canonical rotation, and the result is sorted for determinism.
pub fn enumerate_attractors(
    bn: &BooleanNetwork,
    control: &ControlVector,
    t_cap: Option<usize>,
) -> Result<Vec<AttractorWitness>, DynamicsError> {
    let n = bn.gene_count();
    if n > EXHAUSTIVE_GENE_BOUND {
        return Err(DynamicsError::StateSpaceTooLarge(n));
    }
    let controlled = apply_control(bn, control);
    let size = 1usize << n;
    let mut next = vec![0u64; size];
    for s in 0..size {
        next[s] = controlled.step(s as u64);
    }

    // 0 = unvisited, 1 = on current path, 2 = done
    let mut mark = vec![0u8; size];
    let mut out = Vec::new();
    for start in 0..size {
        if mark[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut s = start;
        while mark[s] == 0 {
            mark[s] = 1;
            path.push(s);
            s = next[s] as usize;
        }
        if mark[s] == 1 {
            // found a new cycle; extract it from the path
            let pos = path.iter().position(|&p| p == s).unwrap();
            let cycle: Vec<u64> = path[pos..].iter().map(|&p| p as u64).collect();
            let mut witness = AttractorWitness { length: cycle.len(), states: cycle };
            witness.canonicalize();
            if t_cap.is_none_or(|cap| witness.length <= cap) {
                out.push(witness);
            }
        }
        for p in path {
            mark[p] = 2;
        }
    }
    out.sort();
    Ok(out)
}

/// Exhaustive trap-space test: every state belonging to `h` maps back into
/// `h` under the controlled network.
pub fn is_trap_space_exhaustive(
    bn: &BooleanNetwork,
    control: &ControlVector,
    h: &TrapSpaceVector,
) -> Result<bool, DynamicsError> {
    let n = bn.gene_count();
    let free: Vec<GeneId> =
        (0..n).map(GeneId).filter(|g| h.fixed_value(*g).is_none()).collect();
    if free.len() > EXHAUSTIVE_GENE_BOUND {
        return Err(DynamicsError::StateSpaceTooLarge(free.len()));
    }
    let controlled = apply_control(bn, control);
    let mut base = 0u64;
    for (g, v) in h.fixes() {
        if *v {
            base |= 1 << g.index();
        }
    }
    for assign in 0u64..(1 << free.len()) {
        let mut state = base;
        for (b, g) in free.iter().enumerate() {
            if assign >> b & 1 == 1 {
                state |= 1 << g.index();
            }
        }
        if !h.contains_state(controlled.step(state)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Clause-based trap-space test: for each gene fixed to `k` by `h`, either
/// the control forces that value, or every clause of the matching CNF
/// contains a literal fixed true by `h`. Exact because clauses carry no
/// complementary pairs.
pub fn is_trap_space_clausal(
    clauses: &ClauseSet,
    control: &ControlVector,
    h: &TrapSpaceVector,
) -> bool {
    for (g, k) in h.fixes() {
        if let Some(v) = control.fixed_value(*g) {
            if v != *k {
                return false;
            }
            continue;
        }
        let fixed_true = |c: &crate::cnf::Clause| {
            c.pos.iter().any(|l| h.fixed_value(*l) == Some(true))
                || c.neg.iter().any(|l| h.fixed_value(*l) == Some(false))
        };
        if !clauses.clauses_of(*g, *k).iter().all(fixed_true) {
            return false;
        }
    }
    true
}

/// Trap-space test; uses the exhaustive route when it fits, otherwise falls
/// back to the clause-based check. The two routes agree (see tests).
pub fn is_trap_space(
    bn: &BooleanNetwork,
    clauses: &ClauseSet,
    control: &ControlVector,
    h: &TrapSpaceVector,
) -> bool {
    match is_trap_space_exhaustive(bn, control, h) {
        Ok(ans) => ans,
        Err(_) => is_trap_space_clausal(clauses, control, h),
    }
}

/// Classification of a control by exhaustive attractor enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlClass {
    /// Some attractor of length <= Tmax exists and all of them satisfy the
    /// phenotype at every state.
    Feasible,
    /// Some attractor of length <= Tmax violates the phenotype.
    Forbidden,
    /// No attractor of length <= Tmax exists at all.
    NoAttractor,
}

/// Classifies one control of the augmented network.
pub fn classify_control(
    bn: &BooleanNetwork,
    control: &ControlVector,
    t_max: Option<usize>,
) -> Result<ControlClass, DynamicsError> {
    let phi = bn.phenotype_gene().ok_or(DynamicsError::NotAugmented)?;
    let attractors = enumerate_attractors(bn, control, t_max)?;
    if attractors.is_empty() {
        return Ok(ControlClass::NoAttractor);
    }
    if attractors.iter().any(|a| a.is_forbidden(phi)) {
        Ok(ControlClass::Forbidden)
    } else {
        Ok(ControlClass::Feasible)
    }
}

/// Brute-force enumeration of all inclusion-minimal feasible controls of size
/// at most `max_size`, in nondecreasing size order (canonical order within a
/// size). `accept_no_attractor` flips the classification of controls that
/// induce no attractor within the length bound.
pub fn oracle_minimal_controls(
    bn: &BooleanNetwork,
    t_max: Option<usize>,
    max_size: usize,
    accept_no_attractor: bool,
) -> Result<Vec<ControlVector>, DynamicsError> {
    if bn.gene_count() > ORACLE_GENE_BOUND {
        return Err(DynamicsError::SweepTooLarge(bn.gene_count()));
    }
    bn.phenotype_gene().ok_or(DynamicsError::NotAugmented)?;
    let controllable = bn.controllable_genes();
    let mut feasible_by_size: Vec<Vec<ControlVector>> = Vec::new();
    let mut minimal = Vec::new();
    for size in 0..=max_size.min(controllable.len()) {
        let mut feasible_here = Vec::new();
        for subset in subsets_of_size(&controllable, size) {
            for values in 0u64..(1 << size) {
                let fixes: Vec<(GeneId, bool)> = subset
                    .iter()
                    .enumerate()
                    .map(|(b, g)| (*g, values >> b & 1 == 1))
                    .collect();
                let control = ControlVector::from_pairs(fixes);
                let class = classify_control(bn, &control, t_max)?;
                let ok = match class {
                    ControlClass::Feasible => true,
                    ControlClass::Forbidden => false,
                    ControlClass::NoAttractor => accept_no_attractor,
                };
                if !ok {
                    continue;
                }
                let dominated = feasible_by_size
                    .iter()
                    .flatten()
                    .any(|smaller| smaller.is_subset_of(&control));
                if !dominated {
                    minimal.push(control.clone());
                }
                feasible_here.push(control);
            }
        }
        feasible_by_size.push(feasible_here);
    }
    Ok(minimal)
}

fn subsets_of_size(items: &[GeneId], size: usize) -> Vec<Vec<GeneId>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        items: &[GeneId],
        start: usize,
        size: usize,
        current: &mut Vec<GeneId>,
        out: &mut Vec<Vec<GeneId>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            recurse(items, i + 1, size, current, out);
            current.pop();
        }
    }
    recurse(items, 0, size, &mut current, &mut out);
    out
}
