//! Independent post-hoc certification of reported controls: feasibility
//! re-checks by length-bounded model sweeps, minimality by strict-subset
//! sweeps, a persistent result cache, and the maximum-forbidden-length query.

use crate::builder::{build_max_forbidden_length, build_subproblem, ModelContext};
use crate::dynamics::{AttractorWitness, ControlVector};
use crate::solver::{SolveStatus, SolverBackend, SolverError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

/// Hard bound on the subset sweep of [`verify_minimality`].
pub const MINIMALITY_SIZE_BOUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    /// Some attractor within the bound exists and none violates the phenotype.
    Feasible,
    /// A phenotype-violating attractor within the bound, as witness.
    Infeasible(AttractorWitness),
    /// No attractor within the bound exists at all.
    NoAttractor,
    /// A per-length solve timed out before the answer was decided.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinimalityVerdict {
    Minimal,
    /// A feasible strict subset.
    NonMinimal(ControlVector),
    Indeterminate,
}

/// Per-control facts proven so far, resumable across queries with different
/// length bounds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CacheEntry {
    /// All lengths `1..=checked_to` have been swept.
    pub checked_to: usize,
    /// Smallest length of any attractor, if one was found in the swept range.
    pub min_attractor_length: Option<usize>,
    /// Smallest length of a phenotype-violating attractor, with its orbit.
    pub min_forbidden_length: Option<usize>,
    pub forbidden_states: Option<Vec<u64>>,
}

/// Cache of verification results keyed by `(network hash, control)`, with
/// optional JSON persistence.
#[derive(Debug, Default)]
pub struct VerifyCache {
    path: Option<PathBuf>,
    map: BTreeMap<String, CacheEntry>,
    dirty: bool,
}

fn network_hash(ctx: &ModelContext) -> String {
    let mut h = Sha256::new();
    h.update(ctx.bn.print().as_bytes());
    format!("{:x}", h.finalize())
}

fn cache_key(ctx: &ModelContext, control: &ControlVector) -> String {
    format!("{}|{}", network_hash(ctx), control.to_strings(&ctx.bn).join(","))
}

impl VerifyCache {
    pub fn in_memory() -> Self {
        VerifyCache::default()
    }

    /// Opens (or starts) a cache persisted at `path`; unreadable or malformed
    /// files start fresh rather than failing.
    pub fn open(path: PathBuf) -> Self {
        let map = std::fs::read_to_string(&path)
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default();
        VerifyCache { path: Some(path), map, dirty: false }
    }

    pub fn entry(&self, ctx: &ModelContext, control: &ControlVector) -> Option<&CacheEntry> {
        self.map.get(&cache_key(ctx, control))
    }

    fn put(&mut self, ctx: &ModelContext, control: &ControlVector, e: CacheEntry) {
        self.map.insert(cache_key(ctx, control), e);
        self.dirty = true;
    }

    /// Writes the cache back to its file, if it has one and changed.
    pub fn flush(&mut self) -> std::io::Result<()> {
        if let (Some(path), true) = (&self.path, self.dirty) {
            std::fs::write(path, serde_json::to_string_pretty(&self.map).unwrap())?;
            self.dirty = false;
        }
        Ok(())
    }
}

/// Re-checks feasibility of a control by sweeping model solves over lengths
/// `1..=t_check`: first attractor existence, then phenotype violation, both in
/// ascending length order. Proven facts are cached so later queries with any
/// bound answer from the cache when possible.
pub fn verify_feasibility(
    ctx: &ModelContext,
    control: &ControlVector,
    t_check: usize,
    backend: &dyn SolverBackend,
    cache: &mut VerifyCache,
    deadline: Option<Instant>,
) -> Result<FeasibilityVerdict, SolverError> {
    assert!(t_check >= 1);
    let mut entry = cache.entry(ctx, control).cloned().unwrap_or_default();

    // extend the swept range if the cached facts don't settle the query
    while entry.checked_to < t_check
        && !entry.min_forbidden_length.is_some_and(|f| f <= t_check)
    {
        let t = entry.checked_to + 1;
        if entry.min_attractor_length.is_none() {
            let (mut m, _) = build_subproblem(ctx, control, t);
            m.clear_objective();
            let r = backend.solve(&m, deadline)?;
            match r.status {
                SolveStatus::Timeout => return Ok(FeasibilityVerdict::Indeterminate),
                SolveStatus::Feasible => entry.min_attractor_length = Some(t),
                SolveStatus::Infeasible => {}
            }
        }
        if entry.min_forbidden_length.is_none() {
            let (mut m, vars) = build_subproblem(ctx, control, t);
            m.fix(vars.p, false);
            m.clear_objective();
            let r = backend.solve(&m, deadline)?;
            match r.status {
                SolveStatus::Timeout => return Ok(FeasibilityVerdict::Indeterminate),
                SolveStatus::Feasible => {
                    let a = r.assignment.unwrap();
                    let states: Vec<u64> = (1..=t)
                        .map(|s| {
                            let mut st = 0u64;
                            for (i, per_t) in vars.x.iter().enumerate() {
                                if a[per_t[s - 1].index()] {
                                    st |= 1 << i;
                                }
                            }
                            st
                        })
                        .collect();
                    entry.min_forbidden_length = Some(t);
                    entry.forbidden_states = Some(states);
                }
                SolveStatus::Infeasible => {}
            }
        }
        entry.checked_to = t;
    }
    cache.put(ctx, control, entry.clone());

    if let Some(f) = entry.min_forbidden_length {
        if f <= t_check {
            return Ok(FeasibilityVerdict::Infeasible(AttractorWitness {
                length: f,
                states: entry.forbidden_states.clone().unwrap(),
            }));
        }
    }
    match entry.min_attractor_length {
        Some(a) if a <= t_check => Ok(FeasibilityVerdict::Feasible),
        _ => Ok(FeasibilityVerdict::NoAttractor),
    }
}

/// Checks inclusion-minimality of a feasible control by testing every strict
/// subset; returns the first feasible subset found (smallest size, canonical
/// order) as the non-minimality witness. `accept_no_attractor` matches the
/// enumeration option of the same name.
pub fn verify_minimality(
    ctx: &ModelContext,
    control: &ControlVector,
    t_check: usize,
    accept_no_attractor: bool,
    backend: &dyn SolverBackend,
    cache: &mut VerifyCache,
    deadline: Option<Instant>,
) -> Result<MinimalityVerdict, SolverError> {
    let fixes = control.fixes();
    assert!(
        fixes.len() <= MINIMALITY_SIZE_BOUND,
        "subset sweep limited to controls of size {MINIMALITY_SIZE_BOUND}"
    );
    let n = fixes.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).filter(|m| m.count_ones() < n as u32).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let subset = ControlVector::from_pairs(
            (0..n).filter(|i| mask >> i & 1 == 1).map(|i| fixes[i]).collect(),
        );
        match verify_feasibility(ctx, &subset, t_check, backend, cache, deadline)? {
            FeasibilityVerdict::Feasible => return Ok(MinimalityVerdict::NonMinimal(subset)),
            FeasibilityVerdict::NoAttractor if accept_no_attractor => {
                return Ok(MinimalityVerdict::NonMinimal(subset))
            }
            FeasibilityVerdict::Indeterminate => return Ok(MinimalityVerdict::Indeterminate),
            _ => {}
        }
    }
    Ok(MinimalityVerdict::Minimal)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxLenResult {
    /// Proven maximum, with an achieving control.
    Optimum { length: usize, control: ControlVector },
    /// Best incumbent when the solve timed out: a valid lower bound only.
    LowerBound { length: usize, control: ControlVector },
    /// No control of the allowed size yields a phenotype-violating attractor
    /// within the bound.
    NoForbidden,
    /// Timed out before any incumbent was found.
    Indeterminate,
}

/// Maximum exact length of any phenotype-violating attractor over all controls
/// of size at most `lambda_max`, searched up to length `t_max`.
pub fn max_forbidden_length(
    ctx: &ModelContext,
    lambda_max: usize,
    t_max: usize,
    backend: &dyn SolverBackend,
    deadline: Option<Instant>,
) -> Result<MaxLenResult, SolverError> {
    let (m, vars) = build_max_forbidden_length(ctx, t_max, lambda_max);
    let r = backend.solve(&m, deadline)?;
    match (r.status, r.assignment) {
        (SolveStatus::Infeasible, _) => Ok(MaxLenResult::NoForbidden),
        (SolveStatus::Feasible, Some(a)) => Ok(MaxLenResult::Optimum {
            length: vars.length_of(&a),
            control: vars.decode_control(ctx, &a),
        }),
        (SolveStatus::Timeout, Some(a)) => Ok(MaxLenResult::LowerBound {
            length: vars.length_of(&a),
            control: vars.decode_control(ctx, &a),
        }),
        (SolveStatus::Timeout, None) => Ok(MaxLenResult::Indeterminate),
        (SolveStatus::Feasible, None) => unreachable!("feasible solve without assignment"),
    }
}
