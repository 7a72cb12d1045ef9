//! CNF clause sets for transition formulas and their negations.
//!
//! Clauses are over original gene variables only: the linear models need
//! clause truth values tied directly to gene states, so auxiliary-variable
//! (Tseitin-style) encodings are not usable here. Up to 12 distinct inputs we
//! take the prime-implicate CNF from the truth table; from 13 to 20 inputs we
//! distribute with subsumption elimination; beyond that the caller must
//! supply clauses through a sidecar file.

use crate::expr::{BoolExpr, GeneId};
use crate::network::BooleanNetwork;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Truth-table bound for the prime-implicate route.
pub const TRUTH_TABLE_INPUT_BOUND: usize = 12;
/// Hard bound on distinct inputs of any converted formula.
pub const CNF_INPUT_BOUND: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error(
        "formula has {0} distinct inputs (bound {CNF_INPUT_BOUND}); \
         supply explicit clauses via a sidecar CNF file"
    )]
    TooManyInputs(usize),
    #[error("sidecar clause for gene `{0}` mentions gene `{1}` both positively and negatively")]
    ComplementaryPair(String, String),
    #[error("sidecar references unknown gene `{0}`")]
    UnknownGene(String),
    #[error("sidecar clauses for gene `{gene}` are not equivalent to its transition formula")]
    SidecarMismatch { gene: String },
}

/// A disjunction of literals; `pos`/`neg` are the genes appearing as positive
/// and negative literals. The sets are disjoint and sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub pos: Vec<GeneId>,
    pub neg: Vec<GeneId>,
}

impl Clause {
    pub fn new(mut pos: Vec<GeneId>, mut neg: Vec<GeneId>) -> Self {
        pos.sort_unstable();
        pos.dedup();
        neg.sort_unstable();
        neg.dedup();
        Clause { pos, neg }
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// True when some gene appears both positively and negatively.
    pub fn is_tautology(&self) -> bool {
        let mut i = 0;
        let mut j = 0;
        while i < self.pos.len() && j < self.neg.len() {
            match self.pos[i].cmp(&self.neg[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn eval(&self, state: u64) -> bool {
        self.pos.iter().any(|g| state >> g.index() & 1 == 1)
            || self.neg.iter().any(|g| state >> g.index() & 1 == 0)
    }

    /// True when every literal of `self` also occurs in `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        subset(&self.pos, &other.pos) && subset(&self.neg, &other.neg)
    }
}

fn subset(a: &[GeneId], b: &[GeneId]) -> bool {
    let mut j = 0;
    'outer: for x in a {
        while j < b.len() {
            match b[j].cmp(x) {
                std::cmp::Ordering::Less => j += 1,
                std::cmp::Ordering::Equal => {
                    j += 1;
                    continue 'outer;
                }
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Per-gene clause lists for every transition formula and its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseSet {
    /// `c1[i]`: clauses of `f_i`.
    pub c1: Vec<Vec<Clause>>,
    /// `c0[i]`: clauses of `!f_i`.
    pub c0: Vec<Vec<Clause>>,
}

impl ClauseSet {
    /// Builds clause sets for every gene of the network.
    pub fn from_network(bn: &BooleanNetwork) -> Result<Self, CnfError> {
        let mut c1 = Vec::with_capacity(bn.gene_count());
        let mut c0 = Vec::with_capacity(bn.gene_count());
        for i in 0..bn.gene_count() {
            let f = bn.transition(GeneId(i));
            c1.push(to_cnf(f, false)?);
            c0.push(to_cnf(f, true)?);
        }
        Ok(ClauseSet { c1, c0 })
    }

    /// Clause list of `f_i` (`value = true`) or `!f_i` (`value = false`).
    pub fn clauses_of(&self, gene: GeneId, value: bool) -> &[Clause] {
        if value {
            &self.c1[gene.index()]
        } else {
            &self.c0[gene.index()]
        }
    }
}

/// Converts an expression (or its negation) into an equivalent clause list
/// over the original gene variables.
pub fn to_cnf(expr: &BoolExpr, negate: bool) -> Result<Vec<Clause>, CnfError> {
    let support: Vec<GeneId> = expr.support().into_iter().collect();
    if support.len() > CNF_INPUT_BOUND {
        return Err(CnfError::TooManyInputs(support.len()));
    }
    if support.len() <= TRUTH_TABLE_INPUT_BOUND {
        Ok(prime_implicate_cnf(expr, negate, &support))
    } else {
        Ok(distributive_cnf(expr, negate))
    }
}

/// CNF of the target as the set of all its prime implicates, obtained by
/// Quine-McCluskey on the complement: every prime implicant of the negated
/// target, negated literal-wise, is a clause, and their conjunction is
/// logically equivalent to the target.
fn prime_implicate_cnf(expr: &BoolExpr, negate: bool, support: &[GeneId]) -> Vec<Clause> {
    let m = support.len();
    // Minterms (over the support) where the target is FALSE.
    let mut minterms: Vec<u32> = Vec::new();
    for assign in 0u32..(1 << m) {
        let mut state = 0u64;
        for (b, g) in support.iter().enumerate() {
            if assign >> b & 1 == 1 {
                state |= 1 << g.index();
            }
        }
        let target = expr.eval(state) ^ negate;
        if !target {
            minterms.push(assign);
        }
    }
    if minterms.is_empty() {
        return Vec::new(); // target is TRUE: empty conjunction
    }
    if minterms.len() == 1 << m {
        // target is FALSE: the single empty clause
        return vec![Clause::new(Vec::new(), Vec::new())];
    }

    let primes = quine_mccluskey(&minterms, m);
    let mut clauses: Vec<Clause> = primes
        .iter()
        .map(|&(bits, mask)| {
            // mask bit set = variable eliminated. An implicant of the
            // complement with var=1 contributes a negative literal to the
            // clause of the target, and vice versa.
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (b, g) in support.iter().enumerate() {
                if mask >> b & 1 == 0 {
                    if bits >> b & 1 == 1 {
                        neg.push(*g);
                    } else {
                        pos.push(*g);
                    }
                }
            }
            Clause::new(pos, neg)
        })
        .collect();
    clauses.sort();
    clauses.dedup();
    clauses
}

/// All prime implicants of the function given by its minterms, as
/// `(bits, dash_mask)` pairs.
fn quine_mccluskey(minterms: &[u32], m: usize) -> Vec<(u32, u32)> {
    let mut current: BTreeSet<(u32, u32)> = minterms.iter().map(|&t| (t, 0u32)).collect();
    let mut primes: Vec<(u32, u32)> = Vec::new();
    while !current.is_empty() {
        let items: Vec<(u32, u32)> = current.iter().copied().collect();
        let mut combined = vec![false; items.len()];
        let mut next: BTreeSet<(u32, u32)> = BTreeSet::new();
        // Group by (mask, popcount) so only one-bit neighbors are compared.
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let (b1, m1) = items[i];
                let (b2, m2) = items[j];
                if m1 != m2 {
                    continue;
                }
                let diff = b1 ^ b2;
                if diff.count_ones() == 1 && diff & m1 == 0 {
                    next.insert((b1 & !diff, m1 | diff));
                    combined[i] = true;
                    combined[j] = true;
                }
            }
        }
        for (i, item) in items.iter().enumerate() {
            if !combined[i] {
                primes.push(*item);
            }
        }
        current = next;
    }
    let _ = m;
    primes
}

/// Distributive CNF with tautology removal and subsumption elimination, for
/// formulas too wide for the truth-table route.
fn distributive_cnf(expr: &BoolExpr, negate: bool) -> Vec<Clause> {
    let nnf = to_nnf(expr, negate);
    let mut clauses = cnf_of_nnf(&nnf);
    reduce(&mut clauses);
    clauses.sort();
    clauses
}

enum Nnf {
    Lit(GeneId, bool), // gene, positive?
    Const(bool),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn to_nnf(expr: &BoolExpr, negate: bool) -> Nnf {
    match expr {
        BoolExpr::Const(b) => Nnf::Const(b ^ negate),
        BoolExpr::Var(g) => Nnf::Lit(*g, !negate),
        BoolExpr::Not(e) => to_nnf(e, !negate),
        BoolExpr::And(es) => {
            let parts = es.iter().map(|e| to_nnf(e, negate)).collect();
            if negate {
                Nnf::Or(parts)
            } else {
                Nnf::And(parts)
            }
        }
        BoolExpr::Or(es) => {
            let parts = es.iter().map(|e| to_nnf(e, negate)).collect();
            if negate {
                Nnf::And(parts)
            } else {
                Nnf::Or(parts)
            }
        }
    }
}

fn cnf_of_nnf(e: &Nnf) -> Vec<Clause> {
    match e {
        Nnf::Const(true) => Vec::new(),
        Nnf::Const(false) => vec![Clause::new(Vec::new(), Vec::new())],
        Nnf::Lit(g, true) => vec![Clause::new(vec![*g], Vec::new())],
        Nnf::Lit(g, false) => vec![Clause::new(Vec::new(), vec![*g])],
        Nnf::And(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(cnf_of_nnf(p));
            }
            reduce(&mut out);
            out
        }
        Nnf::Or(parts) => {
            let mut acc: Vec<Clause> = vec![Clause::new(Vec::new(), Vec::new())];
            for p in parts {
                let rhs = cnf_of_nnf(p);
                let mut merged = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        let c = Clause::new(
                            a.pos.iter().chain(&b.pos).copied().collect(),
                            a.neg.iter().chain(&b.neg).copied().collect(),
                        );
                        if !c.is_tautology() {
                            merged.push(c);
                        }
                    }
                }
                reduce(&mut merged);
                acc = merged;
            }
            acc
        }
    }
}

/// Removes duplicates and subsumed clauses in place.
fn reduce(clauses: &mut Vec<Clause>) {
    clauses.sort();
    clauses.dedup();
    let snapshot = clauses.clone();
    clauses.retain(|c| {
        !snapshot.iter().any(|other| other != c && other.subsumes(c))
    });
}

/// Sidecar CNF file: explicit clause lists per gene, overriding `to_cnf`.
/// Literals are gene names, `!`-prefixed for negative ones.
#[derive(Debug, Serialize, Deserialize)]
pub struct CnfSidecar {
    pub genes: std::collections::BTreeMap<String, SidecarGene>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SidecarGene {
    /// Clauses of the transition formula.
    pub c1: Vec<Vec<String>>,
    /// Clauses of its negation.
    pub c0: Vec<Vec<String>>,
}

/// Applies sidecar overrides on top of computed clause sets. Overridden
/// entries are re-checked for equivalence when the formula is small enough.
pub fn apply_sidecar(
    bn: &BooleanNetwork,
    base: ClauseSet,
    sidecar: &CnfSidecar,
) -> Result<ClauseSet, CnfError> {
    let mut out = base;
    for (name, entry) in &sidecar.genes {
        let gene = bn.gene_by_name(name).ok_or_else(|| CnfError::UnknownGene(name.clone()))?;
        let c1 = parse_side_clauses(bn, name, &entry.c1)?;
        let c0 = parse_side_clauses(bn, name, &entry.c0)?;
        let f = bn.transition(gene);
        if f.support().len() <= TRUTH_TABLE_INPUT_BOUND {
            let mut inputs: BTreeSet<GeneId> = f.support();
            for c in c1.iter().chain(&c0) {
                inputs.extend(c.pos.iter().copied());
                inputs.extend(c.neg.iter().copied());
            }
            if inputs.len() <= TRUTH_TABLE_INPUT_BOUND {
                let inputs: Vec<GeneId> = inputs.into_iter().collect();
                for assign in 0u64..(1 << inputs.len()) {
                    let mut state = 0u64;
                    for (b, g) in inputs.iter().enumerate() {
                        if assign >> b & 1 == 1 {
                            state |= 1 << g.index();
                        }
                    }
                    let fv = f.eval(state);
                    if c1.iter().all(|c| c.eval(state)) != fv
                        || c0.iter().all(|c| c.eval(state)) == fv
                    {
                        return Err(CnfError::SidecarMismatch { gene: name.clone() });
                    }
                }
            }
        }
        out.c1[gene.index()] = c1;
        out.c0[gene.index()] = c0;
    }
    Ok(out)
}

fn parse_side_clauses(
    bn: &BooleanNetwork,
    gene: &str,
    raw: &[Vec<String>],
) -> Result<Vec<Clause>, CnfError> {
    let mut out = Vec::new();
    for lits in raw {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for lit in lits {
            let (name, negated) = match lit.strip_prefix('!') {
                Some(rest) => (rest, true),
                None => (lit.as_str(), false),
            };
            let g = bn.gene_by_name(name).ok_or_else(|| CnfError::UnknownGene(name.into()))?;
            if negated {
                neg.push(g);
            } else {
                pos.push(g);
            }
        }
        let c = Clause::new(pos, neg);
        if c.is_tautology() {
            return Err(CnfError::ComplementaryPair(gene.into(), String::new()));
        }
        out.push(c);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{parse_and_augment, parse_bnet, FIG1_BNET};

    fn v(i: usize) -> BoolExpr {
        BoolExpr::Var(GeneId(i))
    }

    fn check_equiv(expr: &BoolExpr, negate: bool, clauses: &[Clause], n: usize) {
        for state in 0u64..(1 << n) {
            let want = expr.eval(state) ^ negate;
            let got = clauses.iter().all(|c| c.eval(state));
            assert_eq!(want, got, "state {state:b}");
        }
    }

    #[test]
    fn de_morgan_conjunction() {
        // f2 = x0 & x2
        let f2 = BoolExpr::And(vec![v(0), v(2)]);
        let c1 = to_cnf(&f2, false).unwrap();
        assert_eq!(
            c1,
            vec![
                Clause::new(vec![GeneId(0)], vec![]),
                Clause::new(vec![GeneId(2)], vec![]),
            ]
        );
        let c0 = to_cnf(&f2, true).unwrap();
        assert_eq!(c0, vec![Clause::new(vec![], vec![GeneId(0), GeneId(2)])]);
    }

    #[test]
    fn de_morgan_disjunction() {
        let f3 = BoolExpr::Or(vec![v(0), v(1), v(2)]);
        let c1 = to_cnf(&f3, false).unwrap();
        assert_eq!(c1, vec![Clause::new(vec![GeneId(0), GeneId(1), GeneId(2)], vec![])]);
        let c0 = to_cnf(&f3, true).unwrap();
        assert_eq!(
            c0,
            vec![
                Clause::new(vec![], vec![GeneId(0)]),
                Clause::new(vec![], vec![GeneId(1)]),
                Clause::new(vec![], vec![GeneId(2)]),
            ]
        );
    }

    #[test]
    fn negated_mixed_formula() {
        // f1 = (!x0 | !x1) & x2; expected C0 = {(x0 | !x2), (x1 | !x2)},
        // checked equivalent to !f1 over all 8 assignments.
        let f1 = BoolExpr::And(vec![
            BoolExpr::Or(vec![BoolExpr::Not(Box::new(v(0))), BoolExpr::Not(Box::new(v(1)))]),
            v(2),
        ]);
        let c0 = to_cnf(&f1, true).unwrap();
        check_equiv(&f1, true, &c0, 3);
        assert_eq!(
            c0,
            vec![
                Clause::new(vec![GeneId(0)], vec![GeneId(2)]),
                Clause::new(vec![GeneId(1)], vec![GeneId(2)]),
            ]
        );
    }

    #[test]
    fn constants() {
        assert!(to_cnf(&BoolExpr::Const(true), false).unwrap().is_empty());
        let f = to_cnf(&BoolExpr::Const(false), false).unwrap();
        assert_eq!(f, vec![Clause::new(vec![], vec![])]);
        assert!(f[0].is_empty());
        // negation swaps them
        assert!(to_cnf(&BoolExpr::Const(false), true).unwrap().is_empty());
    }

    #[test]
    fn clause_hygiene_on_example_networks() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        for lists in [&cs.c1, &cs.c0] {
            for per_gene in lists {
                for c in per_gene {
                    assert!(!c.is_tautology());
                }
                let mut dedup = per_gene.clone();
                dedup.dedup();
                assert_eq!(&dedup, per_gene);
            }
        }
    }

    #[test]
    fn cnf_soundness_exhaustive() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let cs = ClauseSet::from_network(&bn).unwrap();
        for i in 0..bn.gene_count() {
            let f = bn.transition(GeneId(i));
            check_equiv(f, false, &cs.c1[i], bn.gene_count());
            check_equiv(f, true, &cs.c0[i], bn.gene_count());
        }
    }

    #[test]
    fn distributive_route_matches_truth_table_route() {
        // same formula through both pipelines must be logically equivalent
        let f = BoolExpr::Or(vec![
            BoolExpr::And(vec![v(0), BoolExpr::Not(Box::new(v(1))), v(2)]),
            BoolExpr::And(vec![v(3), v(1)]),
            BoolExpr::Not(Box::new(v(4))),
        ]);
        for negate in [false, true] {
            let qm = to_cnf(&f, negate).unwrap();
            let dist = distributive_cnf(&f, negate);
            check_equiv(&f, negate, &qm, 5);
            check_equiv(&f, negate, &dist, 5);
        }
    }

    #[test]
    fn sidecar_overrides_and_is_checked() {
        let bn = parse_bnet("a, a & b\nb, b\n").unwrap();
        let base = ClauseSet::from_network(&bn).unwrap();
        let side: CnfSidecar = serde_json::from_str(
            r#"{"genes": {"a": {"c1": [["a"], ["b"]], "c0": [["!a", "!b"]]}}}"#,
        )
        .unwrap();
        let cs = apply_sidecar(&bn, base.clone(), &side).unwrap();
        assert_eq!(cs.c1[0].len(), 2);

        let bad: CnfSidecar =
            serde_json::from_str(r#"{"genes": {"a": {"c1": [["a"]], "c0": [["!a"]]}}}"#).unwrap();
        assert!(matches!(
            apply_sidecar(&bn, base, &bad),
            Err(CnfError::SidecarMismatch { .. })
        ));
    }
}
