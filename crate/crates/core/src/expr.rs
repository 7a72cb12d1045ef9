//! Boolean expressions over gene identifiers.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Index of a gene in the canonical (file) order of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneId(pub usize);

impl GeneId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for GeneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An expression tree with NOT, AND, OR, constants, and gene leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Var(GeneId),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    /// Evaluates the expression over a full state given as a bitmask
    /// (bit `i` holds the value of gene `i`).
    pub fn eval(&self, state: u64) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(g) => (state >> g.index()) & 1 == 1,
            BoolExpr::Not(e) => !e.eval(state),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(state)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(state)),
        }
    }

    /// The set of distinct genes referenced by the expression.
    pub fn support(&self) -> BTreeSet<GeneId> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut BTreeSet<GeneId>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(g) => {
                out.insert(*g);
            }
            BoolExpr::Not(e) => e.collect_support(out),
            BoolExpr::And(es) | BoolExpr::Or(es) => {
                for e in es {
                    e.collect_support(out);
                }
            }
        }
    }

    pub fn references(&self, gene: GeneId) -> bool {
        self.support().contains(&gene)
    }

    /// Renders the expression in the model-file syntax (`!`, `&`, `|`).
    pub fn print(&self, names: &[String]) -> String {
        self.print_prec(names, 0)
    }

    // prec: 0 = or-level, 1 = and-level, 2 = atom
    fn print_prec(&self, names: &[String], prec: u8) -> String {
        let (s, level) = match self {
            BoolExpr::Const(false) => ("0".to_string(), 2),
            BoolExpr::Const(true) => ("1".to_string(), 2),
            BoolExpr::Var(g) => (names[g.index()].clone(), 2),
            BoolExpr::Not(e) => (format!("!{}", e.print_prec(names, 2)), 2),
            BoolExpr::And(es) if es.is_empty() => ("1".to_string(), 2),
            BoolExpr::And(es) => (
                es.iter()
                    .map(|e| e.print_prec(names, 1))
                    .collect::<Vec<_>>()
                    .join(" & "),
                1,
            ),
            BoolExpr::Or(es) if es.is_empty() => ("0".to_string(), 2),
            BoolExpr::Or(es) => (
                es.iter()
                    .map(|e| e.print_prec(names, 0))
                    .collect::<Vec<_>>()
                    .join(" | "),
                0,
            ),
        };
        if level < prec {
            format!("({s})")
        } else {
            s
        }
    }
}
