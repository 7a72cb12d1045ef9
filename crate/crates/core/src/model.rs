//! Integer linear models over binary variables, with LP-format export.
//!
//! All models in this crate are pure 0/1 programs with integer coefficients,
//! so a single representation covers the master problem, the per-length
//! subproblems, the separation program, and the length-maximization program.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Handle to a variable of one model. Only valid for the model that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// `(variable, coefficient)` with nonzero coefficients.
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .map(|(v, c)| if assignment[v.index()] { *c } else { 0 })
            .sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

/// A 0/1 integer program: named binary variables, linear constraints with
/// integer coefficients, and an optional linear objective.
#[derive(Debug, Clone, Default)]
pub struct Model {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    objective: Option<(ObjSense, Vec<(VarId, i64)>)>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        VarId(self.names.len() - 1)
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    /// Adds a constraint, dropping zero coefficients and merging duplicates.
    pub fn add_constraint(&mut self, terms: Vec<(VarId, i64)>, sense: Sense, rhs: i64) {
        let mut merged: Vec<(VarId, i64)> = Vec::with_capacity(terms.len());
        let mut sorted = terms;
        sorted.sort_by_key(|(v, _)| *v);
        for (v, c) in sorted {
            match merged.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0);
        self.constraints.push(Constraint { terms: merged, sense, rhs });
    }

    /// Shorthand: fixes a variable to a value.
    pub fn fix(&mut self, v: VarId, value: bool) {
        self.add_constraint(vec![(v, 1)], Sense::Eq, value as i64);
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, sense: ObjSense, terms: Vec<(VarId, i64)>) {
        self.objective = Some((sense, terms));
    }

    /// Turns an optimization model into a pure feasibility query.
    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    pub fn objective(&self) -> Option<&(ObjSense, Vec<(VarId, i64)>)> {
        self.objective.as_ref()
    }

    pub fn objective_value(&self, assignment: &[bool]) -> i64 {
        match &self.objective {
            None => 0,
            Some((_, terms)) => terms
                .iter()
                .map(|(v, c)| if assignment[v.index()] { *c } else { 0 })
                .sum(),
        }
    }

    /// Checks a full assignment against every constraint; returns the index
    /// of the first violated constraint.
    pub fn check(&self, assignment: &[bool]) -> Result<(), usize> {
        assert_eq!(assignment.len(), self.var_count());
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.satisfied_by(assignment) {
                return Err(i);
            }
        }
        Ok(())
    }

    /// Serializes in LP format (CPLEX dialect): objective, constraints, and a
    /// `Binary` section listing every variable.
    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        let (header, terms) = match &self.objective {
            Some((ObjSense::Minimize, t)) => ("Minimize", t.as_slice()),
            Some((ObjSense::Maximize, t)) => ("Maximize", t.as_slice()),
            None => ("Minimize", &[][..]),
        };
        out.push_str(header);
        out.push_str("\n obj:");
        if terms.is_empty() {
            out.push_str(" 0 dummy");
            // LP readers reject an empty objective row; `dummy` is declared
            // binary below only when referenced.
        } else {
            write_terms(&mut out, terms, self);
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            write_terms(&mut out, &c.terms, self);
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Binary\n");
        for name in &self.names {
            let _ = writeln!(out, " {name}");
        }
        if terms.is_empty() {
            out.push_str(" dummy\n");
        }
        out.push_str("End\n");
        out
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, i64)], model: &Model) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, (v, c)) in terms.iter().enumerate() {
        let sign = if *c < 0 {
            " - "
        } else if i == 0 {
            " "
        } else {
            " + "
        };
        out.push_str(sign);
        let mag = c.abs();
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(model.var_name(*v));
    }
}
