//! Boolean networks and the `.bnet`-style model file format.
//!
//! A model file has one `name, expression` line per gene, an optional
//! `targets, factors` header, and `#`-prefixed directive lines:
//!
//! ```text
//! targets, factors
//! x1, (!x1 | !x2) & x3
//! x2, x1 & x3
//! x3, x1 | x2 | x3
//! # phenotype: x2 & x3
//! # uncontrollable: x3
//! ```

use crate::expr::{BoolExpr, GeneId};
use std::collections::HashMap;
use thiserror::Error;

/// Name of the auxiliary gene added for the phenotype.
pub const PHENOTYPE_GENE_NAME: &str = "phenotype";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("line {line}: undeclared gene `{name}`")]
    UndeclaredGene { line: usize, name: String },
    #[error("line {line}: duplicate definition of gene `{name}`")]
    DuplicateGene { line: usize, name: String },
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("no gene definitions found")]
    Empty,
    #[error("phenotype expression references the phenotype gene itself")]
    CyclicPhenotype,
    #[error("network is already augmented with a different phenotype")]
    ConflictingPhenotype,
    #[error("a gene named `{0}` already exists; cannot add the phenotype gene")]
    PhenotypeNameTaken(String),
}

/// A synchronous Boolean network: ordered genes, one transition formula per
/// gene, the controllable subset, and (after augmentation) the phenotype gene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanNetwork {
    genes: Vec<String>,
    transitions: Vec<BoolExpr>,
    controllable: Vec<bool>,
    phenotype_gene: Option<GeneId>,
    /// Phenotype expression from a `# phenotype:` directive, kept until
    /// `augment_phenotype` turns it into the auxiliary gene.
    pending_phenotype: Option<BoolExpr>,
}

impl BooleanNetwork {
    pub fn new(genes: Vec<String>, transitions: Vec<BoolExpr>, controllable: Vec<bool>) -> Self {
        assert_eq!(genes.len(), transitions.len());
        assert_eq!(genes.len(), controllable.len());
        BooleanNetwork { genes, transitions, controllable, phenotype_gene: None, pending_phenotype: None }
    }

    pub fn gene_count(&self) -> usize {
        self.genes.len()
    }

    pub fn gene_names(&self) -> &[String] {
        &self.genes
    }

    pub fn gene_name(&self, g: GeneId) -> &str {
        &self.genes[g.index()]
    }

    pub fn gene_by_name(&self, name: &str) -> Option<GeneId> {
        self.genes.iter().position(|n| n == name).map(GeneId)
    }

    pub fn transition(&self, g: GeneId) -> &BoolExpr {
        &self.transitions[g.index()]
    }

    pub fn set_transition(&mut self, g: GeneId, e: BoolExpr) {
        self.transitions[g.index()] = e;
    }

    pub fn is_controllable(&self, g: GeneId) -> bool {
        self.controllable[g.index()]
    }

    /// Controllable genes in canonical order.
    pub fn controllable_genes(&self) -> Vec<GeneId> {
        (0..self.gene_count()).map(GeneId).filter(|g| self.controllable[g.index()]).collect()
    }

    pub fn phenotype_gene(&self) -> Option<GeneId> {
        self.phenotype_gene
    }

    pub fn pending_phenotype(&self) -> Option<&BoolExpr> {
        self.pending_phenotype.as_ref()
    }

    /// Applies the synchronous update to a full state bitmask.
    pub fn step(&self, state: u64) -> u64 {
        let mut next = 0u64;
        for (i, f) in self.transitions.iter().enumerate() {
            if f.eval(state) {
                next |= 1 << i;
            }
        }
        next
    }

    /// Renders the network back into the model-file format. An augmented
    /// network prints its phenotype gene as a `# phenotype:` directive again,
    /// so the output re-parses (and re-augments) to an identical network.
    pub fn print(&self) -> String {
        let mut out = String::from("targets, factors\n");
        for (i, name) in self.genes.iter().enumerate() {
            if self.phenotype_gene == Some(GeneId(i)) {
                continue;
            }
            out.push_str(&format!("{}, {}\n", name, self.transitions[i].print(&self.genes)));
        }
        let phenotype = self
            .phenotype_gene
            .map(|g| &self.transitions[g.index()])
            .or(self.pending_phenotype.as_ref());
        if let Some(p) = phenotype {
            out.push_str(&format!("# phenotype: {}\n", p.print(&self.genes)));
        }
        let explicit: Vec<&str> = (0..self.gene_count())
            .filter(|&i| !self.controllable[i] && self.phenotype_gene != Some(GeneId(i)))
            .map(|i| self.genes[i].as_str())
            .collect();
        if !explicit.is_empty() {
            out.push_str(&format!("# uncontrollable: {}\n", explicit.join(" ")));
        }
        out
    }
}

/// Parses a model file. The phenotype directive is recorded but the auxiliary
/// gene is only added by [`augment_phenotype`].
pub fn parse_bnet(text: &str) -> Result<BooleanNetwork, NetworkError> {
    struct GeneLine<'a> {
        line_no: usize,
        name: &'a str,
        expr_src: &'a str,
    }

    let mut gene_lines: Vec<GeneLine> = Vec::new();
    let mut phenotype_src: Option<(usize, String)> = None;
    let mut uncontrollable_names: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(expr) = rest.strip_prefix("phenotype:") {
                phenotype_src = Some((line_no, expr.trim().to_string()));
            } else if let Some(names) = rest.strip_prefix("uncontrollable:") {
                for n in names.split_whitespace() {
                    uncontrollable_names.push((line_no, n.to_string()));
                }
            }
            // other # lines are comments
            continue;
        }
        let (name, expr_src) = line.split_once(',').ok_or_else(|| NetworkError::Syntax {
            line: line_no,
            message: "expected `name, expression`".into(),
        })?;
        let name = name.trim();
        let expr_src = expr_src.trim();
        if name == "targets" && expr_src == "factors" {
            continue; // header
        }
        if name.is_empty() || !is_identifier(name) {
            return Err(NetworkError::Syntax {
                line: line_no,
                message: format!("invalid gene name `{name}`"),
            });
        }
        gene_lines.push(GeneLine { line_no, name, expr_src });
    }

    if gene_lines.is_empty() {
        return Err(NetworkError::Empty);
    }

    let mut index: HashMap<&str, GeneId> = HashMap::new();
    for g in &gene_lines {
        if index.insert(g.name, GeneId(index.len())).is_some() {
            return Err(NetworkError::DuplicateGene { line: g.line_no, name: g.name.to_string() });
        }
    }

    let genes: Vec<String> = gene_lines.iter().map(|g| g.name.to_string()).collect();
    let mut transitions = Vec::with_capacity(genes.len());
    for g in &gene_lines {
        transitions.push(parse_expr(g.expr_src, g.line_no, &index)?);
    }

    let mut controllable = vec![true; genes.len()];
    for (line_no, name) in &uncontrollable_names {
        let g = index.get(name.as_str()).ok_or_else(|| NetworkError::UndeclaredGene {
            line: *line_no,
            name: name.clone(),
        })?;
        controllable[g.index()] = false;
    }

    let mut bn = BooleanNetwork::new(genes, transitions, controllable);
    if let Some((line_no, src)) = phenotype_src {
        bn.pending_phenotype = Some(parse_expr(&src, line_no, &index)?);
    }
    Ok(bn)
}

/// Adds the auxiliary uncontrollable gene whose transition formula equals the
/// phenotype. Idempotent when called again with an identical expression.
pub fn augment_phenotype(
    bn: &BooleanNetwork,
    phenotype: BoolExpr,
) -> Result<BooleanNetwork, NetworkError> {
    if let Some(phi) = bn.phenotype_gene {
        if phenotype.references(phi) {
            return Err(NetworkError::CyclicPhenotype);
        }
        if *bn.transition(phi) == phenotype {
            return Ok(bn.clone());
        }
        return Err(NetworkError::ConflictingPhenotype);
    }
    if bn.gene_by_name(PHENOTYPE_GENE_NAME).is_some() {
        return Err(NetworkError::PhenotypeNameTaken(PHENOTYPE_GENE_NAME.into()));
    }
    let mut out = bn.clone();
    let phi = GeneId(out.genes.len());
    out.genes.push(PHENOTYPE_GENE_NAME.to_string());
    out.transitions.push(phenotype);
    out.controllable.push(false);
    out.phenotype_gene = Some(phi);
    out.pending_phenotype = None;
    Ok(out)
}

/// Parses and augments in one go, using the file's `# phenotype:` directive.
pub fn parse_and_augment(text: &str) -> Result<BooleanNetwork, NetworkError> {
    let bn = parse_bnet(text)?;
    let phenotype = bn
        .pending_phenotype
        .clone()
        .ok_or(NetworkError::Syntax { line: 0, message: "missing `# phenotype:` directive".into() })?;
    augment_phenotype(&bn, phenotype)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Recursive-descent parser for `!`, `&`, `|`, parentheses, and `0`/`1`.
fn parse_expr(
    src: &str,
    line_no: usize,
    index: &HashMap<&str, GeneId>,
) -> Result<BoolExpr, NetworkError> {
    let tokens = tokenize(src, line_no)?;
    let mut p = Parser { tokens, pos: 0, line_no, index };
    let e = p.parse_or()?;
    if p.pos != p.tokens.len() {
        return Err(NetworkError::Syntax {
            line: line_no,
            message: format!("unexpected token `{}`", p.tokens[p.pos]),
        });
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    Const(bool),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "{s}"),
            Token::Not => write!(f, "!"),
            Token::And => write!(f, "&"),
            Token::Or => write!(f, "|"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Const(b) => write!(f, "{}", *b as u8),
        }
    }
}

fn tokenize(src: &str, line_no: usize) -> Result<Vec<Token>, NetworkError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '!' => {
                chars.next();
                out.push(Token::Not);
            }
            '&' => {
                chars.next();
                out.push(Token::And);
            }
            '|' => {
                chars.next();
                out.push(Token::Or);
            }
            '(' => {
                chars.next();
                out.push(Token::LParen);
            }
            ')' => {
                chars.next();
                out.push(Token::RParen);
            }
            '0' => {
                chars.next();
                out.push(Token::Const(false));
            }
            '1' => {
                chars.next();
                out.push(Token::Const(true));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(ident));
            }
            other => {
                return Err(NetworkError::Syntax {
                    line: line_no,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line_no: usize,
    index: &'a HashMap<&'a str, GeneId>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn parse_or(&mut self) -> Result<BoolExpr, NetworkError> {
        let mut parts = vec![self.parse_and()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            parts.push(self.parse_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { BoolExpr::Or(parts) })
    }

    fn parse_and(&mut self) -> Result<BoolExpr, NetworkError> {
        let mut parts = vec![self.parse_atom()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            parts.push(self.parse_atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { BoolExpr::And(parts) })
    }

    fn parse_atom(&mut self) -> Result<BoolExpr, NetworkError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(BoolExpr::Not(Box::new(self.parse_atom()?)))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.parse_or()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(NetworkError::Syntax {
                        line: self.line_no,
                        message: "missing `)`".into(),
                    });
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Token::Const(b)) => {
                self.pos += 1;
                Ok(BoolExpr::Const(b))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let g = self.index.get(name.as_str()).ok_or(NetworkError::UndeclaredGene {
                    line: self.line_no,
                    name: name.clone(),
                })?;
                Ok(BoolExpr::Var(*g))
            }
            _ => Err(NetworkError::Syntax {
                line: self.line_no,
                message: "expected an expression".into(),
            }),
        }
    }
}

/// The three-gene worked example used across the test suite.
pub const FIG1_BNET: &str = "\
targets, factors
x1, (!x1 | !x2) & x3
x2, x1 & x3
x3, x1 | x2 | x3
# phenotype: x2 & x3
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_gene_example() {
        let bn = parse_bnet(FIG1_BNET).unwrap();
        assert_eq!(bn.gene_names(), &["x1", "x2", "x3"]);
        assert!(bn.pending_phenotype().is_some());
        assert!(bn.phenotype_gene().is_none());
        // truth table of x2's formula: x1 & x3
        let f2 = bn.transition(GeneId(1));
        for s in 0u64..8 {
            assert_eq!(f2.eval(s), (s & 1 != 0) && (s & 4 != 0));
        }
    }

    #[test]
    fn identity_network() {
        let bn = parse_bnet("a, a\n").unwrap();
        assert_eq!(bn.gene_count(), 1);
        assert_eq!(bn.step(0), 0);
        assert_eq!(bn.step(1), 1);
    }

    #[test]
    fn undeclared_gene_is_an_error() {
        let err = parse_bnet("a, b\n").unwrap_err();
        assert_eq!(err, NetworkError::UndeclaredGene { line: 1, name: "b".into() });
    }

    #[test]
    fn duplicate_gene_is_an_error() {
        let err = parse_bnet("a, a\na, 1\n").unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateGene { line: 2, .. }));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_bnet("a, a\nb, a &\n").unwrap_err();
        assert!(matches!(err, NetworkError::Syntax { line: 2, .. }));
    }

    #[test]
    fn augmentation_adds_uncontrollable_phenotype_gene() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        assert_eq!(bn.gene_count(), 4);
        let phi = bn.phenotype_gene().unwrap();
        assert_eq!(phi, GeneId(3));
        assert!(!bn.is_controllable(phi));
        // f_phi = x2 & x3
        for s in 0u64..16 {
            assert_eq!(bn.transition(phi).eval(s), (s & 2 != 0) && (s & 4 != 0));
        }
        assert_eq!(bn.controllable_genes(), vec![GeneId(0), GeneId(1), GeneId(2)]);
    }

    #[test]
    fn augmentation_is_idempotent() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let again = augment_phenotype(&bn, bn.transition(GeneId(3)).clone()).unwrap();
        assert_eq!(bn, again);
        let other = augment_phenotype(&bn, BoolExpr::Const(true));
        assert_eq!(other.unwrap_err(), NetworkError::ConflictingPhenotype);
    }

    #[test]
    fn cyclic_phenotype_rejected() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let err = augment_phenotype(&bn, BoolExpr::Var(GeneId(3))).unwrap_err();
        assert_eq!(err, NetworkError::CyclicPhenotype);
    }

    #[test]
    fn constant_phenotypes_augment() {
        let bn = parse_bnet("a, a\n").unwrap();
        let t = augment_phenotype(&bn, BoolExpr::Const(true)).unwrap();
        assert_eq!(t.transition(GeneId(1)), &BoolExpr::Const(true));
        let f = augment_phenotype(&bn, BoolExpr::Const(false)).unwrap();
        assert_eq!(f.transition(GeneId(1)), &BoolExpr::Const(false));
    }

    #[test]
    fn augmented_print_roundtrips() {
        let bn = parse_and_augment(FIG1_BNET).unwrap();
        let re = parse_and_augment(&bn.print()).unwrap();
        assert_eq!(bn, re);
    }

    #[test]
    fn print_parse_roundtrip_preserves_truth_tables() {
        let text = "targets, factors\na, (b | !c) & a\nb, !a & (c | b)\nc, 0\n# phenotype: a & !b\n# uncontrollable: c\n";
        let bn = parse_bnet(text).unwrap();
        let re = parse_bnet(&bn.print()).unwrap();
        assert_eq!(bn.gene_names(), re.gene_names());
        for g in 0..bn.gene_count() {
            for s in 0u64..8 {
                assert_eq!(bn.transition(GeneId(g)).eval(s), re.transition(GeneId(g)).eval(s));
            }
        }
        assert_eq!(bn.controllable, re.controllable);
        assert_eq!(bn.pending_phenotype, re.pending_phenotype);
    }
}
