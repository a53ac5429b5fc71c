//! Abstract syntax for the SPARQL subset.
//!
//! Prefixed names are expanded while parsing, so the tree only carries full
//! IRIs. Variable names are stored without their `?` / `$` sigil.

use crate::rdf::Term;

/// One slot of a triple pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternTerm {
    Var(String),
    Const(Term),
}

impl PatternTerm {
    pub fn var_name(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn slots(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

/// Body of a query or of one OPTIONAL block, in textual order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupPattern {
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Expression>,
    pub optionals: Vec<GroupPattern>,
}

impl GroupPattern {
    /// Variables bound by triple patterns, in order of first appearance,
    /// including those inside OPTIONAL blocks.
    pub fn visible_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        for p in &self.patterns {
            for slot in p.slots() {
                if let Some(v) = slot.var_name() {
                    if !out.iter().any(|seen| seen == v) {
                        out.push(v.to_string());
                    }
                }
            }
        }
        for opt in &self.optionals {
            opt.collect_variables(out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Year,
    Month,
    Day,
    Str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Var(String),
    Const(Term),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Or(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Call(Function, Box<Expression>),
}

impl Expression {
    pub(crate) fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Expression::Var(v) => {
                if !out.iter().any(|seen| seen == v) {
                    out.push(v.clone());
                }
            }
            Expression::Const(_) => {}
            Expression::Compare(_, l, r) | Expression::And(l, r) | Expression::Or(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
            Expression::Not(e) | Expression::Call(_, e) => e.collect_variables(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortKey {
    pub expr: Expression,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub selection: Selection,
    pub distinct: bool,
    pub group: GroupPattern,
    pub order_by: Vec<SortKey>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl Query {
    /// Projection in output order: the SELECT list, or for `*` every pattern
    /// variable in order of first appearance.
    pub fn projected_variables(&self) -> Vec<String> {
        match &self.selection {
            Selection::All => self.group.visible_variables(),
            Selection::Vars(vars) => vars.clone(),
        }
    }
}
