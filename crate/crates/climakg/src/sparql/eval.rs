//! Query evaluation over a frozen [`Graph`].
//!
//! Joins run left to right after a planning pre-pass that always picks the
//! pattern with the most bound slots next (ties keep textual order). Filters
//! run as soon as every variable they mention is bound; filter evaluation
//! errors collapse to false.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use thiserror::Error;

use crate::rdf::{compare_terms, Datatype, Term};
use crate::sparql::ast::{
    CompareOp, Expression, Function, GroupPattern, PatternTerm, Query, TriplePattern,
};
use crate::store::{Graph, TriplePattern as StorePattern};

/// Partial solution: bound variables only, keyed by name without sigil.
pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSequence {
    pub variables: Vec<String>,
    pub rows: Vec<Binding>,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    #[error("query evaluation exceeded its time budget")]
    Timeout,
    #[error("query evaluation exceeded the row budget of {max_rows}")]
    RowBudget { max_rows: usize },
}

/// Cooperative resource limits checked while joining.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub max_rows: Option<usize>,
}

pub fn evaluate(query: &Query, graph: &Graph) -> SolutionSequence {
    evaluate_with_limits(query, graph, Limits::default())
        .expect("evaluation without limits cannot fail")
}

pub fn evaluate_with_limits(
    query: &Query,
    graph: &Graph,
    limits: Limits,
) -> Result<SolutionSequence, EvalError> {
    Evaluator {
        graph,
        limits,
        produced: 0,
    }
    .run(query)
}

/// One FILTER application with error-as-false semantics.
pub fn eval_filter(expr: &Expression, binding: &Binding) -> bool {
    eval_bool(binding, expr).unwrap_or(false)
}

struct Evaluator<'g> {
    graph: &'g Graph,
    limits: Limits,
    produced: usize,
}

impl Evaluator<'_> {
    fn run(&mut self, query: &Query) -> Result<SolutionSequence, EvalError> {
        let mut rows = self.eval_group(&query.group, Binding::new())?;
        if !query.order_by.is_empty() {
            order_rows(&mut rows, &query.order_by);
        }
        let variables = query.projected_variables();
        for row in &mut rows {
            row.retain(|var, _| variables.iter().any(|v| v == var));
        }
        if query.distinct {
            let mut seen = std::collections::BTreeSet::new();
            rows.retain(|row| seen.insert(row_key(row, &variables)));
        }
        if let Some(offset) = query.offset {
            let skip = offset.min(rows.len());
            rows.drain(..skip);
        }
        if let Some(limit) = query.limit {
            rows.truncate(limit);
        }
        Ok(SolutionSequence { variables, rows })
    }

    fn eval_group(
        &mut self,
        group: &GroupPattern,
        seed: Binding,
    ) -> Result<Vec<Binding>, EvalError> {
        let mut bound: Vec<String> = seed.keys().cloned().collect();
        let order = plan(&group.patterns, &bound);
        let mut rows = vec![seed];
        let mut filter_done = vec![false; group.filters.len()];
        for pattern in order {
            rows = self.join_step(rows, pattern)?;
            for slot in pattern.slots() {
                if let Some(v) = slot.var_name() {
                    if !bound.iter().any(|b| b == v) {
                        bound.push(v.to_string());
                    }
                }
            }
            for (i, filter) in group.filters.iter().enumerate() {
                if !filter_done[i] && filter_is_bound(filter, &bound) {
                    rows.retain(|row| eval_filter(filter, row));
                    filter_done[i] = true;
                }
            }
        }
        for optional in &group.optionals {
            let mut next = Vec::with_capacity(rows.len());
            for row in rows {
                self.check_deadline()?;
                let extended = self.eval_group(optional, row.clone())?;
                if extended.is_empty() {
                    next.push(row);
                } else {
                    next.extend(extended);
                }
            }
            rows = next;
        }
        for (i, filter) in group.filters.iter().enumerate() {
            if !filter_done[i] {
                rows.retain(|row| eval_filter(filter, row));
            }
        }
        Ok(rows)
    }

    fn join_step(
        &mut self,
        rows: Vec<Binding>,
        pattern: &TriplePattern,
    ) -> Result<Vec<Binding>, EvalError> {
        let mut out = Vec::new();
        for row in &rows {
            self.check_deadline()?;
            let concrete = StorePattern {
                subject: substitute(&pattern.subject, row),
                predicate: substitute(&pattern.predicate, row),
                object: substitute(&pattern.object, row),
            };
            for triple in self.graph.match_pattern(&concrete) {
                let candidate = [
                    (&pattern.subject, triple.subject.as_term()),
                    (&pattern.predicate, Term::Iri(triple.predicate.clone())),
                    (&pattern.object, triple.object.clone()),
                ];
                let mut extended = row.clone();
                let mut consistent = true;
                for (slot, term) in candidate {
                    if let PatternTerm::Var(name) = slot {
                        match extended.get(name) {
                            Some(existing) if *existing != term => {
                                consistent = false;
                                break;
                            }
                            Some(_) => {}
                            None => {
                                extended.insert(name.clone(), term);
                            }
                        }
                    }
                }
                if consistent {
                    self.count_row()?;
                    out.push(extended);
                }
            }
        }
        Ok(out)
    }

    fn check_deadline(&self) -> Result<(), EvalError> {
        if let Some(deadline) = self.limits.deadline {
            if Instant::now() >= deadline {
                return Err(EvalError::Timeout);
            }
        }
        Ok(())
    }

    fn count_row(&mut self) -> Result<(), EvalError> {
        self.produced += 1;
        if let Some(max_rows) = self.limits.max_rows {
            if self.produced > max_rows {
                return Err(EvalError::RowBudget { max_rows });
            }
        }
        if self.produced.is_multiple_of(1024) {
            self.check_deadline()?;
        }
        Ok(())
    }
}

/// Greedy join order: repeatedly take the remaining pattern with the most
/// bound slots, breaking ties in favour of textual order.
fn plan<'q>(patterns: &'q [TriplePattern], seed_bound: &[String]) -> Vec<&'q TriplePattern> {
    let mut bound: Vec<&str> = seed_bound.iter().map(|s| s.as_str()).collect();
    let mut remaining: Vec<(usize, &TriplePattern)> = patterns.iter().enumerate().collect();
    let mut out = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let mut best = 0;
        let mut best_score = bound_slots(remaining[0].1, &bound);
        for (i, (_, p)) in remaining.iter().enumerate().skip(1) {
            let score = bound_slots(p, &bound);
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        let (_, chosen) = remaining.remove(best);
        for slot in chosen.slots() {
            if let Some(v) = slot.var_name() {
                if !bound.contains(&v) {
                    bound.push(v);
                }
            }
        }
        out.push(chosen);
    }
    out
}

fn bound_slots(pattern: &TriplePattern, bound: &[&str]) -> usize {
    pattern
        .slots()
        .iter()
        .filter(|slot| match slot {
            PatternTerm::Const(_) => true,
            PatternTerm::Var(v) => bound.contains(&v.as_str()),
        })
        .count()
}

fn substitute(slot: &PatternTerm, row: &Binding) -> Option<Term> {
    match slot {
        PatternTerm::Const(t) => Some(t.clone()),
        PatternTerm::Var(v) => row.get(v).cloned(),
    }
}

fn filter_is_bound(filter: &Expression, bound: &[String]) -> bool {
    let mut vars = Vec::new();
    filter.collect_variables(&mut vars);
    vars.iter().all(|v| bound.iter().any(|b| b == v))
}

fn row_key(row: &Binding, variables: &[String]) -> String {
    let mut key = String::new();
    for var in variables {
        match row.get(var) {
            Some(term) => key.push_str(&term.ntriples_form()),
            None => key.push('\u{0}'),
        }
        key.push('\u{1}');
    }
    key
}

/// Values produced by expression evaluation. Derived scalars (from YEAR or
/// STR) live outside the term space.
#[derive(Debug, Clone)]
enum Value {
    Term(Term),
    Int(i64),
    Str(String),
    Bool(bool),
}

struct TypeErr;

fn eval_value(binding: &Binding, expr: &Expression) -> Result<Value, TypeErr> {
    match expr {
        Expression::Var(v) => binding.get(v).cloned().map(Value::Term).ok_or(TypeErr),
        Expression::Const(t) => Ok(Value::Term(t.clone())),
        Expression::Call(f, arg) => {
            let v = eval_value(binding, arg)?;
            match f {
                Function::Year | Function::Month | Function::Day => {
                    let date = match &v {
                        Value::Term(Term::Literal(l)) => l.as_date().ok_or(TypeErr)?,
                        _ => return Err(TypeErr),
                    };
                    use chrono::Datelike;
                    let n = match f {
                        Function::Year => date.year() as i64,
                        Function::Month => date.month() as i64,
                        _ => date.day() as i64,
                    };
                    Ok(Value::Int(n))
                }
                Function::Str => Ok(Value::Str(match v {
                    Value::Term(Term::Iri(iri)) => iri.as_str().to_string(),
                    Value::Term(Term::Literal(l)) => l.lexical().to_string(),
                    Value::Term(Term::Blank(_)) => return Err(TypeErr),
                    Value::Int(i) => i.to_string(),
                    Value::Str(s) => s,
                    Value::Bool(b) => b.to_string(),
                })),
            }
        }
        Expression::Compare(op, l, r) => {
            let lv = eval_value(binding, l)?;
            let rv = eval_value(binding, r)?;
            let ord = compare_values(&lv, &rv).ok_or(TypeErr)?;
            let result = match op {
                CompareOp::Lt => ord == Ordering::Less,
                CompareOp::Le => ord != Ordering::Greater,
                CompareOp::Gt => ord == Ordering::Greater,
                CompareOp::Ge => ord != Ordering::Less,
                CompareOp::Eq => ord == Ordering::Equal,
                CompareOp::Ne => ord != Ordering::Equal,
            };
            Ok(Value::Bool(result))
        }
        Expression::And(..) | Expression::Or(..) | Expression::Not(..) => {
            eval_bool(binding, expr).map(Value::Bool)
        }
    }
}

/// Three-valued logic: `||` survives one errored branch when the other is
/// true, `&&` when the other is false.
fn eval_bool(binding: &Binding, expr: &Expression) -> Result<bool, TypeErr> {
    match expr {
        Expression::And(l, r) => match (eval_bool(binding, l), eval_bool(binding, r)) {
            (Ok(false), _) | (_, Ok(false)) => Ok(false),
            (Ok(true), Ok(true)) => Ok(true),
            _ => Err(TypeErr),
        },
        Expression::Or(l, r) => match (eval_bool(binding, l), eval_bool(binding, r)) {
            (Ok(true), _) | (_, Ok(true)) => Ok(true),
            (Ok(false), Ok(false)) => Ok(false),
            _ => Err(TypeErr),
        },
        Expression::Not(inner) => eval_bool(binding, inner).map(|v| !v),
        _ => eval_value(binding, expr).and_then(effective_boolean),
    }
}

fn effective_boolean(v: Value) -> Result<bool, TypeErr> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Int(i) => Ok(i != 0),
        Value::Str(s) => Ok(!s.is_empty()),
        Value::Term(Term::Literal(l)) => match l.datatype() {
            Datatype::Boolean => l.as_bool().ok_or(TypeErr),
            Datatype::Integer | Datatype::Double => {
                let n = l.as_f64().ok_or(TypeErr)?;
                Ok(n != 0.0 && !n.is_nan())
            }
            Datatype::String => Ok(!l.lexical().is_empty()),
            Datatype::Date => Err(TypeErr),
        },
        Value::Term(_) => Err(TypeErr),
    }
}

fn numeric_of(term: &Term) -> Option<f64> {
    match term {
        Term::Literal(l) if matches!(l.datatype(), Datatype::Integer | Datatype::Double) => {
            l.as_f64()
        }
        _ => None,
    }
}

fn string_of(term: &Term) -> Option<&str> {
    match term {
        Term::Literal(l) if l.datatype() == Datatype::String => Some(l.lexical()),
        _ => None,
    }
}

fn compare_values(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Term(x), Value::Term(y)) => {
            compare_terms(x, y).or_else(|| if x == y { Some(Ordering::Equal) } else { None })
        }
        (Value::Term(t), Value::Int(i)) => numeric_of(t)?.partial_cmp(&(*i as f64)),
        (Value::Int(i), Value::Term(t)) => (*i as f64).partial_cmp(&numeric_of(t)?),
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::Term(t), Value::Str(s)) => Some(string_of(t)?.cmp(s.as_str())),
        (Value::Str(s), Value::Term(t)) => Some(s.as_str().cmp(string_of(t)?)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        (Value::Term(t), Value::Bool(v)) => t.as_literal()?.as_bool().map(|x| x.cmp(v)),
        (Value::Bool(v), Value::Term(t)) => t.as_literal()?.as_bool().map(|x| v.cmp(&x)),
        _ => None,
    }
}

fn sort_string(v: &Value) -> String {
    match v {
        Value::Term(t) => t.ntriples_form(),
        Value::Int(i) => i.to_string(),
        Value::Str(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
    }
}

/// Stable sort: unbound/errored keys first, then typed-value order, with a
/// serialized-string fallback for incomparable pairs.
fn order_rows(rows: &mut Vec<Binding>, keys: &[crate::sparql::ast::SortKey]) {
    let mut decorated: Vec<(Vec<Option<Value>>, Binding)> = rows
        .drain(..)
        .map(|row| {
            let evaluated = keys
                .iter()
                .map(|k| eval_value(&row, &k.expr).ok())
                .collect();
            (evaluated, row)
        })
        .collect();
    decorated.sort_by(|a, b| {
        for (i, key) in keys.iter().enumerate() {
            let ord = match (&a.0[i], &b.0[i]) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(x), Some(y)) => {
                    compare_values(x, y).unwrap_or_else(|| sort_string(x).cmp(&sort_string(y)))
                }
            };
            let ord = if key.descending { ord.reverse() } else { ord };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    });
    *rows = decorated.into_iter().map(|(_, row)| row).collect();
}
