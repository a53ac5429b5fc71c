//! Shared helpers for the integration suites: seeded random graphs and
//! queries, plus a naive query evaluator used as an oracle.
//!
//! The oracle deliberately avoids the engine's machinery: it scans the full
//! triple list per pattern, joins by checking binding compatibility, and
//! reimplements filter comparison from scratch.

use chrono::Datelike;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use climakg::rdf::{BlankNode, Datatype, Iri, Literal, Subject, Term, Triple};
use climakg::sparql::ast::{
    CompareOp, Expression, Function, GroupPattern, PatternTerm, Query, Selection, TriplePattern,
};
use climakg::sparql::Binding;
use climakg::store::Graph;

pub fn subject_pool() -> Vec<Subject> {
    let mut pool: Vec<Subject> = (0..8)
        .map(|i| Subject::Iri(Iri::new(format!("http://example.org/g/s{i}")).unwrap()))
        .collect();
    pool.push(Subject::Blank(BlankNode::new("b0").unwrap()));
    pool.push(Subject::Blank(BlankNode::new("b1").unwrap()));
    pool
}

pub fn predicate_pool() -> Vec<Iri> {
    (0..5)
        .map(|i| Iri::new(format!("http://example.org/g/p{i}")).unwrap())
        .collect()
}

pub fn literal_pool() -> Vec<Literal> {
    let mut pool = vec![
        Literal::string("alpha"),
        Literal::string("bravo"),
        Literal::string("delta"),
        Literal::lang_string("chat", "en"),
        Literal::boolean(true),
        Literal::boolean(false),
        Literal::double(0.5),
        Literal::double(-12.5),
        Literal::double(7.0),
    ];
    for n in [-5i64, 0, 3, 7, 14] {
        pool.push(Literal::integer(n));
    }
    for d in ["1950-06-17", "1963-07-04", "1980-01-01", "2019-12-31"] {
        pool.push(Literal::date(d.parse().unwrap()));
    }
    pool
}

pub fn object_pool() -> Vec<Term> {
    let mut pool: Vec<Term> = subject_pool().into_iter().map(|s| s.as_term()).collect();
    pool.extend(literal_pool().into_iter().map(Term::Literal));
    pool
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_triples: usize) -> Graph {
    let subjects = subject_pool();
    let predicates = predicate_pool();
    let objects = object_pool();
    let n = rng.gen_range(0..=max_triples);
    let mut graph = Graph::new();
    for _ in 0..n {
        let triple = Triple::new(
            subjects.choose(rng).unwrap().clone(),
            predicates.choose(rng).unwrap().clone(),
            objects.choose(rng).unwrap().clone(),
        );
        graph.insert(&triple);
    }
    graph
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn random_slot(rng: &mut ChaCha8Rng, consts: &[Term], var_bias: f64) -> PatternTerm {
    if rng.gen_bool(var_bias) {
        PatternTerm::Var(VARS.choose(rng).unwrap().to_string())
    } else {
        PatternTerm::Const(consts.choose(rng).unwrap().clone())
    }
}

fn random_pattern(rng: &mut ChaCha8Rng) -> TriplePattern {
    let subjects: Vec<Term> = subject_pool().into_iter().map(|s| s.as_term()).collect();
    let predicates: Vec<Term> = predicate_pool().into_iter().map(Term::Iri).collect();
    let objects = object_pool();
    TriplePattern {
        subject: random_slot(rng, &subjects, 0.6),
        predicate: random_slot(rng, &predicates, 0.35),
        object: random_slot(rng, &objects, 0.55),
    }
}

fn random_filter(rng: &mut ChaCha8Rng, group: &GroupPattern) -> Option<Expression> {
    let vars = group.visible_variables();
    let var = vars.choose(rng)?.clone();
    let op = *[
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
        CompareOp::Eq,
        CompareOp::Ne,
    ]
    .choose(rng)
    .unwrap();
    let literals = literal_pool();
    let comparison = if rng.gen_bool(0.3) {
        Expression::Compare(
            op,
            Box::new(Expression::Call(
                Function::Year,
                Box::new(Expression::Var(var)),
            )),
            Box::new(Expression::Const(Term::Literal(Literal::integer(
                rng.gen_range(1940..2025),
            )))),
        )
    } else {
        Expression::Compare(
            op,
            Box::new(Expression::Var(var)),
            Box::new(Expression::Const(Term::Literal(
                literals.choose(rng).unwrap().clone(),
            ))),
        )
    };
    if rng.gen_bool(0.25) {
        let second = random_filter_simple(rng, group)?;
        if rng.gen_bool(0.5) {
            Some(Expression::And(Box::new(comparison), Box::new(second)))
        } else {
            Some(Expression::Or(Box::new(comparison), Box::new(second)))
        }
    } else {
        Some(comparison)
    }
}

fn random_filter_simple(rng: &mut ChaCha8Rng, group: &GroupPattern) -> Option<Expression> {
    let vars = group.visible_variables();
    let var = vars.choose(rng)?.clone();
    let literals = literal_pool();
    Some(Expression::Compare(
        if rng.gen_bool(0.5) {
            CompareOp::Ge
        } else {
            CompareOp::Ne
        },
        Box::new(Expression::Var(var)),
        Box::new(Expression::Const(Term::Literal(
            literals.choose(rng).unwrap().clone(),
        ))),
    ))
}

/// Query over the shared pools: 1..=3 patterns, at most one filter and one
/// single-pattern OPTIONAL, no solution modifiers.
pub fn random_query(rng: &mut ChaCha8Rng) -> Query {
    let mut group = GroupPattern::default();
    let n_patterns = rng.gen_range(1..=3);
    for _ in 0..n_patterns {
        group.patterns.push(random_pattern(rng));
    }
    if rng.gen_bool(0.4) {
        group.optionals.push(GroupPattern {
            patterns: vec![random_pattern(rng)],
            filters: Vec::new(),
            optionals: Vec::new(),
        });
    }
    if rng.gen_bool(0.5) {
        if let Some(filter) = random_filter(rng, &group) {
            group.filters.push(filter);
        }
    }
    Query {
        selection: Selection::All,
        distinct: false,
        group,
        order_by: Vec::new(),
        limit: None,
        offset: None,
    }
}

pub fn seeded_case(seed: u64, max_triples: usize) -> (Graph, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph(&mut rng, max_triples);
    let query = random_query(&mut rng);
    (graph, query)
}

fn pattern_matches(pattern: &TriplePattern, triple: &Triple, binding: &Binding) -> Option<Binding> {
    let mut extended = binding.clone();
    let terms = [
        triple.subject.as_term(),
        Term::Iri(triple.predicate.clone()),
        triple.object.clone(),
    ];
    for (slot, term) in pattern.slots().iter().zip(terms) {
        match slot {
            PatternTerm::Const(expected) => {
                if *expected != term {
                    return None;
                }
            }
            PatternTerm::Var(name) => match extended.get(name) {
                Some(bound) if *bound != term => return None,
                Some(_) => {}
                None => {
                    extended.insert(name.clone(), term);
                }
            },
        }
    }
    Some(extended)
}

fn all_triples(graph: &Graph) -> Vec<Triple> {
    graph.iter().collect()
}

fn join_patterns(
    patterns: &[TriplePattern],
    triples: &[Triple],
    start: Vec<Binding>,
) -> Vec<Binding> {
    let mut rows = start;
    for pattern in patterns {
        let mut next = Vec::new();
        for row in &rows {
            for triple in triples {
                if let Some(extended) = pattern_matches(pattern, triple, row) {
                    next.push(extended);
                }
            }
        }
        rows = next;
    }
    rows
}

/// Value space for the oracle's filter arithmetic.
enum OracleValue {
    Number(f64),
    Date(chrono::NaiveDate),
    Text(String),
    Bool(bool),
    Opaque(String),
}

fn oracle_value(expr: &Expression, binding: &Binding) -> Option<OracleValue> {
    match expr {
        Expression::Var(name) => term_value(binding.get(name)?),
        Expression::Const(term) => term_value(term),
        Expression::Call(Function::Year, inner) => {
            let value = oracle_value(inner, binding)?;
            match value {
                OracleValue::Date(d) => Some(OracleValue::Number(f64::from(d.year()))),
                _ => None,
            }
        }
        _ => None,
    }
}

fn term_value(term: &Term) -> Option<OracleValue> {
    match term {
        Term::Literal(l) => match l.datatype() {
            Datatype::Integer | Datatype::Double => l.as_f64().map(OracleValue::Number),
            Datatype::Date => l.as_date().map(OracleValue::Date),
            Datatype::Boolean => l.as_bool().map(OracleValue::Bool),
            Datatype::String => {
                if l.language().is_some() {
                    // Lang-tagged strings only compare equal to themselves.
                    Some(OracleValue::Opaque(term.ntriples_form()))
                } else {
                    Some(OracleValue::Text(l.lexical().to_string()))
                }
            }
        },
        Term::Iri(_) | Term::Blank(_) => Some(OracleValue::Opaque(term.ntriples_form())),
    }
}

fn oracle_compare(a: &OracleValue, b: &OracleValue) -> Option<std::cmp::Ordering> {
    match (a, b) {
        (OracleValue::Number(x), OracleValue::Number(y)) => x.partial_cmp(y),
        (OracleValue::Date(x), OracleValue::Date(y)) => Some(x.cmp(y)),
        (OracleValue::Text(x), OracleValue::Text(y)) => Some(x.cmp(y)),
        (OracleValue::Bool(x), OracleValue::Bool(y)) => Some(x.cmp(y)),
        (OracleValue::Opaque(x), OracleValue::Opaque(y)) if x == y => {
            Some(std::cmp::Ordering::Equal)
        }
        _ => None,
    }
}

/// Error-as-false filter check for the expression shapes `random_query`
/// generates (comparisons, YEAR, conjunction, disjunction).
fn oracle_filter(expr: &Expression, binding: &Binding) -> bool {
    match expr {
        Expression::Compare(op, lhs, rhs) => {
            let (Some(l), Some(r)) = (oracle_value(lhs, binding), oracle_value(rhs, binding))
            else {
                return false;
            };
            let Some(ordering) = oracle_compare(&l, &r) else {
                return false;
            };
            match op {
                CompareOp::Lt => ordering.is_lt(),
                CompareOp::Le => ordering.is_le(),
                CompareOp::Gt => ordering.is_gt(),
                CompareOp::Ge => ordering.is_ge(),
                CompareOp::Eq => ordering.is_eq(),
                CompareOp::Ne => ordering.is_ne(),
            }
        }
        Expression::And(l, r) => oracle_filter(l, binding) && oracle_filter(r, binding),
        Expression::Or(l, r) => oracle_filter(l, binding) || oracle_filter(r, binding),
        _ => false,
    }
}

/// Naive evaluation: full scans, no planning, no indexes.
pub fn naive_evaluate(query: &Query, graph: &Graph) -> Vec<Binding> {
    let triples = all_triples(graph);
    let mut rows = join_patterns(&query.group.patterns, &triples, vec![Binding::new()]);
    for optional in &query.group.optionals {
        let mut next = Vec::new();
        for row in rows {
            let extensions = join_patterns(&optional.patterns, &triples, vec![row.clone()]);
            if extensions.is_empty() {
                next.push(row);
            } else {
                next.extend(extensions);
            }
        }
        rows = next;
    }
    for filter in &query.group.filters {
        rows.retain(|row| oracle_filter(filter, row));
    }
    let projected = query.projected_variables();
    rows.into_iter()
        .map(|row| {
            row.into_iter()
                .filter(|(name, _)| projected.iter().any(|p| p == name))
                .collect()
        })
        .collect()
}

pub fn row_key(binding: &Binding) -> String {
    binding
        .iter()
        .map(|(name, term)| format!("?{name}={}", term.ntriples_form()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Multiset of rows as a sorted list of canonical strings.
pub fn canonical_rows(rows: &[Binding]) -> Vec<String> {
    let mut keys: Vec<String> = rows.iter().map(row_key).collect();
    keys.sort();
    keys
}
