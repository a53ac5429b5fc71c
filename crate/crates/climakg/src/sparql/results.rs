//! Solution sequence rendering: W3C SPARQL 1.1 JSON results (both
//! directions) and a flat CSV form for the command line.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::rdf::{make_literal, BlankNode, Datatype, Iri, Literal, Term};
use crate::sparql::eval::{Binding, SolutionSequence};

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("results document is not valid JSON: {0}")]
    Json(String),
    #[error("results document missing {0}")]
    Missing(&'static str),
    #[error("malformed binding: {0}")]
    Malformed(String),
}

/// W3C SPARQL 1.1 Query Results JSON Format. Unbound variables are omitted
/// from their row objects.
pub fn serialize_results_json(seq: &SolutionSequence) -> String {
    let mut bindings = Vec::with_capacity(seq.rows.len());
    for row in &seq.rows {
        let mut obj = Map::new();
        for var in &seq.variables {
            if let Some(term) = row.get(var) {
                obj.insert(var.clone(), term_to_json(term));
            }
        }
        bindings.push(Value::Object(obj));
    }
    let mut head = Map::new();
    head.insert(
        "vars".to_string(),
        Value::Array(seq.variables.iter().cloned().map(Value::String).collect()),
    );
    let mut results = Map::new();
    results.insert("bindings".to_string(), Value::Array(bindings));
    let mut doc = Map::new();
    doc.insert("head".to_string(), Value::Object(head));
    doc.insert("results".to_string(), Value::Object(results));
    Value::Object(doc).to_string()
}

fn term_to_json(term: &Term) -> Value {
    let mut obj = Map::new();
    match term {
        Term::Iri(iri) => {
            obj.insert("type".into(), Value::String("uri".into()));
            obj.insert("value".into(), Value::String(iri.as_str().into()));
        }
        Term::Blank(b) => {
            obj.insert("type".into(), Value::String("bnode".into()));
            obj.insert("value".into(), Value::String(b.label().into()));
        }
        Term::Literal(lit) => {
            obj.insert("type".into(), Value::String("literal".into()));
            obj.insert("value".into(), Value::String(lit.lexical().into()));
            if let Some(lang) = lit.language() {
                obj.insert("xml:lang".into(), Value::String(lang.into()));
            } else if lit.datatype() != Datatype::String {
                obj.insert(
                    "datatype".into(),
                    Value::String(lit.datatype_iri().as_str().into()),
                );
            }
        }
    }
    Value::Object(obj)
}

/// Inverse of [`serialize_results_json`], used to compare endpoint responses
/// against in-process evaluation.
pub fn parse_results_json(text: &str) -> Result<SolutionSequence, ResultsError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ResultsError::Json(e.to_string()))?;
    let vars = doc
        .get("head")
        .and_then(|h| h.get("vars"))
        .and_then(Value::as_array)
        .ok_or(ResultsError::Missing("head.vars"))?;
    let variables: Vec<String> = vars
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or(ResultsError::Missing("string entries in head.vars"))
        })
        .collect::<Result<_, _>>()?;
    let bindings = doc
        .get("results")
        .and_then(|r| r.get("bindings"))
        .and_then(Value::as_array)
        .ok_or(ResultsError::Missing("results.bindings"))?;
    let mut rows = Vec::with_capacity(bindings.len());
    for entry in bindings {
        let obj = entry
            .as_object()
            .ok_or(ResultsError::Missing("binding objects"))?;
        let mut row = Binding::new();
        for (var, cell) in obj {
            row.insert(var.clone(), term_from_json(cell)?);
        }
        rows.push(row);
    }
    Ok(SolutionSequence { variables, rows })
}

fn term_from_json(cell: &Value) -> Result<Term, ResultsError> {
    let get = |key: &str| cell.get(key).and_then(Value::as_str);
    let kind = get("type").ok_or(ResultsError::Missing("binding \"type\""))?;
    let value = get("value").ok_or(ResultsError::Missing("binding \"value\""))?;
    match kind {
        "uri" => Iri::new(value)
            .map(Term::Iri)
            .map_err(|e| ResultsError::Malformed(e.to_string())),
        "bnode" => BlankNode::new(value)
            .map(Term::Blank)
            .map_err(|e| ResultsError::Malformed(e.to_string())),
        "literal" => {
            if let Some(lang) = get("xml:lang") {
                return Ok(Term::Literal(Literal::lang_string(value, lang)));
            }
            match get("datatype") {
                Some(dt) => {
                    let iri = Iri::new(dt).map_err(|e| ResultsError::Malformed(e.to_string()))?;
                    make_literal(value, &iri)
                        .map(Term::Literal)
                        .map_err(|e| ResultsError::Malformed(e.to_string()))
                }
                None => Ok(Term::Literal(Literal::string(value))),
            }
        }
        other => Err(ResultsError::Malformed(format!(
            "unknown binding type {other:?}"
        ))),
    }
}

/// CSV rendering: header row of variable names, plain string values, empty
/// cells for unbound variables.
pub fn results_to_csv(seq: &SolutionSequence) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(&seq.variables)
        .expect("writing to a Vec cannot fail");
    for row in &seq.rows {
        let record: Vec<String> = seq
            .variables
            .iter()
            .map(|var| match row.get(var) {
                Some(Term::Iri(iri)) => iri.as_str().to_string(),
                Some(Term::Literal(lit)) => lit.lexical().to_string(),
                Some(Term::Blank(b)) => format!("_:{}", b.label()),
                None => String::new(),
            })
            .collect();
        writer
            .write_record(&record)
            .expect("writing to a Vec cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("writer flushes cleanly"))
        .expect("CSV output is UTF-8")
}
