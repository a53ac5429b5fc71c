//! Indexed in-memory triple store.
//!
//! Terms are interned into compact ids and every triple lives in three
//! positional indexes (SPO, POS, OSP), so any pattern with a bound prefix
//! becomes a range scan. Ingestion is append-only: build the graph, then
//! share it read-only (e.g. behind an `Arc`) for concurrent matching.

pub(crate) mod lex;
mod ntriples;
mod turtle;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::rdf::{Term, Triple};

/// Parse failure for the N-Triples / Turtle loaders.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix '{prefix}:' at line {line}")]
    UnknownPrefix { line: usize, prefix: String },
}

type Key = [u32; 3];

/// Triple set with term interning and SPO / POS / OSP indexes.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

/// A matching pattern: `None` slots are wildcards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl TriplePattern {
    pub fn new(subject: Option<Term>, predicate: Option<Term>, object: Option<Term>) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    fn intern(&mut self, term: &Term) -> u32 {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    fn lookup(&self, term: &Term) -> Option<u32> {
        self.ids.get(term).copied()
    }

    fn term(&self, id: u32) -> &Term {
        &self.terms[id as usize]
    }

    fn decode(&self, key: Key) -> Triple {
        let subject = self
            .term(key[0])
            .as_subject()
            .expect("subject ids always refer to IRIs or blank nodes");
        let predicate = match self.term(key[1]) {
            Term::Iri(iri) => iri.clone(),
            other => unreachable!("predicate id refers to non-IRI term {other}"),
        };
        Triple {
            subject,
            predicate,
            object: self.term(key[2]).clone(),
        }
    }

    /// Inserts a triple, returning `true` iff it was not present before.
    pub fn insert(&mut self, triple: &Triple) -> bool {
        let s = self.intern(&triple.subject.as_term());
        let p = self.intern(&Term::Iri(triple.predicate.clone()));
        let o = self.intern(&triple.object);
        if !self.spo.insert([s, p, o]) {
            return false;
        }
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let key = (
            self.lookup(&triple.subject.as_term()),
            self.lookup(&Term::Iri(triple.predicate.clone())),
            self.lookup(&triple.object),
        );
        match key {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|&key| self.decode(key))
    }

    /// All triples unifying with the pattern. The index whose key order
    /// matches the bound slots is chosen; result order is unspecified.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        let s = match resolve(self, &pattern.subject) {
            Resolved::Unbound => None,
            Resolved::Bound(id) => Some(id),
            Resolved::Absent => return Vec::new(),
        };
        let p = match resolve(self, &pattern.predicate) {
            Resolved::Unbound => None,
            Resolved::Bound(id) => Some(id),
            Resolved::Absent => return Vec::new(),
        };
        let o = match resolve(self, &pattern.object) {
            Resolved::Unbound => None,
            Resolved::Bound(id) => Some(id),
            Resolved::Absent => return Vec::new(),
        };

        let keys: Vec<Key> = match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.contains(&[s, p, o]) {
                    vec![[s, p, o]]
                } else {
                    vec![]
                }
            }
            (Some(s), Some(p), None) => scan(&self.spo, s, Some(p)).collect(),
            (Some(s), None, None) => scan(&self.spo, s, None).collect(),
            (None, Some(p), Some(o)) => scan(&self.pos, p, Some(o))
                .map(|[p, o, s]| [s, p, o])
                .collect(),
            (None, Some(p), None) => scan(&self.pos, p, None)
                .map(|[p, o, s]| [s, p, o])
                .collect(),
            (None, None, Some(o)) => scan(&self.osp, o, None)
                .map(|[o, s, p]| [s, p, o])
                .collect(),
            (Some(s), None, Some(o)) => scan(&self.osp, o, Some(s))
                .map(|[o, s, p]| [s, p, o])
                .collect(),
            (None, None, None) => self.spo.iter().copied().collect(),
        };
        keys.into_iter().map(|key| self.decode(key)).collect()
    }

    /// Cardinalities of the three indexes, for consistency checks.
    pub fn index_cardinalities(&self) -> (usize, usize, usize) {
        (self.spo.len(), self.pos.len(), self.osp.len())
    }

    /// Parses line-oriented N-Triples and inserts all statements. Returns the
    /// number of distinct new triples.
    pub fn load_ntriples(&mut self, text: &str) -> Result<usize, ParseError> {
        ntriples::load(self, text)
    }

    /// Parses the supported Turtle subset and inserts all statements.
    pub fn load_turtle(&mut self, text: &str) -> Result<usize, ParseError> {
        turtle::load(self, text)
    }

    /// Deterministic N-Triples dump: statements sorted by subject, predicate
    /// and object string forms.
    pub fn serialize_ntriples(&self) -> String {
        let mut lines: Vec<(String, String, String)> = self
            .iter()
            .map(|t| {
                (
                    t.subject.as_term().ntriples_form(),
                    format!("<{}>", t.predicate),
                    t.object.ntriples_form(),
                )
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for (s, p, o) in lines {
            out.push_str(&s);
            out.push(' ');
            out.push_str(&p);
            out.push(' ');
            out.push_str(&o);
            out.push_str(" .\n");
        }
        out
    }
}

enum Resolved {
    Unbound,
    Bound(u32),
    /// Concrete term that the graph has never seen: nothing can match.
    Absent,
}

fn resolve(g: &Graph, slot: &Option<Term>) -> Resolved {
    match slot {
        None => Resolved::Unbound,
        Some(term) => match g.lookup(term) {
            Some(id) => Resolved::Bound(id),
            None => Resolved::Absent,
        },
    }
}

/// Range scan over an index for keys starting with `k0` (and `k1` if given).
fn scan(index: &BTreeSet<Key>, k0: u32, k1: Option<u32>) -> impl Iterator<Item = Key> + '_ {
    let (lo, hi) = match k1 {
        Some(k1) => ([k0, k1, 0], [k0, k1, u32::MAX]),
        None => ([k0, 0, 0], [k0, u32::MAX, u32::MAX]),
    };
    index.range(lo..=hi).copied()
}

// A convenience used by tests and the CLI.
impl Extend<Triple> for Graph {
    fn extend<T: IntoIterator<Item = Triple>>(&mut self, iter: T) {
        for t in iter {
            self.insert(&t);
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.iter().all(|t| other.contains(&t))
    }
}
