//! RDF term model: IRIs, typed literals, blank nodes and triples.
//!
//! Literal values are validated against a small set of XSD datatypes at
//! construction time, so everything stored in a graph is well typed. Two
//! comparison relations coexist: plain `==` on terms is exact
//! (lexical + datatype), while [`compare_terms`] compares by typed value
//! and is what FILTER and ORDER BY build on.

use std::cmp::Ordering;
use std::fmt;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("invalid IRI {0:?}: must be non-empty, contain a ':' and no whitespace")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankLabel(String),
    #[error("lexical form {lexical:?} is not valid for datatype {datatype}")]
    InvalidLexicalForm { lexical: String, datatype: String },
    #[error("unsupported datatype {0}")]
    UnsupportedDatatype(String),
    #[error("language tags are only allowed on xsd:string literals")]
    LanguageOnNonString,
}

/// An absolute IRI. Equality is codepoint equality of the underlying string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if value.is_empty() || !value.contains(':') || value.chars().any(char::is_whitespace) {
            return Err(RdfError::InvalidIri(value));
        }
        Ok(Iri(value))
    }

    /// Internal constructor for IRIs that are known valid (vocabulary constants).
    pub(crate) fn new_unchecked(value: impl Into<String>) -> Self {
        Iri(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Blank node label, stored without the `_:` sigil.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, RdfError> {
        let label = label.into();
        if label.is_empty() || label.starts_with("_:") || label.chars().any(char::is_whitespace) {
            return Err(RdfError::InvalidBlankLabel(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

/// Well-known IRIs used throughout the crate.
pub mod vocab {
    use super::Iri;
    use once_cell::sync::Lazy;

    macro_rules! iri_const {
        ($name:ident, $value:expr) => {
            pub static $name: Lazy<Iri> = Lazy::new(|| Iri::new_unchecked($value));
        };
    }

    iri_const!(XSD_STRING, "http://www.w3.org/2001/XMLSchema#string");
    iri_const!(XSD_DOUBLE, "http://www.w3.org/2001/XMLSchema#double");
    iri_const!(XSD_INTEGER, "http://www.w3.org/2001/XMLSchema#integer");
    iri_const!(XSD_BOOLEAN, "http://www.w3.org/2001/XMLSchema#boolean");
    iri_const!(XSD_DATE, "http://www.w3.org/2001/XMLSchema#date");
    iri_const!(RDF_TYPE, "http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
}

/// The supported XSD datatypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Datatype {
    String,
    Double,
    Integer,
    Boolean,
    Date,
}

impl Datatype {
    pub fn from_iri(iri: &Iri) -> Option<Datatype> {
        match iri.as_str() {
            s if s == vocab::XSD_STRING.as_str() => Some(Datatype::String),
            s if s == vocab::XSD_DOUBLE.as_str() => Some(Datatype::Double),
            s if s == vocab::XSD_INTEGER.as_str() => Some(Datatype::Integer),
            s if s == vocab::XSD_BOOLEAN.as_str() => Some(Datatype::Boolean),
            s if s == vocab::XSD_DATE.as_str() => Some(Datatype::Date),
            _ => None,
        }
    }

    pub fn iri(self) -> &'static Iri {
        match self {
            Datatype::String => &vocab::XSD_STRING,
            Datatype::Double => &vocab::XSD_DOUBLE,
            Datatype::Integer => &vocab::XSD_INTEGER,
            Datatype::Boolean => &vocab::XSD_BOOLEAN,
            Datatype::Date => &vocab::XSD_DATE,
        }
    }
}

/// A typed literal. The lexical form is stored verbatim; construction
/// rejects forms that do not conform to the datatype.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
    language: Option<String>,
}

/// Validates `lexical` against `datatype` and builds a literal. This is the
/// only way ill-typed lexical forms are kept out of the model.
pub fn make_literal(lexical: impl Into<String>, datatype: &Iri) -> Result<Literal, RdfError> {
    let dt = Datatype::from_iri(datatype)
        .ok_or_else(|| RdfError::UnsupportedDatatype(datatype.to_string()))?;
    Literal::new(lexical, dt)
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, RdfError> {
        let lexical = lexical.into();
        let ok = match datatype {
            Datatype::String => true,
            Datatype::Double => lexical.parse::<f64>().is_ok_and(f64::is_finite),
            Datatype::Integer => lexical.parse::<i64>().is_ok(),
            Datatype::Boolean => matches!(lexical.as_str(), "true" | "false" | "0" | "1"),
            Datatype::Date => parse_date(&lexical).is_some(),
        };
        if !ok {
            return Err(RdfError::InvalidLexicalForm {
                lexical,
                datatype: datatype.iri().to_string(),
            });
        }
        Ok(Literal {
            lexical,
            datatype,
            language: None,
        })
    }

    /// A language-tagged string literal.
    pub fn lang_string(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Datatype::String,
            language: Some(tag.into()),
        }
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Datatype::String,
            language: None,
        }
    }

    pub fn double(value: f64) -> Self {
        Literal {
            lexical: format_double(value),
            datatype: Datatype::Double,
            language: None,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Datatype::Integer,
            language: None,
        }
    }

    pub fn boolean(value: bool) -> Self {
        Literal {
            lexical: if value { "true" } else { "false" }.to_string(),
            datatype: Datatype::Boolean,
            language: None,
        }
    }

    pub fn date(value: NaiveDate) -> Self {
        Literal {
            lexical: value.format("%Y-%m-%d").to_string(),
            datatype: Datatype::Date,
            language: None,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn datatype_iri(&self) -> &'static Iri {
        self.datatype.iri()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// The typed value, when the literal has one (language-tagged strings
    /// take part in equality only).
    fn value(&self) -> Option<LiteralValue<'_>> {
        if self.language.is_some() {
            return None;
        }
        match self.datatype {
            Datatype::String => Some(LiteralValue::Str(&self.lexical)),
            Datatype::Double => self.lexical.parse().ok().map(LiteralValue::Number),
            Datatype::Integer => self
                .lexical
                .parse::<i64>()
                .ok()
                .map(|v| LiteralValue::Number(v as f64)),
            Datatype::Boolean => Some(LiteralValue::Bool(matches!(
                self.lexical.as_str(),
                "true" | "1"
            ))),
            Datatype::Date => parse_date(&self.lexical).map(LiteralValue::Date),
        }
    }

    /// Numeric value for xsd:double / xsd:integer literals.
    pub fn as_f64(&self) -> Option<f64> {
        match self.value()? {
            LiteralValue::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self.value()? {
            LiteralValue::Date(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.value()? {
            LiteralValue::Bool(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LiteralValue<'a> {
    Number(f64),
    Date(NaiveDate),
    Str(&'a str),
    Bool(bool),
}

/// Strict YYYY-MM-DD with calendar validation.
fn parse_date(s: &str) -> Option<NaiveDate> {
    let bytes = s.as_bytes();
    if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    for (i, b) in bytes.iter().enumerate() {
        if i != 4 && i != 7 && !b.is_ascii_digit() {
            return None;
        }
    }
    let year: i32 = s[0..4].parse().ok()?;
    let month: u32 = s[5..7].parse().ok()?;
    let day: u32 = s[8..10].parse().ok()?;
    NaiveDate::from_ymd_opt(year, month, day)
}

/// Shortest round-trip decimal form, always with a decimal point or exponent
/// so the lexical stays a valid xsd:double.
pub(crate) fn format_double(value: f64) -> String {
    let s = format!("{value}");
    if s.contains('.') || s.contains('e') || s.contains('E') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Subject position of a triple: an IRI or a blank node, never a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Subject {
    Iri(Iri),
    Blank(BlankNode),
}

impl From<Iri> for Subject {
    fn from(iri: Iri) -> Self {
        Subject::Iri(iri)
    }
}

impl From<BlankNode> for Subject {
    fn from(b: BlankNode) -> Self {
        Subject::Blank(b)
    }
}

impl Subject {
    pub fn as_term(&self) -> Term {
        match self {
            Subject::Iri(iri) => Term::Iri(iri.clone()),
            Subject::Blank(b) => Term::Blank(b.clone()),
        }
    }
}

/// Any RDF term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Blank(BlankNode),
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        s.as_term()
    }
}

impl Term {
    pub fn as_subject(&self) -> Option<Subject> {
        match self {
            Term::Iri(iri) => Some(Subject::Iri(iri.clone())),
            Term::Blank(b) => Some(Subject::Blank(b.clone())),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// N-Triples surface form, also used as the deterministic sort key.
    pub fn ntriples_form(&self) -> String {
        match self {
            Term::Iri(iri) => format!("<{iri}>"),
            Term::Blank(b) => format!("_:{}", b.label()),
            Term::Literal(l) => {
                let escaped = escape_literal(l.lexical());
                if let Some(tag) = l.language() {
                    format!("\"{escaped}\"@{tag}")
                } else if l.datatype() == Datatype::String {
                    format!("\"{escaped}\"")
                } else {
                    format!("\"{escaped}\"^^<{}>", l.datatype_iri())
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ntriples_form())
    }
}

pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

/// A subject-predicate-object statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: subject.into(),
            predicate,
            object: object.into(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} <{}> {} .",
            self.subject.as_term().ntriples_form(),
            self.predicate,
            self.object.ntriples_form()
        )
    }
}

/// Typed-value comparison. Numeric literals compare across xsd:double and
/// xsd:integer, dates chronologically, strings codepoint-wise, booleans with
/// false < true. `None` means the terms are incomparable; identical terms of
/// any kind compare equal.
pub fn compare_terms(a: &Term, b: &Term) -> Option<Ordering> {
    match (a, b) {
        (Term::Literal(la), Term::Literal(lb)) => match (la.value(), lb.value()) {
            (Some(va), Some(vb)) => compare_values(va, vb),
            // Language-tagged strings only take part in equality.
            _ => {
                if la == lb {
                    Some(Ordering::Equal)
                } else {
                    None
                }
            }
        },
        (Term::Iri(ia), Term::Iri(ib)) => {
            if ia == ib {
                Some(Ordering::Equal)
            } else {
                None
            }
        }
        (Term::Blank(ba), Term::Blank(bb)) => {
            if ba == bb {
                Some(Ordering::Equal)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn compare_values(a: LiteralValue<'_>, b: LiteralValue<'_>) -> Option<Ordering> {
    match (a, b) {
        (LiteralValue::Number(x), LiteralValue::Number(y)) => x.partial_cmp(&y),
        (LiteralValue::Date(x), LiteralValue::Date(y)) => Some(x.cmp(&y)),
        (LiteralValue::Str(x), LiteralValue::Str(y)) => Some(x.cmp(y)),
        (LiteralValue::Bool(x), LiteralValue::Bool(y)) => Some(x.cmp(&y)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(lexical: &str, dt: Datatype) -> Term {
        Term::Literal(Literal::new(lexical, dt).unwrap())
    }

    #[test]
    fn iri_validation() {
        assert!(Iri::new("http://example.org/x").is_ok());
        assert!(Iri::new("a:x").is_ok());
        assert!(Iri::new("").is_err());
        assert!(Iri::new("no-scheme-separator").is_err());
        assert!(Iri::new("http://example.org/with space").is_err());
    }

    #[test]
    fn make_literal_accepts_well_formed() {
        let l = make_literal("12.3", &vocab::XSD_DOUBLE).unwrap();
        assert_eq!(l.lexical(), "12.3");
        assert_eq!(l.datatype(), Datatype::Double);

        let d = make_literal("1980-01-01", &vocab::XSD_DATE).unwrap();
        assert_eq!(d.as_date(), NaiveDate::from_ymd_opt(1980, 1, 1));
    }

    #[test]
    fn make_literal_rejects_impossible_date() {
        let err = make_literal("1980-13-01", &vocab::XSD_DATE).unwrap_err();
        assert!(matches!(err, RdfError::InvalidLexicalForm { .. }));
        // Non-leap-year February 29th is also invalid.
        assert!(make_literal("1981-02-29", &vocab::XSD_DATE).is_err());
        assert!(make_literal("1980-02-29", &vocab::XSD_DATE).is_ok());
    }

    #[test]
    fn make_literal_rejects_unknown_datatype() {
        let dt = Iri::new("http://www.w3.org/2001/XMLSchema#long").unwrap();
        assert!(matches!(
            make_literal("5", &dt),
            Err(RdfError::UnsupportedDatatype(_))
        ));
    }

    #[test]
    fn make_literal_rejects_bad_numbers_and_booleans() {
        assert!(make_literal("abc", &vocab::XSD_DOUBLE).is_err());
        assert!(make_literal("1.5", &vocab::XSD_INTEGER).is_err());
        assert!(make_literal("yes", &vocab::XSD_BOOLEAN).is_err());
        assert!(make_literal("1", &vocab::XSD_BOOLEAN).is_ok());
    }

    #[test]
    fn numeric_comparison_crosses_datatypes() {
        let a = lit("2", Datatype::Integer);
        let b = lit("10.0", Datatype::Double);
        assert_eq!(compare_terms(&a, &b), Some(Ordering::Less));
        // Typed-value equality: "01" equals "1" numerically but not as terms.
        let c = lit("01", Datatype::Integer);
        let d = lit("1", Datatype::Integer);
        assert_eq!(compare_terms(&c, &d), Some(Ordering::Equal));
        assert_ne!(c, d);
    }

    #[test]
    fn date_comparison_is_chronological() {
        let a = lit("1980-01-01", Datatype::Date);
        let b = lit("2019-12-31", Datatype::Date);
        assert_eq!(compare_terms(&a, &b), Some(Ordering::Less));
        assert_eq!(compare_terms(&b, &a), Some(Ordering::Greater));
    }

    #[test]
    fn cross_kind_is_incomparable() {
        let a = Term::Iri(Iri::new("a:x").unwrap());
        let b = lit("5", Datatype::Integer);
        assert_eq!(compare_terms(&a, &b), None);
        assert_eq!(compare_terms(&b, &a), None);
    }

    #[test]
    fn cross_category_literals_are_incomparable() {
        let s = lit("abc", Datatype::String);
        let n = lit("5", Datatype::Integer);
        let d = lit("1980-01-01", Datatype::Date);
        assert_eq!(compare_terms(&s, &n), None);
        assert_eq!(compare_terms(&n, &d), None);
    }

    #[test]
    fn booleans_order_false_before_true() {
        let f = lit("false", Datatype::Boolean);
        let t = lit("1", Datatype::Boolean);
        assert_eq!(compare_terms(&f, &t), Some(Ordering::Less));
    }

    #[test]
    fn identical_iris_compare_equal() {
        let a = Term::Iri(Iri::new("a:x").unwrap());
        let b = Term::Iri(Iri::new("a:x").unwrap());
        let c = Term::Iri(Iri::new("a:y").unwrap());
        assert_eq!(compare_terms(&a, &b), Some(Ordering::Equal));
        assert_eq!(compare_terms(&a, &c), None);
    }

    #[test]
    fn language_tagged_equality_only() {
        let a = Term::Literal(Literal::lang_string("Dublin", "en"));
        let b = Term::Literal(Literal::lang_string("Dublin", "en"));
        let c = Term::Literal(Literal::lang_string("Dublin", "ga"));
        assert_eq!(compare_terms(&a, &b), Some(Ordering::Equal));
        assert_eq!(compare_terms(&a, &c), None);
    }

    #[test]
    fn ntriples_form_escapes() {
        let t = Term::Literal(Literal::string("a \"quote\"\nnewline"));
        assert_eq!(t.ntriples_form(), "\"a \\\"quote\\\"\\nnewline\"");
    }

    #[test]
    fn double_formatting_keeps_xsd_validity() {
        assert_eq!(format_double(4.5), "4.5");
        assert_eq!(format_double(20.0), "20.0");
        assert_eq!(format_double(-3.0), "-3.0");
        for v in [4.5, 20.0, -3.0, 1e-7, 12345.6789] {
            let l = Literal::double(v);
            assert_eq!(l.as_f64(), Some(v));
        }
    }
}
