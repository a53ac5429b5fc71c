//! Turtle subset parsing: `@prefix`, prefixed names, `;` / `,` lists, the
//! `a` keyword and numeric / boolean / string literal shorthand.
//!
//! Collections `()` and blank node property lists `[]` are not part of the
//! subset and are rejected.

use std::collections::HashMap;

use crate::rdf::{make_literal, vocab, BlankNode, Datatype, Iri, Literal, Subject, Term, Triple};
use crate::store::lex::{read_blank_label, read_iriref, read_lang_tag, read_string, Cursor};
use crate::store::{Graph, ParseError};

pub(super) fn load(graph: &mut Graph, text: &str) -> Result<usize, ParseError> {
    let mut parser = Parser {
        cur: Cursor::new(text, 1),
        prefixes: HashMap::new(),
    };
    let mut inserted = 0;
    loop {
        parser.cur.skip_trivia();
        if parser.cur.at_end() {
            break;
        }
        if parser.cur.peek() == Some('@') {
            parser.directive()?;
            continue;
        }
        for triple in parser.triples()? {
            if graph.insert(&triple) {
                inserted += 1;
            }
        }
    }
    Ok(inserted)
}

struct Parser<'a> {
    cur: Cursor<'a>,
    prefixes: HashMap<String, String>,
}

impl Parser<'_> {
    fn directive(&mut self) -> Result<(), ParseError> {
        self.cur.bump(); // '@'
        let word = self.word();
        if word != "prefix" {
            return Err(self.cur.error(format!("unsupported directive '@{word}'")));
        }
        self.cur.skip_trivia();
        let prefix = self.word();
        if !self.cur.eat(':') {
            return Err(self.cur.error("expected ':' after prefix name"));
        }
        self.cur.skip_trivia();
        let iri = read_iriref(&mut self.cur)?;
        self.cur.skip_trivia();
        if !self.cur.eat('.') {
            return Err(self.cur.error("expected '.' after @prefix directive"));
        }
        self.prefixes.insert(prefix, iri.as_str().to_string());
        Ok(())
    }

    /// One `subject predicate-object-list .` statement, expanded.
    fn triples(&mut self) -> Result<Vec<Triple>, ParseError> {
        let subject = self.subject()?;
        let mut out = Vec::new();
        loop {
            self.cur.skip_trivia();
            let predicate = self.verb()?;
            loop {
                self.cur.skip_trivia();
                let object = self.object()?;
                out.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                self.cur.skip_trivia();
                if !self.cur.eat(',') {
                    break;
                }
            }
            self.cur.skip_trivia();
            if self.cur.eat(';') {
                self.cur.skip_trivia();
                // Trailing ';' before '.' is allowed.
                if self.cur.peek() == Some('.') {
                    break;
                }
                continue;
            }
            break;
        }
        self.cur.skip_trivia();
        if !self.cur.eat('.') {
            return Err(self.cur.error("expected '.', ';' or ',' in statement"));
        }
        Ok(out)
    }

    fn subject(&mut self) -> Result<Subject, ParseError> {
        match self.cur.peek() {
            Some('<') => Ok(Subject::Iri(read_iriref(&mut self.cur)?)),
            Some('_') => {
                let label = read_blank_label(&mut self.cur)?;
                Ok(Subject::Blank(
                    BlankNode::new(label).map_err(|e| self.cur.error(e.to_string()))?,
                ))
            }
            Some('[') => Err(self
                .cur
                .error("blank node property lists '[]' are not supported")),
            Some('(') => Err(self.cur.error("collections '()' are not supported")),
            Some('"') => Err(self.cur.error("literal not allowed in subject position")),
            Some(c) if c.is_alphanumeric() || c == '_' || c == ':' => {
                Ok(Subject::Iri(self.prefixed_name()?))
            }
            _ => Err(self.cur.error("expected subject")),
        }
    }

    fn verb(&mut self) -> Result<Iri, ParseError> {
        match self.cur.peek() {
            Some('<') => read_iriref(&mut self.cur),
            Some('a') if !is_name_char(self.cur.peek2()) => {
                self.cur.bump();
                Ok(vocab::RDF_TYPE.clone())
            }
            Some(c) if c.is_alphanumeric() || c == '_' || c == ':' => self.prefixed_name(),
            _ => Err(self.cur.error("expected predicate")),
        }
    }

    fn object(&mut self) -> Result<Term, ParseError> {
        match self.cur.peek() {
            Some('<') => Ok(Term::Iri(read_iriref(&mut self.cur)?)),
            Some('_') => {
                let label = read_blank_label(&mut self.cur)?;
                Ok(Term::Blank(
                    BlankNode::new(label).map_err(|e| self.cur.error(e.to_string()))?,
                ))
            }
            Some('[') => Err(self
                .cur
                .error("blank node property lists '[]' are not supported")),
            Some('(') => Err(self.cur.error("collections '()' are not supported")),
            Some('"') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.numeric_literal(),
            Some(c) if c.is_alphanumeric() || c == '_' || c == ':' => {
                // Bare words are booleans; anything else must be a prefixed name.
                let start_line = self.cur.line;
                let start_col = self.cur.column;
                let word = self.word();
                if self.cur.peek() == Some(':') {
                    self.cur.bump();
                    let local = self.local_name();
                    return Ok(Term::Iri(self.expand(&word, &local, start_line)?));
                }
                match word.as_str() {
                    "true" | "false" => Ok(Term::Literal(
                        Literal::new(word, Datatype::Boolean).expect("valid boolean"),
                    )),
                    _ => Err(ParseError::Syntax {
                        line: start_line,
                        column: start_col,
                        message: format!("unexpected token '{word}'"),
                    }),
                }
            }
            _ => Err(self.cur.error("expected object")),
        }
    }

    fn string_literal(&mut self) -> Result<Term, ParseError> {
        let lexical = read_string(&mut self.cur)?;
        match self.cur.peek() {
            Some('^') => {
                self.cur.bump();
                if !self.cur.eat('^') {
                    return Err(self.cur.error("expected '^^' before datatype"));
                }
                let dt = match self.cur.peek() {
                    Some('<') => read_iriref(&mut self.cur)?,
                    _ => self.prefixed_name()?,
                };
                let lit = make_literal(lexical, &dt).map_err(|e| self.cur.error(e.to_string()))?;
                Ok(Term::Literal(lit))
            }
            Some('@') => {
                let tag = read_lang_tag(&mut self.cur)?;
                Ok(Term::Literal(Literal::lang_string(lexical, tag)))
            }
            _ => Ok(Term::Literal(Literal::string(lexical))),
        }
    }

    /// Integer or double shorthand. A '.' not followed by a digit is left in
    /// place as the statement terminator.
    fn numeric_literal(&mut self) -> Result<Term, ParseError> {
        let mut lexical = String::new();
        if matches!(self.cur.peek(), Some('+') | Some('-')) {
            lexical.push(self.cur.bump().unwrap());
        }
        let mut is_double = false;
        while self.cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            lexical.push(self.cur.bump().unwrap());
        }
        if self.cur.peek() == Some('.') && self.cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
            is_double = true;
            lexical.push(self.cur.bump().unwrap());
            while self.cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                lexical.push(self.cur.bump().unwrap());
            }
        }
        if matches!(self.cur.peek(), Some('e') | Some('E')) {
            is_double = true;
            lexical.push(self.cur.bump().unwrap());
            if matches!(self.cur.peek(), Some('+') | Some('-')) {
                lexical.push(self.cur.bump().unwrap());
            }
            while self.cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                lexical.push(self.cur.bump().unwrap());
            }
        }
        let datatype = if is_double {
            Datatype::Double
        } else {
            Datatype::Integer
        };
        Literal::new(lexical, datatype)
            .map(Term::Literal)
            .map_err(|e| self.cur.error(e.to_string()))
    }

    fn prefixed_name(&mut self) -> Result<Iri, ParseError> {
        let line = self.cur.line;
        let prefix = self.word();
        if !self.cur.eat(':') {
            return Err(self.cur.error("expected ':' in prefixed name"));
        }
        let local = self.local_name();
        self.expand(&prefix, &local, line)
    }

    fn expand(&self, prefix: &str, local: &str, line: usize) -> Result<Iri, ParseError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| ParseError::UnknownPrefix {
                line,
                prefix: prefix.to_string(),
            })?;
        Iri::new(format!("{ns}{local}")).map_err(|e| ParseError::Syntax {
            line,
            column: 0,
            message: e.to_string(),
        })
    }

    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.cur.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                word.push(c);
                self.cur.bump();
            } else {
                break;
            }
        }
        word
    }

    /// Local part of a prefixed name; a trailing '.' stays in the stream.
    fn local_name(&mut self) -> String {
        let mut local = String::new();
        while let Some(c) = self.cur.peek() {
            let name_char = c.is_alphanumeric()
                || c == '_'
                || c == '-'
                || (c == '.' && is_name_char(self.cur.peek2()));
            if !name_char {
                break;
            }
            local.push(c);
            self.cur.bump();
        }
        local
    }
}

fn is_name_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '-')
}
