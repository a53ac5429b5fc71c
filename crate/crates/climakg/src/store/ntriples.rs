//! Line-oriented N-Triples parsing.

use crate::rdf::{make_literal, vocab, BlankNode, Literal, Subject, Term, Triple};
use crate::store::lex::{read_blank_label, read_iriref, read_lang_tag, read_string, Cursor};
use crate::store::{Graph, ParseError};

pub(super) fn load(graph: &mut Graph, text: &str) -> Result<usize, ParseError> {
    let mut inserted = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(triple) = parse_line(line, line_no)? {
            if graph.insert(&triple) {
                inserted += 1;
            }
        }
    }
    Ok(inserted)
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<Triple>, ParseError> {
    let mut cur = Cursor::new(line, line_no);
    cur.skip_trivia();
    if cur.at_end() {
        return Ok(None);
    }

    let subject = match cur.peek() {
        Some('<') => Subject::Iri(read_iriref(&mut cur)?),
        Some('_') => {
            let label = read_blank_label(&mut cur)?;
            Subject::Blank(BlankNode::new(label).map_err(|e| cur.error(e.to_string()))?)
        }
        Some('"') => return Err(cur.error("literal not allowed in subject position")),
        _ => return Err(cur.error("expected IRI or blank node subject")),
    };

    cur.skip_trivia();
    let predicate = read_iriref(&mut cur).map_err(|e| match e {
        ParseError::Syntax { line, column, .. } => ParseError::Syntax {
            line,
            column,
            message: "expected IRI predicate".into(),
        },
        other => other,
    })?;

    cur.skip_trivia();
    let object = read_object(&mut cur)?;

    cur.skip_trivia();
    if !cur.eat('.') {
        return Err(cur.error("expected '.' terminating the statement"));
    }
    cur.skip_trivia();
    if !cur.at_end() {
        return Err(cur.error("unexpected trailing content after '.'"));
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

fn read_object(cur: &mut Cursor<'_>) -> Result<Term, ParseError> {
    match cur.peek() {
        Some('<') => Ok(Term::Iri(read_iriref(cur)?)),
        Some('_') => {
            let label = read_blank_label(cur)?;
            Ok(Term::Blank(
                BlankNode::new(label).map_err(|e| cur.error(e.to_string()))?,
            ))
        }
        Some('"') => {
            let lexical = read_string(cur)?;
            match cur.peek() {
                Some('^') => {
                    cur.bump();
                    if !cur.eat('^') {
                        return Err(cur.error("expected '^^' before datatype IRI"));
                    }
                    let dt = read_iriref(cur)?;
                    let lit = make_literal(lexical, &dt).map_err(|e| cur.error(e.to_string()))?;
                    Ok(Term::Literal(lit))
                }
                Some('@') => {
                    let tag = read_lang_tag(cur)?;
                    Ok(Term::Literal(Literal::lang_string(lexical, tag)))
                }
                _ => {
                    let lit = make_literal(lexical, &vocab::XSD_STRING)
                        .map_err(|e| cur.error(e.to_string()))?;
                    Ok(Term::Literal(lit))
                }
            }
        }
        _ => Err(cur.error("expected IRI, blank node or literal object")),
    }
}
