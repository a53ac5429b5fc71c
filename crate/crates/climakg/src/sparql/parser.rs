//! Tokenizer and recursive-descent parser for the SPARQL subset.

use std::collections::BTreeMap;

use crate::rdf::{make_literal, vocab, Datatype, Iri, Literal, Term};
use crate::sparql::ast::{
    CompareOp, Expression, Function, GroupPattern, PatternTerm, Query, Selection, SortKey,
    TriplePattern,
};
use crate::sparql::SparqlError;
use crate::store::lex::{read_iriref, read_lang_tag, read_string, Cursor};
use crate::store::ParseError;

pub fn parse_query(text: &str) -> Result<Query, SparqlError> {
    let (tokens, end) = tokenize(text)?;
    Parser {
        tokens,
        pos: 0,
        end,
        prefixes: BTreeMap::new(),
    }
    .query()
}

fn adapt(err: ParseError) -> SparqlError {
    match err {
        ParseError::Syntax {
            line,
            column,
            message,
        } => SparqlError::Syntax {
            line,
            column,
            message,
        },
        ParseError::UnknownPrefix { line, prefix } => SparqlError::UnknownPrefix { line, prefix },
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    IriRef(Iri),
    PName { prefix: String, local: String },
    Str { value: String, lang: Option<String> },
    Num { lexical: String, double: bool },
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Word(w) => format!("'{w}'"),
        Tok::Var(v) => format!("?{v}"),
        Tok::IriRef(iri) => format!("<{}>", iri.as_str()),
        Tok::PName { prefix, local } => format!("'{prefix}:{local}'"),
        Tok::Str { .. } => "string literal".to_string(),
        Tok::Num { lexical, .. } => format!("'{lexical}'"),
        Tok::Punct(p) => format!("'{p}'"),
    }
}

/// A '<' starts an IRI reference only if a '>' shows up before any character
/// that cannot occur inside one; otherwise it is the less-than operator.
fn starts_iriref(cur: &Cursor<'_>) -> bool {
    for c in cur.rest().chars().skip(1) {
        match c {
            '>' => return true,
            c if c.is_whitespace() => return false,
            '<' | '"' | '{' | '}' => return false,
            _ => {}
        }
    }
    false
}

fn tokenize(text: &str) -> Result<(Vec<Token>, (usize, usize)), SparqlError> {
    let mut cur = Cursor::new(text, 1);
    let mut out = Vec::new();
    loop {
        cur.skip_trivia();
        if cur.at_end() {
            break;
        }
        let line = cur.line;
        let column = cur.column;
        let c = cur.peek().unwrap();
        let tok = match c {
            '?' | '$' => {
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(adapt(cur.error("expected variable name after '?'")));
                }
                Tok::Var(name)
            }
            '<' => {
                if cur.peek2() == Some('=') {
                    cur.bump();
                    cur.bump();
                    Tok::Punct("<=")
                } else if starts_iriref(&cur) {
                    Tok::IriRef(read_iriref(&mut cur).map_err(adapt)?)
                } else {
                    cur.bump();
                    Tok::Punct("<")
                }
            }
            '>' => {
                cur.bump();
                if cur.eat('=') {
                    Tok::Punct(">=")
                } else {
                    Tok::Punct(">")
                }
            }
            '"' => {
                let value = read_string(&mut cur).map_err(adapt)?;
                let lang = if cur.peek() == Some('@') {
                    Some(read_lang_tag(&mut cur).map_err(adapt)?)
                } else {
                    None
                };
                Tok::Str { value, lang }
            }
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '*' | '=' => {
                cur.bump();
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '.' => ".",
                    ';' => ";",
                    ',' => ",",
                    '*' => "*",
                    _ => "=",
                })
            }
            '!' => {
                cur.bump();
                if cur.eat('=') {
                    Tok::Punct("!=")
                } else {
                    Tok::Punct("!")
                }
            }
            '&' => {
                cur.bump();
                if cur.eat('&') {
                    Tok::Punct("&&")
                } else {
                    return Err(adapt(cur.error("expected '&&'")));
                }
            }
            '|' => {
                cur.bump();
                if cur.eat('|') {
                    Tok::Punct("||")
                } else {
                    return Err(adapt(cur.error("expected '||'")));
                }
            }
            '^' => {
                cur.bump();
                if cur.eat('^') {
                    Tok::Punct("^^")
                } else {
                    return Err(adapt(cur.error("expected '^^'")));
                }
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' => read_number(&mut cur)?,
            ':' => {
                cur.bump();
                Tok::PName {
                    prefix: String::new(),
                    local: read_local_name(&mut cur),
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        word.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if cur.peek() == Some(':') {
                    cur.bump();
                    Tok::PName {
                        prefix: word,
                        local: read_local_name(&mut cur),
                    }
                } else {
                    Tok::Word(word)
                }
            }
            other => {
                return Err(adapt(cur.error(format!("unexpected character '{other}'"))));
            }
        };
        out.push(Token { tok, line, column });
    }
    Ok((out, (cur.line, cur.column)))
}

/// Local part of a prefixed name; a trailing '.' stays in the stream.
fn read_local_name(cur: &mut Cursor<'_>) -> String {
    let mut local = String::new();
    loop {
        match cur.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' || c == '-' => {
                local.push(c);
                cur.bump();
            }
            Some('.')
                if cur
                    .peek2()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '-') =>
            {
                local.push('.');
                cur.bump();
            }
            _ => break,
        }
    }
    local
}

fn read_number(cur: &mut Cursor<'_>) -> Result<Tok, SparqlError> {
    let mut lexical = String::new();
    if matches!(cur.peek(), Some('+') | Some('-')) {
        lexical.push(cur.bump().unwrap());
    }
    let mut double = false;
    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        lexical.push(cur.bump().unwrap());
    }
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        double = true;
        lexical.push(cur.bump().unwrap());
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            lexical.push(cur.bump().unwrap());
        }
    }
    if matches!(cur.peek(), Some('e') | Some('E')) {
        double = true;
        lexical.push(cur.bump().unwrap());
        if matches!(cur.peek(), Some('+') | Some('-')) {
            lexical.push(cur.bump().unwrap());
        }
        let mut digits = false;
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            lexical.push(cur.bump().unwrap());
            digits = true;
        }
        if !digits {
            return Err(adapt(cur.error("expected digits in exponent")));
        }
    }
    if !lexical.chars().any(|c| c.is_ascii_digit()) {
        return Err(adapt(cur.error("expected number")));
    }
    Ok(Tok::Num { lexical, double })
}

/// Node of a triple pattern before prefixed names are expanded. Expansion is
/// deferred until the whole triple has been read, so that a structurally
/// broken pattern reports a syntax error rather than an unknown prefix.
#[derive(Debug, Clone)]
enum RawNode {
    Var(String),
    Iri(Iri),
    PName {
        prefix: String,
        local: String,
        line: usize,
        column: usize,
    },
    Term(Term),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    prefixes: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn expected(&self, what: impl Into<String>) -> SparqlError {
        let what = what.into();
        match self.peek() {
            Some(t) => SparqlError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected {what}, found {}", describe(&t.tok)),
            },
            None => SparqlError::Syntax {
                line: self.end.0,
                column: self.end.1,
                message: format!("expected {what}, found end of query"),
            },
        }
    }

    fn peek_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), SparqlError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.expected(format!("'{p}'")))
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SparqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.expected(format!("'{kw}'")))
        }
    }

    fn query(mut self) -> Result<Query, SparqlError> {
        while self.eat_keyword("PREFIX") {
            self.prefix_declaration()?;
        }
        self.expect_keyword("SELECT")?;
        let distinct = self.eat_keyword("DISTINCT");
        let mut selected: Vec<(String, usize, usize)> = Vec::new();
        let selection = if self.eat_punct("*") {
            Selection::All
        } else {
            while let Some(Token {
                tok: Tok::Var(name),
                line,
                column,
            }) = self.peek().cloned()
            {
                self.pos += 1;
                if selected.iter().any(|(v, _, _)| *v == name) {
                    return Err(SparqlError::Syntax {
                        line,
                        column,
                        message: format!("variable ?{name} listed twice in SELECT"),
                    });
                }
                selected.push((name, line, column));
            }
            if selected.is_empty() {
                return Err(self.expected("'*' or at least one variable"));
            }
            Selection::Vars(selected.iter().map(|(v, _, _)| v.clone()).collect())
        };
        self.expect_keyword("WHERE")?;
        let group = self.group_pattern()?;
        let order_by = if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            let mut keys = Vec::new();
            while let Some(key) = self.order_key()? {
                keys.push(key);
            }
            if keys.is_empty() {
                return Err(self.expected("an ORDER BY condition"));
            }
            keys
        } else {
            Vec::new()
        };
        let mut limit = None;
        let mut offset = None;
        loop {
            if limit.is_none() && self.eat_keyword("LIMIT") {
                limit = Some(self.nonnegative_integer()?);
            } else if offset.is_none() && self.eat_keyword("OFFSET") {
                offset = Some(self.nonnegative_integer()?);
            } else {
                break;
            }
        }
        if !self.at_end() {
            return Err(self.expected("end of query"));
        }
        let visible = group.visible_variables();
        for (name, line, column) in &selected {
            if !visible.iter().any(|v| v == name) {
                return Err(SparqlError::Syntax {
                    line: *line,
                    column: *column,
                    message: format!("selected variable ?{name} does not occur in the pattern"),
                });
            }
        }
        Ok(Query {
            selection,
            distinct,
            group,
            order_by,
            limit,
            offset,
        })
    }

    fn prefix_declaration(&mut self) -> Result<(), SparqlError> {
        let (prefix, ok) = match self.peek() {
            Some(Token {
                tok: Tok::PName { prefix, local },
                ..
            }) => (prefix.clone(), local.is_empty()),
            _ => (String::new(), false),
        };
        if !ok {
            return Err(self.expected("a prefix name ending in ':'"));
        }
        self.pos += 1;
        let iri = match self.next() {
            Some(Token {
                tok: Tok::IriRef(iri),
                ..
            }) => iri,
            _ => {
                self.pos -= 1;
                return Err(self.expected("an IRI reference"));
            }
        };
        self.prefixes.insert(prefix, iri.as_str().to_string());
        Ok(())
    }

    fn group_pattern(&mut self) -> Result<GroupPattern, SparqlError> {
        self.expect_punct("{")?;
        let mut group = GroupPattern::default();
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_keyword("FILTER") {
                self.expect_punct("(")?;
                let e = self.expression()?;
                self.expect_punct(")")?;
                group.filters.push(e);
                self.eat_punct(".");
                continue;
            }
            if self.eat_keyword("OPTIONAL") {
                group.optionals.push(self.group_pattern()?);
                self.eat_punct(".");
                continue;
            }
            self.triples_same_subject(&mut group)?;
            if self.eat_punct(".") {
                continue;
            }
            if self.peek_punct("}") || self.peek_keyword("FILTER") || self.peek_keyword("OPTIONAL")
            {
                continue;
            }
            return Err(self.expected("'.', '}', 'FILTER' or 'OPTIONAL'"));
        }
        Ok(group)
    }

    fn triples_same_subject(&mut self, group: &mut GroupPattern) -> Result<(), SparqlError> {
        let subject = self.node("a subject")?;
        loop {
            let verb = self.verb()?;
            loop {
                let object = self.node("an object")?;
                group.patterns.push(TriplePattern {
                    subject: self.resolve(&subject)?,
                    predicate: self.resolve(&verb)?,
                    object: self.resolve(&object)?,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            if self.eat_punct(";") {
                // Trailing ';' before the block or group ends is allowed.
                if self.peek_punct(".") || self.peek_punct("}") {
                    break;
                }
                continue;
            }
            break;
        }
        Ok(())
    }

    fn node(&mut self, role: &str) -> Result<RawNode, SparqlError> {
        let token = match self.peek().cloned() {
            Some(t) => t,
            None => return Err(self.expected(role)),
        };
        let node = match token.tok {
            Tok::Var(name) => RawNode::Var(name),
            Tok::IriRef(iri) => RawNode::Iri(iri),
            Tok::PName { prefix, local } => RawNode::PName {
                prefix,
                local,
                line: token.line,
                column: token.column,
            },
            Tok::Num { lexical, double } => {
                let datatype = if double {
                    Datatype::Double
                } else {
                    Datatype::Integer
                };
                let lit = Literal::new(lexical, datatype).map_err(|e| SparqlError::Syntax {
                    line: token.line,
                    column: token.column,
                    message: e.to_string(),
                })?;
                RawNode::Term(Term::Literal(lit))
            }
            Tok::Word(ref w) if w == "true" || w == "false" => {
                RawNode::Term(Term::Literal(Literal::boolean(w == "true")))
            }
            Tok::Str { .. } => {
                let lit = self.string_literal()?;
                return Ok(RawNode::Term(Term::Literal(lit)));
            }
            _ => return Err(self.expected(role)),
        };
        self.pos += 1;
        Ok(node)
    }

    /// Consumes a string token plus any `^^datatype` suffix.
    fn string_literal(&mut self) -> Result<Literal, SparqlError> {
        let token = self.next().expect("caller checked for a string token");
        let (value, lang) = match token.tok {
            Tok::Str { value, lang } => (value, lang),
            _ => unreachable!("caller checked for a string token"),
        };
        if let Some(tag) = lang {
            return Ok(Literal::lang_string(value, tag));
        }
        if self.eat_punct("^^") {
            let dt = match self.peek().cloned() {
                Some(Token {
                    tok: Tok::IriRef(iri),
                    ..
                }) => {
                    self.pos += 1;
                    iri
                }
                Some(Token {
                    tok: Tok::PName { prefix, local },
                    line,
                    column,
                }) => {
                    self.pos += 1;
                    self.expand(&prefix, &local, line, column)?
                }
                _ => return Err(self.expected("a datatype IRI")),
            };
            return make_literal(value, &dt).map_err(|e| SparqlError::Syntax {
                line: token.line,
                column: token.column,
                message: e.to_string(),
            });
        }
        Ok(Literal::string(value))
    }

    fn verb(&mut self) -> Result<RawNode, SparqlError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w), ..
            }) if w == "a" => {
                self.pos += 1;
                Ok(RawNode::Iri(vocab::RDF_TYPE.clone()))
            }
            Some(Token {
                tok: Tok::Var(_) | Tok::IriRef(_) | Tok::PName { .. },
                ..
            }) => self.node("a predicate"),
            _ => Err(self.expected("a predicate")),
        }
    }

    fn resolve(&self, node: &RawNode) -> Result<PatternTerm, SparqlError> {
        Ok(match node {
            RawNode::Var(v) => PatternTerm::Var(v.clone()),
            RawNode::Iri(iri) => PatternTerm::Const(Term::Iri(iri.clone())),
            RawNode::PName {
                prefix,
                local,
                line,
                column,
            } => PatternTerm::Const(Term::Iri(self.expand(prefix, local, *line, *column)?)),
            RawNode::Term(t) => PatternTerm::Const(t.clone()),
        })
    }

    fn expand(
        &self,
        prefix: &str,
        local: &str,
        line: usize,
        column: usize,
    ) -> Result<Iri, SparqlError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| SparqlError::UnknownPrefix {
                line,
                prefix: prefix.to_string(),
            })?;
        Iri::new(format!("{ns}{local}")).map_err(|e| SparqlError::Syntax {
            line,
            column,
            message: e.to_string(),
        })
    }

    fn expression(&mut self) -> Result<Expression, SparqlError> {
        let mut left = self.and_expression()?;
        while self.eat_punct("||") {
            let right = self.and_expression()?;
            left = Expression::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expression(&mut self) -> Result<Expression, SparqlError> {
        let mut left = self.relational_expression()?;
        while self.eat_punct("&&") {
            let right = self.relational_expression()?;
            left = Expression::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational_expression(&mut self) -> Result<Expression, SparqlError> {
        let left = self.unary_expression()?;
        let op = match self.peek() {
            Some(Token {
                tok: Tok::Punct(p), ..
            }) => match *p {
                "<" => CompareOp::Lt,
                "<=" => CompareOp::Le,
                ">" => CompareOp::Gt,
                ">=" => CompareOp::Ge,
                "=" => CompareOp::Eq,
                "!=" => CompareOp::Ne,
                _ => return Ok(left),
            },
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.unary_expression()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn unary_expression(&mut self) -> Result<Expression, SparqlError> {
        if self.eat_punct("!") {
            return Ok(Expression::Not(Box::new(self.unary_expression()?)));
        }
        self.primary_expression()
    }

    fn primary_expression(&mut self) -> Result<Expression, SparqlError> {
        let token = match self.peek().cloned() {
            Some(t) => t,
            None => return Err(self.expected("an expression")),
        };
        match token.tok {
            Tok::Punct("(") => {
                self.pos += 1;
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(name) => {
                self.pos += 1;
                Ok(Expression::Var(name))
            }
            Tok::Num { lexical, double } => {
                self.pos += 1;
                let datatype = if double {
                    Datatype::Double
                } else {
                    Datatype::Integer
                };
                let lit = Literal::new(lexical, datatype).map_err(|e| SparqlError::Syntax {
                    line: token.line,
                    column: token.column,
                    message: e.to_string(),
                })?;
                Ok(Expression::Const(Term::Literal(lit)))
            }
            Tok::Str { .. } => Ok(Expression::Const(Term::Literal(self.string_literal()?))),
            Tok::IriRef(iri) => {
                self.pos += 1;
                Ok(Expression::Const(Term::Iri(iri)))
            }
            Tok::PName { prefix, local } => {
                self.pos += 1;
                let iri = self.expand(&prefix, &local, token.line, token.column)?;
                Ok(Expression::Const(Term::Iri(iri)))
            }
            Tok::Word(word) => {
                if word == "true" || word == "false" {
                    self.pos += 1;
                    return Ok(Expression::Const(Term::Literal(Literal::boolean(
                        word == "true",
                    ))));
                }
                self.pos += 1;
                if !self.peek_punct("(") {
                    self.pos -= 1;
                    return Err(self.expected("an expression"));
                }
                let function = match word.to_ascii_uppercase().as_str() {
                    "YEAR" => Function::Year,
                    "MONTH" => Function::Month,
                    "DAY" => Function::Day,
                    "STR" => Function::Str,
                    _ => {
                        return Err(SparqlError::UnknownFunction {
                            line: token.line,
                            name: word,
                        })
                    }
                };
                self.expect_punct("(")?;
                let arg = self.expression()?;
                self.expect_punct(")")?;
                Ok(Expression::Call(function, Box::new(arg)))
            }
            Tok::Punct(_) => Err(self.expected("an expression")),
        }
    }

    fn order_key(&mut self) -> Result<Option<SortKey>, SparqlError> {
        if self.eat_keyword("ASC") || self.eat_keyword("DESC") {
            let descending = matches!(
                &self.tokens[self.pos - 1].tok,
                Tok::Word(w) if w.eq_ignore_ascii_case("DESC")
            );
            self.expect_punct("(")?;
            let expr = self.expression()?;
            self.expect_punct(")")?;
            return Ok(Some(SortKey { expr, descending }));
        }
        match self.peek() {
            Some(Token {
                tok: Tok::Var(name),
                ..
            }) => {
                let expr = Expression::Var(name.clone());
                self.pos += 1;
                Ok(Some(SortKey {
                    expr,
                    descending: false,
                }))
            }
            Some(Token {
                tok: Tok::Punct("("),
                ..
            }) => {
                self.pos += 1;
                let expr = self.expression()?;
                self.expect_punct(")")?;
                Ok(Some(SortKey {
                    expr,
                    descending: false,
                }))
            }
            Some(Token {
                tok: Tok::Word(w), ..
            }) if matches!(
                w.to_ascii_uppercase().as_str(),
                "YEAR" | "MONTH" | "DAY" | "STR"
            ) =>
            {
                let expr = self.primary_expression()?;
                Ok(Some(SortKey {
                    expr,
                    descending: false,
                }))
            }
            _ => Ok(None),
        }
    }

    fn nonnegative_integer(&mut self) -> Result<usize, SparqlError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Num { lexical, double },
                ..
            }) if !double => {
                if let Ok(n) = lexical.parse::<usize>() {
                    self.pos += 1;
                    return Ok(n);
                }
                Err(self.expected("a non-negative integer"))
            }
            _ => Err(self.expected("a non-negative integer")),
        }
    }
}
