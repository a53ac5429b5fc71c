//! Character-level scanning shared by the N-Triples and Turtle parsers.

use crate::rdf::Iri;
use crate::store::ParseError;

pub(crate) struct Cursor<'a> {
    input: &'a str,
    pos: usize,
    pub line: usize,
    pub column: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(input: &'a str, start_line: usize) -> Self {
        Cursor {
            input,
            pos: 0,
            line: start_line,
            column: 1,
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    pub fn peek2(&self) -> Option<char> {
        let mut it = self.input[self.pos..].chars();
        it.next();
        it.next()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    /// Unconsumed input, starting at the current position.
    pub fn rest(&self) -> &str {
        &self.input[self.pos..]
    }

    /// Skips whitespace and `#` comments (to end of line).
    pub fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

/// Reads `<iri>` with the opening `<` already expected at the cursor.
pub(crate) fn read_iriref(cur: &mut Cursor<'_>) -> Result<Iri, ParseError> {
    if !cur.eat('<') {
        return Err(cur.error("expected '<'"));
    }
    let mut value = String::new();
    loop {
        match cur.bump() {
            Some('>') => break,
            Some(c) if c.is_whitespace() => {
                return Err(cur.error("whitespace inside IRI"));
            }
            Some('\\') => {
                // \u / \U escapes inside IRIs
                let esc = read_unicode_escape(cur)?;
                value.push(esc);
            }
            Some(c) => value.push(c),
            None => return Err(cur.error("unterminated IRI, expected '>'")),
        }
    }
    Iri::new(value).map_err(|e| cur.error(e.to_string()))
}

/// Reads a double-quoted string with the opening quote still pending.
pub(crate) fn read_string(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    if !cur.eat('"') {
        return Err(cur.error("expected '\"'"));
    }
    let mut value = String::new();
    loop {
        match cur.bump() {
            Some('"') => break,
            Some('\\') => match cur.bump() {
                Some('t') => value.push('\t'),
                Some('b') => value.push('\u{8}'),
                Some('n') => value.push('\n'),
                Some('r') => value.push('\r'),
                Some('f') => value.push('\u{c}'),
                Some('"') => value.push('"'),
                Some('\'') => value.push('\''),
                Some('\\') => value.push('\\'),
                Some('u') => value.push(read_hex_escape(cur, 4)?),
                Some('U') => value.push(read_hex_escape(cur, 8)?),
                Some(other) => {
                    return Err(cur.error(format!("invalid escape '\\{other}'")));
                }
                None => return Err(cur.error("unterminated escape")),
            },
            Some('\n') => return Err(cur.error("newline in string literal")),
            Some(c) => value.push(c),
            None => return Err(cur.error("unterminated string literal")),
        }
    }
    Ok(value)
}

/// Reads `\uXXXX` or `\UXXXXXXXX` with the backslash already consumed.
fn read_unicode_escape(cur: &mut Cursor<'_>) -> Result<char, ParseError> {
    match cur.bump() {
        Some('u') => read_hex_escape(cur, 4),
        Some('U') => read_hex_escape(cur, 8),
        _ => Err(cur.error("invalid IRI escape")),
    }
}

fn read_hex_escape(cur: &mut Cursor<'_>, len: usize) -> Result<char, ParseError> {
    let mut digits = String::new();
    for _ in 0..len {
        match cur.bump() {
            Some(c) if c.is_ascii_hexdigit() => digits.push(c),
            _ => return Err(cur.error("expected hex digit in unicode escape")),
        }
    }
    let code = u32::from_str_radix(&digits, 16).map_err(|_| cur.error("bad unicode escape"))?;
    char::from_u32(code).ok_or_else(|| cur.error("escape is not a valid codepoint"))
}

/// Reads a blank node label after `_:`.
pub(crate) fn read_blank_label(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    if !cur.eat('_') || !cur.eat(':') {
        return Err(cur.error("expected '_:'"));
    }
    let mut label = String::new();
    while let Some(c) = cur.peek() {
        if c.is_alphanumeric() || c == '_' || c == '-' {
            label.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    if label.is_empty() {
        return Err(cur.error("empty blank node label"));
    }
    Ok(label)
}

/// Reads a language tag after `@`.
pub(crate) fn read_lang_tag(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    if !cur.eat('@') {
        return Err(cur.error("expected '@'"));
    }
    let mut tag = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_alphanumeric() || c == '-' {
            tag.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    if tag.is_empty() {
        return Err(cur.error("empty language tag"));
    }
    Ok(tag)
}
