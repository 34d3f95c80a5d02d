//! Line-oriented N-Triples reader.
//!
//! Accepts a pragmatic superset of N-Triples: besides `<iri>` and `_:label`
//! terms it takes bare prefixed names (`dbpedia:Rome`, `xsd:gYear`) verbatim.
//! IRIs are never unescaped or percent-decoded.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Named {
        name: String,
    },
    Literal {
        lexical: String,
        datatype: Option<String>,
        language: Option<String>,
    },
}

impl Term {
    pub fn named(name: impl Into<String>) -> Self {
        Term::Named { name: name.into() }
    }

    pub fn literal(lexical: impl Into<String>, datatype: Option<&str>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: datatype.map(str::to_owned),
            language: None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn as_named(&self) -> Option<&str> {
        match self {
            Term::Named { name } => Some(name),
            Term::Literal { .. } => None,
        }
    }

    /// Stable textual form used when a literal is kept as a node.
    pub fn to_node_name(&self) -> String {
        match self {
            Term::Named { name } => name.clone(),
            Term::Literal {
                lexical,
                datatype,
                language,
            } => {
                let mut s = format!("\"{lexical}\"");
                if let Some(dt) = datatype {
                    s.push_str("^^");
                    s.push_str(dt);
                } else if let Some(lang) = language {
                    s.push('@');
                    s.push_str(lang);
                }
                s
            }
        }
    }
}

/// A subject-predicate-object statement as read from a source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl RawTriple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }
}

/// Streaming reader. Yields one item per non-blank, non-comment line;
/// malformed lines yield `Error::Parse` and iteration continues.
pub struct NTriplesReader<R> {
    input: R,
    line_no: u64,
    buf: String,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        Self {
            input,
            line_no: 0,
            buf: String::new(),
        }
    }

    pub fn line_number(&self) -> u64 {
        self.line_no
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<RawTriple>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(Error::Parse {
                        line: self.line_no,
                        message: format!("read error: {e}"),
                    }));
                }
            }
            self.line_no += 1;
            match parse_line(&self.buf) {
                Ok(Some(t)) => return Some(Ok(t)),
                Ok(None) => continue,
                Err(message) => {
                    return Some(Err(Error::Parse {
                        line: self.line_no,
                        message,
                    }))
                }
            }
        }
    }
}

pub fn parse_ntriples<R: BufRead>(input: R) -> NTriplesReader<R> {
    NTriplesReader::new(input)
}

/// Parses one line. `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> std::result::Result<Option<RawTriple>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.named_term("subject")?;
    cur.skip_ws();
    let predicate = cur.named_term("predicate")?;
    cur.skip_ws();
    let object = cur.object_term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("expected '.' terminating the triple".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("unexpected trailing content: {:?}", cur.rest()));
    }
    Ok(Some(RawTriple {
        subject,
        predicate,
        object,
    }))
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { s, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn named_term(&mut self, what: &str) -> std::result::Result<String, String> {
        match self.peek() {
            None => Err(format!("missing {what}")),
            Some('<') => self.iri(),
            Some('"') => Err(format!("{what} cannot be a literal")),
            Some(_) => self.bare_token(what),
        }
    }

    fn object_term(&mut self) -> std::result::Result<Term, String> {
        match self.peek() {
            None => Err("missing object".into()),
            Some('"') => self.literal(),
            Some('<') => Ok(Term::named(self.iri()?)),
            Some(_) => Ok(Term::named(self.bare_token("object")?)),
        }
    }

    fn iri(&mut self) -> std::result::Result<String, String> {
        self.bump();
        let start = self.pos;
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".into()),
                Some('>') => break,
                Some(c) if c.is_whitespace() => return Err("whitespace inside IRI".into()),
                Some(_) => {}
            }
        }
        let iri = &self.s[start..self.pos - 1];
        if iri.is_empty() {
            return Err("empty IRI".into());
        }
        Ok(iri.to_owned())
    }

    /// Prefixed name, blank node label, or any other whitespace-free token.
    /// A trailing '.' directly attached to an object token is the terminator.
    fn bare_token(&mut self, what: &str) -> std::result::Result<String, String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_whitespace()) {
            self.bump();
        }
        let mut tok = &self.s[start..self.pos];
        if tok.len() > 1 && tok.ends_with('.') {
            tok = &tok[..tok.len() - 1];
            self.pos -= 1;
        }
        if tok.is_empty() || tok == "." {
            return Err(format!("missing {what}"));
        }
        Ok(tok.to_owned())
    }

    fn literal(&mut self) -> std::result::Result<Term, String> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".into()),
                Some('"') => break,
                Some('\\') => lexical.push(self.escape()?),
                Some(c) => lexical.push(c),
            }
        }
        let mut datatype = None;
        let mut language = None;
        if self.rest().starts_with("^^") {
            self.pos += 2;
            datatype = Some(match self.peek() {
                Some('<') => self.iri()?,
                Some(c) if !c.is_whitespace() => self.bare_token("datatype")?,
                _ => return Err("missing datatype after '^^'".into()),
            });
        } else if self.peek() == Some('@') {
            self.bump();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.bump();
            }
            if self.pos == start {
                return Err("empty language tag".into());
            }
            language = Some(self.s[start..self.pos].to_owned());
        }
        Ok(Term::Literal {
            lexical,
            datatype,
            language,
        })
    }

    fn escape(&mut self) -> std::result::Result<char, String> {
        let c = self.bump().ok_or("dangling escape")?;
        Ok(match c {
            't' => '\t',
            'b' => '\u{8}',
            'n' => '\n',
            'r' => '\r',
            'f' => '\u{c}',
            '"' => '"',
            '\'' => '\'',
            '\\' => '\\',
            'u' => self.hex(4)?,
            'U' => self.hex(8)?,
            other => return Err(format!("invalid escape '\\{other}'")),
        })
    }

    fn hex(&mut self, len: usize) -> std::result::Result<char, String> {
        let digits = self.rest().get(..len).ok_or("truncated unicode escape")?;
        let v = u32::from_str_radix(digits, 16).map_err(|_| "invalid unicode escape")?;
        self.pos += len;
        char::from_u32(v).ok_or_else(|| format!("invalid code point U+{v:X}"))
    }
}
