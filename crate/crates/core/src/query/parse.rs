use std::collections::BTreeMap;

use super::{
    IriRef, PatternElement, Predicate, Projection, QTerm, Query, QueryError, TriplePattern,
};
use crate::kstore::{vocab, Datatype, Literal};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    IriRef(String),
    PName { prefix: String, local: String },
    Str(String),
    LangTag(String),
    Carets,
    Number { lexical: String, decimal: bool },
    LBrace,
    RBrace,
    Dot,
    Semicolon,
    Comma,
    Star,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let (mut line, mut column) = (1usize, 1usize);
    let mut out = Vec::new();
    let advance = |i: &mut usize, line: &mut usize, column: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
            *i += 1;
        }
    };
    let is_name = |c: char| c.is_alphanumeric() || matches!(c, '_' | '-');
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut column, 1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut column, 1);
            }
            continue;
        }
        let (l0, c0) = (line, column);
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '.' if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => Tok::Dot,
            ';' => Tok::Semicolon,
            ',' => Tok::Comma,
            '*' => Tok::Star,
            '^' if chars.get(i + 1) == Some(&'^') => {
                advance(&mut i, &mut line, &mut column, 1);
                Tok::Carets
            }
            '<' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != '>' {
                    return Err(syntax(l0, c0, "unterminated IRI"));
                }
                let iri: String = chars[i + 1..j].iter().collect();
                let n = j - i;
                advance(&mut i, &mut line, &mut column, n);
                Tok::IriRef(iri)
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(syntax(l0, c0, "empty variable name"));
                }
                let name: String = chars[i + 1..j].iter().collect();
                let n = j - i - 1;
                advance(&mut i, &mut line, &mut column, n);
                Tok::Var(name)
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(syntax(l0, c0, "unterminated string")),
                        Some(&ch) if ch == quote => break,
                        Some('\\') => {
                            let e = chars
                                .get(j + 1)
                                .ok_or_else(|| syntax(l0, c0, "unterminated string"))?;
                            s.push(match e {
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                '"' => '"',
                                '\'' => '\'',
                                '\\' => '\\',
                                other => {
                                    return Err(syntax(l0, c0, format!("invalid escape \\{other}")))
                                }
                            });
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let n = j - i;
                advance(&mut i, &mut line, &mut column, n);
                Tok::Str(s)
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '-') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(syntax(l0, c0, "empty language tag"));
                }
                let tag: String = chars[i + 1..j].iter().collect();
                let n = j - i - 1;
                advance(&mut i, &mut line, &mut column, n);
                Tok::LangTag(tag)
            }
            '+' | '-' | '.' | '0'..='9' => {
                let mut j = i;
                if matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut decimal = false;
                if chars.get(j) == Some(&'.')
                    && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit())
                {
                    decimal = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let mut lexical: String = chars[i..j].iter().collect();
                if !lexical.bytes().any(|b| b.is_ascii_digit()) {
                    return Err(syntax(l0, c0, "malformed number"));
                }
                if lexical.trim_start_matches(['+', '-']).starts_with('.') {
                    lexical = lexical.replacen('.', "0.", 1);
                }
                let n = j - i - 1;
                advance(&mut i, &mut line, &mut column, n);
                Tok::Number { lexical, decimal }
            }
            c if c.is_alphabetic() || c == ':' || c == '_' => {
                let mut j = i;
                while j < chars.len() && (is_name(chars[j]) || chars[j] == '.') {
                    j += 1;
                }
                while j > i && chars[j - 1] == '.' {
                    j -= 1;
                }
                let prefix: String = chars[i..j].iter().collect();
                if chars.get(j) == Some(&':') {
                    let mut k = j + 1;
                    while k < chars.len()
                        && (is_name(chars[k])
                            || chars[k] == ':'
                            || (chars[k] == '.' && chars.get(k + 1).is_some_and(|n| is_name(*n))))
                    {
                        k += 1;
                    }
                    let local: String = chars[j + 1..k].iter().collect();
                    let n = k - i - 1;
                    advance(&mut i, &mut line, &mut column, n);
                    Tok::PName { prefix, local }
                } else {
                    let n = j - i - 1;
                    advance(&mut i, &mut line, &mut column, n);
                    Tok::Word(prefix)
                }
            }
            other => return Err(syntax(l0, c0, format!("unexpected character {other:?}"))),
        };
        advance(&mut i, &mut line, &mut column, 1);
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn keyword(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(word))
    }

    fn err(t: &Spanned, message: impl Into<String>) -> QueryError {
        syntax(t.line, t.column, message)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned, QueryError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(Self::err(&t, format!("expected {what}")))
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        let mut prefixes = BTreeMap::new();
        while self.keyword("PREFIX") {
            self.next();
            let t = self.next();
            let Tok::PName { prefix, local } = t.tok.clone() else {
                return Err(Self::err(&t, "expected prefix label"));
            };
            if !local.is_empty() {
                return Err(Self::err(&t, "prefix label must end with ':'"));
            }
            let ns = self.next();
            let Tok::IriRef(iri) = ns.tok else {
                return Err(Self::err(&ns, "expected namespace IRI"));
            };
            prefixes.insert(prefix, iri);
        }
        if !self.keyword("SELECT") {
            let t = self.peek().clone();
            return Err(Self::err(&t, "expected SELECT"));
        }
        self.next();
        let distinct = if self.keyword("DISTINCT") {
            self.next();
            true
        } else {
            false
        };
        let projection = if self.peek().tok == Tok::Star {
            self.next();
            Projection::All
        } else {
            let mut vars: Vec<String> = Vec::new();
            while let Tok::Var(v) = &self.peek().tok {
                if vars.contains(v) {
                    let t = self.peek().clone();
                    return Err(Self::err(&t, format!("variable ?{v} projected twice")));
                }
                vars.push(v.clone());
                self.next();
            }
            if vars.is_empty() {
                let t = self.peek().clone();
                return Err(Self::err(&t, "expected projected variables or '*'"));
            }
            Projection::Vars(vars)
        };
        if self.keyword("WHERE") {
            self.next();
        }
        let open = self.expect(Tok::LBrace, "'{'")?;
        let mut pattern = Vec::new();
        loop {
            if self.peek().tok == Tok::RBrace {
                self.next();
                break;
            }
            if self.keyword("OPTIONAL") {
                self.next();
                self.expect(Tok::LBrace, "'{' after OPTIONAL")?;
                let mut group = Vec::new();
                self.triples_until_brace(&mut group)?;
                if group.is_empty() {
                    let t = self.toks[self.pos - 1].clone();
                    return Err(Self::err(&t, "empty OPTIONAL group"));
                }
                pattern.push(PatternElement::Optional(group));
                if self.peek().tok == Tok::Dot {
                    self.next();
                }
                continue;
            }
            let mut block = Vec::new();
            self.same_subject(&mut block)?;
            pattern.extend(block.into_iter().map(PatternElement::Triple));
            match self.peek().tok {
                Tok::Dot => {
                    self.next();
                }
                Tok::RBrace => {}
                _ if self.keyword("OPTIONAL") => {}
                _ => {
                    let t = self.peek().clone();
                    return Err(Self::err(&t, "expected '.' or '}'"));
                }
            }
        }
        if pattern.is_empty() {
            return Err(Self::err(&open, "empty graph pattern"));
        }
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            return Err(Self::err(&t, "unexpected text after query"));
        }
        let query = Query {
            prefixes,
            projection,
            distinct,
            pattern,
        };
        let used = query.pattern_vars();
        if let Projection::Vars(vs) = &query.projection {
            if let Some(v) = vs.iter().find(|v| !used.contains(v)) {
                return Err(QueryError::UnboundProjection(v.clone()));
            }
        }
        Ok(query)
    }

    fn triples_until_brace(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        loop {
            match self.peek().tok {
                Tok::RBrace => {
                    self.next();
                    return Ok(());
                }
                _ if self.keyword("OPTIONAL") => {
                    let t = self.peek().clone();
                    return Err(Self::err(&t, "nested OPTIONAL is not supported"));
                }
                _ => {
                    self.same_subject(out)?;
                    match self.peek().tok {
                        Tok::Dot => {
                            self.next();
                        }
                        Tok::RBrace => {}
                        _ => {
                            let t = self.peek().clone();
                            return Err(Self::err(&t, "expected '.' or '}'"));
                        }
                    }
                }
            }
        }
    }

    fn same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let st = self.next();
        let subject = match self.term(&st)? {
            QTerm::Literal(_) => return Err(Self::err(&st, "literal in subject position")),
            t => t,
        };
        loop {
            let vt = self.next();
            let verb = match &vt.tok {
                Tok::Word(w) if w == "a" => QTerm::Iri(IriRef::Full(vocab::RDF_TYPE.to_string())),
                _ => match self.term(&vt)? {
                    QTerm::Literal(_) => {
                        return Err(Self::err(&vt, "literal in predicate position"))
                    }
                    t => t,
                },
            };
            let predicate = if self.peek().tok == Tok::Star {
                self.next();
                match verb {
                    QTerm::Iri(iri) => Predicate::ZeroOrMore(iri),
                    _ => {
                        return Err(QueryError::PathOnVariable {
                            line: vt.line,
                            column: vt.column,
                        })
                    }
                }
            } else {
                Predicate::Term(verb)
            };
            loop {
                let ot = self.next();
                let object = self.object(&ot)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            if self.peek().tok != Tok::Semicolon {
                return Ok(());
            }
            while self.peek().tok == Tok::Semicolon {
                self.next();
            }
            if matches!(self.peek().tok, Tok::Dot | Tok::RBrace) {
                return Ok(());
            }
        }
    }

    fn term(&mut self, t: &Spanned) -> Result<QTerm, QueryError> {
        match &t.tok {
            Tok::Var(v) => Ok(QTerm::Var(v.clone())),
            Tok::IriRef(s) => Ok(QTerm::Iri(IriRef::Full(s.clone()))),
            Tok::PName { prefix, local } => Ok(QTerm::Iri(IriRef::Prefixed {
                prefix: prefix.clone(),
                local: local.clone(),
            })),
            Tok::Word(w)
                if [
                    "FILTER", "UNION", "ORDER", "LIMIT", "BIND", "VALUES", "GRAPH", "MINUS",
                ]
                .iter()
                .any(|k| w.eq_ignore_ascii_case(k)) =>
            {
                Err(Self::err(
                    t,
                    format!("{} is not supported", w.to_uppercase()),
                ))
            }
            _ => Err(Self::err(t, "expected variable or IRI")),
        }
    }

    fn object(&mut self, t: &Spanned) -> Result<QTerm, QueryError> {
        let lit = |r: Result<Literal, _>| {
            r.map(QTerm::Literal)
                .map_err(|e| Self::err(t, format!("{e}")))
        };
        match &t.tok {
            Tok::Number { lexical, decimal } => lit(Literal::typed(
                lexical.clone(),
                if *decimal {
                    Datatype::Decimal
                } else {
                    Datatype::Integer
                },
            )),
            Tok::Word(w) if w == "true" || w == "false" => {
                lit(Literal::typed(w.clone(), Datatype::Boolean))
            }
            Tok::Str(s) => match self.peek().tok.clone() {
                Tok::LangTag(tag) => {
                    self.next();
                    lit(Literal::lang_string(s.clone(), tag))
                }
                Tok::Carets => {
                    self.next();
                    let dt = self.next();
                    let iri = match &dt.tok {
                        Tok::IriRef(s) => s.clone(),
                        Tok::PName { prefix, local } if prefix == "xsd" => {
                            format!("{}{local}", vocab::XSD)
                        }
                        _ => return Err(Self::err(&dt, "expected datatype IRI")),
                    };
                    match Datatype::from_iri(&iri) {
                        Some(d) => lit(Literal::typed(s.clone(), d)),
                        None => Ok(QTerm::Literal(Literal::string(s.clone()))),
                    }
                }
                _ => Ok(QTerm::Literal(Literal::string(s.clone()))),
            },
            _ => self.term(t),
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.query()
}
