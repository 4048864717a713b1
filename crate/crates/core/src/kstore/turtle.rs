//! Turtle subset: `@prefix`/`PREFIX`, IRIs in `<...>` or prefixed form, `a`,
//! predicate lists (`;`), object lists (`,`), string literals with an
//! optional language tag or `^^` datatype, bare integers, decimals and
//! booleans. Blank nodes and collections are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{vocab, Datatype, Graph, Iri, KstoreError, Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Str(String),
    LangTag(String),
    Carets,
    Integer(String),
    Decimal(String),
    Boolean(bool),
    A,
    PrefixAt,
    PrefixKeyword,
    Dot,
    Semicolon,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> KstoreError {
        KstoreError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, KstoreError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Spanned {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = match c {
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some('\n') | None => {
                                return Err(self.err(line, column, "unterminated IRI"))
                            }
                            Some('\\') => iri.push(self.unicode_escape(line, column)?),
                            Some(c) => iri.push(c),
                        }
                    }
                    Tok::IriRef(iri)
                }
                '"' | '\'' => Tok::Str(self.string(c, line, column)?),
                '@' => {
                    self.bump();
                    let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if word == "prefix" {
                        Tok::PrefixAt
                    } else if word == "base" {
                        return Err(self.err(line, column, "@base is not supported"));
                    } else if word.is_empty() {
                        return Err(self.err(line, column, "empty language tag"));
                    } else {
                        Tok::LangTag(word)
                    }
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(line, column, "expected '^^'"));
                    }
                    Tok::Carets
                }
                '.' if self.peek2().is_some_and(|d| d.is_ascii_digit()) => {
                    self.number(line, column)?
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semicolon
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '+' | '-' | '0'..='9' => self.number(line, column)?,
                '[' | ']' | '(' | ')' => {
                    return Err(self.err(
                        line,
                        column,
                        "blank nodes and collections are not supported",
                    ))
                }
                '_' if self.peek2() == Some(':') => {
                    return Err(self.err(line, column, "blank nodes are not supported"))
                }
                c if c.is_alphabetic() || c == ':' || c == '_' => self.name(line, column)?,
                other => {
                    return Err(self.err(line, column, format!("unexpected character {other:?}")))
                }
            };
            out.push(Spanned { tok, line, column });
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn unicode_escape(&mut self, line: usize, column: usize) -> Result<char, KstoreError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.err(line, column, "invalid escape in IRI")),
        };
        self.hex_char(width, line, column)
    }

    fn hex_char(&mut self, width: usize, line: usize, column: usize) -> Result<char, KstoreError> {
        let mut code = 0u32;
        for _ in 0..width {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.err(line, column, "invalid unicode escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.err(line, column, "invalid unicode code point"))
    }

    fn string(&mut self, quote: char, line: usize, column: usize) -> Result<String, KstoreError> {
        self.bump();
        let long = self.peek() == Some(quote) && self.peek2() == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.peek() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.err(line, column, "unterminated string"));
            };
            match c {
                '\\' => {
                    let e = self
                        .bump()
                        .ok_or_else(|| self.err(line, column, "unterminated string"))?;
                    s.push(match e {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        'b' => '\u{8}',
                        'f' => '\u{c}',
                        '"' => '"',
                        '\'' => '\'',
                        '\\' => '\\',
                        'u' => self.hex_char(4, line, column)?,
                        'U' => self.hex_char(8, line, column)?,
                        other => {
                            return Err(self.err(
                                self.line,
                                self.column,
                                format!("invalid escape \\{other}"),
                            ))
                        }
                    });
                }
                c if c == quote && !long => return Ok(s),
                c if c == quote && long => {
                    if self.peek() == Some(quote) && self.peek2() == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(s);
                    }
                    s.push(c);
                }
                '\n' | '\r' if !long => {
                    return Err(self.err(line, column, "newline in string literal"))
                }
                c => s.push(c),
            }
        }
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok, KstoreError> {
        let mut s = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            s.push(sign);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            decimal = true;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            return Err(self.err(line, column, "double literals are not supported"));
        }
        let digits = s.trim_start_matches(['+', '-']);
        if digits.is_empty() || digits == "." {
            return Err(self.err(line, column, "malformed number"));
        }
        if decimal {
            if s.starts_with('.') || s.starts_with("+.") || s.starts_with("-.") {
                s = s.replacen('.', "0.", 1);
            }
            Ok(Tok::Decimal(s))
        } else {
            Ok(Tok::Integer(s))
        }
    }

    fn name(&mut self, line: usize, column: usize) -> Result<Tok, KstoreError> {
        let prefix = self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if self.peek() != Some(':') {
            return match prefix.as_str() {
                "a" => Ok(Tok::A),
                "true" => Ok(Tok::Boolean(true)),
                "false" => Ok(Tok::Boolean(false)),
                p if p.eq_ignore_ascii_case("prefix") => Ok(Tok::PrefixKeyword),
                p => Err(self.err(line, column, format!("unexpected bare word '{p}'"))),
            };
        }
        if prefix.ends_with('.') {
            return Err(self.err(line, column, "prefix label may not end with '.'"));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let dot_inside = c == '.'
                && self
                    .peek2()
                    .is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':'));
            if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '%') || dot_inside {
                local.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => local.push(e),
                    _ => return Err(self.err(line, column, "invalid escape in local name")),
                }
            } else {
                break;
            }
        }
        Ok(Tok::PName { prefix, local })
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    graph: Graph,
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

    fn err_at(t: &Spanned, message: impl Into<String>) -> KstoreError {
        KstoreError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), KstoreError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(Self::err_at(
                &t,
                format!("expected {what}, found {}", describe(&t.tok)),
            ))
        }
    }

    fn document(mut self) -> Result<Graph, KstoreError> {
        loop {
            match self.peek().tok {
                Tok::Eof => return Ok(self.graph),
                Tok::PrefixAt => {
                    self.next();
                    self.prefix_decl()?;
                    self.expect(Tok::Dot, "'.' after @prefix")?;
                }
                Tok::PrefixKeyword => {
                    self.next();
                    self.prefix_decl()?;
                }
                _ => self.statement()?,
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), KstoreError> {
        let t = self.next();
        let Tok::PName { prefix, local } = &t.tok else {
            return Err(Self::err_at(&t, "expected prefix label"));
        };
        if !local.is_empty() {
            return Err(Self::err_at(&t, "prefix label must end with ':'"));
        }
        let ns_tok = self.next();
        let Tok::IriRef(ns) = &ns_tok.tok else {
            return Err(Self::err_at(&ns_tok, "expected namespace IRI"));
        };
        Iri::new(ns.clone())?;
        self.graph.bind_prefix(prefix.clone(), ns.clone());
        Ok(())
    }

    fn iri(&self, t: &Spanned) -> Result<Iri, KstoreError> {
        match &t.tok {
            Tok::IriRef(s) => Iri::new(s.clone()),
            Tok::PName { prefix, local } => {
                let ns = self.graph.prefixes().get(prefix).ok_or_else(|| {
                    KstoreError::UnknownPrefix {
                        prefix: prefix.clone(),
                        line: t.line,
                        column: t.column,
                    }
                })?;
                Iri::new(format!("{ns}{local}"))
            }
            other => Err(Self::err_at(
                t,
                format!("expected IRI, found {}", describe(other)),
            )),
        }
    }

    fn statement(&mut self) -> Result<(), KstoreError> {
        let st = self.next();
        let subject = self.iri(&st)?;
        loop {
            let vt = self.next();
            let predicate = match vt.tok {
                Tok::A => Iri::new(vocab::RDF_TYPE)?,
                _ => self.iri(&vt)?,
            };
            loop {
                let object = self.object()?;
                self.graph
                    .insert(Triple::new(subject.clone(), predicate.clone(), object));
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            match self.peek().tok {
                Tok::Semicolon => {
                    while self.peek().tok == Tok::Semicolon {
                        self.next();
                    }
                    if self.peek().tok == Tok::Dot {
                        self.next();
                        return Ok(());
                    }
                }
                Tok::Dot => {
                    self.next();
                    return Ok(());
                }
                _ => {
                    let t = self.peek().clone();
                    return Err(Self::err_at(
                        &t,
                        format!("expected ';', ',' or '.', found {}", describe(&t.tok)),
                    ));
                }
            }
        }
    }

    fn object(&mut self) -> Result<Term, KstoreError> {
        let t = self.next();
        let typed = |lex: &str, dt: Datatype| Literal::typed(lex, dt).map(Term::Literal);
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => self.iri(&t).map(Term::Iri),
            Tok::Integer(s) => typed(s, Datatype::Integer),
            Tok::Decimal(s) => typed(s, Datatype::Decimal),
            Tok::Boolean(b) => typed(if *b { "true" } else { "false" }, Datatype::Boolean),
            Tok::Str(s) => match self.peek().tok.clone() {
                Tok::LangTag(tag) => {
                    self.next();
                    Literal::lang_string(s.clone(), tag).map(Term::Literal)
                }
                Tok::Carets => {
                    self.next();
                    let dt_tok = self.next();
                    let dt_iri = self.iri(&dt_tok)?;
                    match Datatype::from_iri(dt_iri.as_str()) {
                        Some(dt) => typed(s, dt),
                        None => {
                            log::warn!(
                                "line {}: unknown datatype <{}> read as plain string",
                                dt_tok.line,
                                dt_iri
                            );
                            Ok(Term::Literal(Literal::string(s.clone())))
                        }
                    }
                }
                _ => Ok(Term::Literal(Literal::string(s.clone()))),
            },
            other => Err(Self::err_at(
                &t,
                format!("expected object, found {}", describe(other)),
            )),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::IriRef(s) => format!("<{s}>"),
        Tok::PName { prefix, local } => format!("{prefix}:{local}"),
        Tok::Str(_) => "string literal".into(),
        Tok::LangTag(l) => format!("@{l}"),
        Tok::Carets => "'^^'".into(),
        Tok::Integer(s) | Tok::Decimal(s) => s.clone(),
        Tok::Boolean(b) => b.to_string(),
        Tok::A => "'a'".into(),
        Tok::PrefixAt => "@prefix".into(),
        Tok::PrefixKeyword => "PREFIX".into(),
        Tok::Dot => "'.'".into(),
        Tok::Semicolon => "';'".into(),
        Tok::Comma => "','".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_turtle(text: &str) -> Result<Graph, KstoreError> {
    let toks = Lexer::new(text).tokens()?;
    Parser {
        toks,
        pos: 0,
        graph: Graph::new(),
    }
    .document()
}

fn safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }
        Some(_) => false,
    }
}

fn write_iri(out: &mut String, iri: &str, prefixes: &BTreeMap<String, String>) {
    let best = prefixes
        .iter()
        .filter(|(_, ns)| iri.starts_with(ns.as_str()) && safe_local(&iri[ns.len()..]))
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)));
    match best {
        Some((label, ns)) => {
            let _ = write!(out, "{label}:{}", &iri[ns.len()..]);
        }
        None => {
            out.push('<');
            for c in iri.chars() {
                match c {
                    '\\' => out.push_str("\\u005C"),
                    '>' => out.push_str("\\u003E"),
                    c => out.push(c),
                }
            }
            out.push('>');
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_term(out: &mut String, term: &Term, prefixes: &BTreeMap<String, String>) {
    match term {
        Term::Iri(iri) => write_iri(out, iri.as_str(), prefixes),
        Term::Literal(lit) => {
            write_string(out, lit.lexical());
            if let Some(lang) = lit.language() {
                let _ = write!(out, "@{lang}");
            } else if lit.datatype() != Datatype::String {
                out.push_str("^^");
                write_iri(out, lit.datatype().iri(), prefixes);
            }
        }
    }
}

/// Writes `graph` using `prefixes` for compaction. Output is grouped by
/// subject and deterministic for a given input.
pub fn serialize_turtle(graph: &Graph, prefixes: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (label, ns) in prefixes {
        let _ = writeln!(out, "@prefix {label}: <{ns}> .");
    }
    let mut current: Option<&Iri> = None;
    let mut current_pred: Option<&Iri> = None;
    for t in graph.triples() {
        if current != Some(&t.subject) {
            if current.is_some() {
                out.push_str(" .\n");
            }
            out.push('\n');
            write_iri(&mut out, t.subject.as_str(), prefixes);
            out.push(' ');
            current = Some(&t.subject);
            current_pred = None;
        }
        if current_pred == Some(&t.predicate) {
            out.push_str(" ,\n        ");
        } else {
            if current_pred.is_some() {
                out.push_str(" ;\n    ");
            }
            if t.predicate.as_str() == vocab::RDF_TYPE {
                out.push('a');
            } else {
                write_iri(&mut out, t.predicate.as_str(), prefixes);
            }
            out.push(' ');
            current_pred = Some(&t.predicate);
        }
        write_term(&mut out, &t.object, prefixes);
    }
    if current.is_some() {
        out.push_str(" .\n");
    }
    out
}

impl Graph {
    /// Serializes with the graph's own prefix map.
    pub fn to_turtle(&self) -> String {
        serialize_turtle(self, self.prefixes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        assert_eq!(parse_turtle("").unwrap().len(), 0);
        assert_eq!(parse_turtle("  # only a comment\n").unwrap().len(), 0);
    }

    #[test]
    fn single_statement() {
        let g = parse_turtle("@prefix ex: <http://x/> . ex:a ex:p ex:b .").unwrap();
        assert_eq!(g.len(), 1);
        let t = g.triples().next().unwrap();
        assert_eq!(t.subject.as_str(), "http://x/a");
        assert_eq!(t.predicate.as_str(), "http://x/p");
        assert_eq!(t.object, Term::iri("http://x/b").unwrap());
        assert_eq!(
            g.prefixes().get("ex").map(String::as_str),
            Some("http://x/")
        );
    }

    #[test]
    fn lists_literals_and_shorthand() {
        let text = r#"
            PREFIX ex: <http://x/>
            @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
            ex:a a ex:C , ex:D ;
                ex:n 42 ; ex:d -0.5 ; ex:b true ;
                ex:s "hi \"there\"\n"@en-GB ;
                ex:t "2024-01-02T03:04:05Z"^^xsd:dateTime ;
                ex:u """multi
line""" ;
                ex:w 'single' ;
            .
        "#;
        let g = parse_turtle(text).unwrap();
        assert_eq!(g.len(), 9);
        let a = Iri::new("http://x/a").unwrap();
        let n: Vec<_> = g.objects(&a, "http://x/n").collect();
        assert_eq!(n[0].as_literal().unwrap().datatype(), Datatype::Integer);
        let s: Vec<_> = g.objects(&a, "http://x/s").collect();
        assert_eq!(s[0].as_literal().unwrap().lexical(), "hi \"there\"\n");
        assert_eq!(s[0].as_literal().unwrap().language(), Some("en-GB"));
    }

    #[test]
    fn integer_before_statement_dot() {
        let g = parse_turtle("<http://x/a> <http://x/p> 42.").unwrap();
        let t = g.triples().next().unwrap();
        assert_eq!(t.object.as_literal().unwrap().lexical(), "42");
    }

    #[test]
    fn unknown_datatype_reads_as_string() {
        let g = parse_turtle(r#"<http://x/a> <http://x/p> "v"^^<http://x/custom> ."#).unwrap();
        let lit = g
            .triples()
            .next()
            .unwrap()
            .object
            .as_literal()
            .unwrap()
            .clone();
        assert_eq!(lit, Literal::string("v"));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_turtle("@prefix ex: <http://x/> .\nex:a ex:p .").unwrap_err();
        assert!(
            matches!(
                err,
                KstoreError::Syntax {
                    line: 2,
                    column: 11,
                    ..
                }
            ),
            "{err:?}"
        );

        let err = parse_turtle("zz:a <http://x/p> <http://x/b> .").unwrap_err();
        assert!(
            matches!(err, KstoreError::UnknownPrefix { ref prefix, line: 1, column: 1 } if prefix == "zz")
        );

        let err = parse_turtle("<not an iri> <http://x/p> <http://x/b> .").unwrap_err();
        assert!(matches!(err, KstoreError::MalformedIri { .. }));

        let err = parse_turtle(
            "<http://x/a> <http://x/p> \"4x\"^^<http://www.w3.org/2001/XMLSchema#integer> .",
        )
        .unwrap_err();
        assert!(matches!(err, KstoreError::InvalidLiteral { .. }));

        assert!(parse_turtle("<http://x/a> <http://x/p> [ ] .").is_err());
        assert!(parse_turtle("<http://x/a> <http://x/p> <http://x/b>").is_err());
    }

    #[test]
    fn serialize_empty_graph_has_only_prefixes() {
        let mut prefixes = BTreeMap::new();
        prefixes.insert("ex".to_string(), "http://x/".to_string());
        let text = serialize_turtle(&Graph::new(), &prefixes);
        assert_eq!(text, "@prefix ex: <http://x/> .\n");
    }

    #[test]
    fn serialize_round_trips_one_triple() {
        let g = parse_turtle("@prefix ex: <http://x/> . ex:a ex:p \"v\\\\\" .").unwrap();
        let text = g.to_turtle();
        assert_eq!(parse_turtle(&text).unwrap().triple_set(), g.triple_set());
    }

    #[test]
    fn iris_needing_brackets_are_not_compacted() {
        let mut g = Graph::new();
        g.bind_prefix("ex", "http://x/");
        g.insert(Triple::new(
            Iri::new("http://x/a.b.").unwrap(),
            Iri::new("http://x/p").unwrap(),
            Iri::new("http://x/-c").unwrap(),
        ));
        let text = g.to_turtle();
        assert!(text.contains("<http://x/a.b.>"), "{text}");
        assert_eq!(parse_turtle(&text).unwrap().triple_set(), g.triple_set());
    }
}
