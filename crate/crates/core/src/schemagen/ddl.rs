use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::{ColumnType, RelationalSchema, Table};

const RESERVED: &[&str] = &[
    "all",
    "and",
    "any",
    "as",
    "between",
    "by",
    "case",
    "check",
    "column",
    "constraint",
    "create",
    "current",
    "date",
    "day",
    "default",
    "delete",
    "distinct",
    "drop",
    "else",
    "end",
    "exists",
    "foreign",
    "from",
    "grant",
    "group",
    "having",
    "hour",
    "in",
    "index",
    "insert",
    "into",
    "is",
    "join",
    "key",
    "like",
    "minute",
    "month",
    "not",
    "null",
    "of",
    "on",
    "or",
    "order",
    "position",
    "primary",
    "references",
    "second",
    "select",
    "set",
    "some",
    "table",
    "then",
    "time",
    "timestamp",
    "to",
    "union",
    "unique",
    "update",
    "user",
    "value",
    "values",
    "when",
    "where",
    "with",
    "year",
    "zone",
];

pub(crate) fn ident(name: &str) -> String {
    let plain = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
    if plain && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

/// Creation order: referenced tables first, ties by schema order. When
/// references form a cycle the earliest remaining table goes next and its
/// forward references are returned for `ALTER TABLE`.
fn creation_order(schema: &RelationalSchema) -> Vec<(usize, Vec<usize>)> {
    let index_of = |name: &str| schema.tables.iter().position(|t| t.name == name);
    let deps: Vec<BTreeSet<usize>> = schema
        .tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.foreign_keys
                .iter()
                .filter_map(|fk| index_of(&fk.target))
                .filter(|&j| j != i)
                .collect()
        })
        .collect();
    let mut done = vec![false; schema.tables.len()];
    let mut out = Vec::new();
    while out.len() < schema.tables.len() {
        let ready = (0..deps.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        let next =
            ready.unwrap_or_else(|| (0..deps.len()).find(|&i| !done[i]).expect("tables remain"));
        let deferred: Vec<usize> = (0..schema.tables[next].foreign_keys.len())
            .filter(|&k| {
                let target = index_of(&schema.tables[next].foreign_keys[k].target);
                target.is_some_and(|j| j != next && !done[j])
            })
            .collect();
        done[next] = true;
        out.push((next, deferred));
    }
    out
}

fn create_table(t: &Table, deferred: &[usize]) -> String {
    let mut lines: Vec<String> = t
        .columns
        .iter()
        .map(|c| {
            format!(
                "    {} {}{}",
                ident(&c.name),
                c.ty.sql(),
                if c.nullable { "" } else { " NOT NULL" }
            )
        })
        .collect();
    lines.push(format!("    PRIMARY KEY ({})", ident(&t.primary_key)));
    for (k, fk) in t.foreign_keys.iter().enumerate() {
        if !deferred.contains(&k) {
            lines.push(format!(
                "    FOREIGN KEY ({}) REFERENCES {} (id)",
                ident(&fk.column),
                ident(&fk.target)
            ));
        }
    }
    format!(
        "CREATE TABLE {} (\n{}\n);\n",
        ident(&t.name),
        lines.join(",\n")
    )
}

/// Standard SQL `CREATE TABLE` statements in dependency order, followed by
/// `ALTER TABLE` statements for references that could not be created inline.
pub fn emit_ddl(schema: &RelationalSchema) -> String {
    let order = creation_order(schema);
    let mut parts: Vec<String> = order
        .iter()
        .map(|(i, deferred)| create_table(&schema.tables[*i], deferred))
        .collect();
    for (i, deferred) in &order {
        let t = &schema.tables[*i];
        for &k in deferred {
            let fk = &t.foreign_keys[k];
            parts.push(format!(
                "ALTER TABLE {} ADD FOREIGN KEY ({}) REFERENCES {} (id);\n",
                ident(&t.name),
                ident(&fk.column),
                ident(&fk.target)
            ));
        }
    }
    parts.join("\n")
}

/// Structure of one table as recovered from DDL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableShape {
    pub name: String,
    pub columns: Vec<(String, ColumnType, bool)>,
    pub primary_key: String,
    /// `(column, target table)`, sorted.
    pub foreign_keys: Vec<(String, String)>,
}

impl TableShape {
    pub fn of(t: &Table) -> Self {
        let mut foreign_keys: Vec<(String, String)> = t
            .foreign_keys
            .iter()
            .map(|f| (f.column.clone(), f.target.clone()))
            .collect();
        foreign_keys.sort();
        TableShape {
            name: t.name.clone(),
            columns: t
                .columns
                .iter()
                .map(|c| (c.name.clone(), c.ty, c.nullable))
                .collect(),
            primary_key: t.primary_key.clone(),
            foreign_keys,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DdlError {
    #[error("token {0}: unexpected {1}")]
    Unexpected(usize, String),
    #[error("unexpected end of input")]
    Eof,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, DdlError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(DdlError::Eof),
                    Some('"') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Tok::Quoted(s));
        } else if "(),;".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
        } else {
            return Err(DdlError::Unexpected(out.len(), c.to_string()));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, DdlError> {
        let t = self.toks.get(self.pos).cloned().ok_or(DdlError::Eof)?;
        self.pos += 1;
        Ok(t)
    }

    fn fail<T>(&self, what: impl Into<String>) -> Result<T, DdlError> {
        Err(DdlError::Unexpected(
            self.pos.saturating_sub(1),
            what.into(),
        ))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DdlError> {
        match self.next()? {
            Tok::Word(w) if w.eq_ignore_ascii_case(kw) => Ok(()),
            other => self.fail(format!("{other:?}, expected {kw}")),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn punct(&mut self, p: char) -> Result<(), DdlError> {
        match self.next()? {
            Tok::Punct(c) if c == p => Ok(()),
            other => self.fail(format!("{other:?}, expected '{p}'")),
        }
    }

    fn name(&mut self) -> Result<String, DdlError> {
        match self.next()? {
            Tok::Quoted(s) => Ok(s),
            Tok::Word(w) if !RESERVED.contains(&w.to_ascii_lowercase().as_str()) => {
                Ok(w.to_ascii_lowercase())
            }
            other => self.fail(format!("{other:?}, expected a name")),
        }
    }

    fn paren_name(&mut self) -> Result<String, DdlError> {
        self.punct('(')?;
        let n = self.name()?;
        self.punct(')')?;
        Ok(n)
    }

    fn references(&mut self) -> Result<(String, String), DdlError> {
        self.keyword("FOREIGN")?;
        self.keyword("KEY")?;
        let column = self.paren_name()?;
        self.keyword("REFERENCES")?;
        let target = self.name()?;
        let key = self.paren_name()?;
        if key != "id" {
            return self.fail(format!("reference to {target}.{key}, expected id"));
        }
        Ok((column, target))
    }
}

/// Parses DDL as produced by [`emit_ddl`] and checks that every reference
/// points at a table created earlier (or at itself), that key columns exist
/// and that names are unique. Returns the tables sorted by name.
pub fn check_ddl(text: &str) -> Result<Vec<TableShape>, DdlError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut tables: Vec<TableShape> = Vec::new();
    let invalid = |m: String| Err(DdlError::Invalid(m));
    while p.peek().is_some() {
        if p.is_keyword("CREATE") {
            p.next()?;
            p.keyword("TABLE")?;
            let name = p.name()?;
            if tables.iter().any(|t| t.name == name) {
                return invalid(format!("table {name} created twice"));
            }
            p.punct('(')?;
            let mut shape = TableShape {
                name: name.clone(),
                columns: Vec::new(),
                primary_key: String::new(),
                foreign_keys: Vec::new(),
            };
            loop {
                if p.is_keyword("PRIMARY") {
                    p.next()?;
                    p.keyword("KEY")?;
                    shape.primary_key = p.paren_name()?;
                } else if p.is_keyword("FOREIGN") {
                    let (column, target) = p.references()?;
                    if target != name && !tables.iter().any(|t| t.name == target) {
                        return invalid(format!(
                            "{name}.{column} references {target} before it exists"
                        ));
                    }
                    shape.foreign_keys.push((column, target));
                } else {
                    let col = p.name()?;
                    let ty = match p.next()? {
                        Tok::Word(w) => ColumnType::from_sql(&w),
                        _ => None,
                    };
                    let Some(ty) = ty else {
                        return p.fail("column type");
                    };
                    let nullable = if p.is_keyword("NOT") {
                        p.next()?;
                        p.keyword("NULL")?;
                        false
                    } else {
                        true
                    };
                    if shape.columns.iter().any(|c| c.0 == col) {
                        return invalid(format!("column {name}.{col} declared twice"));
                    }
                    shape.columns.push((col, ty, nullable));
                }
                match p.next()? {
                    Tok::Punct(',') => continue,
                    Tok::Punct(')') => break,
                    other => return p.fail(format!("{other:?}")),
                }
            }
            p.punct(';')?;
            match shape.columns.iter().find(|c| c.0 == shape.primary_key) {
                Some(c) if !c.2 => {}
                _ => return invalid(format!("{name} has no non-null primary key column")),
            }
            tables.push(shape);
        } else if p.is_keyword("ALTER") {
            p.next()?;
            p.keyword("TABLE")?;
            let name = p.name()?;
            p.keyword("ADD")?;
            let (column, target) = p.references()?;
            p.punct(';')?;
            if !tables.iter().any(|t| t.name == target) {
                return invalid(format!("{name}.{column} references missing table {target}"));
            }
            let Some(t) = tables.iter_mut().find(|t| t.name == name) else {
                return invalid(format!("ALTER of missing table {name}"));
            };
            t.foreign_keys.push((column, target));
        } else {
            return p.fail(format!("{:?}", p.peek()));
        }
    }
    for t in &mut tables {
        if let Some((c, _)) = t
            .foreign_keys
            .iter()
            .find(|(c, _)| !t.columns.iter().any(|col| &col.0 == c))
        {
            return invalid(format!("{}.{c} is not a column", t.name));
        }
        t.foreign_keys.sort();
    }
    tables.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(tables)
}
