//! Text formats: SQDL query blocks, component specs (`.qr`), system
//! structures (`.sys`) and expected system specs (`.sqr`).
//!
//! All four share one tokenizer. Every rejection carries the 1-based line
//! and column of the offending token.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{
    format_number, validate_component_spec, validate_system_graph, ComponentLibrary, ComponentSpec,
    ModelError, QualityMap, RawComponentSpec, RawSystemGraph, SystemGraph, SystemMode,
    SystemQRSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Malformed text.
    Syntax,
    /// Well-formed text describing an invalid value.
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: DiagnosticKind,
}

impl ParseError {
    fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            kind: DiagnosticKind::Syntax,
        }
    }

    fn validation(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            kind: DiagnosticKind::Validation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Dash,
    Arrow,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Dash => f.write_str("`-`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '/' | '\\' | '~' | '+')
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        let mut advance = 1;
        match c {
            '\n' => {
                out.push(Token { tok: Tok::Newline, pos });
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '#' => {
                while i + advance < chars.len() && chars[i + advance] != '\n' {
                    advance += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Token { tok: Tok::Arrow, pos });
                advance = 2;
            }
            '-' => out.push(Token { tok: Tok::Dash, pos }),
            '{' => out.push(Token { tok: Tok::LBrace, pos }),
            '}' => out.push(Token { tok: Tok::RBrace, pos }),
            ',' => out.push(Token { tok: Tok::Comma, pos }),
            ':' => out.push(Token { tok: Tok::Colon, pos }),
            c if is_word_char(c) => {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let joins = d == '-' && chars.get(j + 1).is_some_and(|n| is_word_char(*n));
                    if is_word_char(d) || joins {
                        j += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Word(chars[i..j].iter().collect()),
                    pos,
                });
                advance = j - i;
            }
            other => {
                return Err(ParseError::syntax(
                    pos,
                    format!("unexpected character {:?}", other),
                ))
            }
        }
        i += advance;
        column += advance;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column },
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn new(text: &str, keep_newlines: bool) -> Result<Self, ParseError> {
        let mut tokens = tokenize(text)?;
        if !keep_newlines {
            tokens.retain(|t| t.tok != Tok::Newline);
        }
        Ok(Self { tokens, at: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        &self.tokens[(self.at + ahead).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let t = self.peek();
        ParseError::syntax(t.pos, format!("expected {wanted}, found {}", t.tok))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Pos, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn keyword(&mut self, w: &str) -> Result<Pos, ParseError> {
        if self.is_word(w) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn word(&mut self, wanted: &str) -> Result<(String, Pos), ParseError> {
        match &self.peek().tok {
            Tok::Word(w) => {
                let w = w.clone();
                Ok((w, self.bump().pos))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn identifier(&mut self, wanted: &str) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        let (w, p) = self.word(wanted)?;
        if is_identifier(&w) {
            Ok((w, p))
        } else {
            Err(ParseError::syntax(pos, format!("`{w}` is not a valid identifier")))
        }
    }

    fn number(&mut self) -> Result<(f64, Pos), ParseError> {
        let (w, pos) = self.word("a number")?;
        parse_decimal(&w)
            .map(|v| (v, pos))
            .ok_or_else(|| ParseError::syntax(pos, format!("malformed number `{w}`")))
    }

    fn integer(&mut self) -> Result<(u32, Pos), ParseError> {
        let (w, pos) = self.word("an integer")?;
        if !w.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseError::syntax(pos, format!("malformed integer `{w}`")));
        }
        w.parse()
            .map(|v| (v, pos))
            .map_err(|_| ParseError::syntax(pos, format!("integer `{w}` out of range")))
    }

    fn end_of_line(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }
}

fn is_identifier(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `digits[.digits][(e|E)[+-]digits]`, or `.digits` after optional digits.
fn parse_decimal(w: &str) -> Option<f64> {
    let b = w.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - start
    };
    let int = digits(&mut i);
    let mut frac = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        frac = digits(&mut i);
        if frac == 0 {
            return None;
        }
    }
    if int + frac == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if digits(&mut i) == 0 {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    w.parse::<f64>().ok().filter(|v| v.is_finite())
}

// ---------------------------------------------------------------- queries

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectField {
    InputQuality,
    OutputQuality,
    OperatingMode,
    Reliability,
    OperateProb,
    Failure,
    Suspend,
}

impl SelectField {
    pub const ALL: [SelectField; 7] = [
        SelectField::InputQuality,
        SelectField::OutputQuality,
        SelectField::OperatingMode,
        SelectField::Reliability,
        SelectField::OperateProb,
        SelectField::Failure,
        SelectField::Suspend,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            SelectField::InputQuality => "input_quality",
            SelectField::OutputQuality => "output_quality",
            SelectField::OperatingMode => "operating_mode",
            SelectField::Reliability => "reliability",
            SelectField::OperateProb => "operate_prob",
            SelectField::Failure => "failure",
            SelectField::Suspend => "suspend",
        }
    }

    fn from_keyword(w: &str) -> Option<Self> {
        if w == "control" {
            return Some(SelectField::Suspend);
        }
        Self::ALL.into_iter().find(|f| f.keyword() == w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bounds<T> {
    pub min: Option<T>,
    pub max: Option<T>,
}

impl<T: PartialOrd + Copy> Bounds<T> {
    pub fn admits(&self, v: T) -> bool {
        self.min.map_or(true, |m| v >= m) && self.max.map_or(true, |m| v <= m)
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_none() && self.max.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constraints {
    pub input_levels: Option<Vec<f64>>,
    pub output_min: Option<Vec<f64>>,
    pub output_max: Option<Vec<f64>>,
    pub reliability: Bounds<f64>,
    pub operate_prob: Bounds<f64>,
    pub failure: Bounds<u32>,
    pub suspend: Bounds<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub name: Option<String>,
    pub select: Vec<SelectField>,
    pub system_file: String,
    pub qrspec_file: String,
    pub constraints: Constraints,
}

impl Query {
    pub fn selects(&self, f: SelectField) -> bool {
        self.select.contains(&f)
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("query")
    }
}

/// Parses exactly one query block.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text, false)?;
    let q = parse_block(&mut p)?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected("end of input after `end_query`"));
    }
    Ok(q)
}

/// Parses one or more consecutive query blocks.
pub fn parse_queries(text: &str) -> Result<Vec<Query>, ParseError> {
    let mut p = Parser::new(text, false)?;
    let mut out = Vec::new();
    while p.peek().tok != Tok::Eof {
        out.push(parse_block(&mut p)?);
    }
    if out.is_empty() {
        return Err(ParseError::syntax(p.pos(), "no query block found"));
    }
    Ok(out)
}

const CLAUSE_KEYWORDS: [&str; 7] = [
    "input_quality",
    "output_quality",
    "reliability",
    "operate_prob",
    "failure",
    "suspend",
    "control",
];

fn parse_block(p: &mut Parser) -> Result<Query, ParseError> {
    p.keyword("begin_query")?;
    let name = if matches!(&p.peek().tok, Tok::Word(w) if w != "select") {
        Some(p.identifier("a query name")?.0)
    } else {
        None
    };

    p.keyword("select")?;
    let mut select = Vec::new();
    while p.peek().tok == Tok::Dash {
        p.bump();
        let (w, pos) = p.word("a select field")?;
        let f = SelectField::from_keyword(&w)
            .ok_or_else(|| ParseError::syntax(pos, format!("unknown select field `{w}`")))?;
        if select.contains(&f) {
            return Err(ParseError::syntax(pos, format!("field `{w}` selected twice")));
        }
        select.push(f);
    }
    if select.is_empty() {
        return Err(p.unexpected("at least one `- field` after `select`"));
    }

    let from_pos = p.keyword("from")?;
    let (mut system, mut qrspec) = (None, None);
    while p.peek().tok == Tok::Dash {
        p.bump();
        let (w, pos) = p.word("`system` or `qrspec`")?;
        let slot = match w.as_str() {
            "system" => &mut system,
            "qrspec" => &mut qrspec,
            _ => return Err(ParseError::syntax(pos, format!("unknown source `{w}`"))),
        };
        if slot.is_some() {
            return Err(ParseError::syntax(pos, format!("duplicate `{w}` source")));
        }
        *slot = Some(p.word("a file path")?.0);
    }
    let system_file = system.ok_or_else(|| ParseError::syntax(from_pos, "`from` block lacks `- system FILE`"))?;
    let qrspec_file = qrspec.ok_or_else(|| ParseError::syntax(from_pos, "`from` block lacks `- qrspec FILE`"))?;

    let mut c = Constraints::default();
    if p.is_word("where") {
        p.bump();
        let mut seen: BTreeSet<&'static str> = BTreeSet::new();
        let mut output_pos = None;
        while p.peek().tok == Tok::Dash {
            p.bump();
            let (w, pos) = p.word("a constraint")?;
            let key = CLAUSE_KEYWORDS
                .iter()
                .find(|k| **k == w)
                .map(|k| if *k == "control" { "suspend" } else { *k })
                .ok_or_else(|| ParseError::syntax(pos, format!("unknown constraint `{w}`")))?;
            if !seen.insert(key) {
                return Err(ParseError::syntax(pos, format!("duplicate `{w}` constraint")));
            }
            match key {
                "input_quality" => c.input_levels = Some(value_list(p)?),
                "output_quality" => {
                    output_pos = Some(pos);
                    let (min, max) = sub_options(p, |p| value_list(p).map(|v| (v, Pos::default())))?;
                    if min.is_none() && max.is_none() {
                        return Err(p.unexpected("`- minimum {..}` or `- maximum {..}`"));
                    }
                    c.output_min = min.map(|v| v.0);
                    c.output_max = max.map(|v| v.0);
                }
                "reliability" | "operate_prob" => {
                    let (min, max) = sub_options(p, |p| p.number())?;
                    for (v, vpos) in [min, max].into_iter().flatten() {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(ParseError::validation(
                                vpos,
                                format!("{key} bound {v} lies outside [0, 1]"),
                            ));
                        }
                    }
                    let b = Bounds {
                        min: min.map(|v| v.0),
                        max: max.map(|v| v.0),
                    };
                    if key == "reliability" {
                        c.reliability = b;
                    } else {
                        c.operate_prob = b;
                    }
                }
                _ => {
                    let (min, max) = sub_options(p, |p| p.integer())?;
                    let b = Bounds {
                        min: min.map(|v| v.0),
                        max: max.map(|v| v.0),
                    };
                    if key == "failure" {
                        c.failure = b;
                    } else {
                        c.suspend = b;
                    }
                }
            }
        }
        if let Some(pos) = output_pos {
            let Some(levels) = &c.input_levels else {
                return Err(ParseError::validation(
                    pos,
                    "`output_quality` bounds need an `input_quality` list",
                ));
            };
            for list in [&c.output_min, &c.output_max].into_iter().flatten() {
                if list.len() != levels.len() {
                    return Err(ParseError::validation(
                        pos,
                        format!(
                            "output list has {} values for {} input levels",
                            list.len(),
                            levels.len()
                        ),
                    ));
                }
            }
        }
    }
    p.keyword("end_query")?;
    Ok(Query {
        name,
        select,
        system_file,
        qrspec_file,
        constraints: c,
    })
}

type Sub<T> = Option<(T, Pos)>;

/// `[- minimum X] [- maximum X]` in either order, each at most once.
fn sub_options<T, F>(p: &mut Parser, mut item: F) -> Result<(Sub<T>, Sub<T>), ParseError>
where
    F: FnMut(&mut Parser) -> Result<(T, Pos), ParseError>,
{
    let (mut min, mut max) = (None, None);
    while p.peek().tok == Tok::Dash {
        let which = match &p.peek_at(1).tok {
            Tok::Word(w) if w == "minimum" => &mut min,
            Tok::Word(w) if w == "maximum" => &mut max,
            _ => break,
        };
        p.bump();
        let pos = p.bump().pos;
        if which.is_some() {
            return Err(ParseError::syntax(pos, "bound given twice"));
        }
        let (v, vpos) = item(p)?;
        *which = Some((v, if vpos == Pos::default() { pos } else { vpos }));
    }
    Ok((min, max))
}

fn value_list(p: &mut Parser) -> Result<Vec<f64>, ParseError> {
    p.expect(Tok::LBrace, "`{`")?;
    let mut out = vec![p.number()?.0];
    while p.peek().tok == Tok::Comma {
        p.bump();
        out.push(p.number()?.0);
    }
    p.expect(Tok::RBrace, "`,` or `}`")?;
    Ok(out)
}

fn render_list(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| render_value(*v)).collect();
    format!("{{ {} }}", inner.join(", "))
}

// shortest text that parses back to the same f64
fn render_value(v: f64) -> String {
    format!("{v:?}")
        .trim_end_matches(".0")
        .to_string()
}

/// Canonical text of a query; parsing it yields an equal AST.
pub fn render_query(q: &Query) -> String {
    let mut s = String::from("begin_query");
    if let Some(n) = &q.name {
        s.push(' ');
        s.push_str(n);
    }
    s.push_str("\n    select\n");
    for f in &q.select {
        s.push_str(&format!("        - {}\n", f.keyword()));
    }
    s.push_str("    from\n");
    s.push_str(&format!("        - system {}\n", q.system_file));
    s.push_str(&format!("        - qrspec {}\n", q.qrspec_file));
    let c = &q.constraints;
    let mut clauses = Vec::new();
    if let Some(l) = &c.input_levels {
        clauses.push(format!("        - input_quality {}\n", render_list(l)));
    }
    if c.output_min.is_some() || c.output_max.is_some() {
        let mut t = String::from("        - output_quality\n");
        if let Some(l) = &c.output_min {
            t.push_str(&format!("            - minimum {}\n", render_list(l)));
        }
        if let Some(l) = &c.output_max {
            t.push_str(&format!("            - maximum {}\n", render_list(l)));
        }
        clauses.push(t);
    }
    let bounds = |name: &str, min: Option<String>, max: Option<String>| -> Option<String> {
        if min.is_none() && max.is_none() {
            return None;
        }
        let mut t = format!("        - {name}\n");
        if let Some(v) = min {
            t.push_str(&format!("            - minimum {v}\n"));
        }
        if let Some(v) = max {
            t.push_str(&format!("            - maximum {v}\n"));
        }
        Some(t)
    };
    let f = |b: &Bounds<f64>| (b.min.map(render_value), b.max.map(render_value));
    let i = |b: &Bounds<u32>| (b.min.map(|v| v.to_string()), b.max.map(|v| v.to_string()));
    let (a, b) = f(&c.reliability);
    clauses.extend(bounds("reliability", a, b));
    let (a, b) = f(&c.operate_prob);
    clauses.extend(bounds("operate_prob", a, b));
    let (a, b) = i(&c.failure);
    clauses.extend(bounds("failure", a, b));
    let (a, b) = i(&c.suspend);
    clauses.extend(bounds("suspend", a, b));
    if !clauses.is_empty() {
        s.push_str("    where\n");
        for c in clauses {
            s.push_str(&c);
        }
    }
    s.push_str("end_query\n");
    s
}

// --------------------------------------------------------- component specs

fn quality_pairs(p: &mut Parser) -> Result<Vec<(f64, f64)>, ParseError> {
    let mut pairs = Vec::new();
    if matches!(p.peek().tok, Tok::Newline | Tok::Eof) {
        return Ok(pairs);
    }
    loop {
        let (level, _) = p.number()?;
        p.expect(Tok::Arrow, "`->`")?;
        let (out, _) = p.number()?;
        pairs.push((level, out));
        if p.peek().tok == Tok::Comma {
            p.bump();
        } else {
            break;
        }
    }
    Ok(pairs)
}

/// `.qr` text: one `component NAME ... end` block per component.
pub fn parse_component_specs(text: &str) -> Result<Vec<ComponentSpec>, ParseError> {
    let mut p = Parser::new(text, true)?;
    let mut specs: Vec<ComponentSpec> = Vec::new();
    let mut names: HashMap<String, Pos> = HashMap::new();
    p.skip_newlines();
    while p.peek().tok != Tok::Eof {
        p.keyword("component")?;
        let (name, name_pos) = p.identifier("a component name")?;
        if names.contains_key(&name) {
            return Err(ParseError::validation(
                name_pos,
                format!("component `{name}` is defined twice"),
            ));
        }
        p.end_of_line()?;
        let mut rel: HashMap<u32, (f64, Pos)> = HashMap::new();
        let mut qual: HashMap<u32, (Vec<(f64, f64)>, Pos)> = HashMap::new();
        loop {
            p.skip_newlines();
            if p.is_word("end") {
                break;
            }
            if p.is_word("mode") {
                let line_pos = p.bump().pos;
                let (k, kpos) = p.integer()?;
                p.keyword("reliability")?;
                let (z, _) = p.number()?;
                if k == 0 {
                    return Err(ParseError::validation(kpos, "operating modes are numbered from 1"));
                }
                if rel.insert(k, (z, line_pos)).is_some() {
                    return Err(ParseError::validation(kpos, format!("mode {k} declared twice")));
                }
            } else if p.is_word("quality") {
                let line_pos = p.bump().pos;
                let (k, kpos) = p.integer()?;
                p.expect(Tok::Colon, "`:`")?;
                let pairs = quality_pairs(&mut p)?;
                if qual.insert(k, (pairs, line_pos)).is_some() {
                    return Err(ParseError::validation(kpos, format!("quality of mode {k} given twice")));
                }
            } else {
                return Err(p.unexpected("`mode`, `quality` or `end`"));
            }
            p.end_of_line()?;
        }
        let end_pos = p.keyword("end")?;
        p.end_of_line()?;

        let d = rel.len() as u32;
        if d == 0 {
            return Err(ParseError::validation(
                end_pos,
                format!("component `{name}` declares no modes"),
            ));
        }
        let mut modes = Vec::new();
        let mut mode_pos = Vec::new();
        for k in 1..=d {
            let (z, zpos) = *rel.get(&k).ok_or_else(|| {
                ParseError::validation(end_pos, format!("modes of `{name}` must be numbered 1..{d}"))
            })?;
            let (pairs, qpos) = qual.remove(&k).ok_or_else(|| {
                ParseError::validation(end_pos, format!("mode {k} of `{name}` has no quality line"))
            })?;
            modes.push((z, pairs));
            mode_pos.push((zpos, qpos));
        }
        if let Some((&k, (_, qpos))) = qual.iter().next() {
            return Err(ParseError::validation(*qpos, format!("quality given for undeclared mode {k}")));
        }
        let spec = validate_component_spec(RawComponentSpec {
            name: name.clone(),
            modes,
        })
        .map_err(|e| {
            let pos = match &e {
                ModelError::BadReliability { mode, .. } => mode_pos[mode - 1].0,
                ModelError::BadQualityMap { mode, .. } | ModelError::NonMonotoneLevels { mode, .. } => {
                    mode_pos[mode - 1].1
                }
                _ => name_pos,
            };
            ParseError::validation(pos, e.to_string())
        })?;
        names.insert(name, name_pos);
        specs.push(spec);
        p.skip_newlines();
    }
    if specs.is_empty() {
        return Err(ParseError::validation(p.pos(), "no components"));
    }
    Ok(specs)
}

pub fn parse_component_library(text: &str) -> Result<ComponentLibrary, ParseError> {
    Ok(parse_component_specs(text)?.into_iter().collect())
}

pub fn render_component_spec(spec: &ComponentSpec) -> String {
    let mut s = format!("component {}\n", spec.name());
    for k in 1..=spec.mode_count() {
        s.push_str(&format!("    mode {k} reliability {}\n", render_value(spec.reliability(k))));
        let pairs: Vec<String> = spec
            .quality(k)
            .pairs()
            .iter()
            .map(|(l, o)| format!("{}->{}", format_number(*l), format_number(*o)))
            .collect();
        s.push_str(&format!("    quality {k}: {}\n", pairs.join(", ")));
    }
    s.push_str("end\n");
    s
}

// -------------------------------------------------------- system structure

/// `.sys` text, validated against `library`.
pub fn parse_system_file(text: &str, library: &ComponentLibrary) -> Result<SystemGraph, ParseError> {
    let mut p = Parser::new(text, true)?;
    let mut raw = RawSystemGraph::default();
    let (mut input, mut output): (Option<Pos>, Option<Pos>) = (None, None);
    let mut policy_pos: Option<Pos> = None;
    let mut order_pos: Option<Pos> = None;
    let mut vertex_pos: HashMap<String, Pos> = HashMap::new();
    let mut edge_pos: Vec<Pos> = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        let (kw, pos) = p.word("a declaration")?;
        match kw.as_str() {
            "input" | "output" => {
                let slot = if kw == "input" { &mut input } else { &mut output };
                if slot.is_some() {
                    return Err(ParseError::syntax(pos, format!("duplicate `{kw}` declaration")));
                }
                *slot = Some(pos);
                let id = p.identifier("a node name")?.0;
                if kw == "input" {
                    raw.input = id;
                } else {
                    raw.output = id;
                }
            }
            "vertex" => {
                let (id, id_pos) = p.identifier("a vertex name")?;
                p.expect(Tok::Colon, "`:`")?;
                let (comp, _) = p.identifier("a component name")?;
                if vertex_pos.contains_key(&id) {
                    return Err(ParseError::validation(id_pos, format!("vertex `{id}` declared twice")));
                }
                vertex_pos.insert(id.clone(), pos);
                raw.vertices.push((id, comp));
            }
            "edge" => {
                let (a, _) = p.identifier("a node name")?;
                let (b, _) = p.identifier("a node name")?;
                raw.edges.push((a, b));
                edge_pos.push(pos);
            }
            "parallel_policy" => {
                if policy_pos.is_some() {
                    return Err(ParseError::syntax(pos, "duplicate `parallel_policy`"));
                }
                policy_pos = Some(pos);
                let (w, wpos) = p.word("`max` or `ordered`")?;
                raw.policy = w
                    .parse()
                    .map_err(|e: String| ParseError::syntax(wpos, e))?;
            }
            "path_order" => {
                if order_pos.is_some() {
                    return Err(ParseError::syntax(pos, "duplicate `path_order`"));
                }
                order_pos = Some(pos);
                let mut order = Vec::new();
                while let Tok::Word(_) = p.peek().tok {
                    let (n, npos) = p.integer()?;
                    if n == 0 {
                        return Err(ParseError::validation(npos, "paths are numbered from 1"));
                    }
                    order.push(n as usize);
                }
                if order.is_empty() {
                    return Err(p.unexpected("a path number"));
                }
                raw.ordering = Some(order);
            }
            other => {
                return Err(ParseError::syntax(pos, format!("unknown declaration `{other}`")));
            }
        }
        p.end_of_line()?;
    }
    let eof = p.pos();
    let input_pos = input.ok_or_else(|| ParseError::validation(eof, "missing `input` declaration"))?;
    let output_pos = output.ok_or_else(|| ParseError::validation(eof, "missing `output` declaration"))?;

    let edge_with = |pred: &dyn Fn(&(String, String)) -> bool| -> Pos {
        raw.edges
            .iter()
            .position(pred)
            .map(|i| edge_pos[i])
            .unwrap_or(eof)
    };
    let input_name = raw.input.clone();
    let output_name = raw.output.clone();
    validate_system_graph(raw.clone(), library).map_err(|e| {
        let pos = match &e {
            ModelError::DuplicateVertex(v) => vertex_pos.get(v).copied().unwrap_or(input_pos),
            ModelError::UnknownComponent { vertex, .. } | ModelError::Dangling(vertex) => {
                vertex_pos.get(vertex).copied().unwrap_or(eof)
            }
            ModelError::UnknownNode(n) => edge_with(&|(a, b)| a == n || b == n),
            ModelError::Cycle(n) => edge_with(&|(_, b)| b == n),
            ModelError::EdgeIntoInput => edge_with(&|(_, b)| *b == input_name),
            ModelError::EdgeFromOutput => edge_with(&|(a, _)| *a == output_name),
            ModelError::DirectBypass => edge_with(&|(a, b)| *a == input_name && *b == output_name),
            ModelError::SameEndpoints => output_pos,
            ModelError::BadPathOrdering(_) => order_pos.unwrap_or(eof),
            _ => eof,
        };
        ParseError::validation(pos, e.to_string())
    })
}

// ------------------------------------------------------ expected sys specs

/// `.sqr` text: `components A B ...` then one `mode k_A k_B ... reliability
/// z [quality l->o, ...]` line per system mode.
pub fn parse_system_qrspec(text: &str) -> Result<SystemQRSpec, ParseError> {
    let mut p = Parser::new(text, true)?;
    p.skip_newlines();
    p.keyword("components")?;
    let mut components = Vec::new();
    while let Tok::Word(_) = p.peek().tok {
        let (c, cpos) = p.identifier("a component name")?;
        if components.contains(&c) {
            return Err(ParseError::validation(cpos, format!("component `{c}` listed twice")));
        }
        components.push(c);
    }
    if components.is_empty() {
        return Err(p.unexpected("a component name"));
    }
    p.end_of_line()?;
    let mut modes: Vec<SystemMode> = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek().tok == Tok::Eof {
            break;
        }
        let line_pos = p.keyword("mode")?;
        let mut tuple = Vec::new();
        while let Tok::Word(w) = &p.peek().tok {
            if w == "reliability" {
                break;
            }
            tuple.push(p.integer()?.0 as usize);
        }
        if tuple.len() != components.len() {
            return Err(ParseError::validation(
                line_pos,
                format!("mode lists {} indices for {} components", tuple.len(), components.len()),
            ));
        }
        if modes.iter().any(|m| m.tuple == tuple) {
            return Err(ParseError::validation(line_pos, "mode tuple listed twice"));
        }
        p.keyword("reliability")?;
        let (z, zpos) = p.number()?;
        if z > 1.0 {
            return Err(ParseError::validation(zpos, format!("reliability {z} exceeds 1")));
        }
        let quality = if p.is_word("quality") {
            let qpos = p.bump().pos;
            let pairs = quality_pairs(&mut p)?;
            QualityMap::canonicalize(pairs).map_err(|e| ParseError::validation(qpos, e.to_string()))?
        } else {
            QualityMap::empty()
        };
        p.end_of_line()?;
        modes.push(SystemMode {
            tuple,
            reliability: z,
            quality,
        });
    }
    Ok(SystemQRSpec { components, modes })
}

pub fn render_system_qrspec(spec: &SystemQRSpec) -> String {
    let mut s = format!("components {}\n", spec.components.join(" "));
    for m in &spec.modes {
        let tuple: Vec<String> = m.tuple.iter().map(|k| k.to_string()).collect();
        s.push_str(&format!(
            "mode {} reliability {}",
            tuple.join(" "),
            render_value((m.reliability * 1e12).round() / 1e12)
        ));
        if !m.quality.is_empty() {
            let pairs: Vec<String> = m
                .quality
                .pairs()
                .iter()
                .map(|(l, o)| format!("{}->{}", format_number(*l), format_number(*o)))
                .collect();
            s.push_str(&format!(" quality {}", pairs.join(", ")));
        }
        s.push('\n');
    }
    s
}
