use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::lexer::{lex_line, Spanned, Tok};
use super::{
    validate, AgentDecl, BasisExpr, Encoding, Event, MeasureFactor, RecordDecl, Scenario, StateExpr,
};
use crate::qcore::{c, Label, SpaceLayout, C64};

/// A located problem in `.wfs` source (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Every located problem found while parsing and validating a source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseFailure {
    pub errors: Vec<ParseError>,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Source lines of the parsed items, for locating later diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceMap {
    pub scenario_line: usize,
    pub event_lines: Vec<usize>,
    /// Line declaring each subsystem, agent, observer and named basis.
    pub decl_lines: BTreeMap<String, usize>,
}

const RESERVED: &[&str] = &[
    "scenario", "system", "agent", "observer", "prepare", "basis", "interact", "measure", "read",
    "partition", "on", "in", "record", "dim", "pointer", "init", "as", "single", "encode", "bits",
    "concurrent", "into", "ghz", "schmidt", "comp", "basis1", "basis2", "basis3",
];

fn is_ident(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn parse_real(w: &str) -> Option<f64> {
    if !w.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')) {
        return None;
    }
    w.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// `a`, `bi`, `a+bi`, `a-bi` with decimal reals.
pub(crate) fn parse_complex(w: &str) -> Option<C64> {
    let Some(body) = w.strip_suffix('i') else {
        return parse_real(w).map(|re| c(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k])?;
            let im = parse_real(&body[k..])?;
            Some(c(re, im))
        }
        None => parse_real(body).map(|im| c(0.0, im)),
    }
}

fn parse_label(w: &str) -> Option<Label> {
    if is_ident(w) {
        return Some(Label::Sym(w.to_string()));
    }
    let digits = w.strip_prefix('+').unwrap_or(w);
    if digits.starts_with('+') {
        return None;
    }
    digits.parse::<i64>().ok().map(Label::Int)
}

struct Line<'a> {
    no: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_col: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Line<'a> {
    fn err_at(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.no, col, message: msg.into() }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        self.err_at(self.col(), msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn found(&self) -> String {
        self.peek().map_or("end of line".into(), Tok::describe)
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}, found {}", self.found()))),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        let col = self.col();
        let w = self.word(what)?;
        if !is_ident(&w) || RESERVED.contains(&w.as_str()) {
            return Err(self.err_at(col, format!("expected {what}, found `{w}`")));
        }
        Ok(w)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`, found {}", self.found()))),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_word() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn punct(&mut self, t: Tok) -> PResult<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", t.describe(), self.found())))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            return Err(self.err(format!("unexpected {}", self.found())));
        }
        Ok(())
    }

    fn usize(&mut self, what: &str) -> PResult<usize> {
        let col = self.col();
        let w = self.word(what)?;
        w.parse::<usize>().map_err(|_| self.err_at(col, format!("expected {what}, found `{w}`")))
    }

    fn real(&mut self) -> PResult<f64> {
        let col = self.col();
        let w = self.word("a real number")?;
        parse_real(&w).ok_or_else(|| self.err_at(col, format!("malformed real number `{w}`")))
    }

    fn complex(&mut self) -> PResult<C64> {
        let col = self.col();
        let w = self.word("a complex number")?;
        parse_complex(&w).ok_or_else(|| self.err_at(col, format!("malformed complex number `{w}`")))
    }

    fn label(&mut self) -> PResult<Label> {
        let col = self.col();
        let w = self.word("an outcome label")?;
        parse_label(&w).ok_or_else(|| self.err_at(col, format!("malformed label `{w}`")))
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn complex_list(&mut self) -> PResult<Vec<C64>> {
        self.punct(Tok::LBracket)?;
        let mut out = vec![self.complex()?];
        while self.eat(&Tok::Comma) {
            out.push(self.complex()?);
        }
        self.punct(Tok::RBracket)?;
        Ok(out)
    }

    fn basis(&mut self) -> PResult<BasisExpr> {
        if self.eat(&Tok::LBrace) {
            let mut entries = Vec::new();
            loop {
                let l = self.label()?;
                self.punct(Tok::Colon)?;
                entries.push((l, self.complex_list()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.punct(Tok::RBrace)?;
            return Ok(BasisExpr::Vectors(entries));
        }
        let col = self.col();
        let w = self.word("a basis")?;
        Ok(match w.as_str() {
            "comp" => BasisExpr::Comp,
            "basis1" => BasisExpr::Basis1,
            "basis2" => BasisExpr::Basis2,
            "basis3" => BasisExpr::Basis3,
            other if is_ident(other) && !RESERVED.contains(&other) => BasisExpr::Named(w),
            _ => return Err(self.err_at(col, format!("expected a basis, found `{w}`"))),
        })
    }

    fn state(&mut self) -> PResult<StateExpr> {
        if self.peek() == Some(&Tok::LBracket) {
            return Ok(StateExpr::Amplitudes(self.complex_list()?));
        }
        if self.eat_keyword("ghz") {
            return Ok(StateExpr::Ghz);
        }
        if self.eat_keyword("schmidt") {
            self.punct(Tok::LParen)?;
            let mut cs = vec![self.real()?];
            while self.eat(&Tok::Comma) {
                cs.push(self.real()?);
            }
            self.punct(Tok::RParen)?;
            return Ok(StateExpr::Schmidt(cs));
        }
        Err(self.err(format!("expected a state (`ghz`, `schmidt(..)` or `[..]`), found {}", self.found())))
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    subsystems: Vec<(String, usize)>,
    agents: Vec<AgentDecl>,
    observers: Vec<String>,
    bases: Vec<(String, BasisExpr)>,
    timeline: Vec<Event>,
    map: SourceMap,
}

impl Builder {
    fn declare(&mut self, l: &Line, col: usize, name: &str) -> PResult<()> {
        if self.map.decl_lines.contains_key(name) {
            return Err(l.err_at(col, format!("`{name}` already declared")));
        }
        self.map.decl_lines.insert(name.to_string(), l.no);
        Ok(())
    }

    fn line(&mut self, l: &mut Line) -> PResult<()> {
        let kw_col = l.col();
        let kw = l.word("a keyword")?;
        if kw == "scenario" {
            if self.name.is_some() {
                return Err(l.err_at(kw_col, "scenario declared twice"));
            }
            let col = l.col();
            let n = l.word("a scenario name")?;
            if !is_ident(&n) {
                return Err(l.err_at(col, format!("expected a scenario name, found `{n}`")));
            }
            l.end()?;
            self.name = Some(n);
            self.map.scenario_line = l.no;
            return Ok(());
        }
        if self.name.is_none() {
            return Err(l.err_at(kw_col, "expected `scenario <name>` before any other line"));
        }
        match kw.as_str() {
            "system" => {
                let col = l.col();
                let id = l.ident("a subsystem identifier")?;
                let dim_col = l.col();
                let dim = l.usize("a dimension")?;
                if dim < 2 {
                    return Err(l.err_at(dim_col, "dimension must be at least 2"));
                }
                l.end()?;
                self.declare(l, col, &id)?;
                self.subsystems.push((id, dim));
            }
            "agent" => {
                let col = l.col();
                let name = l.ident("an agent name")?;
                let known = self.agents.iter().any(|a| a.name == name);
                if !l.eat_keyword("record") {
                    l.end()?;
                    self.declare(l, col, &name)?;
                    self.agents.push(AgentDecl { name, records: Vec::new() });
                    return Ok(());
                }
                if !known {
                    self.declare(l, col, &name)?;
                    self.agents.push(AgentDecl { name: name.clone(), records: Vec::new() });
                }
                let rcol = l.col();
                let id = l.ident("a record identifier")?;
                l.keyword("dim")?;
                let dim_col = l.col();
                let dim = l.usize("a dimension")?;
                if dim < 2 {
                    return Err(l.err_at(dim_col, "dimension must be at least 2"));
                }
                let pointer = if l.eat_keyword("pointer") { l.basis()? } else { BasisExpr::Comp };
                let init = if l.eat_keyword("init") {
                    Some(l.label()?)
                } else {
                    None
                };
                l.end()?;
                let init = init.unwrap_or_else(|| default_init(&pointer));
                self.declare(l, rcol, &id)?;
                self.subsystems.push((id.clone(), dim));
                let a = self.agents.iter_mut().find(|a| a.name == name).expect("agent declared");
                a.records.push(RecordDecl { id, dim, pointer, init });
            }
            "observer" => {
                let col = l.col();
                let name = l.ident("an observer name")?;
                l.end()?;
                self.declare(l, col, &name)?;
                self.observers.push(name);
            }
            "basis" => {
                let col = l.col();
                let name = l.ident("a basis name")?;
                l.punct(Tok::Eq)?;
                let b = l.basis()?;
                l.end()?;
                self.declare(l, col, &name)?;
                self.bases.push((name, b));
            }
            "prepare" => {
                let state = l.state()?;
                l.keyword("on")?;
                let targets = l.ident_list("a subsystem identifier")?;
                l.end()?;
                self.push_event(l, Event::Prepare { state, targets });
            }
            "interact" => {
                let agent = l.ident("an agent name")?;
                l.keyword("on")?;
                let targets = l.ident_list("a subsystem identifier")?;
                l.keyword("in")?;
                let basis = l.basis()?;
                l.keyword("record")?;
                let record = l.ident("a record identifier")?;
                l.punct(Tok::Arrow)?;
                let fact = l.ident("a fact name")?;
                l.end()?;
                self.push_event(l, Event::Interact { agent, targets, basis, record, fact });
            }
            "measure" => {
                let observer = l.ident("an observer name")?;
                l.keyword("on")?;
                let mut factors = Vec::new();
                loop {
                    let targets = l.ident_list("a subsystem identifier")?;
                    l.keyword("in")?;
                    let basis = l.basis()?;
                    factors.push(MeasureFactor { targets, basis });
                    if !l.eat(&Tok::Amp) {
                        break;
                    }
                }
                let mut single = false;
                if l.eat_keyword("as") {
                    l.keyword("single")?;
                    single = true;
                }
                let mut encoding = None;
                if l.eat_keyword("encode") {
                    l.keyword("bits")?;
                    encoding = Some(Encoding::Bits);
                }
                l.punct(Tok::Arrow)?;
                let result = l.ident("a result name")?;
                let concurrent = l.eat_keyword("concurrent");
                l.end()?;
                self.push_event(
                    l,
                    Event::Measure { observer, factors, single, encoding, result, concurrent },
                );
            }
            "read" => {
                let observer = l.ident("an observer name")?;
                let record = l.ident("a record identifier")?;
                let basis = if l.eat_keyword("in") { Some(l.basis()?) } else { None };
                let into = if l.eat_keyword("into") {
                    Some(l.ident("a record identifier")?)
                } else {
                    None
                };
                l.punct(Tok::Arrow)?;
                let result = l.ident("a result name")?;
                l.end()?;
                self.push_event(l, Event::ReadRecord { observer, record, basis, into, result });
            }
            "partition" => {
                let name = l.ident("a partition name")?;
                l.punct(Tok::Eq)?;
                let mut groups = vec![l.ident_list("a partition member")?];
                while l.eat(&Tok::Pipe) {
                    groups.push(l.ident_list("a partition member")?);
                }
                l.end()?;
                self.push_event(l, Event::DeclarePartition { name, groups });
            }
            other => return Err(l.err_at(kw_col, format!("unknown keyword `{other}`"))),
        }
        Ok(())
    }

    fn push_event(&mut self, l: &Line, e: Event) {
        self.timeline.push(e);
        self.map.event_lines.push(l.no);
    }
}

fn default_init(pointer: &BasisExpr) -> Label {
    match pointer {
        BasisExpr::Basis1 | BasisExpr::Basis2 | BasisExpr::Basis3 => Label::Int(1),
        BasisExpr::Vectors(v) if !v.is_empty() => v[0].0.clone(),
        _ => Label::Int(0),
    }
}

/// Syntax-level parse; semantic invariants are left to [`validate`].
pub fn parse_unchecked(source: &str) -> Result<(Scenario, SourceMap), ParseError> {
    let mut b = Builder::default();
    for (k, text) in source.split('\n').enumerate() {
        let no = k + 1;
        let text = text.strip_suffix('\r').unwrap_or(text);
        let toks = lex_line(text).map_err(|(col, message)| ParseError { line: no, col, message })?;
        if toks.is_empty() {
            continue;
        }
        let mut line = Line { no, toks: &toks, pos: 0, end_col: text.chars().count() + 1 };
        b.line(&mut line)?;
    }
    let Some(name) = b.name else {
        return Err(ParseError { line: 1, col: 1, message: "no scenario declared".into() });
    };
    let layout = SpaceLayout::new(b.subsystems).map_err(|e| ParseError {
        line: b.map.scenario_line,
        col: 1,
        message: e.to_string(),
    })?;
    Ok((
        Scenario { name, layout, agents: b.agents, observers: b.observers, bases: b.bases, timeline: b.timeline },
        b.map,
    ))
}

/// Parses and validates; every diagnostic is reported with its source line.
pub fn parse(source: &str) -> Result<Scenario, ParseFailure> {
    let (s, map) = parse_unchecked(source).map_err(|e| ParseFailure { errors: vec![e] })?;
    let diags = validate(&s);
    if diags.is_empty() {
        return Ok(s);
    }
    let errors = diags
        .into_iter()
        .map(|d| {
            let line = match d.event {
                Some(i) => map.event_lines[i],
                None => first_named_line(&d.detail, &map).unwrap_or(map.scenario_line),
            };
            ParseError { line, col: 1, message: d.to_string() }
        })
        .collect();
    Err(ParseFailure { errors })
}

fn first_named_line(detail: &str, map: &SourceMap) -> Option<usize> {
    let start = detail.find('`')? + 1;
    let len = detail[start..].find('`')?;
    map.decl_lines.get(&detail[start..start + len]).copied()
}
