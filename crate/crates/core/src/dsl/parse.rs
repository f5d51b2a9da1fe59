//! Rule file parser.
//!
//! ```text
//! file        = "rule" STRING "{" item* "}"
//! item        = "clocks" ":" names ";" | "alphabet" ":" names ";"
//!             | "const" IDENT "=" NUMBER ";" | "note" ":" STRING ";"
//!             | location | transition
//! location    = "location" IDENT "{" loc_item* "}"
//! loc_item    = "initial" ";" | "invariant" ":" clocks ";"
//!             | "spatial" ":" STRING ";" | "forbid" ":" names ";"
//!             | "role" ":" STRING ";"
//! transition  = "transition" IDENT "->" IDENT "{" tr_item* "}"
//! tr_item     = "action" ":" IDENT ";" | "guard" ":" STRING ";"
//!             | "clock" ":" clocks ";" | "reset" ":" names ";"
//!             | "note" ":" STRING ";"
//! clocks      = "true" | catom ("and" catom)*
//! catom       = IDENT (">=" | "<=") (INT | IDENT)
//! names       = [IDENT ("," IDENT)*]
//! ```
//! Line comments start with `//`.

use std::fmt;

use crate::automata::{
    validate_automaton, Bound, ClockAtom, ClockConstraint, ClockOp, Location, RuleAutomaton,
    Subject, Transition,
};
use crate::rational::{parse_rational, Rational};
use crate::usltr::{parse_closed_formula, Formula, ParseOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct RuleError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Str { text: String, escaped: bool },
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Arrow,
    Ge,
    Le,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(_) => "number".into(),
            Tok::Str { .. } => "string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> RuleError {
    RuleError {
        diagnostics: vec![Diagnostic {
            line: pos.line,
            column: pos.column,
            kind: DiagnosticKind::Syntax,
            message: message.into(),
        }],
    }
}

fn advance(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize) {
    if chars[*i] == '\n' {
        *line += 1;
        *col = 1;
    } else {
        *col += 1;
    }
    *i += 1;
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, RuleError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&chars, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        let negative_number = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative_number {
            let start = i;
            advance(&chars, &mut i, &mut line, &mut col);
            while i < chars.len()
                && (chars[i].is_ascii_digit() || chars[i] == '/' || chars[i] == '.')
            {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            let s: String = chars[start..i].iter().collect();
            let r = parse_rational(&s).map_err(|e| syntax(pos, e.to_string()))?;
            out.push((Tok::Num(r), pos));
            continue;
        }
        if c == '"' {
            advance(&chars, &mut i, &mut line, &mut col);
            let mut s = String::new();
            let mut escaped = false;
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(syntax(pos, "unterminated string"));
                };
                advance(&chars, &mut i, &mut line, &mut col);
                match d {
                    '"' => break,
                    '\\' => {
                        escaped = true;
                        let Some(&e) = chars.get(i) else {
                            return Err(syntax(pos, "unterminated string"));
                        };
                        advance(&chars, &mut i, &mut line, &mut col);
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' | '\\' => e,
                            _ => {
                                return Err(syntax(
                                    Pos { line, column: col - 2 },
                                    format!("unknown escape `\\{e}`"),
                                ))
                            }
                        });
                    }
                    _ => s.push(d),
                }
            }
            out.push((Tok::Str { text: s, escaped }, pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = match two.as_str() {
            "->" => Some(Tok::Arrow),
            ">=" => Some(Tok::Ge),
            "<=" => Some(Tok::Le),
            _ => None,
        };
        if let Some(t) = tok {
            advance(&chars, &mut i, &mut line, &mut col);
            advance(&chars, &mut i, &mut line, &mut col);
            out.push((t, pos));
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        advance(&chars, &mut i, &mut line, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

const RESERVED_CLOCKS: [&str; 2] = ["true", "and"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    opts: ParseOptions,
    constants: Vec<(String, Rational)>,
}

type R<T> = Result<T, RuleError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> R<Pos> {
        let (t, p) = self.bump();
        if t == want {
            Ok(p)
        } else {
            Err(syntax(p, format!("expected {}, found {}", want.describe(), t.describe())))
        }
    }

    fn ident(&mut self) -> R<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected identifier, found {}", t.describe()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> R<Pos> {
        match self.bump() {
            (Tok::Ident(s), p) if s == kw => Ok(p),
            (t, p) => Err(syntax(p, format!("expected `{kw}`, found {}", t.describe()))),
        }
    }

    fn string(&mut self) -> R<(String, Pos, bool)> {
        match self.bump() {
            (Tok::Str { text, escaped }, p) => Ok((text, p, escaped)),
            (t, p) => Err(syntax(p, format!("expected string, found {}", t.describe()))),
        }
    }

    fn names(&mut self) -> R<Vec<String>> {
        let mut out = Vec::new();
        if *self.peek() == Tok::Semi {
            return Ok(out);
        }
        out.push(self.ident()?.0);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.ident()?.0);
        }
        Ok(out)
    }

    fn formula(&mut self) -> R<Formula> {
        let (text, p, escaped) = self.string()?;
        parse_closed_formula(&text, self.opts).map_err(|e| {
            // map the position inside the string onto the file
            let (line, column) = if escaped {
                (p.line, p.column)
            } else if e.line == 1 {
                (p.line, p.column + e.column)
            } else {
                (p.line + e.line - 1, e.column)
            };
            let kind = match e.kind {
                crate::usltr::ParseErrorKind::Syntax => DiagnosticKind::Syntax,
                crate::usltr::ParseErrorKind::UnboundVariable(_) => DiagnosticKind::Semantic,
            };
            RuleError {
                diagnostics: vec![Diagnostic {
                    line,
                    column,
                    kind,
                    message: format!("in formula: {}", e.message),
                }],
            }
        })
    }

    fn bound(&mut self) -> R<Bound> {
        match self.bump() {
            (Tok::Num(r), p) => {
                if r.is_integer() {
                    Ok(Bound::lit(*r.numer()))
                } else {
                    Err(syntax(p, "clock bounds must be integers"))
                }
            }
            (Tok::Ident(name), p) => {
                let Some((_, v)) = self.constants.iter().find(|(n, _)| *n == name) else {
                    return Err(semantic(p, format!("unknown constant `{name}`")));
                };
                if v.is_integer() {
                    Ok(Bound::named(name, *v.numer()))
                } else {
                    Err(semantic(p, format!("constant `{name}` is not an integer")))
                }
            }
            (t, p) => Err(syntax(p, format!("expected bound, found {}", t.describe()))),
        }
    }

    fn clocks(&mut self) -> R<ClockConstraint> {
        if *self.peek() == Tok::Ident("true".into()) {
            self.bump();
            return Ok(ClockConstraint::default());
        }
        let mut atoms = Vec::new();
        loop {
            let (clock, _) = self.ident()?;
            let op = match self.bump() {
                (Tok::Ge, _) => ClockOp::Ge,
                (Tok::Le, _) => ClockOp::Le,
                (t, p) => {
                    return Err(syntax(p, format!("expected `>=` or `<=`, found {}", t.describe())))
                }
            };
            atoms.push(ClockAtom::new(clock, op, self.bound()?));
            if *self.peek() == Tok::Ident("and".into()) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(ClockConstraint(atoms))
    }

    fn once<T>(slot: &mut Option<T>, v: T, p: Pos, what: &str) -> R<()> {
        if slot.is_some() {
            return Err(syntax(p, format!("`{what}` given twice")));
        }
        *slot = Some(v);
        Ok(())
    }

    fn location(&mut self) -> R<Location> {
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut loc = Location::new(name);
        let (mut inv, mut spatial, mut forbid, mut role) = (None, None, None, None);
        loop {
            let (kw, p) = match self.bump() {
                (Tok::RBrace, _) => break,
                (Tok::Ident(s), p) => (s, p),
                (t, p) => return Err(syntax(p, format!("expected location item, found {}", t.describe()))),
            };
            if kw == "initial" {
                if loc.initial {
                    return Err(syntax(p, "`initial` given twice"));
                }
                loc.initial = true;
                self.expect(Tok::Semi)?;
                continue;
            }
            self.expect(Tok::Colon)?;
            match kw.as_str() {
                "invariant" => {
                    let v = self.clocks()?;
                    Self::once(&mut inv, v, p, "invariant")?
                }
                "spatial" => {
                    let v = self.formula()?;
                    Self::once(&mut spatial, v, p, "spatial")?
                }
                "forbid" => {
                    let v = self.names()?;
                    Self::once(&mut forbid, v, p, "forbid")?
                }
                "role" => {
                    let v = self.string()?.0;
                    Self::once(&mut role, v, p, "role")?
                }
                _ => return Err(syntax(p, format!("unknown location item `{kw}`"))),
            }
            self.expect(Tok::Semi)?;
        }
        loc.invariant = inv.unwrap_or_default();
        loc.spatial_invariant = spatial;
        loc.forbid = forbid.unwrap_or_default();
        loc.role = role;
        Ok(loc)
    }

    fn transition(&mut self, start: Pos) -> R<Transition> {
        let (source, _) = self.ident()?;
        self.expect(Tok::Arrow)?;
        let (target, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let (mut action, mut guard, mut clock, mut reset, mut note) = (None, None, None, None, None);
        loop {
            let (kw, p) = match self.bump() {
                (Tok::RBrace, _) => break,
                (Tok::Ident(s), p) => (s, p),
                (t, p) => return Err(syntax(p, format!("expected transition item, found {}", t.describe()))),
            };
            self.expect(Tok::Colon)?;
            match kw.as_str() {
                "action" => {
                    let v = self.ident()?.0;
                    Self::once(&mut action, v, p, "action")?
                }
                "guard" => {
                    let v = self.formula()?;
                    Self::once(&mut guard, v, p, "guard")?
                }
                "clock" => {
                    let v = self.clocks()?;
                    Self::once(&mut clock, v, p, "clock")?
                }
                "reset" => {
                    let v = self.names()?;
                    Self::once(&mut reset, v, p, "reset")?
                }
                "note" => {
                    let v = self.string()?.0;
                    Self::once(&mut note, v, p, "note")?
                }
                _ => return Err(syntax(p, format!("unknown transition item `{kw}`"))),
            }
            self.expect(Tok::Semi)?;
        }
        let Some(action) = action else {
            return Err(syntax(start, "transition without `action`"));
        };
        let mut t = Transition::new(source, target, action);
        t.spatial_guard = guard.unwrap_or(Formula::True);
        t.clock_guard = clock.unwrap_or_default();
        t.resets = reset.unwrap_or_default();
        t.note = note;
        Ok(t)
    }

    fn rule(&mut self) -> R<(RuleAutomaton, Vec<Pos>, Vec<Pos>, Pos)> {
        let rule_pos = self.keyword("rule")?;
        let (name, _, _) = self.string()?;
        self.expect(Tok::LBrace)?;
        let mut a = RuleAutomaton::new(name);
        let (mut loc_pos, mut tr_pos) = (Vec::new(), Vec::new());
        let (mut clocks, mut alphabet) = (None, None);
        loop {
            let (kw, p) = match self.bump() {
                (Tok::RBrace, _) => break,
                (Tok::Ident(s), p) => (s, p),
                (t, p) => return Err(syntax(p, format!("expected rule item, found {}", t.describe()))),
            };
            match kw.as_str() {
                "clocks" => {
                    self.expect(Tok::Colon)?;
                    let v = self.names()?;
                    if let Some(bad) = v.iter().find(|c| RESERVED_CLOCKS.contains(&c.as_str())) {
                        return Err(syntax(p, format!("`{bad}` cannot name a clock")));
                    }
                    Self::once(&mut clocks, v, p, "clocks")?;
                    self.expect(Tok::Semi)?;
                }
                "alphabet" => {
                    self.expect(Tok::Colon)?;
                    let v = self.names()?;
                    Self::once(&mut alphabet, v, p, "alphabet")?;
                    self.expect(Tok::Semi)?;
                }
                "const" => {
                    let (n, np) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let v = match self.bump() {
                        (Tok::Num(r), _) => r,
                        (t, p) => return Err(syntax(p, format!("expected number, found {}", t.describe()))),
                    };
                    if self.constants.iter().any(|(m, _)| *m == n) {
                        return Err(semantic(np, format!("duplicate constant `{n}`")));
                    }
                    self.constants.push((n, v));
                    self.expect(Tok::Semi)?;
                }
                "note" => {
                    self.expect(Tok::Colon)?;
                    a.notes.push(self.string()?.0);
                    self.expect(Tok::Semi)?;
                }
                "location" => {
                    a.locations.push(self.location()?);
                    loc_pos.push(p);
                }
                "transition" => {
                    a.transitions.push(self.transition(p)?);
                    tr_pos.push(p);
                }
                _ => return Err(syntax(p, format!("unknown rule item `{kw}`"))),
            }
        }
        self.expect(Tok::Eof)?;
        a.clocks = clocks.unwrap_or_default();
        a.alphabet = alphabet.unwrap_or_default();
        a.constants = std::mem::take(&mut self.constants);
        Ok((a, loc_pos, tr_pos, rule_pos))
    }
}

fn semantic(pos: Pos, message: impl Into<String>) -> RuleError {
    RuleError {
        diagnostics: vec![Diagnostic {
            line: pos.line,
            column: pos.column,
            kind: DiagnosticKind::Semantic,
            message: message.into(),
        }],
    }
}

pub fn parse_rule_file(text: &str) -> Result<RuleAutomaton, RuleError> {
    parse_rule_file_with(text, ParseOptions::default())
}

/// Parses and fully validates a rule file.
pub fn parse_rule_file_with(text: &str, opts: ParseOptions) -> Result<RuleAutomaton, RuleError> {
    let mut p = Parser {
        toks: lex(text)?,
        i: 0,
        opts,
        constants: Vec::new(),
    };
    let (a, loc_pos, tr_pos, rule_pos) = p.rule()?;
    let violations = validate_automaton(&a);
    if violations.is_empty() {
        return Ok(a);
    }
    let diagnostics = violations
        .into_iter()
        .map(|v| {
            let pos = match v.subject {
                Subject::Rule => rule_pos,
                Subject::Location(i) => loc_pos[i],
                Subject::Transition(i) => tr_pos[i],
            };
            Diagnostic {
                line: pos.line,
                column: pos.column,
                kind: DiagnosticKind::Semantic,
                message: v.message,
            }
        })
        .collect();
    Err(RuleError { diagnostics })
}
