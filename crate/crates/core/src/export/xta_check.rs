//! Checker for the XTA subset written by [`to_xta`](super::to_xta).
//!
//! ```text
//! file     := decl* process+ system
//! decl     := 'const' 'int' ID '=' INT ';'
//!           | 'clock' ID (',' ID)* ';'
//!           | 'bool' ID ('=' BOOL)? ';'
//!           | 'int' ID ('=' INT)? ';'
//! process  := 'process' ID '(' ')' '{' decl* states init trans? '}'
//! states   := 'state' state (',' state)* ';'
//! state    := ID ('{' expr '}')?
//! init     := 'init' ID ';'
//! trans    := 'trans' edge (',' edge)* ';'
//! edge     := ID '->' ID '{' ('guard' expr ';')? ('assign' ID ':=' expr (',' ID ':=' expr)* ';')? '}'
//! expr     := conj ('||' conj)*
//! conj     := cmp ('&&' cmp)*
//! cmp      := unary (('<' | '<=' | '==' | '!=' | '>=' | '>') unary)?
//! unary    := '!' unary | '-' unary | ID | INT | BOOL | '(' expr ')'
//! system   := 'system' ID (',' ID)* ';'
//! ```
//!
//! Comments (`//` and `/* */`) are skipped. Names must be declared before
//! use, states must be unique within a process, and every process named by
//! `system` must exist.

use std::collections::{BTreeMap, BTreeSet};

use super::xta::RESERVED;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct XtaCheckError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XtaProcess {
    pub name: String,
    pub clocks: Vec<String>,
    pub states: Vec<String>,
    pub init: String,
    pub edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XtaSummary {
    pub constants: Vec<String>,
    pub clocks: Vec<String>,
    pub bools: Vec<String>,
    pub ints: Vec<String>,
    pub processes: Vec<XtaProcess>,
    pub system: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

const SYMS: &[&str] = &[
    "->", ":=", "<=", ">=", "==", "!=", "&&", "||", "<", ">", "!", "-", "=", "{", "}", "(", ")",
    ";", ",",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, XtaCheckError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| XtaCheckError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            i += 2;
            col += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    col += 2;
                    break;
                }
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Id(chars[start..i].iter().collect()), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse()
                .map_err(|_| err(l0, c0, format!("integer `{s}` out of range")))?;
            out.push((Tok::Int(n), l0, c0));
            continue;
        }
        let sym = SYMS.iter().find(|s| {
            s.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        });
        match sym {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), l0, c0));
            }
            None => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Const,
    Clock,
    Bool,
    Int,
}

struct Checker {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    globals: BTreeMap<String, Kind>,
    locals: BTreeMap<String, Kind>,
}

impl Checker {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, XtaCheckError> {
        let (_, line, column) = self.toks[self.pos];
        Err(XtaCheckError { line, column, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Id(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Id(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn kw(&mut self, kw: &str) -> Result<(), XtaCheckError> {
        if self.is_kw(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn sym(&mut self, sym: &str) -> Result<(), XtaCheckError> {
        if self.is_sym(sym) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{sym}`, found {}", self.describe()))
        }
    }

    fn name(&mut self) -> Result<String, XtaCheckError> {
        match self.peek().clone() {
            Tok::Id(s) if !RESERVED.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            Tok::Id(s) => self.fail(format!("keyword `{s}` used as a name")),
            _ => self.fail(format!("expected a name, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> Result<i64, XtaCheckError> {
        let neg = self.is_sym("-");
        if neg {
            self.pos += 1;
        }
        match *self.peek() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.fail(format!("expected an integer, found {}", self.describe())),
        }
    }

    fn lookup(&self, name: &str) -> Option<Kind> {
        self.locals.get(name).or_else(|| self.globals.get(name)).copied()
    }

    fn declare(&mut self, local: bool, name: String, kind: Kind) -> Result<(), XtaCheckError> {
        let clash = if local {
            self.locals.contains_key(&name)
        } else {
            self.globals.contains_key(&name)
        };
        if clash {
            self.pos -= 1;
            return self.fail(format!("`{name}` declared twice"));
        }
        if local {
            self.locals.insert(name, kind);
        } else {
            self.globals.insert(name, kind);
        }
        Ok(())
    }

    fn decls(&mut self, local: bool, sum: &mut XtaSummary, clocks: &mut Vec<String>) -> Result<(), XtaCheckError> {
        loop {
            if self.is_kw("const") {
                self.pos += 1;
                self.kw("int")?;
                let n = self.name()?;
                self.declare(local, n.clone(), Kind::Const)?;
                self.sym("=")?;
                self.int()?;
                self.sym(";")?;
                sum.constants.push(n);
            } else if self.is_kw("clock") {
                self.pos += 1;
                loop {
                    let n = self.name()?;
                    self.declare(local, n.clone(), Kind::Clock)?;
                    clocks.push(n);
                    if !self.is_sym(",") {
                        break;
                    }
                    self.pos += 1;
                }
                self.sym(";")?;
            } else if self.is_kw("bool") {
                self.pos += 1;
                let n = self.name()?;
                self.declare(local, n.clone(), Kind::Bool)?;
                if self.is_sym("=") {
                    self.pos += 1;
                    if self.is_kw("true") || self.is_kw("false") {
                        self.pos += 1;
                    } else {
                        return self.fail(format!("expected `true` or `false`, found {}", self.describe()));
                    }
                }
                self.sym(";")?;
                sum.bools.push(n);
            } else if self.is_kw("int") {
                self.pos += 1;
                let n = self.name()?;
                self.declare(local, n.clone(), Kind::Int)?;
                if self.is_sym("=") {
                    self.pos += 1;
                    self.int()?;
                }
                self.sym(";")?;
                sum.ints.push(n);
            } else {
                return Ok(());
            }
        }
    }

    fn expr(&mut self) -> Result<(), XtaCheckError> {
        self.conj()?;
        while self.is_sym("||") {
            self.pos += 1;
            self.conj()?;
        }
        Ok(())
    }

    fn conj(&mut self) -> Result<(), XtaCheckError> {
        self.cmp()?;
        while self.is_sym("&&") {
            self.pos += 1;
            self.cmp()?;
        }
        Ok(())
    }

    fn cmp(&mut self) -> Result<(), XtaCheckError> {
        self.unary()?;
        if ["<", "<=", "==", "!=", ">=", ">"].iter().any(|s| self.is_sym(s)) {
            self.pos += 1;
            self.unary()?;
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<(), XtaCheckError> {
        if self.is_sym("!") || self.is_sym("-") {
            self.pos += 1;
            return self.unary();
        }
        if self.is_sym("(") {
            self.pos += 1;
            self.expr()?;
            return self.sym(")");
        }
        if self.is_kw("true") || self.is_kw("false") {
            self.pos += 1;
            return Ok(());
        }
        match self.peek().clone() {
            Tok::Int(_) => {
                self.pos += 1;
                Ok(())
            }
            Tok::Id(_) => {
                let n = self.name()?;
                if self.lookup(&n).is_none() {
                    self.pos -= 1;
                    return self.fail(format!("undeclared name `{n}`"));
                }
                Ok(())
            }
            _ => self.fail(format!("expected an expression, found {}", self.describe())),
        }
    }

    fn state_ref(&mut self, states: &BTreeSet<String>) -> Result<(), XtaCheckError> {
        let s = self.name()?;
        if !states.contains(&s) {
            self.pos -= 1;
            return self.fail(format!("state `{s}` is not declared"));
        }
        Ok(())
    }

    fn process(&mut self, sum: &mut XtaSummary) -> Result<XtaProcess, XtaCheckError> {
        self.kw("process")?;
        let name = self.name()?;
        self.sym("(")?;
        self.sym(")")?;
        self.sym("{")?;
        self.locals.clear();
        let mut p = XtaProcess { name, ..XtaProcess::default() };
        let mut clocks = Vec::new();
        self.decls(true, sum, &mut clocks)?;
        p.clocks = clocks;
        self.kw("state")?;
        let mut states = BTreeSet::new();
        loop {
            let s = self.name()?;
            if !states.insert(s.clone()) {
                self.pos -= 1;
                return self.fail(format!("state `{s}` declared twice"));
            }
            p.states.push(s);
            if self.is_sym("{") {
                self.pos += 1;
                self.expr()?;
                self.sym("}")?;
            }
            if !self.is_sym(",") {
                break;
            }
            self.pos += 1;
        }
        self.sym(";")?;
        self.kw("init")?;
        let init = self.name()?;
        if !states.contains(&init) {
            self.pos -= 1;
            return self.fail(format!("initial state `{init}` is not declared"));
        }
        p.init = init;
        self.sym(";")?;
        if self.is_kw("trans") {
            self.pos += 1;
            loop {
                self.state_ref(&states)?;
                self.sym("->")?;
                self.state_ref(&states)?;
                self.sym("{")?;
                if self.is_kw("guard") {
                    self.pos += 1;
                    self.expr()?;
                    self.sym(";")?;
                }
                if self.is_kw("assign") {
                    self.pos += 1;
                    loop {
                        let v = self.name()?;
                        match self.lookup(&v) {
                            Some(Kind::Clock | Kind::Bool | Kind::Int) => {}
                            Some(Kind::Const) => {
                                self.pos -= 1;
                                return self.fail(format!("assignment to constant `{v}`"));
                            }
                            None => {
                                self.pos -= 1;
                                return self.fail(format!("undeclared name `{v}`"));
                            }
                        }
                        self.sym(":=")?;
                        self.expr()?;
                        if !self.is_sym(",") {
                            break;
                        }
                        self.pos += 1;
                    }
                    self.sym(";")?;
                }
                self.sym("}")?;
                p.edges += 1;
                if !self.is_sym(",") {
                    break;
                }
                self.pos += 1;
            }
            self.sym(";")?;
        }
        self.sym("}")?;
        Ok(p)
    }
}

/// Checks `text` against the subset grammar.
pub fn xta_check(text: &str) -> Result<XtaSummary, XtaCheckError> {
    let toks = lex(text)?;
    let mut c = Checker { toks, pos: 0, globals: BTreeMap::new(), locals: BTreeMap::new() };
    let mut sum = XtaSummary::default();
    let mut clocks = Vec::new();
    c.decls(false, &mut sum, &mut clocks)?;
    sum.clocks = clocks;
    while c.is_kw("process") {
        let p = c.process(&mut sum)?;
        if sum.processes.iter().any(|q| q.name == p.name) || c.globals.contains_key(&p.name) {
            return c.fail(format!("process `{}` declared twice", p.name));
        }
        sum.processes.push(p);
    }
    if sum.processes.is_empty() {
        return c.fail(format!("expected `process`, found {}", c.describe()));
    }
    c.kw("system")?;
    loop {
        let n = c.name()?;
        if !sum.processes.iter().any(|p| p.name == n) {
            c.pos -= 1;
            return c.fail(format!("unknown process `{n}`"));
        }
        sum.system.push(n);
        if !c.is_sym(",") {
            break;
        }
        c.pos += 1;
    }
    c.sym(";")?;
    if *c.peek() != Tok::Eof {
        return c.fail(format!("expected end of input, found {}", c.describe()));
    }
    Ok(sum)
}
