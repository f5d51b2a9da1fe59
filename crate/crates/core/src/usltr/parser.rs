//! Recursive-descent parser for the formula surface syntax.
//!
//! ```text
//! formula := chop
//! chop    := or ("chop" chop)?
//! or      := and ("or" and)*
//! and     := unary ("and" unary)*
//! unary   := "not" unary | ("exists" | "forall") var ":" unary | primary
//! primary := "true" | "false" | "free" | "cs"
//!          | ("re" | "sg" | "pc" | "pa") "(" car ")" | "ob" "(" name ")"
//!          | "l" ">=" lenexpr | "(" formula ")" | "<<" formula ">>"
//! lenexpr := rational | "size" "(" car ")"
//! ```
//!
//! Car references starting with a lower-case letter are variables, all
//! others are concrete ids.

use std::fmt;

use super::ast::{CarRef, Formula, LenExpr};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// When false, `<<f>>` is plain grouping instead of the somewhere modality.
    pub somewhere_brackets: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            somewhere_brackets: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnboundVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    LParen,
    RParen,
    Open,  // <<
    Close, // >>
    Colon,
    Ge,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "number {}", rational::Display(n)),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Open => f.write_str("`<<`"),
            Tok::Close => f.write_str("`>>`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |pos: Pos, message: String| ParseError {
        line: pos.line,
        column: pos.column,
        kind: ParseErrorKind::Syntax,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
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
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            "<<" => (Tok::Open, 2),
            ">>" => (Tok::Close, 2),
            ">=" => (Tok::Ge, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ':' => (Tok::Colon, 1),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end = (i..chars.len())
                        .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                        .unwrap_or(chars.len());
                    (Tok::Ident(chars[i..end].iter().collect()), end - i)
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let end = (i..chars.len())
                        .find(|&j| !(chars[j].is_ascii_digit() || chars[j] == '.' || chars[j] == '/'))
                        .unwrap_or(chars.len());
                    let s: String = chars[i..end].iter().collect();
                    let n = rational::parse_rational(&s).map_err(|e| err(pos, e.to_string()))?;
                    (Tok::Number(n), end - i)
                }
                other => return Err(err(pos, format!("unexpected character `{other}`"))),
            },
        };
        out.push((tok, pos));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "true", "false", "free", "cs", "re", "sg", "pc", "pa", "ob", "l", "not", "and", "or", "chop",
    "exists", "forall", "size",
];

fn is_var_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase())
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    opts: ParseOptions,
    bound: Vec<String>,
    first_unbound: Option<(String, Pos)>,
    depth: usize,
}

/// Deepest accepted nesting of operators and parentheses.
pub const MAX_NESTING: usize = 200;

impl Parser {
    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error(format!("formula nested deeper than {MAX_NESTING}")));
        }
        Ok(())
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let p = self.pos();
        ParseError {
            line: p.line,
            column: p.column,
            kind: ParseErrorKind::Syntax,
            message: message.into(),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.chop()
    }

    fn chop(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let left = self.or()?;
        let out = if self.at_keyword("chop") {
            self.bump();
            let right = self.chop()?;
            Formula::chop(left, right)
        } else {
            left
        };
        self.depth -= 1;
        Ok(out)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        // each link of a left-nested chain deepens the tree
        let entered = self.depth;
        let mut left = self.and()?;
        while self.at_keyword("or") {
            self.enter()?;
            self.bump();
            let right = self.and()?;
            left = Formula::or(left, right);
        }
        self.depth = entered;
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        // each link of a left-nested chain deepens the tree
        let entered = self.depth;
        let mut left = self.unary()?;
        while self.at_keyword("and") {
            self.enter()?;
            self.bump();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        self.depth = entered;
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = self.unary_inner();
        self.depth -= 1;
        out
    }

    fn unary_inner(&mut self) -> Result<Formula, ParseError> {
        if self.at_keyword("not") {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_keyword("exists") || self.at_keyword("forall") {
            let exists = self.at_keyword("exists");
            self.bump();
            let (var, _) = self.ident("a variable")?;
            if !is_var_name(&var) || KEYWORDS.contains(&var.as_str()) {
                self.at -= 1;
                return Err(self.error(format!(
                    "`{var}` cannot be a variable (variables start with a lower-case letter and are not keywords)"
                )));
            }
            self.expect(Tok::Colon)?;
            self.bound.push(var.clone());
            let body = self.unary();
            self.bound.pop();
            let body = body?;
            return Ok(if exists {
                Formula::exists(var, body)
            } else {
                Formula::forall(var, body)
            });
        }
        self.primary()
    }

    fn car(&mut self) -> Result<CarRef, ParseError> {
        self.expect(Tok::LParen)?;
        let (name, pos) = self.ident("a car id or variable")?;
        self.expect(Tok::RParen)?;
        if is_var_name(&name) {
            if !self.bound.contains(&name) && self.first_unbound.is_none() {
                self.first_unbound = Some((name.clone(), pos));
            }
            Ok(CarRef::Var(name))
        } else {
            Ok(CarRef::Id(name))
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Open => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::Close)?;
                Ok(if self.opts.somewhere_brackets {
                    Formula::somewhere(f)
                } else {
                    f
                })
            }
            Tok::Ident(word) => {
                self.bump();
                match word.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    "free" => Ok(Formula::Free),
                    "cs" => Ok(Formula::Cs),
                    "re" => Ok(Formula::Re(self.car()?)),
                    "sg" => Ok(Formula::Sg(self.car()?)),
                    "pc" => Ok(Formula::Pc(self.car()?)),
                    "pa" => Ok(Formula::Pa(self.car()?)),
                    "ob" => {
                        self.expect(Tok::LParen)?;
                        let (kind, _) = self.ident("a sign kind")?;
                        self.expect(Tok::RParen)?;
                        Ok(Formula::Ob(kind))
                    }
                    "l" => {
                        self.expect(Tok::Ge)?;
                        Ok(Formula::LengthGe(self.lenexpr()?))
                    }
                    _ => {
                        self.at -= 1;
                        Err(self.error(format!("unknown atom `{word}`")))
                    }
                }
            }
            other => Err(self.error(format!("expected a formula, found {other}"))),
        }
    }

    fn lenexpr(&mut self) -> Result<LenExpr, ParseError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(LenExpr::Const(n))
            }
            Tok::Ident(w) if w == "size" => {
                self.bump();
                Ok(LenExpr::Size(self.car()?))
            }
            other => Err(self.error(format!(
                "expected a length (number or size(...)), found {other}"
            ))),
        }
    }
}

fn run(text: &str, opts: ParseOptions) -> Result<(Formula, Option<(String, Pos)>), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        opts,
        bound: Vec::new(),
        first_unbound: None,
        depth: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after formula", p.peek())));
    }
    Ok((f, p.first_unbound))
}

/// Parses a formula; free variables are allowed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, ParseOptions::default())
}

pub fn parse_formula_with(text: &str, opts: ParseOptions) -> Result<Formula, ParseError> {
    run(text, opts).map(|(f, _)| f)
}

/// Parses a formula and rejects any variable not bound by a quantifier.
pub fn parse_closed_formula(text: &str, opts: ParseOptions) -> Result<Formula, ParseError> {
    let (f, unbound) = run(text, opts)?;
    match unbound {
        None => Ok(f),
        Some((name, pos)) => Err(ParseError {
            line: pos.line,
            column: pos.column,
            message: format!("unbound variable `{name}`"),
            kind: ParseErrorKind::UnboundVariable(name),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::usltr::ast::free_variables;
    use Formula::*;

    #[test]
    fn single_atom() {
        assert_eq!(parse_formula("free").unwrap(), Free);
    }

    #[test]
    fn safe_gap_body_is_right_nested() {
        let f = parse_formula("(re(A) and not cs) chop (free and not cs) chop (sg(A) and cs)")
            .unwrap();
        assert_eq!(f, Formula::safe_gap_on_junction("A"));
    }

    #[test]
    fn quantifier_binds_variable() {
        assert_eq!(
            parse_formula("exists c : pc(c)").unwrap(),
            Formula::exists("c", Pc(CarRef::var("c")))
        );
    }

    #[test]
    fn quantifier_body_is_unary() {
        let f = parse_formula("not exists c : pc(c) and not pa(E)").unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::not(Formula::exists("c", Pc(CarRef::var("c")))),
                Formula::not(Pa(CarRef::id("E")))
            )
        );
    }

    #[test]
    fn precedence_and_over_or_over_chop() {
        let f = parse_formula("free and cs or true chop false").unwrap();
        assert_eq!(
            f,
            Formula::chop(Formula::or(Formula::and(Free, Cs), True), False)
        );
    }

    #[test]
    fn lengths() {
        assert_eq!(parse_formula("l >= 7/2").unwrap(), Formula::length_ge(ratio(7, 2)));
        assert_eq!(parse_formula("l>=2").unwrap(), Formula::length_ge(int(2)));
        assert_eq!(
            parse_formula("l >= size(A)").unwrap(),
            LengthGe(LenExpr::Size(CarRef::id("A")))
        );
    }

    #[test]
    fn brackets_modes() {
        assert_eq!(parse_formula("<<free>>").unwrap(), Formula::somewhere(Free));
        let plain = ParseOptions {
            somewhere_brackets: false,
        };
        assert_eq!(parse_formula_with("<<free>>", plain).unwrap(), Free);
    }

    #[test]
    fn free_variable_sets() {
        let fv = |t: &str| free_variables(&parse_formula(t).unwrap());
        assert_eq!(fv("pc(c)"), ["c".to_string()].into());
        assert!(fv("exists c : pc(c)").is_empty());
        assert_eq!(fv("pc(c) and pa(d)"), ["c".to_string(), "d".to_string()].into());
    }

    #[test]
    fn closed_parse_rejects_unbound() {
        let e = parse_closed_formula("free and pc(c)", ParseOptions::default()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnboundVariable("c".into()));
        assert_eq!((e.line, e.column), (1, 13));
        assert!(parse_closed_formula("forall c : not pc(c)", ParseOptions::default()).is_ok());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_formula("free and\n  (cs or").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!(e.line, 2);
        let e = parse_formula("free $").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(parse_formula("exists A : re(A)").is_err());
        assert!(parse_formula("bogus").is_err());
        assert!(parse_formula("free free").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}free{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_formula(&text).is_err());
        let text = format!("{}free", "not ".repeat(5000));
        assert!(parse_formula(&text).is_err());
        let text = vec!["free"; 5000].join(" and ");
        assert!(parse_formula(&text).is_err());
    }

    #[test]
    fn printing_parses_back() {
        for text in [
            "not (free chop cs)",
            "(free chop cs) chop true",
            "free and (cs and true)",
            "free or (cs or true)",
            "not exists c : pc(c) and not pa(E)",
            "exists c : (pc(c) and pa(c))",
            "<<re(E) chop free>> or ob(Stop)",
            "l >= 3/4 chop l >= size(B)",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text}");
        }
    }
}
