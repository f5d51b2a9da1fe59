use std::collections::BTreeSet;
use std::fmt;

use crate::rational::{self, Rational};

/// Reference to a car: a concrete id (upper-case initial, e.g. `E`) or a
/// variable (lower-case initial, e.g. `c`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CarRef {
    Id(String),
    Var(String),
}

impl CarRef {
    pub fn id(s: impl Into<String>) -> Self {
        CarRef::Id(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        CarRef::Var(s.into())
    }

    pub fn name(&self) -> &str {
        match self {
            CarRef::Id(s) | CarRef::Var(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LenExpr {
    Const(Rational),
    Size(CarRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Free,
    Cs,
    Re(CarRef),
    Sg(CarRef),
    Pc(CarRef),
    Pa(CarRef),
    Ob(String),
    LengthGe(LenExpr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Chop(Box<Formula>, Box<Formula>),
    Somewhere(Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn chop(a: Formula, b: Formula) -> Self {
        Formula::Chop(Box::new(a), Box::new(b))
    }

    pub fn somewhere(f: Formula) -> Self {
        Formula::Somewhere(Box::new(f))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn length_ge(k: Rational) -> Self {
        Formula::LengthGe(LenExpr::Const(k))
    }

    /// `sg_I(car)`: reservation off the junction, then free space off the
    /// junction, then a safe gap on it.
    pub fn safe_gap_on_junction(car: &str) -> Self {
        use Formula::*;
        let c = || CarRef::id(car);
        Formula::chop(
            Formula::and(Re(c()), Formula::not(Cs)),
            Formula::chop(
                Formula::and(Free, Formula::not(Cs)),
                Formula::and(Sg(c()), Cs),
            ),
        )
    }

    /// Nesting depth of interval splits. Each chop adds one split, a
    /// somewhere adds two.
    pub fn split_depth(&self) -> usize {
        use Formula::*;
        match self {
            Chop(a, b) => 1 + a.split_depth().max(b.split_depth()),
            Somewhere(a) => 2 + a.split_depth(),
            Not(a) | Exists(_, a) | Forall(_, a) => a.split_depth(),
            And(a, b) | Or(a, b) => a.split_depth().max(b.split_depth()),
            _ => 0,
        }
    }

    /// Syntactic depth, atoms at depth 0.
    pub fn depth(&self) -> usize {
        use Formula::*;
        match self {
            Not(a) | Somewhere(a) | Exists(_, a) | Forall(_, a) => 1 + a.depth(),
            And(a, b) | Or(a, b) | Chop(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }

    /// Top-level conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Not(a) | Somewhere(a) | Exists(_, a) | Forall(_, a) => vec![a],
            And(a, b) | Or(a, b) | Chop(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    /// Sign kinds mentioned by `ob(...)` atoms.
    pub fn sign_kinds(&self, out: &mut BTreeSet<String>) {
        if let Formula::Ob(k) = self {
            out.insert(k.clone());
        }
        for c in self.children() {
            c.sign_kinds(out);
        }
    }
}

/// Variables occurring free in `f`.
pub fn free_variables(f: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut car = |r: &CarRef, bound: &Vec<String>| {
            if let CarRef::Var(v) = r {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match f {
            Formula::Re(r) | Formula::Sg(r) | Formula::Pc(r) | Formula::Pa(r) => car(r, bound),
            Formula::LengthGe(LenExpr::Size(r)) => car(r, bound),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                go(body, bound, out);
                bound.pop();
            }
            other => {
                for c in other.children() {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

// Binding strength, loosest first. `chop` is right-associative, `and`/`or`
// left-associative, prefix operators bind tightest.
const P_CHOP: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNARY: u8 = 4;

impl fmt::Display for CarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for LenExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LenExpr::Const(k) => write!(f, "{}", rational::Display(k)),
            LenExpr::Size(r) => write!(f, "size({r})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

fn write_prec(x: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    use Formula::*;
    let open = match x {
        Chop(..) => ctx > P_CHOP,
        Or(..) => ctx > P_OR,
        And(..) => ctx > P_AND,
        Not(_) | Exists(..) | Forall(..) => ctx > P_UNARY,
        _ => false,
    };
    if open {
        f.write_str("(")?;
    }
    match x {
        True => f.write_str("true")?,
        False => f.write_str("false")?,
        Free => f.write_str("free")?,
        Cs => f.write_str("cs")?,
        Re(r) => write!(f, "re({r})")?,
        Sg(r) => write!(f, "sg({r})")?,
        Pc(r) => write!(f, "pc({r})")?,
        Pa(r) => write!(f, "pa({r})")?,
        Ob(k) => write!(f, "ob({k})")?,
        LengthGe(e) => write!(f, "l >= {e}")?,
        Not(a) => {
            f.write_str("not ")?;
            write_prec(a, P_UNARY, f)?;
        }
        Exists(v, a) | Forall(v, a) => {
            let q = if matches!(x, Exists(..)) { "exists" } else { "forall" };
            write!(f, "{q} {v} : ")?;
            write_prec(a, P_UNARY, f)?;
        }
        And(a, b) => {
            write_prec(a, P_AND, f)?;
            f.write_str(" and ")?;
            write_prec(b, P_UNARY, f)?;
        }
        Or(a, b) => {
            write_prec(a, P_OR, f)?;
            f.write_str(" or ")?;
            write_prec(b, P_AND, f)?;
        }
        Chop(a, b) => {
            write_prec(a, P_OR, f)?;
            f.write_str(" chop ")?;
            write_prec(b, P_CHOP, f)?;
        }
        Somewhere(a) => {
            f.write_str("<<")?;
            write_prec(a, 0, f)?;
            f.write_str(">>")?;
        }
    }
    if open {
        f.write_str(")")?;
    }
    Ok(())
}
