//! Timed automata whose guards and invariants mix clock constraints with
//! spatial formulas, and their symbolic and discrete reachability.

mod discrete;
mod network;
mod reach;
mod zone;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::rational::Rational;
use crate::usltr::{free_variables, Formula};

pub use discrete::{reach_discrete, reach_discrete_network, DiscreteError, GridExplorer, GridState};
pub use network::{Component, Network, NetworkError};
pub use reach::{
    reach, Explorer, ReachError, ReachGraph, ReachResult, ReplayError, SymbolicState, Trace,
    TraceStep,
};
pub use zone::{Zone, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClockOp {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl fmt::Display for ClockOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClockOp::Ge => ">=",
            ClockOp::Le => "<=",
        })
    }
}

/// An integer bound, remembering the constant it was written as.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Bound {
    pub value: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Bound {
    pub fn lit(value: i64) -> Self {
        Bound { value, name: None }
    }

    pub fn named(name: impl Into<String>, value: i64) -> Self {
        Bound {
            value,
            name: Some(name.into()),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => f.write_str(n),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ClockAtom {
    pub clock: String,
    pub op: ClockOp,
    pub bound: Bound,
}

impl ClockAtom {
    pub fn new(clock: impl Into<String>, op: ClockOp, bound: Bound) -> Self {
        ClockAtom {
            clock: clock.into(),
            op,
            bound,
        }
    }
}

/// Conjunction of closed clock bounds. Empty means `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ClockConstraint(pub Vec<ClockAtom>);

impl ClockConstraint {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn upper_bounds(&self) -> impl Iterator<Item = &ClockAtom> {
        self.0.iter().filter(|a| a.op == ClockOp::Le)
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{} {} {}", a.clock, a.op, a.bound)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub initial: bool,
    pub invariant: ClockConstraint,
    pub spatial_invariant: Option<Formula>,
    pub forbid: Vec<String>,
    /// Human-readable meaning, used for plan action names.
    pub role: Option<String>,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Self {
        Location {
            name: name.into(),
            initial: false,
            invariant: ClockConstraint::default(),
            spatial_invariant: None,
            forbid: Vec::new(),
            role: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub action: String,
    pub spatial_guard: Formula,
    pub clock_guard: ClockConstraint,
    pub resets: Vec<String>,
    pub note: Option<String>,
}

impl Transition {
    pub fn new(source: impl Into<String>, target: impl Into<String>, action: impl Into<String>) -> Self {
        Transition {
            source: source.into(),
            target: target.into(),
            action: action.into(),
            spatial_guard: Formula::True,
            clock_guard: ClockConstraint::default(),
            resets: Vec::new(),
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAutomaton {
    pub name: String,
    pub clocks: Vec<String>,
    pub alphabet: Vec<String>,
    pub constants: Vec<(String, Rational)>,
    pub notes: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
}

impl RuleAutomaton {
    pub fn new(name: impl Into<String>) -> Self {
        RuleAutomaton {
            name: name.into(),
            clocks: Vec::new(),
            alphabet: Vec::new(),
            constants: Vec::new(),
            notes: Vec::new(),
            locations: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn location(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    pub fn initial(&self) -> Option<&Location> {
        self.locations.iter().find(|l| l.initial)
    }

    /// Largest constant compared against a clock, 0 if none.
    pub fn max_constant(&self) -> i64 {
        self.locations
            .iter()
            .flat_map(|l| &l.invariant.0)
            .chain(self.transitions.iter().flat_map(|t| &t.clock_guard.0))
            .map(|a| a.bound.value)
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Distinct spatial formulas used as guards other than `true`, in order
    /// of first use.
    pub fn distinct_guards(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = Vec::new();
        for t in &self.transitions {
            if t.spatial_guard != Formula::True && !out.contains(&&t.spatial_guard) {
                out.push(&t.spatial_guard);
            }
        }
        out
    }
}

/// The part of an automaton a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Rule,
    Location(usize),
    Transition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonViolation {
    pub subject: Subject,
    pub message: String,
}

impl fmt::Display for AutomatonViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn validate_automaton(a: &RuleAutomaton) -> Vec<AutomatonViolation> {
    let mut out = Vec::new();
    let mut v = |subject: Subject, message: String| out.push(AutomatonViolation { subject, message });
    if a.name.is_empty() {
        v(Subject::Rule, "rule name is empty".into());
    }
    for (what, names) in [("clock", &a.clocks), ("action", &a.alphabet)] {
        for i in dupes(names.iter()) {
            v(Subject::Rule, format!("duplicate {what} `{}`", names[i]));
        }
    }
    for i in dupes(a.constants.iter().map(|c| &c.0)) {
        v(Subject::Rule, format!("duplicate constant `{}`", a.constants[i].0));
    }
    for i in dupes(a.locations.iter().map(|l| &l.name)) {
        v(Subject::Location(i), format!("duplicate location `{}`", a.locations[i].name));
    }
    let initial: Vec<usize> = (0..a.locations.len()).filter(|&i| a.locations[i].initial).collect();
    match initial.len() {
        1 => {}
        0 => v(Subject::Rule, "no initial location".into()),
        n => v(
            Subject::Location(initial[1]),
            format!("{n} initial locations, expected exactly one"),
        ),
    }
    let clocks: BTreeSet<&str> = a.clocks.iter().map(String::as_str).collect();
    let constraint = |cc: &ClockConstraint, what: &str, out: &mut Vec<String>| {
        for atom in &cc.0 {
            if !clocks.contains(atom.clock.as_str()) {
                out.push(format!("{what}: undeclared clock `{}`", atom.clock));
            }
            if atom.bound.value < 0 {
                out.push(format!("{what}: negative bound {}", atom.bound.value));
            }
        }
    };
    for (i, l) in a.locations.iter().enumerate() {
        let mut msgs = Vec::new();
        constraint(&l.invariant, &format!("location `{}` invariant", l.name), &mut msgs);
        if let Some(f) = &l.spatial_invariant {
            open_formula(f, &format!("location `{}` spatial invariant", l.name), &mut msgs);
        }
        for m in msgs {
            v(Subject::Location(i), m);
        }
    }
    for (i, t) in a.transitions.iter().enumerate() {
        let what = format!("transition {} -> {}", t.source, t.target);
        let mut msgs = Vec::new();
        for end in [&t.source, &t.target] {
            if a.location(end).is_none() {
                msgs.push(format!("{what}: undeclared location `{end}`"));
            }
        }
        if !a.alphabet.contains(&t.action) {
            msgs.push(format!("{what}: action `{}` not in alphabet", t.action));
        }
        constraint(&t.clock_guard, &what, &mut msgs);
        for r in &t.resets {
            if !clocks.contains(r.as_str()) {
                msgs.push(format!("{what}: reset of undeclared clock `{r}`"));
            }
        }
        open_formula(&t.spatial_guard, &format!("{what} guard"), &mut msgs);
        for m in msgs {
            v(Subject::Transition(i), m);
        }
    }
    out
}

/// Indices of repeated names (every occurrence after the first).
fn dupes<'a>(names: impl Iterator<Item = &'a String>) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    names
        .enumerate()
        .filter(|(_, n)| !seen.insert(*n))
        .map(|(i, _)| i)
        .collect()
}

fn open_formula(f: &Formula, what: &str, out: &mut Vec<String>) {
    let free = free_variables(f);
    if !free.is_empty() {
        let names: Vec<_> = free.into_iter().collect();
        out.push(format!("{what}: open formula, unbound {}", names.join(", ")));
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::toy;
    use super::*;
    use crate::usltr::parse_formula;

    #[test]
    fn toy_is_valid() {
        assert!(validate_automaton(&toy()).is_empty());
        assert_eq!(toy().max_constant(), 2);
    }

    #[test]
    fn undeclared_target() {
        let mut a = toy();
        a.transitions[0].target = "L9".into();
        let v = validate_automaton(&a);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("`L9`"));
        assert_eq!(v[0].subject, Subject::Transition(0));
    }

    #[test]
    fn open_guard() {
        let mut a = toy();
        a.transitions[0].spatial_guard = parse_formula("pc(c)").unwrap();
        let v = validate_automaton(&a);
        assert!(v.iter().any(|x| x.message.contains("open formula")), "{v:?}");
    }

    #[test]
    fn structural_violations() {
        let mut a = toy();
        a.locations[1].initial = true;
        a.locations.push(Location::new("A"));
        a.transitions[0].resets.push("y".into());
        a.transitions[0].action = "stop".into();
        a.locations[0].invariant.0[0].bound.value = -1;
        let text: Vec<String> = validate_automaton(&a).into_iter().map(|v| v.message).collect();
        for needle in ["initial locations", "duplicate location", "`y`", "`stop`", "negative bound"] {
            assert!(text.iter().any(|t| t.contains(needle)), "{needle}: {text:?}");
        }
    }

    #[test]
    fn constraint_display() {
        let cc = ClockConstraint(vec![
            ClockAtom::new("x", ClockOp::Ge, Bound::named("t1", 1)),
            ClockAtom::new("x", ClockOp::Le, Bound::lit(3)),
        ]);
        assert_eq!(cc.to_string(), "x >= t1 and x <= 3");
        assert_eq!(ClockConstraint::default().to_string(), "true");
    }
}
