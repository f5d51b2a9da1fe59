//! UPPAAL XTA output.

use std::fmt::Write;

use crate::automata::{ClockConstraint, RuleAutomaton};
use crate::rational;
use crate::usltr::Formula;

/// How spatial guards are carried into the timed-automaton model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialMode {
    /// One unconstrained boolean per distinct guard, toggled by an
    /// environment process.
    BoolEnv,
    /// Guards dropped, formula kept in a comment.
    Comment,
}

impl std::str::FromStr for SpatialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bool-env" => Ok(SpatialMode::BoolEnv),
            "comment" => Ok(SpatialMode::Comment),
            _ => Err(format!("unknown spatial mode `{s}` (expected bool-env or comment)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot export to XTA: {0}")]
pub struct XtaExportError(pub String);

pub(crate) const RESERVED: &[&str] = &[
    "and", "assign", "bool", "broadcast", "chan", "clock", "commit", "committed", "const", "default",
    "do", "else", "exists", "false", "for", "forall", "guard", "if", "imply", "init", "int", "meta",
    "not", "or", "priority", "process", "return", "scalar", "select", "state", "struct", "sum",
    "sync", "system", "trans", "true", "typedef", "urgent", "void", "while",
];

const ENV_PROCESS: &str = "Environment";

fn ident(kind: &str, name: &str) -> Result<(), XtaExportError> {
    let ok = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(XtaExportError(format!("{kind} `{name}` is not an XTA identifier")));
    }
    if RESERVED.contains(&name) {
        return Err(XtaExportError(format!("{kind} `{name}` is an XTA keyword")));
    }
    Ok(())
}

fn comment(text: &str) -> String {
    text.replace("*/", "* /").replace('\n', " ")
}

fn constraint(cc: &ClockConstraint) -> Vec<String> {
    cc.0
        .iter()
        .map(|a| format!("{} {} {}", a.clock, a.op, a.bound))
        .collect()
}

/// Process name for a rule: its name with non-identifier characters
/// replaced by `_`.
pub fn process_name(a: &RuleAutomaton) -> String {
    let mut s: String = a
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert(0, 'R');
    }
    s
}

pub fn to_xta(a: &RuleAutomaton, mode: SpatialMode) -> Result<String, XtaExportError> {
    let proc = process_name(a);
    ident("process", &proc)?;
    if proc == ENV_PROCESS {
        return Err(XtaExportError(format!("process name `{proc}` is taken by the environment")));
    }
    for c in &a.clocks {
        ident("clock", c)?;
    }
    for l in &a.locations {
        ident("location", &l.name)?;
    }
    for (n, _) in &a.constants {
        ident("constant", n)?;
    }
    let guards: Vec<&Formula> = a.distinct_guards();
    let var = |f: &Formula| guards.iter().position(|g| *g == f).map(|i| format!("env_{i}"));

    let mut s = String::new();
    let _ = writeln!(s, "// rule {}", comment(&a.name));
    match mode {
        SpatialMode::BoolEnv => {
            s.push_str("// Spatial guards are replaced by unconstrained booleans set by the\n");
            s.push_str("// Environment process, so reachability here over-approximates the rule.\n");
        }
        SpatialMode::Comment => {
            s.push_str("// Spatial guards are dropped and kept as comments, so reachability here\n");
            s.push_str("// over-approximates the rule.\n");
        }
    }
    for n in &a.notes {
        let _ = writeln!(s, "// note: {}", comment(n));
    }
    s.push('\n');
    for (n, v) in &a.constants {
        if v.is_integer() {
            let _ = writeln!(s, "const int {n} = {};", v.numer());
        } else {
            let _ = writeln!(s, "// const {n} = {} is not an integer", rational::Display(v));
        }
    }
    if mode == SpatialMode::BoolEnv {
        for (i, g) in guards.iter().enumerate() {
            let _ = writeln!(s, "bool env_{i} = false; // {}", comment(&g.to_string()));
        }
    }
    let _ = writeln!(s, "\nprocess {proc}() {{");
    if !a.clocks.is_empty() {
        let _ = writeln!(s, "    clock {};", a.clocks.join(", "));
    }
    for l in &a.locations {
        if let Some(f) = &l.spatial_invariant {
            let _ = writeln!(s, "    // spatial invariant of {} not exported: {}", l.name, comment(&f.to_string()));
        }
        if !l.forbid.is_empty() {
            let _ = writeln!(s, "    // {} forbids: {}", l.name, l.forbid.join(", "));
        }
    }
    let states: Vec<String> = a
        .locations
        .iter()
        .map(|l| {
            if l.invariant.is_true() {
                l.name.clone()
            } else {
                format!("{} {{ {} }}", l.name, constraint(&l.invariant).join(" && "))
            }
        })
        .collect();
    let _ = writeln!(s, "    state\n        {};", states.join(",\n        "));
    let init = a
        .initial()
        .ok_or_else(|| XtaExportError("no initial location".into()))?;
    let _ = writeln!(s, "    init {};", init.name);
    if !a.transitions.is_empty() {
        s.push_str("    trans\n");
        let edges: Vec<String> = a
            .transitions
            .iter()
            .map(|t| {
                let mut guard = constraint(&t.clock_guard);
                let mut e = format!("        /* {} */ ", comment(&t.action));
                if t.spatial_guard != Formula::True {
                    match mode {
                        SpatialMode::BoolEnv => guard.insert(0, var(&t.spatial_guard).unwrap()),
                        SpatialMode::Comment => {
                            let _ = write!(e, "/* spatial: {} */ ", comment(&t.spatial_guard.to_string()));
                            if guard.is_empty() {
                                guard.push("true".into());
                            }
                        }
                    }
                }
                let _ = write!(e, "{} -> {} {{ ", t.source, t.target);
                if !guard.is_empty() {
                    let _ = write!(e, "guard {}; ", guard.join(" && "));
                }
                if !t.resets.is_empty() {
                    let r: Vec<String> = t.resets.iter().map(|c| format!("{c} := 0")).collect();
                    let _ = write!(e, "assign {}; ", r.join(", "));
                }
                e.push('}');
                e
            })
            .collect();
        let _ = writeln!(s, "{};", edges.join(",\n"));
    }
    s.push_str("}\n");
    let env = mode == SpatialMode::BoolEnv && !guards.is_empty();
    if env {
        let _ = writeln!(s, "\nprocess {ENV_PROCESS}() {{");
        s.push_str("    state Idle;\n    init Idle;\n    trans\n");
        let edges: Vec<String> = (0..guards.len())
            .flat_map(|i| {
                ["true", "false"]
                    .into_iter()
                    .map(move |b| format!("        Idle -> Idle {{ assign env_{i} := {b}; }}"))
            })
            .collect();
        let _ = writeln!(s, "{};", edges.join(",\n"));
        s.push_str("}\n");
    }
    if env {
        let _ = writeln!(s, "\nsystem {proc}, {ENV_PROCESS};");
    } else {
        let _ = writeln!(s, "\nsystem {proc};");
    }
    Ok(s)
}
