use std::fmt::Write;

use crate::automata::{ClockConstraint, RuleAutomaton};
use crate::rational;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn clocks(cc: &ClockConstraint) -> String {
    cc.to_string()
}

/// Canonical rule file text. Parsing it gives back the same automaton.
pub fn print_rule(a: &RuleAutomaton) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rule {} {{", quote(&a.name));
    if !a.clocks.is_empty() {
        let _ = writeln!(s, "  clocks: {};", a.clocks.join(", "));
    }
    if !a.alphabet.is_empty() {
        let _ = writeln!(s, "  alphabet: {};", a.alphabet.join(", "));
    }
    for (n, v) in &a.constants {
        let _ = writeln!(s, "  const {n} = {};", rational::Display(v));
    }
    for n in &a.notes {
        let _ = writeln!(s, "  note: {};", quote(n));
    }
    for l in &a.locations {
        let _ = writeln!(s, "\n  location {} {{", l.name);
        if l.initial {
            s.push_str("    initial;\n");
        }
        if !l.invariant.is_true() {
            let _ = writeln!(s, "    invariant: {};", clocks(&l.invariant));
        }
        if let Some(f) = &l.spatial_invariant {
            let _ = writeln!(s, "    spatial: {};", quote(&f.to_string()));
        }
        if !l.forbid.is_empty() {
            let _ = writeln!(s, "    forbid: {};", l.forbid.join(", "));
        }
        if let Some(r) = &l.role {
            let _ = writeln!(s, "    role: {};", quote(r));
        }
        s.push_str("  }\n");
    }
    for t in &a.transitions {
        let _ = writeln!(s, "\n  transition {} -> {} {{", t.source, t.target);
        let _ = writeln!(s, "    action: {};", t.action);
        let _ = writeln!(s, "    guard: {};", quote(&t.spatial_guard.to_string()));
        if !t.clock_guard.is_true() {
            let _ = writeln!(s, "    clock: {};", clocks(&t.clock_guard));
        }
        if !t.resets.is_empty() {
            let _ = writeln!(s, "    reset: {};", t.resets.join(", "));
        }
        if let Some(n) = &t.note {
            let _ = writeln!(s, "    note: {};", quote(n));
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::toy;
    use crate::dsl::parse_rule_file;

    #[test]
    fn toy_round_trip() {
        let mut a = toy();
        a.notes.push("say \"hi\"\\ok\nbye".into());
        a.constants.push(("half".into(), crate::rational::ratio(-1, 2)));
        a.locations[1].role = Some("check for safe gap".into());
        a.locations[1].forbid = vec!["go".into()];
        a.transitions[0].note = Some("n".into());
        a.transitions[0].resets = vec!["x".into()];
        let text = print_rule(&a);
        assert_eq!(parse_rule_file(&text).unwrap(), a);
    }
}
