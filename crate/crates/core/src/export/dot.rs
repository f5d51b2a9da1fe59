//! Graphviz output.

use std::fmt::Write;

use crate::automata::{Network, RuleAutomaton, Transition};
use crate::usltr::Formula;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn edge_label(t: &Transition, prefix: Option<&str>) -> String {
    let mut lines = vec![match prefix {
        Some(p) => format!("{p}.{}", t.action),
        None => t.action.clone(),
    }];
    if t.spatial_guard != Formula::True {
        lines.push(t.spatial_guard.to_string());
    }
    if !t.clock_guard.is_true() {
        lines.push(t.clock_guard.to_string());
    }
    if !t.resets.is_empty() {
        let r: Vec<String> = t.resets.iter().map(|c| format!("{c} := 0")).collect();
        lines.push(r.join(", "));
    }
    lines.join("\n")
}

fn header(s: &mut String, name: &str) {
    let _ = writeln!(s, "digraph {} {{", quote(name));
    s.push_str("  rankdir=LR;\n  node [shape=ellipse];\n");
}

/// One node per location, one edge per transition.
pub fn to_dot(a: &RuleAutomaton) -> String {
    let mut s = String::new();
    header(&mut s, &a.name);
    for l in &a.locations {
        let mut label = vec![l.name.clone()];
        if let Some(r) = &l.role {
            label.push(r.clone());
        }
        if !l.invariant.is_true() {
            label.push(l.invariant.to_string());
        }
        if let Some(f) = &l.spatial_invariant {
            label.push(f.to_string());
        }
        if !l.forbid.is_empty() {
            label.push(format!("forbid: {}", l.forbid.join(", ")));
        }
        let mut attrs = vec![format!("label={}", quote(&label.join("\n")))];
        if l.initial {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(s, "  {} [{}];", quote(&l.name), attrs.join(", "));
    }
    for t in &a.transitions {
        let _ = writeln!(
            s,
            "  {} -> {} [label={}];",
            quote(&t.source),
            quote(&t.target),
            quote(&edge_label(t, None))
        );
    }
    s.push_str("}\n");
    s
}

/// Full product of a composed network: a node per location tuple, named
/// `L0|L0`, and an edge per component transition out of each tuple.
pub fn to_dot_network(net: &Network) -> String {
    let mut s = String::new();
    header(&mut s, &net.components.iter().map(|c| c.name()).collect::<Vec<_>>().join("|"));
    let sizes: Vec<usize> = net.components.iter().map(|c| c.automaton.locations.len()).collect();
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for &n in &sizes {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    let init = net.initial();
    for t in &tuples {
        let peri = if *t == init { ", peripheries=2" } else { "" };
        let _ = writeln!(s, "  {} [label={}{peri}];", quote(&net.label(t)), quote(&net.label(t)));
    }
    for t in &tuples {
        for (ci, c) in net.components.iter().enumerate() {
            for tr in &c.automaton.transitions {
                if tr.source != c.location_name(t[ci]) {
                    continue;
                }
                let Some(target) = c.location_index(&tr.target) else { continue };
                let mut u = t.clone();
                u[ci] = target;
                let _ = writeln!(
                    s,
                    "  {} -> {} [label={}];",
                    quote(&net.label(t)),
                    quote(&net.label(&u)),
                    quote(&edge_label(tr, Some(c.name())))
                );
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Structural check of the DOT this module writes. Returns the node and
/// edge statement counts.
pub fn dot_counts(text: &str) -> Result<(usize, usize), String> {
    fn quoted(s: &str) -> Result<(String, &str), String> {
        let s = s.trim_start();
        let rest = s.strip_prefix('"').ok_or_else(|| format!("expected a quoted id at `{s}`"))?;
        let mut out = String::new();
        let mut it = rest.char_indices();
        while let Some((i, c)) = it.next() {
            match c {
                '\\' => {
                    it.next().ok_or("dangling escape")?;
                }
                '"' => return Ok((out, &rest[i + 1..])),
                _ => out.push(c),
            }
        }
        Err("unterminated string".into())
    }
    fn attrs(s: &str) -> Result<(), String> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix("];"))
            .ok_or_else(|| format!("malformed attribute list `{s}`"))?;
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let eq = rest.find('=').ok_or_else(|| format!("expected `=` in `{rest}`"))?;
            let key = rest[..eq].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(format!("bad attribute name `{key}`"));
            }
            rest = rest[eq + 1..].trim_start();
            if rest.starts_with('"') {
                rest = quoted(rest)?.1;
            } else {
                let end = rest.find(',').unwrap_or(rest.len());
                rest = &rest[end..];
            }
            rest = rest.trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        Ok(())
    }
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty input")?;
    let (_, rest) = quoted(head.strip_prefix("digraph ").ok_or("expected `digraph`")?)?;
    if rest.trim() != "{" {
        return Err("expected `{` after the graph name".into());
    }
    let mut closed = false;
    let (mut nodes, mut edges) = (0, 0);
    for line in lines {
        let l = line.trim();
        if closed {
            if l.is_empty() {
                continue;
            }
            return Err(format!("text after closing brace: `{l}`"));
        }
        if l == "}" {
            closed = true;
        } else if l.is_empty() || l == "rankdir=LR;" || l.starts_with("node [") {
            continue;
        } else {
            let (_, rest) = quoted(l)?;
            match rest.trim_start().strip_prefix("->") {
                Some(r) => {
                    let (_, r) = quoted(r)?;
                    attrs(r)?;
                    edges += 1;
                }
                None => {
                    attrs(rest)?;
                    nodes += 1;
                }
            }
        }
    }
    if !closed {
        return Err("missing closing brace".into());
    }
    Ok((nodes, edges))
}
