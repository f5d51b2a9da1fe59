//! BDI plan sketches.

use std::fmt;

use crate::automata::RuleAutomaton;
use crate::usltr::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanLine {
    pub trigger: String,
    pub guards: Vec<String>,
    pub actions: Vec<String>,
}

impl fmt::Display for PlanLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let guards = if self.guards.is_empty() {
            "true".to_string()
        } else {
            self.guards.join(", ")
        };
        write!(f, "{} : {} <- {};", self.trigger, guards, self.actions.join(", "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanSketch {
    pub plans: Vec<PlanLine>,
    pub warnings: Vec<String>,
}

impl fmt::Display for PlanSketch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.plans {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(f),
    }
}

/// `(re(c) and not cs) chop (free and not cs) chop (sg(c) and cs)`
fn is_safe_gap(f: &Formula) -> bool {
    use Formula::*;
    let not_cs = |g: &Formula| matches!(g, Not(x) if **x == Cs);
    match f {
        Somewhere(g) => is_safe_gap(g),
        Chop(a, rest) => match (&**a, &**rest) {
            (And(r, n1), Chop(b, c)) => {
                matches!(**r, Re(_))
                    && not_cs(n1)
                    && matches!((&**b, &**c), (And(fr, n2), And(sg, cs))
                        if **fr == Free && not_cs(n2) && matches!(**sg, Sg(_)) && **cs == Cs)
            }
            _ => false,
        },
        _ => false,
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// Event literal for a conjunct, or `None` when it is not a possibly
/// negated atom.
fn literal(f: &Formula) -> Option<String> {
    use Formula::*;
    if is_safe_gap(f) {
        return Some("safe-gap-on-junction".into());
    }
    Some(match f {
        Not(g) => format!("~{}", literal(g)?),
        Exists(_, g) => literal(g)?,
        Pc(_) => "potential-collision".into(),
        Pa(_) => "pedestrian-ahead".into(),
        Ob(k) => format!("observed-{k}"),
        Sg(_) => "safe-gap".into(),
        Re(_) => "reserved".into(),
        Free => "free-space".into(),
        Cs => "on-crossing".into(),
        True => "true".into(),
        False => "false".into(),
        _ => return None,
    })
}

fn camel(s: &str) -> String {
    let mut out = String::new();
    for (i, w) in s.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).enumerate() {
        let mut cs = w.chars();
        let head = cs.next().unwrap();
        if i == 0 {
            out.push(head.to_ascii_lowercase());
        } else {
            out.push(head.to_ascii_uppercase());
        }
        out.extend(cs);
    }
    out
}

pub fn to_bdi_sketch(a: &RuleAutomaton) -> PlanSketch {
    let mut sketch = PlanSketch::default();
    for t in &a.transitions {
        let action = a
            .location(&t.target)
            .and_then(|l| l.role.as_deref())
            .map(camel)
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| camel(&t.action));
        let (trigger, guards) = if t.spatial_guard == Formula::True {
            ("start".to_string(), vec![])
        } else {
            let mut cs = Vec::new();
            conjuncts(&t.spatial_guard, &mut cs);
            let lits: Option<Vec<String>> = cs.iter().map(|c| literal(c)).collect();
            match lits {
                Some(mut l) => {
                    let trigger = l.remove(0);
                    (trigger, l)
                }
                None => {
                    sketch.warnings.push(format!(
                        "{} -> {} ({}): guard is not a conjunction of literals, emitted as one composite trigger",
                        t.source, t.target, t.action
                    ));
                    (slug(&t.spatial_guard.to_string()), vec![])
                }
            }
        };
        sketch.plans.push(PlanLine { trigger, guards, actions: vec![action] });
    }
    sketch
}
