use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use anyhow::{bail, Context, Result};
use serde_json::json;

use dhc_core::automata::{reach as reach_symbolic, reach_discrete, RuleAutomaton};
use dhc_core::compose::{
    check_conflicts, default_universe, permission_conflicts_discrete, timelocks_discrete, ConflictReport,
};
use dhc_core::dsl::parse_rule_file_with;
use dhc_core::export::{to_bdi_sketch, to_dot, to_dot_network, to_xta, SpatialMode};
use dhc_core::rational::{self, parse_rational};
use dhc_core::spatial::{enumerate_universe, load_snapshot, snapshot_to_json, Interval, TrafficSnapshot, UniverseParams};
use dhc_core::usltr::{
    data_lattice, evaluate_explained, evaluate_oracle, oracle_step, parse_closed_formula, ParseOptions,
};

use crate::files::{is_snapshot_name, load_rule, load_snapshot_file, read_rule_text, read_snapshot_text};
use crate::{Format, Global, Mode, Outcome, Toggle};

fn opts(g: &Global) -> ParseOptions {
    ParseOptions {
        somewhere_brackets: g.somewhere_brackets == Toggle::On,
    }
}

fn json_outcome(code: u8, v: serde_json::Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(&v).expect("report serializes");
    text.push('\n');
    Outcome { code, text }
}

fn interval_json(v: &Interval) -> serde_json::Value {
    json!([rational::to_string(&v.lo), rational::to_string(&v.hi)])
}

pub fn eval(g: &Global, formula: &str, snapshot: &str, view: Option<&[String]>) -> Result<Outcome> {
    let f = parse_closed_formula(formula, opts(g)).map_err(|e| anyhow::anyhow!("formula:{e}"))?;
    let s = load_snapshot_file(snapshot)?;
    let v = match view {
        Some([lo, hi]) => {
            let lo = parse_rational(lo)?;
            let hi = parse_rational(hi)?;
            Interval::try_new(lo, hi).context("view lower end exceeds upper end")?
        }
        Some(_) => bail!("--view takes two values"),
        None => s.extent.clone(),
    };
    let (holds, splits) = evaluate_explained(&f, &s, &v, &BTreeMap::new())?;
    let oracle = if g.oracle {
        let step = oracle_step(&f, &data_lattice(&f, &s, &v));
        Some((step, evaluate_oracle(&f, &s, &v, &BTreeMap::new(), &step)?))
    } else {
        None
    };
    let agrees = oracle.as_ref().is_none_or(|(_, o)| *o == holds);
    let code = if agrees { 0 } else { 1 };
    if g.json {
        let mut r = json!({
            "formula": f.to_string(),
            "view": interval_json(&v),
            "holds": holds,
        });
        if g.explain {
            r["splits"] = splits
                .iter()
                .map(|w| {
                    json!({
                        "formula": w.formula,
                        "view": interval_json(&w.view),
                        "points": w.points.iter().map(rational::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect();
        }
        if let Some((step, o)) = &oracle {
            r["oracle"] = json!({"step": rational::to_string(step), "holds": o, "agrees": agrees});
        }
        return Ok(json_outcome(code, r));
    }
    let mut t = format!("{holds}\n");
    if g.explain {
        for w in &splits {
            let pts: Vec<String> = w.points.iter().map(rational::to_string).collect();
            let _ = writeln!(t, "  {} on {}: split at {}", w.formula, w.view, pts.join(", "));
        }
    }
    if let Some((step, o)) = &oracle {
        let verdict = if agrees { "agrees" } else { "DISAGREES" };
        let _ = writeln!(t, "oracle (grid step {}): {o}, {verdict}", rational::to_string(step));
    }
    Ok(Outcome { code, text: t })
}

fn terminals(a: &RuleAutomaton) -> Vec<String> {
    let sinks: Vec<String> = a
        .locations
        .iter()
        .filter(|l| !a.transitions.iter().any(|t| t.source == l.name && t.target != l.name))
        .map(|l| l.name.clone())
        .collect();
    if sinks.is_empty() {
        a.locations.last().map(|l| vec![l.name.clone()]).unwrap_or_default()
    } else {
        sinks
    }
}

pub fn reach(g: &Global, rule: &str, scenario_files: &[String], target: &[String]) -> Result<Outcome> {
    let a = load_rule(rule, opts(g))?;
    let scenarios = scenario_files
        .iter()
        .map(|f| load_snapshot_file(f))
        .collect::<Result<Vec<_>>>()?;
    let targets = if target.is_empty() { terminals(&a) } else { target.to_vec() };
    for t in &targets {
        if a.location(t).is_none() {
            bail!("rule {} has no location `{t}`", a.name);
        }
    }
    let r = reach_symbolic(&a, &scenarios)?;
    let found = r.locations();
    let oracle = if g.oracle {
        Some(reach_discrete(&a, &scenarios, i64::MAX)?)
    } else {
        None
    };
    let agrees = oracle.as_ref().is_none_or(|o| *o == found);
    let code = if agrees { 0 } else { 1 };
    let net = &r.network;
    if g.json {
        let mut rep = json!({
            "rule": a.name,
            "scenarios": scenarios.len(),
            "reachable": found,
            "targets": targets.iter().map(|t| json!({
                "location": t,
                "reachable": r.is_reachable(t),
                "witness": r.witnesses.get(t).map(|w| w.to_json(net)),
            })).collect::<Vec<_>>(),
        });
        if g.explain {
            let zones: BTreeMap<&String, Vec<String>> = r
                .reachable
                .iter()
                .map(|(l, zs)| (l, zs.iter().map(|z| z.describe(&net.clocks)).collect()))
                .collect();
            rep["zones"] = json!(zones);
        }
        if let Some(o) = &oracle {
            rep["oracle"] = json!({"reachable": o, "agrees": agrees});
        }
        return Ok(json_outcome(code, rep));
    }
    let mut t = String::new();
    let _ = writeln!(t, "rule {} under {} scenario(s)", a.name, scenarios.len());
    let _ = writeln!(t, "reachable: {}", found.iter().cloned().collect::<Vec<_>>().join(", "));
    if g.explain {
        for (l, zs) in &r.reachable {
            for z in zs {
                let _ = writeln!(t, "  {l}: {}", z.describe(&net.clocks));
            }
        }
    }
    for target in &targets {
        match r.witnesses.get(target) {
            Some(w) => {
                let _ = writeln!(t, "{target} reachable");
                for step in w.render(net) {
                    let _ = writeln!(t, "  {step}");
                }
            }
            None => {
                let _ = writeln!(t, "{target} unreachable");
            }
        }
    }
    if let Some(o) = &oracle {
        if agrees {
            t.push_str("oracle: unit-delay search agrees\n");
        } else {
            let _ = writeln!(
                t,
                "oracle: unit-delay search DISAGREES, it reaches {}",
                o.iter().cloned().collect::<Vec<_>>().join(", ")
            );
        }
    }
    Ok(Outcome { code, text: t })
}

fn universe(spec: &str, rules: &[RuleAutomaton]) -> Result<Vec<TrafficSnapshot>> {
    let params = if spec == "default" {
        default_universe(rules)
    } else {
        let text = std::fs::read_to_string(spec).with_context(|| format!("cannot read {spec}"))?;
        let p: UniverseParams = serde_json::from_str(&text).with_context(|| spec.to_string())?;
        let problems = p.validate();
        if !problems.is_empty() {
            bail!("{spec}: {}", problems.join("; "));
        }
        p
    };
    Ok(enumerate_universe(&params).collect())
}

pub fn conflicts(g: &Global, files: &[String], universe_spec: Option<&str>) -> Result<Outcome> {
    let (snaps, rule_files): (Vec<&String>, Vec<&String>) = files.iter().partition(|f| is_snapshot_name(f));
    if rule_files.len() < 2 {
        bail!("need at least 2 rules, got {}", rule_files.len());
    }
    let rules = rule_files
        .iter()
        .map(|f| load_rule(f, opts(g)))
        .collect::<Result<Vec<_>>>()?;
    let mut scenarios = Vec::new();
    if universe_spec.is_some() || snaps.is_empty() {
        scenarios = universe(universe_spec.unwrap_or("default"), &rules)?;
    }
    for s in snaps {
        scenarios.push(load_snapshot_file(s)?);
    }
    let sum = check_conflicts(&rules, &scenarios)?;
    let net = &sum.network;
    let oracle = if g.oracle {
        let perm = permission_conflicts_discrete(net, &scenarios)?;
        let tl = timelocks_discrete(net, &scenarios)?;
        let sym_perm: BTreeSet<_> = sum
            .permission_conflicts
            .iter()
            .map(|r| (r.state.locs.clone(), r.action.clone().unwrap(), r.enabling.unwrap(), r.forbidding.unwrap()))
            .collect();
        let sym_tl: BTreeSet<_> = sum.timelocks.iter().map(|r| r.state.locs.clone()).collect();
        Some((perm.len(), tl.len(), perm == sym_perm && tl == sym_tl))
    } else {
        None
    };
    let agrees = oracle.is_none_or(|(_, _, a)| a);
    let code = if !agrees || sum.any() { 1 } else { 0 };
    if g.json {
        let mut rep = sum.to_json(&scenarios);
        if let Some((p, t, a)) = oracle {
            rep["oracle"] = json!({"permission_conflicts": p, "timelocks": t, "agrees": a});
        }
        return Ok(json_outcome(code, rep));
    }
    let mut t = String::new();
    let names: Vec<&str> = net.components.iter().map(|c| c.name()).collect();
    let _ = writeln!(t, "rules {} under {} scenario(s)", names.join(", "), scenarios.len());
    let report = |t: &mut String, r: &ConflictReport| {
        let _ = writeln!(t, "{}", r.summary(net));
        for step in r.trace.render(net) {
            let _ = writeln!(t, "  {step}");
        }
        if g.explain {
            let _ = writeln!(t, "  zone: {}", r.state.zone.describe(&net.clocks));
            if let Some(s) = r.snapshot {
                let _ = writeln!(t, "  scenario {s}: {}", snapshot_to_json(&scenarios[s]));
            }
        }
    };
    for r in sum.permission_conflicts.iter().chain(&sum.timelocks) {
        report(&mut t, r);
    }
    for c in &sum.contradictions {
        let _ = writeln!(
            t,
            "contradictory guards: {}.{} and {}.{}: {}",
            c.rule_a, c.location_a, c.rule_b, c.location_b, c.explanation
        );
    }
    let _ = writeln!(
        t,
        "{} permission conflict(s), {} timelock(s), {} contradiction(s)",
        sum.permission_conflicts.len(),
        sum.timelocks.len(),
        sum.contradictions.len()
    );
    if let Some((p, tl, a)) = oracle {
        let verdict = if a { "agrees" } else { "DISAGREES" };
        let _ = writeln!(t, "oracle: {p} permission conflict(s), {tl} timelock(s), {verdict}");
    }
    Ok(Outcome { code, text: t })
}

pub fn export(g: &Global, rule_files: &[String], format: Format, mode: Mode) -> Result<Outcome> {
    let rules = rule_files
        .iter()
        .map(|f| load_rule(f, opts(g)))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let (name, text) = match (format, rules.as_slice()) {
        (Format::Dot, [a]) => ("dot", to_dot(a)),
        (Format::Dot, many) => ("dot", to_dot_network(&dhc_core::compose::compose(many)?)),
        (Format::Xta, [a]) => {
            let m = match mode {
                Mode::BoolEnv => SpatialMode::BoolEnv,
                Mode::Comment => SpatialMode::Comment,
            };
            ("xta", to_xta(a, m)?)
        }
        (Format::Bdi, [a]) => {
            let s = to_bdi_sketch(a);
            warnings = s.warnings.clone();
            ("bdi", s.to_string())
        }
        _ => bail!("only DOT export accepts several rules"),
    };
    if g.json {
        return Ok(json_outcome(
            0,
            json!({
                "rules": rules.iter().map(|r| &r.name).collect::<Vec<_>>(),
                "format": name,
                "output": text,
                "warnings": warnings,
            }),
        ));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(Outcome { code: 0, text })
}

pub fn validate(g: &Global, files: &[String]) -> Result<Outcome> {
    let mut results = Vec::new();
    for f in files {
        let (kind, shown, errors): (&str, String, Vec<String>) = if is_snapshot_name(f) {
            let (shown, text) = read_snapshot_text(f)?;
            let errors = match load_snapshot(&text) {
                Ok(_) => vec![],
                Err(e) => vec![e.to_string()],
            };
            ("snapshot", shown, errors)
        } else {
            let (shown, text) = read_rule_text(f)?;
            let errors = match parse_rule_file_with(&text, opts(g)) {
                Ok(_) => vec![],
                Err(e) => e.diagnostics.iter().map(|d| d.to_string()).collect(),
            };
            ("rule", shown, errors)
        };
        results.push((f, kind, shown, errors));
    }
    let code = if results.iter().any(|r| !r.3.is_empty()) { 1 } else { 0 };
    if g.json {
        let v: Vec<_> = results
            .iter()
            .map(|(f, kind, _, errors)| json!({"file": f, "kind": kind, "valid": errors.is_empty(), "errors": errors}))
            .collect();
        return Ok(json_outcome(code, json!(v)));
    }
    let mut t = String::new();
    for (_, kind, shown, errors) in &results {
        if errors.is_empty() {
            let _ = writeln!(t, "{shown}: ok ({kind})");
        }
        for e in errors {
            let _ = writeln!(t, "{shown}:{e}");
        }
    }
    Ok(Outcome { code, text: t })
}
