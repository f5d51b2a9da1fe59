//! Parallel composition of rule automata and conflict detection.
//!
//! Components interleave and share only the environment snapshot. Two kinds
//! of conflict are searched for dynamically (timelocks and permission
//! conflicts), plus a static scan for spatial invariants that no snapshot
//! can satisfy together.

mod oracle;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::automata::{
    ClockOp, Explorer, Network, NetworkError, ReachError, ReachGraph, RuleAutomaton,
    SymbolicState, Trace,
};
use crate::rational::{self, Rational};
use crate::spatial::{enumerate_universe, snapshot_to_json, TrafficSnapshot, UniverseParams};
use crate::usltr::{evaluate, EvalError, Formula, Valuation};

pub use oracle::{permission_conflicts_discrete, timelocks_discrete, PermissionKey};

/// Composes at least two rules; clocks are renamed `rule.clock`.
pub fn compose(rules: &[RuleAutomaton]) -> Result<Network, NetworkError> {
    Network::compose(rules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictKind {
    Timelock,
    PermissionConflict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    pub kind: ConflictKind,
    pub state: SymbolicState,
    pub trace: Trace,
    /// Scenario current at the conflict, if one is singled out.
    pub snapshot: Option<usize>,
    pub action: Option<String>,
    pub enabling: Option<usize>,
    pub forbidding: Option<usize>,
    /// Clock values at a timelock.
    pub valuation: Option<Vec<Rational>>,
}

impl ConflictReport {
    pub fn to_json(&self, net: &Network, scenarios: &[TrafficSnapshot]) -> serde_json::Value {
        let locations: serde_json::Map<String, serde_json::Value> = net
            .components
            .iter()
            .zip(&self.state.locs)
            .map(|(c, &l)| (c.name().to_string(), c.location_name(l).into()))
            .collect();
        let mut v = serde_json::json!({
            "kind": self.kind,
            "locations": locations,
            "zone": self.state.zone.describe(&net.clocks),
            "trace": self.trace.to_json(net),
        });
        let o = v.as_object_mut().unwrap();
        if let Some(a) = &self.action {
            o.insert("action".into(), a.clone().into());
        }
        if let Some(c) = self.enabling {
            o.insert("enabling_rule".into(), net.components[c].name().into());
        }
        if let Some(c) = self.forbidding {
            o.insert("forbidding_rule".into(), net.components[c].name().into());
        }
        if let Some(s) = self.snapshot {
            o.insert("snapshot_index".into(), s.into());
            o.insert("snapshot".into(), snapshot_to_json(&scenarios[s]));
        }
        if let Some(val) = &self.valuation {
            let m: serde_json::Map<_, _> = net
                .clocks
                .iter()
                .zip(val)
                .map(|(c, r)| (c.clone(), rational::to_string(r).into()))
                .collect();
            o.insert("valuation".into(), m.into());
        }
        v
    }

    pub fn summary(&self, net: &Network) -> String {
        let at = net.label(&self.state.locs);
        match self.kind {
            ConflictKind::Timelock => {
                let val = self
                    .valuation
                    .as_ref()
                    .map(|v| {
                        net.clocks
                            .iter()
                            .zip(v)
                            .map(|(c, r)| format!("{c}={}", rational::Display(r)))
                            .collect::<Vec<_>>()
                            .join(", ")
                    })
                    .unwrap_or_default();
                format!("timelock at ({at}) with {val}")
            }
            ConflictKind::PermissionConflict => format!(
                "permission conflict at ({at}) on `{}`: {} enables it, {} forbids it",
                self.action.as_deref().unwrap_or(""),
                net.components[self.enabling.unwrap()].name(),
                net.components[self.forbidding.unwrap()].name(),
            ),
        }
    }
}

/// Reachability of a composed system, shared by the conflict searches.
pub struct Analysis<'a> {
    pub explorer: Explorer<'a>,
    pub graph: ReachGraph,
}

impl<'a> Analysis<'a> {
    pub fn new(net: &'a Network, scenarios: &'a [TrafficSnapshot]) -> Result<Self, ReachError> {
        let explorer = Explorer::new(net, scenarios)?;
        let graph = explorer.explore();
        Ok(Analysis { explorer, graph })
    }

    fn net(&self) -> &Network {
        self.explorer.net
    }

    /// Whether some transition can fire at an exact valuation (in units of
    /// `1/scale`) under some admissible scenario.
    fn anything_enabled(&self, locs: &[usize], vals: &[i64], scale: i64) -> bool {
        let net = self.net();
        let sat = |atoms: &[(usize, ClockOp, i64)], v: &[i64]| {
            atoms.iter().all(|&(x, op, c)| match op {
                ClockOp::Le => v[x - 1] <= c * scale,
                ClockOp::Ge => v[x - 1] >= c * scale,
            })
        };
        for (ci, comp) in net.components.iter().enumerate() {
            for &t in &comp.outgoing[locs[ci]] {
                let tr = &comp.transitions[t];
                if !sat(&tr.clock, vals) {
                    continue;
                }
                let mut after = vals.to_vec();
                for &r in &tr.resets {
                    after[r - 1] = 0;
                }
                let mut next = locs.to_vec();
                next[ci] = tr.target;
                if !net.invariant_atoms(&next).all(|a| sat(std::slice::from_ref(a), &after)) {
                    continue;
                }
                if (0..self.explorer.scenarios.len()).any(|s| self.explorer.allowed(locs, ci, t, s)) {
                    return true;
                }
            }
        }
        false
    }

    /// Reachable states where time cannot pass and nothing can fire. One
    /// report per location tuple.
    ///
    /// Valuations are sampled on a grid of `1/(clocks+1)`, which meets every
    /// clock region, so the answer is exact for closed integer constraints.
    pub fn timelocks(&self) -> Vec<ConflictReport> {
        let net = self.net();
        let n = net.clocks.len();
        let scale = n as i64 + 1;
        let cap = (net.max_constant + 1) * scale;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (id, node) in self.graph.nodes.iter().enumerate() {
            let st = &node.state;
            if seen.contains(&st.locs) {
                continue;
            }
            let ceilings: Vec<(usize, i64)> = net
                .invariant_atoms(&st.locs)
                .filter(|a| a.1 == ClockOp::Le)
                .map(|&(x, _, c)| (x, c * scale))
                .collect();
            if ceilings.is_empty() {
                continue;
            }
            let found = grid_points(n, cap).find(|v| {
                ceilings.iter().any(|&(x, c)| v[x - 1] == c)
                    && st.zone.contains_scaled(v, scale)
                    && !self.anything_enabled(&st.locs, v, scale)
            });
            if let Some(v) = found {
                seen.insert(st.locs.clone());
                out.push(ConflictReport {
                    kind: ConflictKind::Timelock,
                    state: st.clone(),
                    trace: self.graph.trace_to(id),
                    snapshot: None,
                    action: None,
                    enabling: None,
                    forbidding: None,
                    valuation: Some(v.iter().map(|&x| rational::ratio(x, scale)).collect()),
                });
            }
        }
        out
    }

    /// Reachable states where one component can fire an action that another
    /// component's current location forbids. Deduplicated by location tuple,
    /// action and the two components; the first scenario found is the
    /// witness.
    pub fn permission_conflicts(&self) -> Vec<ConflictReport> {
        let net = self.net();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (id, node) in self.graph.nodes.iter().enumerate() {
            let st = &node.state;
            for (ci, comp) in net.components.iter().enumerate() {
                for &t in &comp.outgoing[st.locs[ci]] {
                    let action = &comp.automaton.transitions[t].action;
                    let forbidders: Vec<usize> = (0..net.components.len())
                        .filter(|&j| j != ci && net.components[j].forbids(st.locs[j], action))
                        .filter(|&j| !seen.contains(&(st.locs.clone(), action.clone(), ci, j)))
                        .collect();
                    if forbidders.is_empty() || self.explorer.fire(st, ci, t).is_none() {
                        continue;
                    }
                    let Some(snap) = (0..self.explorer.scenarios.len())
                        .find(|&s| self.explorer.allowed(&st.locs, ci, t, s))
                    else {
                        continue;
                    };
                    for j in forbidders {
                        seen.insert((st.locs.clone(), action.clone(), ci, j));
                        out.push(ConflictReport {
                            kind: ConflictKind::PermissionConflict,
                            state: st.clone(),
                            trace: self.graph.trace_to(id),
                            snapshot: Some(snap),
                            action: Some(action.clone()),
                            enabling: Some(ci),
                            forbidding: Some(j),
                            valuation: None,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Every valuation in `[0, cap]^n`, lexicographically.
fn grid_points(n: usize, cap: i64) -> impl Iterator<Item = Vec<i64>> {
    let mut cur = Some(vec![0i64; n]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = n;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if next[i] < cap {
                next[i] += 1;
                cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

pub fn find_timelocks(net: &Network, scenarios: &[TrafficSnapshot]) -> Result<Vec<ConflictReport>, ReachError> {
    Ok(Analysis::new(net, scenarios)?.timelocks())
}

pub fn find_permission_conflicts(
    net: &Network,
    scenarios: &[TrafficSnapshot],
) -> Result<Vec<ConflictReport>, ReachError> {
    Ok(Analysis::new(net, scenarios)?.permission_conflicts())
}

/// Two jointly reachable locations whose spatial invariants cannot hold on
/// the same snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contradiction {
    pub rule_a: String,
    pub location_a: String,
    pub rule_b: String,
    pub location_b: String,
    pub explanation: String,
}

/// Joint reachability is computed with spatial invariants ignored, since
/// keeping them would hide exactly the states being looked for.
pub fn guard_contradiction_scan_in(
    rules: &[RuleAutomaton],
    scenarios: &[TrafficSnapshot],
) -> Result<Vec<Contradiction>, ReachError> {
    let relaxed: Vec<RuleAutomaton> = rules
        .iter()
        .map(|r| {
            let mut r = r.clone();
            for l in &mut r.locations {
                l.spatial_invariant = None;
            }
            r
        })
        .collect();
    let net = Network::compose(&relaxed)?;
    let graph = Explorer::new(&net, scenarios)?.explore();
    let env = Valuation::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for locs in graph.reachable() {
        for i in 0..rules.len() {
            for j in i + 1..rules.len() {
                let (la, lb) = (&rules[i].locations[locs[i]], &rules[j].locations[locs[j]]);
                let (Some(fa), Some(fb)) = (&la.spatial_invariant, &lb.spatial_invariant) else {
                    continue;
                };
                if !seen.insert((i, locs[i], j, locs[j])) {
                    continue;
                }
                let both = Formula::and(fa.clone(), fb.clone());
                let mut sat = false;
                for (k, s) in scenarios.iter().enumerate() {
                    if evaluate(&both, s, &s.extent, &env).map_err(|source| ReachError::Eval {
                        snapshot: k,
                        source,
                    })? {
                        sat = true;
                        break;
                    }
                }
                if !sat {
                    out.push(Contradiction {
                        rule_a: rules[i].name.clone(),
                        location_a: la.name.clone(),
                        rule_b: rules[j].name.clone(),
                        location_b: lb.name.clone(),
                        explanation: format!(
                            "`{fa}` and `{fb}` hold together on none of the {} snapshots",
                            scenarios.len()
                        ),
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn guard_contradiction_scan(
    rules: &[RuleAutomaton],
    universe: &UniverseParams,
) -> Result<Vec<Contradiction>, ReachError> {
    let scenarios: Vec<TrafficSnapshot> = enumerate_universe(universe).collect();
    guard_contradiction_scan_in(rules, &scenarios)
}

/// Universe for conflict checks: the default road with one sign per kind
/// observed by any of the rules.
pub fn default_universe(rules: &[RuleAutomaton]) -> UniverseParams {
    let mut kinds = BTreeSet::new();
    for r in rules {
        for t in &r.transitions {
            t.spatial_guard.sign_kinds(&mut kinds);
        }
        for l in &r.locations {
            if let Some(f) = &l.spatial_invariant {
                f.sign_kinds(&mut kinds);
            }
        }
    }
    let kinds: Vec<String> = kinds.into_iter().collect();
    UniverseParams::default_road(&kinds)
}

/// Everything the conflict checker finds for a set of rules.
pub struct ConflictSummary {
    pub network: Network,
    pub timelocks: Vec<ConflictReport>,
    pub permission_conflicts: Vec<ConflictReport>,
    pub contradictions: Vec<Contradiction>,
}

impl ConflictSummary {
    pub fn any(&self) -> bool {
        !(self.timelocks.is_empty() && self.permission_conflicts.is_empty() && self.contradictions.is_empty())
    }

    pub fn to_json(&self, scenarios: &[TrafficSnapshot]) -> serde_json::Value {
        let reports = |v: &[ConflictReport]| -> Vec<serde_json::Value> {
            v.iter().map(|r| r.to_json(&self.network, scenarios)).collect()
        };
        serde_json::json!({
            "rules": self.network.components.iter().map(|c| c.name()).collect::<Vec<_>>(),
            "scenarios": scenarios.len(),
            "conflict": self.any(),
            "timelocks": reports(&self.timelocks),
            "permission_conflicts": reports(&self.permission_conflicts),
            "contradictions": self.contradictions,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn check_conflicts(
    rules: &[RuleAutomaton],
    scenarios: &[TrafficSnapshot],
) -> Result<ConflictSummary, CheckError> {
    let network = compose(rules)?;
    let (timelocks, permission_conflicts) = {
        let a = Analysis::new(&network, scenarios)?;
        (a.timelocks(), a.permission_conflicts())
    };
    let contradictions = guard_contradiction_scan_in(rules, scenarios)?;
    Ok(ConflictSummary {
        network,
        timelocks,
        permission_conflicts,
        contradictions,
    })
}

#[cfg(test)]
mod tests;
