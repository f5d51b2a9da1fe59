//! Symbolic forward reachability over zones.
//!
//! The environment may switch to any scenario snapshot at any time. A
//! snapshot is admissible for a location tuple when it satisfies every
//! spatial invariant of the tuple; an action fired under a snapshot needs it
//! admissible both before and after.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use super::network::Network;
use super::zone::Zone;
use super::{NetworkError, RuleAutomaton};
use crate::spatial::TrafficSnapshot;
use crate::usltr::{EvalError, Evaluator, Formula};

#[derive(Debug, thiserror::Error)]
pub enum ReachError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("evaluating on scenario {snapshot}: {source}")]
    Eval {
        snapshot: usize,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    pub locs: Vec<usize>,
    pub zone: Zone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    Delay {
        snapshot: usize,
    },
    Action {
        component: usize,
        transition: usize,
        snapshot: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Trace(pub Vec<TraceStep>);

impl Trace {
    pub fn actions(&self) -> usize {
        self.0
            .iter()
            .filter(|s| matches!(s, TraceStep::Action { .. }))
            .count()
    }

    /// One line per step.
    pub fn render(&self, net: &Network) -> Vec<String> {
        self.0
            .iter()
            .map(|s| match *s {
                TraceStep::Delay { snapshot } => format!("delay (scenario {snapshot})"),
                TraceStep::Action {
                    component,
                    transition,
                    snapshot,
                } => {
                    let c = &net.components[component];
                    let t = &c.automaton.transitions[transition];
                    format!(
                        "{}: {} --{}--> {} (scenario {snapshot})",
                        c.name(),
                        t.source,
                        t.action,
                        t.target
                    )
                }
            })
            .collect()
    }

    /// Steps with names resolved, for reports.
    pub fn to_json(&self, net: &Network) -> serde_json::Value {
        let steps: Vec<_> = self
            .0
            .iter()
            .map(|s| match *s {
                TraceStep::Delay { snapshot } => {
                    serde_json::json!({"step": "delay", "snapshot": snapshot})
                }
                TraceStep::Action {
                    component,
                    transition,
                    snapshot,
                } => {
                    let c = &net.components[component];
                    let t = &c.automaton.transitions[transition];
                    serde_json::json!({
                        "step": "action",
                        "rule": c.name(),
                        "from": t.source,
                        "to": t.target,
                        "action": t.action,
                        "transition": transition,
                        "snapshot": snapshot,
                    })
                }
            })
            .collect();
        serde_json::Value::Array(steps)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {0}: no such component or transition")]
    Unknown(usize),
    #[error("step {0}: scenario index out of range")]
    Scenario(usize),
    #[error("step {0}: transition does not start at the current location")]
    WrongSource(usize),
    #[error("step {0}: scenario is not admissible or the guard is false")]
    Spatial(usize),
    #[error("step {0}: clock constraints cannot be met")]
    Clock(usize),
    #[error("initial zone is empty")]
    EmptyInitial,
}

/// Spatial truth of every guard and invariant under every scenario.
#[derive(Debug, Clone)]
pub(crate) struct Tables {
    guard: Vec<Vec<Vec<bool>>>,
    inv: Vec<Vec<Vec<bool>>>,
}

impl Tables {
    pub(crate) fn build(net: &Network, scenarios: &[TrafficSnapshot]) -> Result<Self, ReachError> {
        type Row = (Vec<Vec<bool>>, Vec<Vec<bool>>);
        let rows: Vec<Row> = scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let mut ev = Evaluator::new(s);
                let mut cache: HashMap<&Formula, bool> = HashMap::new();
                let mut guards = Vec::new();
                let mut invs = Vec::new();
                for c in &net.components {
                    let mut row = Vec::new();
                    for t in &c.transitions {
                        row.push(cached(&mut ev, &mut cache, &t.guard, i)?);
                    }
                    guards.push(row);
                    let mut row = Vec::new();
                    for l in &c.locations {
                        row.push(match &l.spatial {
                            Some(f) => cached(&mut ev, &mut cache, f, i)?,
                            None => true,
                        });
                    }
                    invs.push(row);
                }
                Ok((guards, invs))
            })
            .collect::<Result<_, ReachError>>()?;
        let mut guard: Vec<Vec<Vec<bool>>> = net
            .components
            .iter()
            .map(|c| vec![Vec::with_capacity(rows.len()); c.transitions.len()])
            .collect();
        let mut inv: Vec<Vec<Vec<bool>>> = net
            .components
            .iter()
            .map(|c| vec![Vec::with_capacity(rows.len()); c.locations.len()])
            .collect();
        for (g, v) in rows {
            for (c, row) in g.into_iter().enumerate() {
                for (t, b) in row.into_iter().enumerate() {
                    guard[c][t].push(b);
                }
            }
            for (c, row) in v.into_iter().enumerate() {
                for (l, b) in row.into_iter().enumerate() {
                    inv[c][l].push(b);
                }
            }
        }
        Ok(Tables { guard, inv })
    }

    pub(crate) fn guard(&self, comp: usize, trans: usize, snap: usize) -> bool {
        self.guard[comp][trans][snap]
    }

    pub(crate) fn admissible(&self, locs: &[usize], snap: usize) -> bool {
        locs.iter().enumerate().all(|(c, &l)| self.inv[c][l][snap])
    }
}

fn cached<'f>(
    ev: &mut Evaluator<'_>,
    cache: &mut HashMap<&'f Formula, bool>,
    f: &'f Formula,
    snapshot: usize,
) -> Result<bool, ReachError> {
    if let Some(&b) = cache.get(f) {
        return Ok(b);
    }
    let b = ev
        .holds_on_extent(f)
        .map_err(|source| ReachError::Eval { snapshot, source })?;
    cache.insert(f, b);
    Ok(b)
}

/// Explores one network against a fixed scenario list.
pub struct Explorer<'a> {
    pub net: &'a Network,
    pub scenarios: &'a [TrafficSnapshot],
    tables: Tables,
}

impl<'a> Explorer<'a> {
    pub fn new(net: &'a Network, scenarios: &'a [TrafficSnapshot]) -> Result<Self, ReachError> {
        Ok(Explorer {
            net,
            scenarios,
            tables: Tables::build(net, scenarios)?,
        })
    }

    pub fn admissible(&self, locs: &[usize], snap: usize) -> bool {
        self.tables.admissible(locs, snap)
    }

    /// Spatial side of firing `trans` of `comp` from `locs` under `snap`.
    pub fn allowed(&self, locs: &[usize], comp: usize, trans: usize, snap: usize) -> bool {
        if !self.tables.guard(comp, trans, snap) || !self.tables.admissible(locs, snap) {
            return false;
        }
        let mut next = locs.to_vec();
        next[comp] = self.net.components[comp].transitions[trans].target;
        self.tables.admissible(&next, snap)
    }

    fn delay(&self, locs: &[usize], zone: &mut Zone) {
        let inv: Vec<_> = self.net.invariant_atoms(locs).copied().collect();
        zone.constrain_all(&inv);
        zone.up();
        zone.constrain_all(&inv);
        zone.extrapolate(self.net.max_constant);
    }

    /// Zone after all clocks start at zero and time passes.
    pub fn initial_state(&self) -> SymbolicState {
        let locs = self.net.initial();
        let mut zone = Zone::zero(self.net.clocks.len());
        self.delay(&locs, &mut zone);
        SymbolicState { locs, zone }
    }

    /// Clock side of firing a transition, followed by time elapse.
    pub fn fire(&self, st: &SymbolicState, comp: usize, trans: usize) -> Option<SymbolicState> {
        let t = &self.net.components[comp].transitions[trans];
        if st.locs[comp] != t.source {
            return None;
        }
        let mut zone = st.zone.clone();
        zone.constrain_all(&t.clock);
        for &r in &t.resets {
            zone.reset(r);
        }
        let mut locs = st.locs.clone();
        locs[comp] = t.target;
        self.delay(&locs, &mut zone);
        if zone.is_empty() {
            None
        } else {
            Some(SymbolicState { locs, zone })
        }
    }

    /// Transitions `(component, transition)` that can fire from `st` while
    /// scenario `snap` is current.
    pub fn enabled(&self, st: &SymbolicState, snap: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (c, comp) in self.net.components.iter().enumerate() {
            for &t in &comp.outgoing[st.locs[c]] {
                if self.allowed(&st.locs, c, t, snap) && self.fire(st, c, t).is_some() {
                    out.push((c, t));
                }
            }
        }
        out
    }

    /// Breadth-first exploration keeping only maximal zones per location
    /// tuple.
    pub fn explore(&self) -> ReachGraph {
        let mut g = ReachGraph {
            nodes: Vec::new(),
            passed: HashMap::new(),
            first: BTreeMap::new(),
        };
        let init = self.initial_state();
        if init.zone.is_empty() {
            return g;
        }
        let mut queue = VecDeque::new();
        if let Some(id) = g.insert(init, None) {
            queue.push_back(id);
        }
        while let Some(id) = queue.pop_front() {
            let st = g.nodes[id].state.clone();
            for (c, comp) in self.net.components.iter().enumerate() {
                for &t in &comp.outgoing[st.locs[c]] {
                    let Some(snap) =
                        (0..self.scenarios.len()).find(|&s| self.allowed(&st.locs, c, t, s))
                    else {
                        continue;
                    };
                    let Some(next) = self.fire(&st, c, t) else {
                        continue;
                    };
                    let step = TraceStep::Action {
                        component: c,
                        transition: t,
                        snapshot: snap,
                    };
                    if let Some(nid) = g.insert(next, Some((id, step))) {
                        queue.push_back(nid);
                    }
                }
            }
        }
        g
    }

    /// Re-executes a trace from the initial state.
    pub fn replay(&self, trace: &Trace) -> Result<SymbolicState, ReplayError> {
        let mut st = self.initial_state();
        if st.zone.is_empty() {
            return Err(ReplayError::EmptyInitial);
        }
        for (i, step) in trace.0.iter().enumerate() {
            match *step {
                TraceStep::Delay { snapshot } => {
                    if snapshot >= self.scenarios.len() {
                        return Err(ReplayError::Scenario(i));
                    }
                    if !self.admissible(&st.locs, snapshot) {
                        return Err(ReplayError::Spatial(i));
                    }
                }
                TraceStep::Action {
                    component,
                    transition,
                    snapshot,
                } => {
                    let Some(comp) = self.net.components.get(component) else {
                        return Err(ReplayError::Unknown(i));
                    };
                    let Some(t) = comp.transitions.get(transition) else {
                        return Err(ReplayError::Unknown(i));
                    };
                    if snapshot >= self.scenarios.len() {
                        return Err(ReplayError::Scenario(i));
                    }
                    if t.source != st.locs[component] {
                        return Err(ReplayError::WrongSource(i));
                    }
                    if !self.allowed(&st.locs, component, transition, snapshot) {
                        return Err(ReplayError::Spatial(i));
                    }
                    st = self
                        .fire(&st, component, transition)
                        .ok_or(ReplayError::Clock(i))?;
                }
            }
        }
        Ok(st)
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub state: SymbolicState,
    parent: Option<(usize, TraceStep)>,
}

/// Every symbolic state visited, with parent links for traces.
#[derive(Debug, Clone)]
pub struct ReachGraph {
    pub nodes: Vec<Node>,
    passed: HashMap<Vec<usize>, Vec<usize>>,
    first: BTreeMap<Vec<usize>, usize>,
}

impl ReachGraph {
    fn insert(&mut self, st: SymbolicState, parent: Option<(usize, TraceStep)>) -> Option<usize> {
        let list = self.passed.entry(st.locs.clone()).or_default();
        if list.iter().any(|&i| self.nodes[i].state.zone.includes(&st.zone)) {
            return None;
        }
        let nodes = &self.nodes;
        list.retain(|&i| !st.zone.includes(&nodes[i].state.zone));
        let id = self.nodes.len();
        list.push(id);
        self.first.entry(st.locs.clone()).or_insert(id);
        self.nodes.push(Node { state: st, parent });
        Some(id)
    }

    pub fn reachable(&self) -> BTreeSet<Vec<usize>> {
        self.first.keys().cloned().collect()
    }

    /// Maximal zones for a location tuple.
    pub fn zones(&self, locs: &[usize]) -> Vec<&Zone> {
        self.passed
            .get(locs)
            .map(|l| l.iter().map(|&i| &self.nodes[i].state.zone).collect())
            .unwrap_or_default()
    }

    /// Shortest trace reaching node `id`.
    pub fn trace_to(&self, id: usize) -> Trace {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some((p, step)) = self.nodes[cur].parent {
            steps.push(step);
            if let TraceStep::Action { snapshot, .. } = step {
                steps.push(TraceStep::Delay { snapshot });
            }
            cur = p;
        }
        steps.reverse();
        Trace(steps)
    }

    pub fn witness(&self, locs: &[usize]) -> Option<Trace> {
        self.first.get(locs).map(|&id| self.trace_to(id))
    }
}

/// Reachability summary for a single automaton, keyed by location name.
#[derive(Debug, Clone)]
pub struct ReachResult {
    pub network: Network,
    pub reachable: BTreeMap<String, Vec<Zone>>,
    pub witnesses: BTreeMap<String, Trace>,
}

impl ReachResult {
    pub fn is_reachable(&self, location: &str) -> bool {
        self.reachable.contains_key(location)
    }

    pub fn locations(&self) -> BTreeSet<String> {
        self.reachable.keys().cloned().collect()
    }
}

pub fn reach(a: &RuleAutomaton, scenarios: &[TrafficSnapshot]) -> Result<ReachResult, ReachError> {
    let net = Network::single(a)?;
    let (reachable, witnesses) = {
        let ex = Explorer::new(&net, scenarios)?;
        let g = ex.explore();
        let mut reachable = BTreeMap::new();
        let mut witnesses = BTreeMap::new();
        for locs in g.reachable() {
            let label = net.label(&locs);
            reachable.insert(label.clone(), g.zones(&locs).into_iter().cloned().collect());
            witnesses.insert(label, g.witness(&locs).unwrap());
        }
        (reachable, witnesses)
    };
    Ok(ReachResult {
        network: net,
        reachable,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::toy;
    use crate::automata::{ClockOp, Location, Transition};
    use crate::rational::int;
    use crate::spatial::Sign;
    use crate::usltr::parse_formula;

    fn scene(signs: &[&str]) -> TrafficSnapshot {
        let mut s = crate::spatial::fixtures::road();
        s.signs = signs.iter().map(|k| Sign::new(*k, int(3))).collect();
        s
    }

    #[test]
    fn toy_reaches_b_only_with_go() {
        let r = reach(&toy(), &[scene(&["Go"])]).unwrap();
        assert!(r.is_reachable("B"));
        let t = &r.witnesses["B"];
        assert_eq!(t.actions(), 1);
        let ex = Explorer::new(&r.network, &[scene(&["Go"])]).unwrap().replay(t).unwrap();
        assert_eq!(r.network.label(&ex.locs), "B");

        let r = reach(&toy(), &[scene(&[]), scene(&["Stop"])]).unwrap();
        assert_eq!(r.locations(), BTreeSet::from(["A".to_string()]));
    }

    #[test]
    fn zone_in_initial_location() {
        let r = reach(&toy(), &[scene(&[])]).unwrap();
        assert_eq!(r.reachable["A"], vec![{
            let mut z = Zone::zero(1);
            z.up();
            z.constrain(1, ClockOp::Le, 2);
            z
        }]);
    }

    #[test]
    fn clock_guard_beyond_invariant_blocks() {
        let mut a = toy();
        a.transitions[0].clock_guard.0[0].bound.value = 3;
        let r = reach(&a, &[scene(&["Go"])]).unwrap();
        assert!(!r.is_reachable("B"));
        let net = Network::single(&a).unwrap();
        let scen = [scene(&["Go"])];
        let ex = Explorer::new(&net, &scen).unwrap();
        assert!(ex.enabled(&ex.initial_state(), 0).is_empty());
    }

    #[test]
    fn no_transitions_only_initial() {
        let mut a = toy();
        a.transitions.clear();
        let r = reach(&a, &[scene(&["Go"])]).unwrap();
        assert_eq!(r.locations().len(), 1);
    }

    #[test]
    fn spatial_invariant_restricts_environment() {
        let mut a = toy();
        a.locations[1].spatial_invariant = Some(parse_formula("ob(Stop)").unwrap());
        // Go alone leaves B without an admissible scenario
        assert!(!reach(&a, &[scene(&["Go"]), scene(&["Stop"])]).unwrap().is_reachable("B"));
        assert!(reach(&a, &[scene(&["Go", "Stop"])]).unwrap().is_reachable("B"));
    }

    #[test]
    fn replay_rejects_bad_traces() {
        let net = Network::single(&toy()).unwrap();
        let scen = [scene(&[]), scene(&["Go"])];
        let ex = Explorer::new(&net, &scen).unwrap();
        let bad = Trace(vec![TraceStep::Action {
            component: 0,
            transition: 0,
            snapshot: 0,
        }]);
        assert_eq!(ex.replay(&bad), Err(ReplayError::Spatial(0)));
        let far = Trace(vec![TraceStep::Delay { snapshot: 5 }]);
        assert_eq!(ex.replay(&far), Err(ReplayError::Scenario(0)));
    }

    #[test]
    fn loop_terminates_with_extrapolation() {
        let mut a = toy();
        a.clocks.push("y".into());
        a.locations[0].invariant.0.clear();
        a.locations.push(Location::new("C"));
        let mut back = Transition::new("B", "A", "go");
        back.resets = vec!["x".into()];
        a.transitions.push(back);
        let r = reach(&a, &[scene(&["Go"])]).unwrap();
        assert!(r.is_reachable("A") && r.is_reachable("B") && !r.is_reachable("C"));
    }
}
