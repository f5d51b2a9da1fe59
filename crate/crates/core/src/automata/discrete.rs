//! Explicit-state exploration over grid clock valuations.
//!
//! Clock values are stored in units of `1/scale` and capped one unit above
//! the largest constant, which keeps the state space finite. With closed
//! integer constraints, scale 1 already decides location reachability.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::network::Network;
use super::{ClockOp, NetworkError, RuleAutomaton};
use crate::spatial::TrafficSnapshot;
use crate::usltr::{EvalError, Evaluator};

#[derive(Debug, thiserror::Error)]
pub enum DiscreteError {
    #[error("horizon must be nonnegative, got {0}")]
    NegativeHorizon(i64),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("evaluating on scenario {snapshot}: {source}")]
    Eval {
        snapshot: usize,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridState {
    pub locs: Vec<usize>,
    pub vals: Vec<i64>,
}

pub struct GridExplorer<'a> {
    pub net: &'a Network,
    scale: i64,
    cap: i64,
    snapshots: usize,
    guard: Vec<Vec<Vec<bool>>>,
    inv: Vec<Vec<Vec<bool>>>,
}

impl<'a> GridExplorer<'a> {
    pub fn new(net: &'a Network, scenarios: &[TrafficSnapshot], scale: i64) -> Result<Self, DiscreteError> {
        let mut evaluators: Vec<Evaluator> = scenarios.iter().map(Evaluator::new).collect();
        let mut truth = |f: &crate::usltr::Formula, i: usize, _: &TrafficSnapshot| {
            evaluators[i]
                .holds_on_extent(f)
                .map_err(|source| DiscreteError::Eval { snapshot: i, source })
        };
        let mut guard = Vec::new();
        let mut inv = Vec::new();
        for c in &net.components {
            let mut g = Vec::new();
            for t in &c.automaton.transitions {
                let row = scenarios
                    .iter()
                    .enumerate()
                    .map(|(i, s)| truth(&t.spatial_guard, i, s))
                    .collect::<Result<Vec<_>, _>>()?;
                g.push(row);
            }
            guard.push(g);
            let mut v = Vec::new();
            for l in &c.automaton.locations {
                let row = match &l.spatial_invariant {
                    None => vec![true; scenarios.len()],
                    Some(f) => scenarios
                        .iter()
                        .enumerate()
                        .map(|(i, s)| truth(f, i, s))
                        .collect::<Result<Vec<_>, _>>()?,
                };
                v.push(row);
            }
            inv.push(v);
        }
        Ok(GridExplorer {
            net,
            scale,
            cap: (net.max_constant + 1) * scale,
            snapshots: scenarios.len(),
            guard,
            inv,
        })
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    fn sat(&self, atoms: &[(usize, ClockOp, i64)], vals: &[i64]) -> bool {
        atoms.iter().all(|&(x, op, c)| match op {
            ClockOp::Le => vals[x - 1] <= c * self.scale,
            ClockOp::Ge => vals[x - 1] >= c * self.scale,
        })
    }

    fn inv_ok(&self, locs: &[usize], vals: &[i64]) -> bool {
        self.net
            .components
            .iter()
            .zip(locs)
            .all(|(c, &l)| self.sat(&c.locations[l].inv, vals))
    }

    pub fn admissible(&self, locs: &[usize], snap: usize) -> bool {
        locs.iter().enumerate().all(|(c, &l)| self.inv[c][l][snap])
    }

    pub fn initial(&self) -> Option<GridState> {
        let st = GridState {
            locs: self.net.initial(),
            vals: vec![0; self.net.clocks.len()],
        };
        self.inv_ok(&st.locs, &st.vals).then_some(st)
    }

    pub fn delay(&self, st: &GridState) -> Option<GridState> {
        let vals: Vec<i64> = st.vals.iter().map(|v| (v + 1).min(self.cap)).collect();
        if vals == st.vals {
            return None;
        }
        self.inv_ok(&st.locs, &vals).then(|| GridState {
            locs: st.locs.clone(),
            vals,
        })
    }

    /// Whether one more grid unit of delay is blocked by an invariant.
    pub fn time_blocked(&self, st: &GridState) -> bool {
        let vals: Vec<i64> = st.vals.iter().map(|v| v + 1).collect();
        !self.inv_ok(&st.locs, &vals)
    }

    pub fn action(&self, st: &GridState, comp: usize, trans: usize, snap: usize) -> Option<GridState> {
        let c = &self.net.components[comp];
        let t = &c.transitions[trans];
        if st.locs[comp] != t.source
            || !self.guard[comp][trans][snap]
            || !self.admissible(&st.locs, snap)
            || !self.sat(&t.clock, &st.vals)
        {
            return None;
        }
        let mut locs = st.locs.clone();
        locs[comp] = t.target;
        if !self.admissible(&locs, snap) {
            return None;
        }
        let mut vals = st.vals.clone();
        for &r in &t.resets {
            vals[r - 1] = 0;
        }
        self.inv_ok(&locs, &vals).then_some(GridState { locs, vals })
    }

    /// Every `(component, transition, snapshot)` that can fire from `st`.
    pub fn enabled(&self, st: &GridState) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (c, comp) in self.net.components.iter().enumerate() {
            for (t, tr) in comp.transitions.iter().enumerate() {
                if tr.source != st.locs[c] {
                    continue;
                }
                for s in 0..self.snapshots {
                    if self.action(st, c, t, s).is_some() {
                        out.push((c, t, s));
                    }
                }
            }
        }
        out
    }

    /// States reachable within `horizon` steps (delays and actions), in
    /// breadth-first order.
    pub fn explore(&self, horizon: Option<usize>) -> Vec<GridState> {
        let Some(init) = self.initial() else {
            return Vec::new();
        };
        let mut seen = HashSet::from([init.clone()]);
        let mut order = vec![init.clone()];
        let mut queue = VecDeque::from([(init, 0usize)]);
        while let Some((st, depth)) = queue.pop_front() {
            if horizon.is_some_and(|h| depth >= h) {
                continue;
            }
            let mut next: Vec<GridState> = self.delay(&st).into_iter().collect();
            next.extend(
                self.enabled(&st)
                    .into_iter()
                    .filter_map(|(c, t, s)| self.action(&st, c, t, s)),
            );
            for n in next {
                if seen.insert(n.clone()) {
                    order.push(n.clone());
                    queue.push_back((n, depth + 1));
                }
            }
        }
        order
    }
}

fn horizon(h: i64) -> Result<Option<usize>, DiscreteError> {
    if h < 0 {
        Err(DiscreteError::NegativeHorizon(h))
    } else {
        Ok(usize::try_from(h).ok())
    }
}

/// Location tuples reachable with unit delays within `horizon` steps.
pub fn reach_discrete_network(
    net: &Network,
    scenarios: &[TrafficSnapshot],
    horizon_steps: i64,
) -> Result<BTreeSet<Vec<usize>>, DiscreteError> {
    let h = horizon(horizon_steps)?;
    let ex = GridExplorer::new(net, scenarios, 1)?;
    Ok(ex.explore(h).into_iter().map(|s| s.locs).collect())
}

/// Location names reachable with unit delays within `horizon` steps.
pub fn reach_discrete(
    a: &RuleAutomaton,
    scenarios: &[TrafficSnapshot],
    horizon_steps: i64,
) -> Result<BTreeSet<String>, DiscreteError> {
    let net = Network::single(a)?;
    Ok(reach_discrete_network(&net, scenarios, horizon_steps)?
        .into_iter()
        .map(|l| net.label(&l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures::toy;
    use crate::rational::int;
    use crate::spatial::Sign;

    fn scene(signs: &[&str]) -> TrafficSnapshot {
        let mut s = crate::spatial::fixtures::road();
        s.signs = signs.iter().map(|k| Sign::new(*k, int(3))).collect();
        s
    }

    #[test]
    fn horizon_zero_is_initial_only() {
        let r = reach_discrete(&toy(), &[scene(&["Go"])], 0).unwrap();
        assert_eq!(r, BTreeSet::from(["A".to_string()]));
    }

    #[test]
    fn needs_delay_before_go() {
        // one delay then the action
        assert!(!reach_discrete(&toy(), &[scene(&["Go"])], 1).unwrap().contains("B"));
        assert!(reach_discrete(&toy(), &[scene(&["Go"])], 2).unwrap().contains("B"));
        assert!(!reach_discrete(&toy(), &[scene(&[])], i64::MAX).unwrap().contains("B"));
    }

    #[test]
    fn negative_horizon() {
        assert!(matches!(
            reach_discrete(&toy(), &[scene(&[])], -1),
            Err(DiscreteError::NegativeHorizon(-1))
        ));
    }

    #[test]
    fn time_blocked_at_ceiling() {
        let net = Network::single(&toy()).unwrap();
        let ex = GridExplorer::new(&net, &[scene(&[])], 2).unwrap();
        let states = ex.explore(None);
        let blocked: Vec<_> = states.iter().filter(|s| ex.time_blocked(s)).collect();
        assert_eq!(blocked.len(), 1);
        assert_eq!(blocked[0].vals, vec![4]);
    }
}
