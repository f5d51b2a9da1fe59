//! Automata compiled against a shared clock table.

use std::collections::{BTreeSet, HashMap};

use super::{validate_automaton, AutomatonViolation, ClockConstraint, ClockOp, RuleAutomaton};
use crate::usltr::Formula;

pub(crate) type Atom = (usize, ClockOp, i64);

#[derive(Debug, Clone)]
pub(crate) struct CLocation {
    pub inv: Vec<Atom>,
    pub spatial: Option<Formula>,
    pub forbid: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub(crate) struct CTransition {
    pub source: usize,
    pub target: usize,
    pub guard: Formula,
    pub clock: Vec<Atom>,
    pub resets: Vec<usize>,
}

/// One automaton inside a network.
#[derive(Debug, Clone)]
pub struct Component {
    pub automaton: RuleAutomaton,
    pub(crate) initial: usize,
    pub(crate) locations: Vec<CLocation>,
    pub(crate) transitions: Vec<CTransition>,
    pub(crate) outgoing: Vec<Vec<usize>>,
}

impl Component {
    pub fn name(&self) -> &str {
        &self.automaton.name
    }

    pub fn location_name(&self, i: usize) -> &str {
        &self.automaton.locations[i].name
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.automaton.locations.iter().position(|l| l.name == name)
    }

    pub fn forbids(&self, loc: usize, action: &str) -> bool {
        self.locations[loc].forbid.contains(action)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("rule `{rule}` is invalid: {}", .violations.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid {
        rule: String,
        violations: Vec<AutomatonViolation>,
    },
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
    #[error("need at least 2 rules to compose, got {0}")]
    TooFewRules(usize),
    #[error("clock `{0}` declared twice after prefixing")]
    ClockClash(String),
}

/// Interleaved product of automata sharing one environment. A single
/// automaton is a network of one.
#[derive(Debug, Clone)]
pub struct Network {
    pub components: Vec<Component>,
    pub clocks: Vec<String>,
    pub max_constant: i64,
}

impl Network {
    pub fn single(a: &RuleAutomaton) -> Result<Self, NetworkError> {
        Self::build(std::slice::from_ref(a), false)
    }

    /// Components keep their own clocks, renamed `rule.clock`.
    pub fn compose(rules: &[RuleAutomaton]) -> Result<Self, NetworkError> {
        if rules.len() < 2 {
            return Err(NetworkError::TooFewRules(rules.len()));
        }
        let mut names = BTreeSet::new();
        for r in rules {
            if !names.insert(&r.name) {
                return Err(NetworkError::DuplicateRule(r.name.clone()));
            }
        }
        Self::build(rules, true)
    }

    fn build(rules: &[RuleAutomaton], prefix: bool) -> Result<Self, NetworkError> {
        let mut clocks = Vec::new();
        let mut index = HashMap::new();
        for r in rules {
            let v = validate_automaton(r);
            if !v.is_empty() {
                return Err(NetworkError::Invalid {
                    rule: r.name.clone(),
                    violations: v,
                });
            }
            for c in &r.clocks {
                let global = if prefix { format!("{}.{c}", r.name) } else { c.clone() };
                if index.contains_key(&(r.name.clone(), c.clone())) || clocks.contains(&global) {
                    return Err(NetworkError::ClockClash(global));
                }
                clocks.push(global);
                index.insert((r.name.clone(), c.clone()), clocks.len());
            }
        }
        let components = rules
            .iter()
            .map(|r| {
                let clk = |c: &str| index[&(r.name.clone(), c.to_string())];
                let atoms = |cc: &ClockConstraint| -> Vec<Atom> {
                    cc.0.iter().map(|a| (clk(&a.clock), a.op, a.bound.value)).collect()
                };
                let loc = |n: &str| r.locations.iter().position(|l| l.name == n).unwrap();
                let locations: Vec<CLocation> = r
                    .locations
                    .iter()
                    .map(|l| CLocation {
                        inv: atoms(&l.invariant),
                        spatial: l.spatial_invariant.clone(),
                        forbid: l.forbid.iter().cloned().collect(),
                    })
                    .collect();
                let transitions: Vec<CTransition> = r
                    .transitions
                    .iter()
                    .map(|t| CTransition {
                        source: loc(&t.source),
                        target: loc(&t.target),
                        guard: t.spatial_guard.clone(),
                        clock: atoms(&t.clock_guard),
                        resets: t.resets.iter().map(|c| clk(c)).collect(),
                    })
                    .collect();
                let mut outgoing = vec![Vec::new(); locations.len()];
                for (i, t) in transitions.iter().enumerate() {
                    outgoing[t.source].push(i);
                }
                Component {
                    automaton: r.clone(),
                    initial: r.locations.iter().position(|l| l.initial).unwrap(),
                    locations,
                    transitions,
                    outgoing,
                }
            })
            .collect();
        Ok(Network {
            components,
            clocks,
            max_constant: rules.iter().map(RuleAutomaton::max_constant).max().unwrap_or(0),
        })
    }

    pub fn initial(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.initial).collect()
    }

    /// Location names of a tuple.
    pub fn names(&self, locs: &[usize]) -> Vec<String> {
        self.components
            .iter()
            .zip(locs)
            .map(|(c, &l)| c.location_name(l).to_string())
            .collect()
    }

    /// `L0|L0` style label.
    pub fn label(&self, locs: &[usize]) -> String {
        self.names(locs).join("|")
    }

    pub(crate) fn invariant_atoms<'a>(&'a self, locs: &'a [usize]) -> impl Iterator<Item = &'a Atom> + 'a {
        self.components
            .iter()
            .zip(locs)
            .flat_map(|(c, &l)| c.locations[l].inv.iter())
    }
}
