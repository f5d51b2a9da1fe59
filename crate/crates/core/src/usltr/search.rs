use super::ast::Formula;
use super::eval::{evaluate, EvalError, Valuation};
use crate::spatial::{enumerate_universe, Interval, TrafficSnapshot, UniverseParams};

/// Which view a formula is evaluated on when searching a universe.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ViewPolicy {
    #[default]
    FullExtent,
    Fixed(Interval),
}

impl ViewPolicy {
    pub fn view_for(&self, s: &TrafficSnapshot) -> Interval {
        match self {
            ViewPolicy::FullExtent => s.extent.clone(),
            ViewPolicy::Fixed(v) => v.clone(),
        }
    }
}

/// First snapshot (in enumeration order) on which `f` holds, with the view.
pub fn satisfiable_in_universe(
    f: &Formula,
    p: &UniverseParams,
    policy: &ViewPolicy,
) -> Result<Option<(TrafficSnapshot, Interval)>, EvalError> {
    satisfiable_in(f, enumerate_universe(p), policy)
}

/// Same search over an explicit list of snapshots.
pub fn satisfiable_in(
    f: &Formula,
    snapshots: impl IntoIterator<Item = TrafficSnapshot>,
    policy: &ViewPolicy,
) -> Result<Option<(TrafficSnapshot, Interval)>, EvalError> {
    let env = Valuation::new();
    for s in snapshots {
        let v = policy.view_for(&s);
        if evaluate(f, &s, &v, &env)? {
            return Ok(Some((s, v)));
        }
    }
    Ok(None)
}
