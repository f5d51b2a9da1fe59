//! Explicit-state counterparts of the conflict searches, on the same grid
//! of clock values used for timelock sampling.

use std::collections::BTreeSet;

use crate::automata::{DiscreteError, GridExplorer, Network};
use crate::spatial::TrafficSnapshot;

/// Location tuple, action, enabling component, forbidding component.
pub type PermissionKey = (Vec<usize>, String, usize, usize);

fn explorer<'a>(net: &'a Network, scenarios: &[TrafficSnapshot]) -> Result<GridExplorer<'a>, DiscreteError> {
    GridExplorer::new(net, scenarios, net.clocks.len() as i64 + 1)
}

pub fn timelocks_discrete(
    net: &Network,
    scenarios: &[TrafficSnapshot],
) -> Result<BTreeSet<Vec<usize>>, DiscreteError> {
    let ex = explorer(net, scenarios)?;
    Ok(ex
        .explore(None)
        .into_iter()
        .filter(|st| ex.time_blocked(st) && ex.enabled(st).is_empty())
        .map(|st| st.locs)
        .collect())
}

pub fn permission_conflicts_discrete(
    net: &Network,
    scenarios: &[TrafficSnapshot],
) -> Result<BTreeSet<PermissionKey>, DiscreteError> {
    let ex = explorer(net, scenarios)?;
    let mut out = BTreeSet::new();
    for st in ex.explore(None) {
        for (c, t, _) in ex.enabled(&st) {
            let action = &net.components[c].automaton.transitions[t].action;
            for (j, comp) in net.components.iter().enumerate() {
                if j != c && comp.forbids(st.locs[j], action) {
                    out.insert((st.locs.clone(), action.clone(), c, j));
                }
            }
        }
    }
    Ok(out)
}
