use std::collections::BTreeMap;

use dhc_core::automata::{reach, reach_discrete, Explorer};
use dhc_core::compose::{check_conflicts, permission_conflicts_discrete};
use dhc_core::dsl::{bundled_rule, bundled_rules, bundled_snapshot};
use dhc_core::export::{to_bdi_sketch, to_xta, xta_check, SpatialMode};
use dhc_core::spatial::{Interval, TrafficSnapshot};
use dhc_core::usltr::{evaluate, Formula};

#[test]
fn terminal_location_follows_the_catalog() {
    for e in bundled_rules() {
        for (name, s) in &e.enabling {
            let r = reach(&e.automaton, std::slice::from_ref(s)).unwrap();
            assert!(r.is_reachable(e.terminal), "{} under {name}", e.name);
            let ex = Explorer::new(&r.network, std::slice::from_ref(s)).unwrap();
            let end = ex.replay(&r.witnesses[e.terminal]).unwrap();
            assert_eq!(r.network.label(&end.locs), e.terminal);
            assert!(reach_discrete(&e.automaton, std::slice::from_ref(s), i64::MAX)
                .unwrap()
                .contains(e.terminal));
        }
        for (name, s) in &e.blocking {
            let r = reach(&e.automaton, std::slice::from_ref(s)).unwrap();
            assert!(!r.is_reachable(e.terminal), "{} under {name}", e.name);
        }
    }
}

#[test]
fn rule_171_needs_both_signs_to_stop() {
    let a = bundled_rule("ukhc_171").unwrap().automaton;
    let mut s = bundled_snapshot("go.snapshot.json").unwrap();
    assert!(reach(&a, std::slice::from_ref(&s)).unwrap().is_reachable("L2"));
    s.signs.retain(|k| k.kind != "SWL");
    assert!(!reach(&a, std::slice::from_ref(&s)).unwrap().is_reachable("L2"));
}

fn sg(s: &TrafficSnapshot, car: &str) -> bool {
    let f = Formula::Somewhere(Box::new(Formula::safe_gap_on_junction(car)));
    evaluate(&f, s, &s.extent, &BTreeMap::new()).unwrap()
}

#[test]
fn safe_gap_shrinks_away() {
    let s = bundled_snapshot("fig2.snapshot.json").unwrap();
    assert!(sg(&s, "A"));
    assert!(!sg(&bundled_snapshot("fig2_blocked.snapshot.json").unwrap(), "A"));
    let mut s2 = s.clone();
    let a = s2.cars.iter().position(|c| c.id == "A").unwrap();
    let size = s2.cars[a].size;
    s2.cars.push(dhc_core::spatial::CarOccupancy::new(
        "B",
        Interval::new(s.crossing.lo + size - dhc_core::rational::ratio(1, 2), s.crossing.hi),
        s.crossing.hi - s.crossing.lo,
    ));
    assert!(!sg(&s2, "A"));
}

#[test]
fn red_light_and_green_arrow_conflict_once() {
    let red = bundled_rule("demo_red_light").unwrap().automaton;
    let green = bundled_rule("demo_green_arrow").unwrap().automaton;
    let scen: Vec<TrafficSnapshot> = ["red.snapshot.json", "green.snapshot.json", "nosigns.snapshot.json"]
        .iter()
        .map(|n| bundled_snapshot(n).unwrap())
        .collect();
    let sum = check_conflicts(&[red, green], &scen).unwrap();
    assert_eq!(sum.permission_conflicts.len(), 1);
    let c = &sum.permission_conflicts[0];
    assert_eq!(c.action.as_deref(), Some("enter"));
    let disc = permission_conflicts_discrete(&sum.network, &scen).unwrap();
    assert_eq!(disc.len(), 1);
    assert!(sum.timelocks.is_empty());
}

#[test]
fn exports_of_bundled_rules() {
    for e in bundled_rules() {
        for m in [SpatialMode::BoolEnv, SpatialMode::Comment] {
            xta_check(&to_xta(&e.automaton, m).unwrap()).unwrap();
        }
    }
    let bdi = to_bdi_sketch(&bundled_rule("ukhc_170.rule").unwrap().automaton).to_string();
    assert!(bdi.lines().any(|l| l == "~potential-collision : ~pedestrian-ahead <- checkForSafeGap;"));
}
