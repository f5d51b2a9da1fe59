use super::*;
use crate::automata::{Bound, ClockAtom, ClockConstraint, Location, Transition};
use crate::dsl::{bundled_rule, bundled_snapshot};
use crate::rational::int;
use crate::spatial::Sign;
use crate::usltr::parse_formula;

fn scene(signs: &[&str]) -> TrafficSnapshot {
    let mut s = crate::spatial::fixtures::road();
    s.signs = signs.iter().map(|k| Sign::new(*k, int(3))).collect();
    s
}

/// Waits at `L1` for at most one unit, leaving only when `Go` is seen.
fn waiter(name: &str) -> RuleAutomaton {
    let mut a = RuleAutomaton::new(name);
    a.clocks = vec!["x".into()];
    a.alphabet = vec!["go".into()];
    let mut l1 = Location::new("L1");
    l1.initial = true;
    l1.invariant = ClockConstraint(vec![ClockAtom::new("x", ClockOp::Le, Bound::lit(1))]);
    a.locations = vec![l1, Location::new("L2")];
    let mut t = Transition::new("L1", "L2", "go");
    t.spatial_guard = parse_formula("ob(Go)").unwrap();
    a.transitions = vec![t];
    a
}

/// Never blocks time.
fn idler(name: &str) -> RuleAutomaton {
    let mut a = RuleAutomaton::new(name);
    a.clocks = vec!["y".into()];
    a.alphabet = vec!["idle".into()];
    let mut l = Location::new("I");
    l.initial = true;
    a.locations = vec![l];
    a.transitions = vec![Transition::new("I", "I", "idle")];
    a
}

/// No transitions at all.
fn sleeper(name: &str) -> RuleAutomaton {
    let mut a = idler(name);
    a.transitions.clear();
    a
}

#[test]
fn composed_initial_tuple() {
    let rules = [
        bundled_rule("ukhc_170").unwrap().automaton,
        bundled_rule("ukhc_171").unwrap().automaton,
    ];
    let net = compose(&rules).unwrap();
    assert_eq!(net.label(&net.initial()), "L0|L0");
    assert_eq!(net.clocks, vec!["ukhc_170.x", "ukhc_171.x"]);
}

#[test]
fn idle_system_has_no_timelock() {
    let net = compose(&[idler("a"), idler("b")]).unwrap();
    assert!(find_timelocks(&net, &[scene(&[])]).unwrap().is_empty());
}

#[test]
fn timelock_without_go() {
    let net = compose(&[waiter("p"), sleeper("q")]).unwrap();
    let found = find_timelocks(&net, &[scene(&[]), scene(&["Stop"])]).unwrap();
    assert_eq!(found.len(), 1);
    let r = &found[0];
    assert_eq!(net.label(&r.state.locs), "L1|I");
    assert_eq!(r.valuation.as_ref().unwrap()[0], int(1));
    assert_eq!(
        timelocks_discrete(&net, &[scene(&[]), scene(&["Stop"])]).unwrap(),
        BTreeSet::from([r.state.locs.clone()])
    );
    // with Go around, the waiter can always leave
    assert!(find_timelocks(&net, &[scene(&[]), scene(&["Go"])]).unwrap().is_empty());
}

#[test]
fn disjoint_alphabets_never_conflict() {
    let mut p = waiter("p");
    p.locations[0].forbid = vec!["stop".into()];
    let net = compose(&[p, idler("q")]).unwrap();
    assert!(find_permission_conflicts(&net, &[scene(&["Go"])]).unwrap().is_empty());
}

#[test]
fn unreachable_forbidder_never_conflicts() {
    let mut p = waiter("p");
    p.alphabet.push("idle".into());
    p.locations[1].forbid = vec!["idle".into()];
    let net = compose(&[p, idler("q")]).unwrap();
    let scenarios = [scene(&["Stop"])];
    assert!(find_permission_conflicts(&net, &scenarios).unwrap().is_empty());
    let scenarios = [scene(&["Go"])];
    let found = find_permission_conflicts(&net, &scenarios).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].action.as_deref(), Some("idle"));
}

fn demo_pair() -> Vec<RuleAutomaton> {
    vec![
        bundled_rule("demo_red_light").unwrap().automaton,
        bundled_rule("demo_green_arrow").unwrap().automaton,
    ]
}

#[test]
fn red_light_green_arrow_conflict() {
    let rules = demo_pair();
    let scenarios: Vec<_> = enumerate_universe(&default_universe(&rules)).collect();
    let net = compose(&rules).unwrap();
    let a = Analysis::new(&net, &scenarios).unwrap();
    let found = a.permission_conflicts();
    assert_eq!(found.len(), 1);
    let r = &found[0];
    assert_eq!(r.action.as_deref(), Some("enter"));
    assert_eq!(net.label(&r.state.locs), "RedWait|Checking");
    assert_eq!(r.enabling, Some(1));
    assert_eq!(r.forbidding, Some(0));
    let end = a.explorer.replay(&r.trace).unwrap();
    assert_eq!(end.locs, r.state.locs);
    let oracle = permission_conflicts_discrete(&net, &scenarios).unwrap();
    assert_eq!(oracle, BTreeSet::from([(r.state.locs.clone(), "enter".to_string(), 1, 0)]));
    assert!(a.timelocks().is_empty());
}

#[test]
fn conflict_json_shape() {
    let rules = demo_pair();
    let scenarios = vec![bundled_snapshot("green.snapshot.json").unwrap(), {
        let mut s = bundled_snapshot("red.snapshot.json").unwrap();
        s.signs.push(Sign::new("GreenArrow", int(7)));
        s
    }];
    let summary = check_conflicts(&rules, &scenarios).unwrap();
    assert!(summary.any());
    let v = summary.to_json(&scenarios);
    let pc = &v["permission_conflicts"][0];
    assert_eq!(pc["kind"], "permission_conflict");
    assert_eq!(pc["action"], "enter");
    assert_eq!(pc["locations"]["demo_red_light"], "RedWait");
    assert_eq!(pc["enabling_rule"], "demo_green_arrow");
    assert!(pc["snapshot"]["cars"].is_array());
    assert!(pc["trace"].as_array().unwrap().len() >= 2);
}

#[test]
fn contradictory_invariants() {
    let mut a = idler("a");
    a.locations[0].spatial_invariant = Some(parse_formula("<<free and l >= 4>>").unwrap());
    let mut b = idler("b");
    b.locations[0].spatial_invariant = Some(parse_formula("not <<free and l >= 4>>").unwrap());
    let scenarios = [scene(&[]), {
        let mut s = scene(&[]);
        for (i, lo) in [2, 5, 8, 11, 14, 17].into_iter().enumerate() {
            s.cars.push(crate::spatial::CarOccupancy::new(
                format!("B{i}"),
                crate::spatial::Interval::ints(lo, lo + 2),
                int(2),
            ));
        }
        s
    }];
    let found = guard_contradiction_scan_in(&[a.clone(), b], &scenarios).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!((found[0].location_a.as_str(), found[0].location_b.as_str()), ("I", "I"));
    let mut same = idler("same");
    same.locations[0].spatial_invariant = a.locations[0].spatial_invariant.clone();
    assert!(guard_contradiction_scan_in(&[a, same], &scenarios).unwrap().is_empty());
}

#[test]
fn lengths_are_jointly_satisfiable() {
    let mut a = idler("a");
    a.locations[0].spatial_invariant = Some(parse_formula("l >= 5").unwrap());
    let mut b = idler("b");
    b.locations[0].spatial_invariant = Some(parse_formula("l >= 3").unwrap());
    let mut u = UniverseParams::default_road::<&str>(&[]);
    u.extent = crate::spatial::Interval::ints(0, 10);
    u.crossing = crate::spatial::Interval::ints(6, 10);
    assert!(guard_contradiction_scan(&[a, b], &u).unwrap().is_empty());
}

#[test]
fn rules_170_171_regression() {
    let rules = [
        bundled_rule("ukhc_170").unwrap().automaton,
        bundled_rule("ukhc_171").unwrap().automaton,
    ];
    let scenarios: Vec<_> = enumerate_universe(&default_universe(&rules)).collect();
    let s = check_conflicts(&rules, &scenarios).unwrap();
    assert!(s.timelocks.is_empty());
    assert!(s.contradictions.is_empty());
    let labels: BTreeSet<(String, String)> = s
        .permission_conflicts
        .iter()
        .map(|r| (s.network.label(&r.state.locs), r.action.clone().unwrap()))
        .collect();
    assert_eq!(
        labels,
        BTreeSet::from([
            ("L1|L2".to_string(), "enter".to_string()),
            ("L2|L1".to_string(), "enter".to_string()),
        ])
    );
    let oracle = permission_conflicts_discrete(&s.network, &scenarios).unwrap();
    assert_eq!(oracle.len(), 2);
    assert!(timelocks_discrete(&s.network, &scenarios).unwrap().is_empty());
}
