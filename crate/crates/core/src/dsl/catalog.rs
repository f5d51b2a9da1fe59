//! Rules and snapshots shipped with the library.

use super::parse_rule_file;
use crate::automata::RuleAutomaton;
use crate::spatial::{load_snapshot, TrafficSnapshot};

macro_rules! asset {
    ($dir:literal, $file:literal) => {
        ($file, include_str!(concat!("../../assets/", $dir, "/", $file)))
    };
}

pub const BUNDLED_RULE_FILES: &[(&str, &str)] = &[
    asset!("rules", "ukhc_170.rule"),
    asset!("rules", "ukhc_171.rule"),
    asset!("rules", "demo_red_light.rule"),
    asset!("rules", "demo_green_arrow.rule"),
];

pub const BUNDLED_SNAPSHOT_FILES: &[(&str, &str)] = &[
    asset!("snapshots", "go.snapshot.json"),
    asset!("snapshots", "pedestrian.snapshot.json"),
    asset!("snapshots", "nosigns.snapshot.json"),
    asset!("snapshots", "gap_blocked.snapshot.json"),
    asset!("snapshots", "red.snapshot.json"),
    asset!("snapshots", "green.snapshot.json"),
    asset!("snapshots", "fig2.snapshot.json"),
    asset!("snapshots", "fig2_blocked.snapshot.json"),
    asset!("snapshots", "empty.snapshot.json"),
];

/// Text of a bundled rule or snapshot by file name.
pub fn bundled_file(name: &str) -> Option<&'static str> {
    BUNDLED_RULE_FILES
        .iter()
        .chain(BUNDLED_SNAPSHOT_FILES)
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

pub fn bundled_snapshot(name: &str) -> Option<TrafficSnapshot> {
    BUNDLED_SNAPSHOT_FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| load_snapshot(t).expect("bundled snapshot is valid"))
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub file: &'static str,
    pub automaton: RuleAutomaton,
    /// The "on road junction" location.
    pub terminal: &'static str,
    /// Snapshots under which the terminal location is reachable.
    pub enabling: Vec<(&'static str, TrafficSnapshot)>,
    /// Snapshots under which it is not.
    pub blocking: Vec<(&'static str, TrafficSnapshot)>,
}

pub fn bundled_rules() -> Vec<CatalogEntry> {
    let table: [(&str, &str, &[&str], &[&str]); 4] = [
        (
            "ukhc_170.rule",
            "L3",
            &["go.snapshot.json"],
            &["pedestrian.snapshot.json", "gap_blocked.snapshot.json"],
        ),
        (
            "ukhc_171.rule",
            "L3",
            &["go.snapshot.json"],
            &["nosigns.snapshot.json", "gap_blocked.snapshot.json"],
        ),
        (
            "demo_red_light.rule",
            "OnJunction",
            &["nosigns.snapshot.json", "green.snapshot.json"],
            &["red.snapshot.json"],
        ),
        (
            "demo_green_arrow.rule",
            "OnJunction",
            &["green.snapshot.json"],
            &["nosigns.snapshot.json", "red.snapshot.json"],
        ),
    ];
    let snaps = |names: &[&'static str]| {
        names
            .iter()
            .map(|n| (*n, bundled_snapshot(n).expect("listed snapshot exists")))
            .collect()
    };
    table
        .iter()
        .map(|(file, terminal, enabling, blocking)| {
            let automaton = parse_rule_file(bundled_file(file).unwrap())
                .unwrap_or_else(|e| panic!("bundled {file}: {e}"));
            CatalogEntry {
                name: automaton.name.clone(),
                file,
                automaton,
                terminal,
                enabling: snaps(enabling),
                blocking: snaps(blocking),
            }
        })
        .collect()
}

/// Looks a bundled rule up by rule name or file name.
pub fn bundled_rule(name: &str) -> Option<CatalogEntry> {
    bundled_rules()
        .into_iter()
        .find(|e| e.name == name || e.file == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{reach, validate_automaton};
    use crate::dsl::print_rule;
    use crate::spatial::validate_snapshot;
    use crate::usltr::{parse_formula, Formula};

    #[test]
    fn catalog_contents() {
        let names: Vec<String> = bundled_rules().into_iter().map(|e| e.name).collect();
        assert_eq!(names, ["ukhc_170", "ukhc_171", "demo_red_light", "demo_green_arrow"]);
        for e in bundled_rules() {
            assert!(validate_automaton(&e.automaton).is_empty());
            assert!(!e.enabling.is_empty() && !e.blocking.is_empty());
        }
    }

    #[test]
    fn rule_170_structure() {
        let a = bundled_rule("ukhc_170").unwrap().automaton;
        let names: Vec<_> = a.locations.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["L0", "L1", "L2", "L3"]);
        assert_eq!(a.clocks.len(), 1);
        assert_eq!(a.locations[0].role.as_deref(), Some("away from road junction"));
        assert!(a.locations[0].initial);
        assert_eq!(
            a.transitions[1].spatial_guard,
            parse_formula("not exists c : pc(c) and not pa(E)").unwrap()
        );
        let enter = &a.transitions[2].spatial_guard;
        assert!(enter.conjuncts().contains(&&Formula::somewhere(Formula::safe_gap_on_junction("E"))));
        assert_eq!(a.distinct_guards().len(), 3);
    }

    #[test]
    fn rule_171_stop_guard() {
        let a = bundled_rule("ukhc_171.rule").unwrap().automaton;
        let t = a.transitions.iter().find(|t| t.source == "L1" && t.target == "L2").unwrap();
        assert_eq!(t.spatial_guard, parse_formula("ob(Stop) and ob(SWL)").unwrap());
    }

    #[test]
    fn snapshots_are_valid() {
        for (n, t) in BUNDLED_SNAPSHOT_FILES {
            let s = load_snapshot(t).unwrap_or_else(|e| panic!("{n}: {e}"));
            assert!(validate_snapshot(&s).is_empty());
        }
    }

    #[test]
    fn enabling_and_blocking_fixtures() {
        for e in bundled_rules() {
            for (n, s) in &e.enabling {
                let r = reach(&e.automaton, std::slice::from_ref(s)).unwrap();
                assert!(r.is_reachable(e.terminal), "{} with {n}", e.name);
            }
            for (n, s) in &e.blocking {
                let r = reach(&e.automaton, std::slice::from_ref(s)).unwrap();
                assert!(!r.is_reachable(e.terminal), "{} with {n}", e.name);
            }
        }
    }

    #[test]
    fn bundled_files_round_trip() {
        for e in bundled_rules() {
            let printed = print_rule(&e.automaton);
            assert_eq!(parse_rule_file(&printed).unwrap(), e.automaton, "{}", e.name);
        }
    }
}
