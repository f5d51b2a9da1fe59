use dhc_core::dsl::{bundled_file, parse_rule_file, print_rule, BUNDLED_RULE_FILES};
use dhc_core::generate::{automaton, formula, snapshot, AutomatonParams, FormulaParams, SnapshotParams};
use dhc_core::rational;
use dhc_core::spatial::{load_snapshot, snapshot_to_json};
use dhc_core::usltr::parse_formula;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn bundled_rules_survive_print_and_parse() {
    for (name, text) in BUNDLED_RULE_FILES {
        let a = parse_rule_file(text).unwrap();
        let printed = print_rule(&a);
        let b = parse_rule_file(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(a, b, "{name}");
        assert_eq!(print_rule(&b), printed, "{name}");
    }
    assert!(bundled_file("ukhc_170.rule").is_some());
}

#[test]
fn generated_automata_survive_print_and_parse() {
    let mut rng = StdRng::seed_from_u64(17);
    for i in 0..100 {
        let a = automaton(&mut rng, &format!("gen_{i}"), &AutomatonParams::default());
        let printed = print_rule(&a);
        let b = parse_rule_file(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(a, b, "{printed}");
    }
}

#[test]
fn generated_formulas_survive_print_and_parse() {
    let mut rng = StdRng::seed_from_u64(99);
    let p = FormulaParams {
        lattice: rational::ratio(1, 2),
        max_multiple: 9,
        ..FormulaParams::default()
    };
    for _ in 0..500 {
        let f = formula(&mut rng, &p);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{f}");
    }
}

#[test]
fn generated_snapshots_survive_json() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..100 {
        let s = snapshot(&mut rng, &SnapshotParams::default());
        let text = snapshot_to_json(&s).to_string();
        assert_eq!(load_snapshot(&text).unwrap(), s, "{text}");
    }
}
