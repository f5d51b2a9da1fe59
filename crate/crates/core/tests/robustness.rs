use dhc_core::dsl::{parse_rule_file, print_rule, BUNDLED_RULE_FILES, BUNDLED_SNAPSHOT_FILES};
use dhc_core::export::{to_xta, xta_check, SpatialMode};
use dhc_core::spatial::{load_snapshot, snapshot_to_json};
use dhc_core::usltr::parse_formula;
use proptest::prelude::*;

/// Applies byte-level edits to `seed` at char boundaries.
fn mutate(seed: &str, edits: &[(usize, u8, char)]) -> String {
    let mut chars: Vec<char> = seed.chars().collect();
    for &(pos, op, c) in edits {
        if chars.is_empty() {
            chars.push(c);
            continue;
        }
        let i = pos % chars.len();
        match op % 3 {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, c),
            _ => chars[i] = c,
        }
    }
    chars.into_iter().collect()
}

fn edits() -> impl Strategy<Value = Vec<(usize, u8, char)>> {
    let c = prop_oneof![
        Just('{'), Just('}'), Just('('), Just(')'), Just(';'), Just('"'), Just('<'), Just('>'),
        Just('-'), Just('/'), Just('0'), Just('9'), Just(' '), Just('\n'), Just('x'), Just('é'),
        any::<char>()
    ];
    prop::collection::vec((any::<usize>(), any::<u8>(), c), 1..8)
}

fn xta_seeds() -> Vec<String> {
    BUNDLED_RULE_FILES
        .iter()
        .flat_map(|(_, t)| {
            let a = parse_rule_file(t).unwrap();
            [SpatialMode::BoolEnv, SpatialMode::Comment].map(|m| to_xta(&a, m).unwrap())
        })
        .collect()
}

const FORMULAS: &[&str] = &[
    "not exists c : pc(c) and not pa(E)",
    "<<(re(E) and not cs) chop (free and not cs) chop (sg(E) and cs)>>",
    "forall c : (re(c) chop l >= size(c)) or l >= 3/2",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn formula_parser_total(i in 0..FORMULAS.len(), e in edits(), junk in ".{0,40}") {
        for text in [mutate(FORMULAS[i], &e), junk] {
            if let Ok(f) = parse_formula(&text) {
                prop_assert_eq!(parse_formula(&f.to_string()), Ok(f));
            }
        }
    }

    #[test]
    fn rule_parser_total(i in 0..BUNDLED_RULE_FILES.len(), e in edits()) {
        let text = mutate(BUNDLED_RULE_FILES[i].1, &e);
        if let Ok(a) = parse_rule_file(&text) {
            prop_assert_eq!(parse_rule_file(&print_rule(&a)), Ok(a));
        }
    }

    #[test]
    fn snapshot_loader_total(i in 0..BUNDLED_SNAPSHOT_FILES.len(), e in edits()) {
        let text = mutate(BUNDLED_SNAPSHOT_FILES[i].1, &e);
        if let Ok(s) = load_snapshot(&text) {
            prop_assert_eq!(load_snapshot(&snapshot_to_json(&s).to_string()).unwrap(), s);
        }
    }

    #[test]
    fn xta_checker_total(i in 0..6usize, e in edits()) {
        let seeds = xta_seeds();
        let _ = xta_check(&mutate(&seeds[i % seeds.len()], &e));
    }
}
