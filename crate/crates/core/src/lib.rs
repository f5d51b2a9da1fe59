//! Machine-readable traffic rules: a spatial interval logic over traffic
//! snapshots, rule automata with clocks and spatial guards, and checks for
//! conflicts between composed rules.
//!
//! ```
//! use dhc_core::automata::reach;
//! use dhc_core::dsl::{bundled_rule, bundled_snapshot};
//!
//! let rule = bundled_rule("ukhc_170").unwrap().automaton;
//! let go = bundled_snapshot("go.snapshot.json").unwrap();
//! assert!(reach(&rule, &[go]).unwrap().is_reachable("L3"));
//! ```

pub mod rational;
pub mod spatial;
pub mod usltr;
pub mod automata;
pub mod dsl;
pub mod compose;
pub mod export;
pub mod generate;
