//! Rule files: parsing, printing and the bundled catalog.

mod catalog;
mod parse;
mod print;

pub use catalog::{
    bundled_file, bundled_rule, bundled_rules, bundled_snapshot, CatalogEntry,
    BUNDLED_RULE_FILES, BUNDLED_SNAPSHOT_FILES,
};
pub use parse::{parse_rule_file, parse_rule_file_with, Diagnostic, DiagnosticKind, RuleError};
pub use print::print_rule;
