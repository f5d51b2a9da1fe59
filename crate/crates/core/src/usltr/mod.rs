//! The spatial interval logic: syntax, exact evaluation, a brute-force
//! reference evaluator, and bounded satisfiability search.

mod ast;
mod eval;
mod oracle;
mod parser;
mod search;

pub use ast::{free_variables, CarRef, Formula, LenExpr};
pub use eval::{
    evaluate, evaluate_explained, split_candidates, EvalError, Evaluator, SplitWitness, Valuation,
};
pub use oracle::{data_lattice, evaluate_oracle, oracle_step};
pub use parser::{
    parse_closed_formula, parse_formula, parse_formula_with, ParseError, ParseErrorKind,
    ParseOptions, MAX_NESTING,
};
pub use search::{satisfiable_in, satisfiable_in_universe, ViewPolicy};
