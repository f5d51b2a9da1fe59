//! `dhc`: evaluate spatial formulas, run rule automata, look for conflicts
//! between rules and export them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod files;

#[derive(Parser)]
#[command(name = "dhc", version, about = "Traffic-rule automata: evaluation, reachability, conflicts and export")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Print a machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include split points, zones and scenarios in the report.
    #[arg(long, global = true)]
    pub explain: bool,
    /// Cross-check the result with the brute-force engine.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Write the report to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Read `<<f>>` as the somewhere modality (on) or as plain grouping (off).
    #[arg(long, global = true, value_enum, default_value_t = Toggle::On)]
    pub somewhere_brackets: Toggle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Xta,
    Dot,
    Bdi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    BoolEnv,
    Comment,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed formula on a snapshot.
    Eval {
        formula: String,
        snapshot: String,
        /// Evaluate on [LO, HI] instead of the whole extent.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        view: Option<Vec<String>>,
    },
    /// Reachable locations of one rule under a set of scenarios.
    Reach {
        rule: String,
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Location to report a witness for. Defaults to the locations
        /// without outgoing transitions.
        #[arg(long)]
        target: Vec<String>,
    },
    /// Compose rules and search for timelocks, permission conflicts and
    /// contradictory guards. Files ending in `.json` are scenarios.
    Conflicts {
        #[arg(required = true)]
        files: Vec<String>,
        /// `default` for the road universe, or a universe parameter file.
        #[arg(long)]
        universe: Option<String>,
    },
    /// Export a rule as UPPAAL XTA, Graphviz DOT or BDI plan sketches.
    /// Several rules are exported as their product (DOT only).
    Export {
        #[arg(required = true)]
        rules: Vec<String>,
        #[arg(long, value_enum)]
        format: Format,
        /// How spatial guards appear in XTA.
        #[arg(long, value_enum, default_value_t = Mode::BoolEnv)]
        mode: Mode,
    },
    /// Check rule files and snapshot files (`.json`).
    Validate {
        #[arg(required = true)]
        files: Vec<String>,
    },
}

pub struct Outcome {
    pub code: u8,
    pub text: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Eval { formula, snapshot, view } => commands::eval(g, formula, snapshot, view.as_deref()),
        Command::Reach { rule, scenarios, target } => commands::reach(g, rule, scenarios, target),
        Command::Conflicts { files, universe } => commands::conflicts(g, files, universe.as_deref()),
        Command::Export { rules, format, mode } => commands::export(g, rules, *format, *mode),
        Command::Validate { files } => commands::validate(g, files),
    };
    match result {
        Ok(o) => {
            let written = match &g.out {
                Some(p) => std::fs::write(p, &o.text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => {
                    print!("{}", o.text);
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(o.code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
