use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dhc_core::automata::RuleAutomaton;
use dhc_core::dsl::{parse_rule_file_with, BUNDLED_RULE_FILES, BUNDLED_SNAPSHOT_FILES};
use dhc_core::spatial::{load_snapshot, TrafficSnapshot};
use dhc_core::usltr::ParseOptions;

pub const RULE_PATH_VAR: &str = "DHC_RULE_PATH";

fn bundled(table: &[(&str, &'static str)], name: &str, ext: &str) -> Option<&'static str> {
    let base = Path::new(name).file_name()?.to_str()?;
    table
        .iter()
        .find(|(n, _)| *n == base || n.strip_suffix(ext) == Some(base))
        .map(|(_, t)| *t)
}

/// Literal path, then each `DHC_RULE_PATH` directory, then the bundled
/// files. Returns a display name and the contents.
fn resolve(name: &str, table: &[(&str, &'static str)], ext: &str) -> Result<(String, String)> {
    let p = Path::new(name);
    if p.is_file() {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {name}"))?;
        return Ok((name.to_string(), text));
    }
    if let Some(dirs) = std::env::var_os(RULE_PATH_VAR) {
        for d in std::env::split_paths(&dirs) {
            let cand: PathBuf = d.join(name);
            if cand.is_file() {
                let text = std::fs::read_to_string(&cand)
                    .with_context(|| format!("cannot read {}", cand.display()))?;
                return Ok((cand.display().to_string(), text));
            }
        }
    }
    if let Some(t) = bundled(table, name, ext) {
        return Ok((format!("<bundled>/{name}"), t.to_string()));
    }
    bail!("cannot find `{name}` (looked in the working directory, {RULE_PATH_VAR} and the bundled files)")
}

pub fn read_rule_text(name: &str) -> Result<(String, String)> {
    resolve(name, BUNDLED_RULE_FILES, ".rule")
}

pub fn read_snapshot_text(name: &str) -> Result<(String, String)> {
    resolve(name, BUNDLED_SNAPSHOT_FILES, ".snapshot.json")
}

pub fn load_rule(name: &str, opts: ParseOptions) -> Result<RuleAutomaton> {
    let (shown, text) = read_rule_text(name)?;
    parse_rule_file_with(&text, opts).map_err(|e| {
        let lines: Vec<String> = e.diagnostics.iter().map(|d| format!("{shown}:{d}")).collect();
        anyhow::anyhow!("invalid rule file\n{}", lines.join("\n"))
    })
}

pub fn load_snapshot_file(name: &str) -> Result<TrafficSnapshot> {
    let (shown, text) = read_snapshot_text(name)?;
    load_snapshot(&text).with_context(|| shown.to_string())
}

pub fn is_snapshot_name(name: &str) -> bool {
    name.ends_with(".json")
}
