//! Scenario files, batch execution and exports used by the binary.

pub mod batch;
pub mod export;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use batch::{run_batch, run_scenario, BatchEntry, BatchSummary, ScenarioRun};
pub use export::{emit_trajectory, read_trajectory};
pub use scenario::{parse_scenario, parse_scenario_with_label, Artifact, ParseError, Scenario};

/// Expands directories into their `*.toml` files, sorted by name.
pub fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| format!("{}: {e}", path.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string())
}

/// Reads and parses one scenario file, applying CLI overrides.
pub fn load_entry(path: &Path, grid_n: Option<usize>, seed: Option<u64>) -> BatchEntry {
    let name = stem(path);
    let scenario = fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|text| {
            parse_scenario_with_label(&text, &name)
                .and_then(|s| s.with_overrides(grid_n, seed))
                .map_err(|e| format!("{}: {e}", path.display()))
        });
    BatchEntry { name, scenario }
}
