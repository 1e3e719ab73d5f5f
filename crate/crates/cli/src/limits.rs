use std::path::Path;

use anyhow::{Context, Result};
use cqcount::automata::{DEFAULT_MAX_BAG_SOLUTIONS, DEFAULT_MAX_REACHABLE_SETS};
use cqcount::homsolver::DEFAULT_BRUTE_FORCE_LIMIT;
use cqcount::widths::{DEFAULT_FHW_LIMIT, DEFAULT_TREEWIDTH_LIMIT};
use serde::{Deserialize, Serialize};

/// Environment variable naming a JSON file with default limits.
pub const LIMITS_ENV: &str = "CQCOUNT_LIMITS";

/// Budget caps. Missing keys in a limits file keep their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Assignments enumerated by the brute-force counter.
    pub brute_force: u128,
    /// Largest per-run cap on simulated edge-free calls before giving up.
    pub oracle_calls: u64,
    pub bag_solutions: usize,
    pub reachable_sets: usize,
    pub exact_fhw_vertices: usize,
    pub exact_treewidth_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            brute_force: DEFAULT_BRUTE_FORCE_LIMIT,
            oracle_calls: 1 << 24,
            bag_solutions: DEFAULT_MAX_BAG_SOLUTIONS,
            reachable_sets: DEFAULT_MAX_REACHABLE_SETS,
            exact_fhw_vertices: DEFAULT_FHW_LIMIT,
            exact_treewidth_vertices: DEFAULT_TREEWIDTH_LIMIT,
        }
    }
}

impl Limits {
    pub fn from_file(path: &Path) -> Result<Limits> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading limits file {}", path.display()))?;
        let limits = serde_json::from_str(&text)
            .with_context(|| format!("parsing limits file {}", path.display()))?;
        Ok(limits)
    }

    /// Defaults, overridden by the file named in the environment if set.
    pub fn load() -> Result<Limits> {
        match std::env::var_os(LIMITS_ENV) {
            Some(p) if !p.is_empty() => Limits::from_file(Path::new(&p)),
            _ => Ok(Limits::default()),
        }
    }
}
