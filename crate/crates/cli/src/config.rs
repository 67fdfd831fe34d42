//! Defaults and the optional key-value configuration file.
//!
//! When the environment variable `DRMLAB_CONFIG` names a file, that file is
//! read as one `key = value` pair per line; blank lines and lines starting
//! with `#` are skipped. Recognized keys mirror the struct fields:
//! `precedence`, `chooser`, `horizon`, `bounds`, `state_cap`. Values use
//! the same syntax as the corresponding command-line flags, so
//! `bounds = max_count=3,horizon=5` configures corpus bounds.
//!
//! Resolution order: built-in defaults, then the configuration file, then
//! command-line flags. Subcommands that take no configurable input never
//! read the file, so `parse` and `eval` behave identically with or without
//! `DRMLAB_CONFIG` set.

use drmlab_core::verifier::CorpusBounds;
use drmlab_core::{ChooserKind, PrecedenceTable, Tick};
use std::path::PathBuf;

pub const ENV_VAR: &str = "DRMLAB_CONFIG";

/// Every tunable shared across subcommands, fully resolved.
#[derive(Debug, Clone)]
pub struct Config {
    pub precedence: PrecedenceTable,
    pub chooser: ChooserKind,
    pub horizon: Tick,
    pub bounds: CorpusBounds,
    pub state_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precedence: PrecedenceTable::default(),
            chooser: ChooserKind::Oma,
            horizon: Tick::new(40),
            bounds: CorpusBounds::default(),
            state_cap: 1_000_000,
        }
    }
}

/// Loads the configuration: the defaults, overlaid with the file named by
/// `DRMLAB_CONFIG` when that variable is set. A set-but-unreadable path is
/// an error, not a silent fallback.
pub fn load() -> Result<Config, String> {
    match std::env::var_os(ENV_VAR) {
        None => Ok(Config::default()),
        Some(path) => {
            let path = PathBuf::from(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            parse(&text, &path.display().to_string())
        }
    }
}

/// Parses configuration text; `origin` prefixes every error location.
pub fn parse(text: &str, origin: &str) -> Result<Config, String> {
    let mut config = Config::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{origin}:{}", i + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{at}: expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "precedence" => {
                config.precedence = value.parse().map_err(|e| format!("{at}: {e}"))?;
            }
            "chooser" => {
                config.chooser = value.parse().map_err(|e| format!("{at}: {e}"))?;
            }
            "horizon" => {
                let n: u64 = value.parse().map_err(|e| format!("{at}: {e}"))?;
                if n == 0 {
                    return Err(format!("{at}: horizon must be at least 1"));
                }
                config.horizon = Tick::new(n);
            }
            "bounds" => {
                config.bounds =
                    CorpusBounds::parse(value).map_err(|e| format!("{at}: {e}"))?;
            }
            "state_cap" => {
                let n: usize = value.parse().map_err(|e| format!("{at}: {e}"))?;
                if n == 0 {
                    return Err(format!("{at}: state_cap must be at least 1"));
                }
                config.state_cap = n;
            }
            other => return Err(format!("{at}: unknown key {other:?}")),
        }
    }
    Ok(config)
}
