//! `key = value` configuration files.
//!
//! Entries become flags placed right after the subcommand name, so anything
//! given on the command line (which comes later and overrides) wins over
//! the file, and the file wins over built-in defaults.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

/// Problems reading or interpreting a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Unreadable(String),
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    BadSwitch { line: usize, key: String, value: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Unreadable(msg) => write!(f, "cannot read config file: {msg}"),
            ConfigError::Syntax { line, text } => {
                write!(f, "config line {line}: expected `key = value`, got {text:?}")
            }
            ConfigError::UnknownKey { line, key } => {
                write!(f, "config line {line}: unknown key {key:?} for this subcommand")
            }
            ConfigError::BadSwitch { line, key, value } => {
                write!(f, "config line {line}: switch {key} takes true or false, got {value:?}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.push((i + 1, key, value));
    }
    Ok(out)
}

/// Location of `--config` in `argv`, if any, and its path.
fn find_config(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

/// Expand `argv` (without the program name) with the entries of the file
/// named by `--config`.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = find_config(&argv) else {
        return Ok(argv);
    };
    let Some(sub_name) = argv.first().map(|s| s.to_string_lossy().into_owned()) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Unreadable(format!("{}: {e}", path.display())))?;
    let pairs = parse_pairs(&text)?;

    let cmd = Cli::command();
    // Unknown subcommands are left for clap to report.
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let mut injected: Vec<OsString> = Vec::new();
    for (line, key, value) in pairs {
        if key == "config" {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            return Err(ConfigError::UnknownKey { line, key });
        };
        let flag = format!("--{key}");
        if arg.get_action().takes_values() {
            injected.push(flag.into());
            injected.push(value.into());
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => injected.push(flag.into()),
                "false" | "no" | "0" => {}
                _ => return Err(ConfigError::BadSwitch { line, key, value }),
            }
        }
    }
    let mut out = Vec::with_capacity(argv.len() + injected.len());
    out.push(argv[0].clone());
    out.extend(injected);
    out.extend(argv.into_iter().skip(1));
    Ok(out)
}
