//! Flat `key = value` config files merged into the argument list.

use std::ffi::OsString;
use std::path::Path;

use symavg_core::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys use the long flag name without dashes.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn has_flag(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let eq = format!("--{key}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&eq)
    })
}

/// Appends config entries not already given on the command line. Values
/// `true`/`false` toggle boolean flags.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))?;
    let mut merged = args.clone();
    for (key, value) in parse_config(&text)? {
        if key == "config" || has_flag(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                merged.push(format!("--{key}").into());
                merged.push(value.into());
            }
        }
    }
    Ok(merged)
}
