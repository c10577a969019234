//! Optional TOML config file whose `[subcommand]` tables mirror the flags.
//!
//! ```toml
//! [train]
//! ngram = 5
//! alpha = 1.0
//!
//! [sweep]
//! lengths = [15, 30, 50, 100, 200, 300]
//! ```
//!
//! Values from the file are spliced in right after the subcommand name, so
//! flags given on the command line override them.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Removes `--config <path>` / `--config=<path>` from `args` and returns the path.
pub fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<OsString>> {
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--" {
            break;
        }
        if arg == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a path");
            }
            let path = args.remove(i + 1);
            args.remove(i);
            return Ok(Some(path));
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            let path = OsString::from(path);
            args.remove(i);
            return Ok(Some(path));
        }
        i += 1;
    }
    Ok(None)
}

fn value_to_arg(key: &str, value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| value_to_arg(key, v))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        other => bail!("config key {key:?}: unsupported value {other}"),
    })
}

/// Flag arguments for `subcommand` from the config file at `path`.
pub fn config_args(path: &Path, subcommand: &str) -> Result<Vec<OsString>> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = raw.parse().with_context(|| format!("parsing config {}", path.display()))?;
    let Some(section) = table.get(subcommand) else {
        return Ok(Vec::new());
    };
    let Some(section) = section.as_table() else {
        bail!("config section [{subcommand}] is not a table");
    };
    let mut out = Vec::new();
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            v => {
                out.push(flag.into());
                out.push(value_to_arg(key, v)?.into());
            }
        }
    }
    Ok(out)
}

/// Index of the subcommand name in `args` (first non-flag argument).
pub fn subcommand_index(args: &[OsString]) -> Option<usize> {
    args.iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.to_string_lossy().starts_with('-'))
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_config_flag() {
        let mut args: Vec<OsString> = ["zalid", "--config", "c.toml", "train", "--alpha", "2"].map(OsString::from).to_vec();
        assert_eq!(take_config_path(&mut args).unwrap(), Some("c.toml".into()));
        assert_eq!(args, ["zalid", "train", "--alpha", "2"].map(OsString::from).to_vec());
        assert_eq!(subcommand_index(&args), Some(1));
    }

    #[test]
    fn section_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[sweep]\nlengths = [15, 30]\nnb_only = true\n[train]\nalpha = 0.5\n").unwrap();
        let args = config_args(&path, "sweep").unwrap();
        assert_eq!(args, ["--lengths", "15,30", "--nb-only"].map(OsString::from).to_vec());
        assert!(config_args(&path, "clean").unwrap().is_empty());
    }
}
