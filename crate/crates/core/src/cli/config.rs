//! TOML config files: one table per subcommand, keyed like the flags with
//! dashes replaced by underscores.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{CliError, CliResult};

#[derive(Debug, Default)]
pub(super) struct Config {
    root: Map<String, Value>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::runtime("io", format!("{}: {e}", path.display())))?;
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::validation("invalid-config", format!("{}: {}", path.display(), e.message())))?;
        match serde_json::to_value(table) {
            Ok(Value::Object(root)) => Ok(Self { root }),
            _ => Err(CliError::validation("invalid-config", format!("{}: not a table", path.display()))),
        }
    }

    fn section(&self, path: &[&str]) -> CliResult<Map<String, Value>> {
        let mut node = &self.root;
        for (depth, name) in path.iter().enumerate() {
            match node.get(*name) {
                None => return Ok(Map::new()),
                Some(Value::Object(m)) => node = m,
                Some(_) => {
                    return Err(CliError::validation(
                        "invalid-config",
                        format!("[{}] must be a table", path[..=depth].join(".")),
                    ))
                }
            }
        }
        Ok(node.clone())
    }

    /// Overlays every flag that was given onto the config table. Keys the
    /// subcommand does not know are rejected rather than ignored.
    pub fn merge<A: Serialize>(&self, flags: &A, path: &[&str]) -> CliResult<Value> {
        let flags = match serde_json::to_value(flags) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("argument structs serialize to objects"),
        };
        let mut merged = self.section(path)?;
        if let Some(unknown) = merged.keys().find(|k| !flags.contains_key(*k)) {
            return Err(CliError::validation(
                "invalid-config",
                format!("unknown key `{unknown}` in [{}]", path.join(".")),
            ));
        }
        for (k, v) in flags {
            if !v.is_null() || !merged.contains_key(&k) {
                merged.insert(k, v);
            }
        }
        Ok(Value::Object(merged))
    }
}

/// The effective settings as a TOML table; unset values are listed as
/// comments so every key is visible.
pub(super) fn render_effective(path: &[&str], merged: &Value) -> CliResult<String> {
    let mut out = format!("[{}]\n", path.join("."));
    if let Value::Object(m) = merged {
        for (k, v) in m {
            if v.is_null() {
                out.push_str(&format!("# {k} = (unset)\n"));
                continue;
            }
            let value: toml::Value = serde_json::from_value(v.clone())
                .map_err(|e| CliError::validation("invalid-config", format!("{k}: {e}")))?;
            let mut t = toml::Table::new();
            t.insert(k.clone(), value);
            out.push_str(&toml::to_string(&t).map_err(|e| CliError::runtime("internal", e.to_string()))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Default)]
    struct Flags {
        a: Option<u64>,
        b: Option<String>,
    }

    fn config(text: &str) -> Config {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, text).unwrap();
        Config::load(&p).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let c = config("[x.y]\na = 1\nb = \"cfg\"\n");
        let merged = c.merge(&Flags { a: Some(7), b: None }, &["x", "y"]).unwrap();
        assert_eq!(merged, serde_json::json!({"a": 7, "b": "cfg"}));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let c = config("[x.y]\nzzz = 1\n");
        let err = c.merge(&Flags::default(), &["x", "y"]).unwrap_err();
        assert_eq!(err.code, "invalid-config");
        assert!(err.message.contains("zzz"));
    }

    #[test]
    fn effective_dump_lists_unset_keys() {
        let text = render_effective(&["x", "y"], &serde_json::json!({"a": 1, "b": null})).unwrap();
        assert_eq!(text, "[x.y]\na = 1\n# b = (unset)\n");
    }
}
