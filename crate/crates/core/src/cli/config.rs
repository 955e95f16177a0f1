//! Settings resolution: defaults, then the `--config` file, then flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Error;

use super::CliError;

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";

fn as_object(v: Value, what: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!("{what} must be a JSON object"))),
    }
}

/// Merges the defaults of `T`, the optional JSON `file` and the flags given on
/// the command line (`flags` with `null` for absent options, plus `extra`).
pub(crate) fn resolve<T: Serialize + DeserializeOwned + Default>(
    command: &str,
    file: Option<&Path>,
    flags: &impl Serialize,
    extra: &[(&str, Value)],
) -> Result<T, CliError> {
    let mut merged = as_object(serde_json::to_value(T::default()).map_err(Error::from)?, "defaults")?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Run(Error::io(path, e)))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut from_file = as_object(value, &path.display().to_string())?;
        if let Some(c) = from_file.remove("command") {
            if c != Value::String(command.into()) {
                return Err(CliError::Usage(format!(
                    "{} is a config for {c}, not for {command}",
                    path.display()
                )));
            }
        }
        for (k, v) in from_file {
            if !merged.contains_key(&k) {
                return Err(CliError::Usage(format!(
                    "{}: unknown setting {k:?} for {command}",
                    path.display()
                )));
            }
            merged.insert(k, v);
        }
    }
    let given = as_object(serde_json::to_value(flags).map_err(Error::from)?, "flags")?;
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    for (k, v) in extra {
        merged.insert(k.to_string(), v.clone());
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("invalid {command} settings: {e}")))
}

/// Writes `settings` plus the subcommand name to `dir/config.resolved.json`.
pub(crate) fn write_resolved<T: Serialize>(
    dir: &Path,
    command: &str,
    settings: &T,
) -> crate::Result<()> {
    let mut obj = match serde_json::to_value(settings)? {
        Value::Object(m) => m,
        _ => unreachable!("settings serialize as objects"),
    };
    obj.insert("command".into(), Value::String(command.into()));
    let path = dir.join(RESOLVED_CONFIG_FILE);
    let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Usage error for a required setting that is neither a flag nor in the file.
pub(crate) fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| {
        CliError::Usage(format!(
            "the following required argument was not provided: {flag}"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct S {
        a: u32,
        b: Option<String>,
        c: bool,
    }

    #[derive(Serialize)]
    struct Flags {
        a: Option<u32>,
        b: Option<String>,
    }

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.json");
        std::fs::write(&f, r#"{"command": "x", "a": 4, "b": "file", "c": true}"#).unwrap();
        let s: S = resolve("x", Some(&f), &Flags { a: None, b: Some("flag".into()) }, &[]).unwrap();
        assert_eq!(s, S { a: 4, b: Some("flag".into()), c: true });
        let s: S = resolve("x", None, &Flags { a: None, b: None }, &[("c", Value::Bool(true))]).unwrap();
        assert_eq!(s, S { a: 0, b: None, c: true });
    }

    #[test]
    fn bad_files_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.json");
        let flags = Flags { a: None, b: None };
        for text in [r#"{"zzz": 1}"#, r#"{"command": "y"}"#, r#"[1]"#, r#"{"a": "four"}"#, "{"] {
            std::fs::write(&f, text).unwrap();
            let r: Result<S, _> = resolve("x", Some(&f), &flags, &[]);
            assert!(matches!(r, Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn resolved_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let s = S { a: 9, b: Some("q".into()), c: true };
        write_resolved(dir.path(), "x", &s).unwrap();
        let flags = Flags { a: None, b: None };
        let back: S = resolve("x", Some(&dir.path().join(RESOLVED_CONFIG_FILE)), &flags, &[]).unwrap();
        assert_eq!(back, s);
    }
}
