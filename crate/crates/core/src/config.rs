//! JSON parameter files, environment overrides and dotted parameter paths.
//!
//! A config file is a serialized [`SystemParams`]; keys starting with `_` are
//! free-form notes. `TRIPOD_ATOM__DELTA1=10.0` overrides `atom.delta1`.

use std::path::Path;

use serde_json::Value;

use crate::error::{Result, TripodError};
use crate::params::SystemParams;

pub const ENV_PREFIX: &str = "TRIPOD_";

fn schema() -> Value {
    serde_json::to_value(SystemParams::reference()).expect("params serialize")
}

/// Every settable dotted path, e.g. `atom.delta1`, `medium.length`, `convention`.
pub fn param_paths() -> Vec<String> {
    fn walk(v: &Value, prefix: &str, out: &mut Vec<String>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(x, &p, out);
                }
            }
            _ => out.push(prefix.to_string()),
        }
    }
    let mut out = Vec::new();
    walk(&schema(), "", &mut out);
    out
}

/// Fails with a config error unless `path` names a leaf of the parameter schema.
pub fn check_path(path: &str) -> Result<()> {
    if param_paths().iter().any(|p| p == path) {
        Ok(())
    } else {
        Err(TripodError::Config(format!("unknown parameter path '{path}'")))
    }
}

fn check_keys(v: &Value, schema: &Value, at: &str) -> Result<()> {
    if let (Value::Object(m), Value::Object(s)) = (v, schema) {
        for (k, x) in m {
            if k.starts_with('_') {
                continue;
            }
            let here = if at.is_empty() { k.clone() } else { format!("{at}.{k}") };
            match s.get(k) {
                Some(sub) => check_keys(x, sub, &here)?,
                None => return Err(TripodError::Config(format!("unknown key '{here}'"))),
            }
        }
    }
    Ok(())
}

fn strip_notes(v: &mut Value) {
    if let Value::Object(m) = v {
        m.retain(|k, _| !k.starts_with('_'));
        m.values_mut().for_each(strip_notes);
    }
}

fn decode(mut v: Value) -> Result<SystemParams> {
    check_keys(&v, &schema(), "")?;
    strip_notes(&mut v);
    let p: SystemParams = serde_json::from_value(v).map_err(|e| TripodError::Config(e.to_string()))?;
    p.validate()?;
    Ok(p)
}

pub fn from_json_str(s: &str) -> Result<SystemParams> {
    decode(serde_json::from_str(s).map_err(|e| TripodError::Config(e.to_string()))?)
}

pub fn from_file(path: &Path) -> Result<SystemParams> {
    let s = std::fs::read_to_string(path).map_err(|e| TripodError::Config(format!("{}: {e}", path.display())))?;
    from_json_str(&s)
}

/// Returns a copy with one parameter replaced. Strings that parse as JSON are
/// taken as JSON (numbers, booleans); anything else is a string.
pub fn set_param(p: &SystemParams, path: &str, value: &str) -> Result<SystemParams> {
    let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    set_value(p, path, parsed)
}

pub fn set_value(p: &SystemParams, path: &str, value: Value) -> Result<SystemParams> {
    check_path(path)?;
    let mut v = serde_json::to_value(p).expect("params serialize");
    let mut slot = &mut v;
    for key in path.split('.') {
        let obj = slot.as_object_mut().ok_or_else(|| TripodError::Config(format!("'{path}' is not settable")))?;
        slot = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    *slot = value;
    decode(v).map_err(|e| match e {
        TripodError::Config(m) => TripodError::Config(format!("{path}: {m}")),
        other => other,
    })
}

pub fn get_param(p: &SystemParams, path: &str) -> Result<Value> {
    check_path(path)?;
    let v = serde_json::to_value(p).expect("params serialize");
    Ok(path.split('.').fold(&v, |x, k| &x[k]).clone())
}

/// `TRIPOD_MEDIUM__LENGTH` → `medium.length`.
pub fn env_key_to_path(key: &str) -> Option<String> {
    key.strip_prefix(ENV_PREFIX).map(|k| k.to_lowercase().replace("__", "."))
}

/// Applies every `TRIPOD_*` variable in `vars`, in sorted key order.
pub fn apply_env<I: IntoIterator<Item = (String, String)>>(p: &SystemParams, vars: I) -> Result<SystemParams> {
    let mut pairs: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    pairs.sort();
    let mut out = *p;
    for (k, v) in pairs {
        let path = env_key_to_path(&k).expect("prefix checked");
        out = set_param(&out, &path, &v).map_err(|e| TripodError::Config(format!("{k}: {e}")))?;
    }
    Ok(out)
}

/// File (or the built-in reference set) followed by process environment overrides.
pub fn load(path: Option<&Path>) -> Result<SystemParams> {
    let base = match path {
        Some(p) => from_file(p)?,
        None => SystemParams::reference(),
    };
    apply_env(&base, std::env::vars())
}
