use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::fail::CliError;

/// Overlays the flags that were given on the JSON object in `config`.
/// Keys not known to the subcommand are rejected.
pub fn merge<T>(flags: &T, config: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let Some(path) = config else {
        return Ok(reparse(flags)?);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut base: Map<String, Value> = match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(CliError::Config("config must be a JSON object".into())),
        Err(e) => return Err(CliError::Config(format!("invalid JSON in {}: {e}", path.display()))),
    };
    let known = object(&T::default())?;
    if let Some(key) = base.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Config(format!("unknown config key '{key}'")));
    }
    for (k, v) in object(flags)? {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

fn object<T: Serialize>(value: &T) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(value) {
        Ok(Value::Object(m)) => Ok(m),
        _ => Err(CliError::Config("arguments do not form an object".into())),
    }
}

fn reparse<T: Serialize + DeserializeOwned>(flags: &T) -> Result<T, CliError> {
    serde_json::to_value(flags).and_then(serde_json::from_value).map_err(|e| CliError::Config(e.to_string()))
}

/// `lo:hi[:step]`, inclusive.
pub fn parse_range(s: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("invalid range '{s}': expected lo:hi[:step]")))
    };
    let (lo, hi, step) = match parts.as_slice() {
        [lo, hi] => (num(lo)?, num(hi)?, 10),
        [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
        _ => return Err(CliError::Config(format!("invalid range '{s}': expected lo:hi[:step]"))),
    };
    if lo == 0 || hi < lo || step == 0 {
        return Err(CliError::Config(format!("invalid range '{s}'")));
    }
    Ok((lo..=hi).step_by(step).collect())
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    let out: Result<Vec<T>, _> = s.split(',').map(|p| p.trim().parse::<T>()).collect();
    match out {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Config(format!("invalid {what} list '{s}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("20:50").unwrap(), vec![20, 30, 40, 50]);
        assert_eq!(parse_range("5:9:2").unwrap(), vec![5, 7, 9]);
        assert!(parse_range("9:5").is_err());
        assert!(parse_range("0:5").is_err());
        assert!(parse_range("a:b").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("1e-3, 0.5", "x").unwrap(), vec![1e-3, 0.5]);
        assert!(parse_list::<u64>("1,x", "x").is_err());
    }
}
