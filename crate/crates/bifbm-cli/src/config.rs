//! Configuration merging: defaults, then JSON file fields, then explicit
//! flags. The merged effective values are echoed into every report.

use std::path::Path;

use serde_json::{Map, Value};

pub fn load_file(path: Option<&Path>) -> Result<Map<String, Value>, String> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(format!("{}: top level must be a JSON object", path.display())),
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}

/// Accumulates effective values with flag > file > default priority.
pub struct Merged<'a> {
    file: &'a Map<String, Value>,
    pub effective: Map<String, Value>,
}

impl<'a> Merged<'a> {
    pub fn new(file: &'a Map<String, Value>) -> Self {
        Self {
            file,
            effective: Map::new(),
        }
    }

    fn pick<T: Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
        from_file: impl Fn(&Value) -> Option<T>,
        to_value: impl Fn(&T) -> Value,
    ) -> Result<T, String> {
        let v = if let Some(v) = flag {
            v
        } else if let Some(raw) = self.file.get(key) {
            from_file(raw).ok_or_else(|| format!("field '{key}' has the wrong type"))?
        } else {
            default
        };
        self.effective.insert(key.to_string(), to_value(&v));
        Ok(v)
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, String> {
        self.pick(key, flag, default, Value::as_f64, |v| {
            serde_json::json!(v)
        })
    }

    pub fn usize(
        &mut self,
        key: &str,
        flag: Option<usize>,
        default: usize,
    ) -> Result<usize, String> {
        self.pick(
            key,
            flag,
            default,
            |v| v.as_u64().map(|u| u as usize),
            |v| serde_json::json!(v),
        )
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, String> {
        self.pick(key, flag, default, Value::as_u64, |v| serde_json::json!(v))
    }

    pub fn string(
        &mut self,
        key: &str,
        flag: Option<String>,
        default: &str,
    ) -> Result<String, String> {
        self.pick(
            key,
            flag,
            default.to_string(),
            |v| v.as_str().map(|s| s.to_string()),
            |v| Value::String(v.clone()),
        )
    }
}
