//! Flat `key=value` and single-object JSON reports.

use fblsec_core::experiments::format_f64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Kv,
    Json,
}

/// Ordered report entries.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(&'static str, Value)>,
}

impl Report {
    pub fn float(&mut self, key: &'static str, v: f64) -> &mut Self {
        let value = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        self.entries.push((key, value));
        self
    }

    pub fn opt_float(&mut self, key: &'static str, v: Option<f64>) -> &mut Self {
        if let Some(v) = v {
            self.float(key, v);
        }
        self
    }

    pub fn int(&mut self, key: &'static str, v: u64) -> &mut Self {
        self.entries.push((key, Value::from(v)));
        self
    }

    pub fn bool(&mut self, key: &'static str, v: bool) -> &mut Self {
        self.entries.push((key, Value::Bool(v)));
        self
    }

    pub fn text(&mut self, key: &'static str, v: &str) -> &mut Self {
        self.entries.push((key, Value::String(v.to_owned())));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Kv => {
                let mut s = String::new();
                for (k, v) in &self.entries {
                    s.push_str(k);
                    s.push('=');
                    s.push_str(&kv_value(v));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let map: Map<String, Value> = self
                    .entries
                    .iter()
                    .map(|(k, v)| ((*k).to_owned(), v.clone()))
                    .collect();
                let mut s =
                    serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn kv_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}
