use std::fs;
use std::path::Path;

use serde_json::Value;

use concert_core::io::fmt_num;

/// Flattens a JSON value into `key,value` rows with dotted keys.
pub fn flatten_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    walk(v, String::new(), &mut rows);
    let mut out = String::from("key,value\n");
    for (k, val) in rows {
        out.push_str(&k);
        out.push(',');
        out.push_str(&val);
        out.push('\n');
    }
    out
}

fn walk(v: &Value, prefix: String, rows: &mut Vec<(String, String)>) {
    let join = |p: &str, k: &str| if p.is_empty() { k.to_string() } else { format!("{p}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                walk(x, join(&prefix, k), rows);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                walk(x, join(&prefix, &i.to_string()), rows);
            }
        }
        Value::Null => rows.push((prefix, String::new())),
        Value::Bool(b) => rows.push((prefix, b.to_string())),
        Value::Number(n) => rows.push((prefix, n.as_f64().map_or_else(|| n.to_string(), fmt_num))),
        Value::String(s) => rows.push((prefix, s.clone())),
    }
}

pub fn write(path: &Path, contents: &str) -> std::io::Result<()> {
    fs::write(path, contents)
}
