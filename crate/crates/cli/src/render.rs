//! Report encodings. Every report is first turned into a JSON value, so
//! the JSON and CSV forms print the very same shortest round-trip digits.

use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Leaves of `v` as `(dotted key, value)` in document order. Array
/// elements are keyed by index.
pub fn flatten(v: &Value) -> Vec<(String, &Value)> {
    fn walk<'a>(prefix: String, v: &'a Value, out: &mut Vec<(String, &'a Value)>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) if !m.is_empty() => {
                for (k, x) in m {
                    walk(join(k), x, out);
                }
            }
            Value::Array(a) if !a.is_empty() => {
                for (i, x) in a.iter().enumerate() {
                    walk(join(&i.to_string()), x, out);
                }
            }
            _ => out.push((prefix, v)),
        }
    }
    let mut out = Vec::new();
    walk(String::new(), v, &mut out);
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.5}", n.as_f64().unwrap_or(f64::NAN)),
        other => plain(other),
    }
}

pub fn render(v: &Value, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Json => {
            s = v.to_string();
            s.push('\n');
        }
        Format::Csv => {
            s.push_str("key,value\n");
            for (k, x) in flatten(v) {
                s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&plain(x))));
            }
        }
        Format::Text => {
            for (k, x) in flatten(v) {
                s.push_str(&format!("{k}: {}\n", text_value(x)));
            }
        }
    }
    s
}
