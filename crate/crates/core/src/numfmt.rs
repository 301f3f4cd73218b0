//! JSON and CSV text with every float at 17 significant digits.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write;

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize, pretty: bool) {
    let pad = |out: &mut String, n: usize| {
        if pretty {
            out.push('\n');
            out.push_str(&"  ".repeat(n));
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float(n.as_f64().unwrap()));
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                    if flat && pretty {
                        out.push(' ');
                    }
                }
                if !flat {
                    pad(out, indent + 1);
                }
                write_value(out, x, indent + 1, pretty);
            }
            if !flat {
                pad(out, indent);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, x)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(out, x, indent + 1, pretty);
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).unwrap_or(Value::Null);
    let mut out = String::new();
    write_value(&mut out, &value, 0, true);
    out
}

pub fn to_json_compact<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).unwrap_or(Value::Null);
    let mut out = String::new();
    write_value(&mut out, &value, 0, false);
    out
}

/// CSV with a header row; cells are floats, integers or strings.
pub fn to_csv(header: &[&str], rows: &[Vec<Value>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Value::Number(n) if n.is_f64() => float(n.as_f64().unwrap()),
                Value::String(s) => s.clone(),
                other => {
                    let mut s = String::new();
                    write_value(&mut s, other, 0, false);
                    s
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
