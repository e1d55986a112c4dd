//! Canonical JSON form of a deck: keys sorted, integers as integers, every
//! other number printed with six decimals. Equal decks give equal bytes.

use serde::Serialize;
use serde_json::Value;

use crate::model::Deck;

pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn deck_manifest(deck: &Deck) -> String {
    canonical_json(deck).expect("decks always serialise")
}

fn format_float(f: f64) -> String {
    let s = format!("{f:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(0.0)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialise")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(item, level + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&serde_json::to_string(k).expect("strings serialise"));
                out.push_str(": ");
                write_value(&map[k.as_str()], level + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorted_keys_and_fixed_decimals() {
        let v = json!({"b": 1, "a": [0.5, 2.0, -0.0000001], "c": {"z": null, "y": "q\""}});
        assert_eq!(
            canonical_json(&v).unwrap(),
            "{\n  \"a\": [\n    0.500000,\n    2.000000,\n    0.000000\n  ],\n  \"b\": 1,\n  \"c\": {\n    \"y\": \"q\\\"\",\n    \"z\": null\n  }\n}\n"
        );
    }

    #[test]
    fn output_parses_back() {
        let v = json!({"x": [1, 2.25, "s"], "e": {}, "f": []});
        let back: Value = serde_json::from_str(&canonical_json(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }
}
