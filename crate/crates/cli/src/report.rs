//! Reports are JSON values; the text form is an indented outline of the same data.

use serde_json::Value;
use std::fmt::Write as _;

pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(_) | Value::Array(_) => block(&mut out, v, 0),
        other => {
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

fn block(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Array(a) if a.is_empty() => {
                        let _ = writeln!(out, "{pad}{k}: []");
                    }
                    Value::Object(o) if o.is_empty() => {
                        let _ = writeln!(out, "{pad}{k}: {{}}");
                    }
                    x if is_scalar(x) => {
                        let _ = writeln!(out, "{pad}{k}: {}", scalar(x));
                    }
                    x => {
                        let _ = writeln!(out, "{pad}{k}:");
                        block(out, x, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                if is_scalar(x) {
                    let _ = writeln!(out, "{pad}- {}", scalar(x));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    block(out, x, depth + 1);
                }
            }
        }
        x => {
            let _ = writeln!(out, "{pad}{}", scalar(x));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn renders_nested_values() {
        let v = json!({"a": 1, "b": {"c": [1, "x"], "d": null}, "e": []});
        assert_eq!(
            to_text(&v),
            "a: 1\nb:\n  c:\n    - 1\n    - x\n  d: -\ne: []\n"
        );
    }
}
