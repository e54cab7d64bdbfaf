//! Pretty JSON that keeps short numeric arrays on one line, so matrices read
//! as rows. Key order is insertion order.

use serde_json::Value;

const INLINE_WIDTH: usize = 72;

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Scalars, and arrays nested at most two deep whose leaves are scalars.
fn inline(v: &Value, depth: usize) -> Option<String> {
    match v {
        Value::Array(items) => {
            if depth > 2 {
                return None;
            }
            let parts = items
                .iter()
                .map(|x| if is_scalar(x) { Some(x.to_string()) } else { inline(x, depth + 1) })
                .collect::<Option<Vec<_>>>()?;
            let s = format!("[{}]", parts.join(", "));
            (s.len() <= INLINE_WIDTH).then_some(s)
        }
        Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

fn write(v: &Value, indent: usize, out: &mut String) {
    if let Some(s) = inline(v, 1) {
        out.push_str(&s);
        return;
    }
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Renders `v` with a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn matrices_stay_on_one_line() {
        let v = json!({"a": [[1, 0], [0, 1]], "b": null, "c": {"d": [1, 2]}});
        assert_eq!(
            to_string(&v),
            "{\n  \"a\": [[1, 0], [0, 1]],\n  \"b\": null,\n  \"c\": {\n    \"d\": [1, 2]\n  }\n}\n"
        );
    }

    #[test]
    fn deep_arrays_break() {
        let v = json!([[[[1]]]]);
        assert_eq!(to_string(&v), "[\n  [\n    [[1]]\n  ]\n]\n");
        let parsed: Value = serde_json::from_str(&to_string(&v)).unwrap();
        assert_eq!(parsed, v);
    }
}
