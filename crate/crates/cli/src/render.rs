//! Rendering of JSON reports as JSON, CSV or indented text.

use clap::ValueEnum;
use serde_json::Value;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Human,
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv(value),
        Format::Human => {
            let mut out = String::new();
            human(value, 0, &mut out);
            out
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Arrays of objects become a table with one row per element; anything else
/// becomes `key,value` rows with dotted keys.
fn csv(value: &Value) -> String {
    let mut out = String::new();
    if let Value::Array(rows) = value {
        if rows.iter().all(Value::is_object) && !rows.is_empty() {
            let flat: Vec<Vec<(String, String)>> = rows
                .iter()
                .map(|r| {
                    let mut cells = Vec::new();
                    flatten("", r, &mut cells);
                    cells
                })
                .collect();
            let header: Vec<String> = flat[0].iter().map(|(k, _)| quote(k)).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in flat {
                let cells: Vec<String> = row.iter().map(|(_, v)| quote(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            return out;
        }
    }
    let mut cells = Vec::new();
    flatten("", value, &mut cells);
    out.push_str("key,value\n");
    for (k, v) in cells {
        out.push_str(&format!("{},{}\n", quote(&k), quote(&v)));
    }
    out
}

fn human(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat_array(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        human(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", inline(x))),
                }
            }
        }
        Value::Array(items) if !is_flat_array(v) => {
            for (i, x) in items.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                human(x, indent + 1, out);
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}

fn is_flat_array(v: &Value) -> bool {
    matches!(v, Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()))
}

fn inline(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => scalar(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_shapes() {
        let table = json!([{"k": 3, "c": 2.5}, {"k": 4, "c": 2.75}]);
        assert_eq!(render(&table, Format::Csv), "c,k\n2.5,3\n2.75,4\n");
        let flat = json!({"a": {"b": 1}, "s": "x,y"});
        assert_eq!(render(&flat, Format::Csv), "key,value\na.b,1\ns,\"x,y\"\n");
    }

    #[test]
    fn human_nesting() {
        let v = json!({"verdict": "yes", "interval": {"lower": 1.0, "upper": null}, "xs": [1, 2]});
        assert_eq!(
            render(&v, Format::Human),
            "interval:\n  lower: 1.0\n  upper: \nverdict: yes\nxs: 1, 2\n"
        );
    }
}
