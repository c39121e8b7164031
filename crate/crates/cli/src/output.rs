use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

/// TSV cell: strings verbatim with tabs and newlines escaped, `null` as
/// `n/a`, nested values as compact JSON.
pub fn cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => "n/a".to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    };
    raw.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

/// One record: `key<TAB>value` lines, or a pretty JSON object.
pub fn record(format: Format, value: &Value) -> String {
    match format {
        Format::Json => pretty(value),
        Format::Tsv => {
            let mut out = String::new();
            if let Value::Object(map) = value {
                for (k, v) in map {
                    out.push_str(&format!("{k}\t{}\n", cell(v)));
                }
            } else {
                out.push_str(&cell(value));
                out.push('\n');
            }
            out
        }
    }
}

/// A table with a fixed column order. In JSON the rows go under `rows`
/// next to the fields of `extra`; in TSV `extra` follows as `# key value`
/// lines.
pub fn table(format: Format, columns: &[&str], rows: &[Value], extra: Map<String, Value>) -> String {
    match format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("rows".into(), Value::Array(rows.to_vec()));
            obj.extend(extra);
            pretty(&Value::Object(obj))
        }
        Format::Tsv => {
            let mut out = columns.join("\t");
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| row.get(*c).map(cell).unwrap_or_else(|| "-".into()))
                    .collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
            for (k, v) in extra {
                out.push_str(&format!("# {k}\t{}\n", cell(&v)));
            }
            out
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tsv_cells() {
        assert_eq!(cell(&json!(null)), "n/a");
        assert_eq!(cell(&json!("a\tb\nc")), "a\\tb\\nc");
        assert_eq!(cell(&json!([1, 2])), "[1,2]");
    }

    #[test]
    fn tables() {
        let rows = vec![json!({"a": 1, "b": true}), json!({"a": 2, "error": "x"})];
        let t = table(Format::Tsv, &["a", "b"], &rows, Map::new());
        assert_eq!(t, "a\tb\n1\ttrue\n2\t-\n");
        let j: Value = serde_json::from_str(&table(Format::Json, &["a"], &rows, Map::new())).unwrap();
        assert_eq!(j["rows"][1]["error"], "x");
    }
}
