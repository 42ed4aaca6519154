use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

pub fn render(doc: &Value, format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => csv_table(doc),
        Format::Pretty => {
            let mut out = String::new();
            for (k, v) in flatten(doc) {
                out.push_str(&format!("{k}: {v}\n"));
            }
            Ok(out)
        }
    }
}

/// A report with a `series` becomes one row per series point; anything
/// else becomes `key,value` rows of the flattened document.
fn csv_table(doc: &Value) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let series = doc.pointer("/report/series").and_then(Value::as_array).filter(|s| !s.is_empty());
    let fail = |e: csv::Error| e.to_string();
    match series {
        Some(rows) => {
            let header = ["n", "size", "log_size", "diff"];
            w.write_record(header).map_err(fail)?;
            for r in rows {
                w.write_record(header.iter().map(|h| r.get(*h).map(scalar).unwrap_or_default())).map_err(fail)?;
            }
        }
        None => {
            w.write_record(["key", "value"]).map_err(fail)?;
            for (k, v) in flatten(doc) {
                w.write_record([k, v]).map_err(fail)?;
            }
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(doc: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(doc, String::new(), &mut out);
    out
}

fn walk(v: &Value, prefix: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                walk(x, join(k), out);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) && items.len() <= 16 => {
            out.push((prefix, v.to_string()));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                walk(x, join(&i.to_string()), out);
            }
        }
        other => out.push((prefix, scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening() {
        let doc = json!({ "a": { "b": 1, "c": [1, 2] }, "d": "x" });
        assert_eq!(
            flatten(&doc),
            vec![("a.b".into(), "1".into()), ("a.c".into(), "[1,2]".into()), ("d".into(), "x".into())]
        );
    }

    #[test]
    fn series_csv() {
        let doc = json!({ "report": { "series": [{ "n": 1, "size": 2, "log_size": 0.5 }] } });
        assert_eq!(render(&doc, Format::Csv).unwrap(), "n,size,log_size,diff\n1,2,0.5,\n");
    }
}
