//! Matrix files: whitespace-separated rows in blank-line separated blocks
//! with `#` comments, or a JSON list of `{"label", "rows"}` objects.

use serde_json::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub label: String,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        parse_structured(text)
    } else {
        parse_plain(text)
    }
}

fn default_label(i: usize) -> String {
    format!("matrix-{}", i + 1)
}

fn parse_structured(text: &str) -> Result<Vec<Entry>, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let items = doc.as_array().ok_or("expected a JSON list of matrices")?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let obj = item.as_object().ok_or_else(|| format!("item {} is not an object", i + 1))?;
            let label = match obj.get("label") {
                None | Some(Value::Null) => default_label(i),
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(format!("item {}: label must be a string", i + 1)),
            };
            let rows = obj
                .get("rows")
                .and_then(Value::as_array)
                .ok_or_else(|| format!("item {}: missing rows", i + 1))?
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| format!("item {}: each row must be a list", i + 1))?
                        .iter()
                        .map(|v| v.as_f64().ok_or_else(|| format!("item {}: non-numeric entry {v}", i + 1)))
                        .collect::<Result<Vec<f64>, String>>()
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Entry { label, rows })
        })
        .collect()
}

fn parse_plain(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label: Option<String> = None;
    let flush = |rows: &mut Vec<Vec<f64>>, label: &mut Option<String>, out: &mut Vec<Entry>| {
        if !rows.is_empty() {
            let l = label.take().unwrap_or_else(|| default_label(out.len()));
            out.push(Entry { label: l, rows: std::mem::take(rows) });
        }
    };
    for (lineno, line) in text.lines().enumerate() {
        let (content, comment) = match line.find('#') {
            Some(p) => (&line[..p], Some(&line[p + 1..])),
            None => (line, None),
        };
        if let Some(l) = comment.and_then(|c| c.trim().strip_prefix("label:")) {
            flush(&mut rows, &mut label, &mut out);
            label = Some(l.trim().to_string());
        }
        if content.trim().is_empty() {
            if comment.is_none() {
                flush(&mut rows, &mut label, &mut out);
            }
            continue;
        }
        let row = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| format!("line {}: cannot parse {t:?} as a number", lineno + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    flush(&mut rows, &mut label, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_blocks_and_labels() {
        let text = "# a comment\n1 0\n0 1\n\n# label: second\n2 1 # trailing\n1 2\n\n\n3\n";
        let e = parse(text).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].label, "matrix-1");
        assert_eq!(e[0].rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(e[1].label, "second");
        assert_eq!(e[1].rows, vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(e[2].label, "matrix-3");
        assert_eq!(e[2].rows, vec![vec![3.0]]);
    }

    #[test]
    fn plain_errors_name_the_line() {
        let err = parse("1 2\n3 x\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn ragged_rows_are_not_parse_errors() {
        let e = parse("1 2\n3\n").unwrap();
        assert_eq!(e[0].rows, vec![vec![1.0, 2.0], vec![3.0]]);
    }

    #[test]
    fn empty_input() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("# nothing\n\n").unwrap().is_empty());
        assert!(parse("[]").unwrap().is_empty());
    }

    #[test]
    fn structured() {
        let e = parse(r#"[{"label": "id", "rows": [[1, 0], [0, 1]]}, {"rows": [[2]]}]"#).unwrap();
        assert_eq!(e[0].label, "id");
        assert_eq!(e[1].label, "matrix-2");
        assert_eq!(e[1].rows, vec![vec![2.0]]);
        assert!(parse(r#"[{"rows": [["a"]]}]"#).is_err());
        assert!(parse(r#"{"rows": []}"#).is_err());
        assert!(parse("[1,").is_err());
    }
}
