//! Minimal CSV writer: numeric and bitstring cells only, so no quoting is needed
//! beyond what [`escape`] handles.

use serde_json::Value;

pub(crate) struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub(crate) fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub(crate) fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Comment header with version and configuration, then each table preceded by `# table: name`.
pub(crate) fn render(version: &str, config: &Value, tables: &[Table]) -> String {
    let mut out = format!("# tool_version: {version}\n# config: {config}\n");
    for t in tables {
        out.push_str(&format!("# table: {}\n", t.name));
        out.push_str(&t.header.join(","));
        out.push('\n');
        for r in &t.rows {
            out.push_str(&r.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn renders_header_and_rows() {
        let mut t = Table::new("x", &["a", "b"]);
        t.row(vec!["1".into(), "a,b".into()]);
        let s = render("0.1.0", &json!({"k": 1}), &[t]);
        assert_eq!(s, "# tool_version: 0.1.0\n# config: {\"k\":1}\n# table: x\na,b\n1,\"a,b\"\n");
    }
}
