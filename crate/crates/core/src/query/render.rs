use super::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected tsv or json)")),
        }
    }
}

fn tsv_cell(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

/// TSV has a header line of column names and one line per row, unbound
/// cells empty. JSON is `{"columns":[...],"rows":[{var:text}]}` with
/// unbound variables omitted from their row object.
pub fn render_table(result: &ResultTable, format: Format) -> String {
    match format {
        Format::Tsv => {
            let mut out = result.columns.join("\t");
            out.push('\n');
            for row in &result.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| c.as_ref().map(|t| tsv_cell(t.text())).unwrap_or_default())
                    .collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
            out
        }
        Format::Json => serde_json::to_string(result).expect("result table serializes"),
    }
}
