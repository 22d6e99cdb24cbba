//! CSV and JSON rendering. Floats carry 17 significant digits.

use super::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => num(*v),
            Cell::Num(_) => "null".into(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of equal length under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let objects: Vec<String> = self
                    .rows
                    .iter()
                    .map(|row| json_object(self.header.iter().copied().zip(row)))
                    .collect();
                if objects.is_empty() {
                    "[]\n".into()
                } else {
                    format!("[\n  {}\n]\n", objects.join(",\n  "))
                }
            }
        }
    }
}

/// A single flat record.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub fields: Vec<(&'static str, Cell)>,
}

impl Report {
    pub fn new(fields: Vec<(&'static str, Cell)>) -> Self {
        Self { fields }
    }

    pub fn to_json(&self) -> String {
        let mut s = json_object(self.fields.iter().map(|(k, v)| (*k, v)));
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => {
                let keys: Vec<&str> = self.fields.iter().map(|(k, _)| *k).collect();
                let vals: Vec<String> = self.fields.iter().map(|(_, v)| v.csv()).collect();
                format!("{}\n{}\n", keys.join(","), vals.join(","))
            }
        }
    }
}

fn json_object<'a>(fields: impl Iterator<Item = (&'a str, &'a Cell)>) -> String {
    let body: Vec<String> = fields
        .map(|(k, v)| {
            format!(
                "{}: {}",
                serde_json::to_string(k).expect("keys serialize"),
                v.json()
            )
        })
        .collect();
    format!("{{{}}}", body.join(", "))
}
