//! Delimited result tables with a column-schema header.
//!
//! ```text
//! # table: entropy
//! # columns: n:int,eps:float,count:int
//! 3,0.5,16
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Int,
    Float,
    Bool,
    Text,
}

impl ColumnType {
    fn name(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::Bool => "bool",
            ColumnType::Text => "text",
        }
    }

    fn parse(s: &str) -> Option<ColumnType> {
        Some(match s {
            "int" => ColumnType::Int,
            "float" => ColumnType::Float,
            "bool" => ColumnType::Bool,
            "text" => ColumnType::Text,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Debug formatting is the shortest text that parses back to the same bits
            Cell::Float(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.replace([',', '\n'], ";"),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rows are kept as rendered text so that cached tables reproduce files byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, ColumnType)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, ColumnType)]) -> Table {
        Table { name: name.into(), columns: columns.iter().map(|(n, t)| (n.to_string(), *t)).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row.iter().map(Cell::render).collect());
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# table: {}", self.name);
        let cols: Vec<String> = self.columns.iter().map(|(n, t)| format!("{n}:{}", t.name())).collect();
        let _ = writeln!(s, "# columns: {}", cols.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    /// Typed values of every row.
    pub fn cells(&self) -> Result<Vec<Vec<Cell>>, String> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .zip(&self.columns)
                    .map(|(v, (name, ty))| parse_cell(v, *ty).ok_or_else(|| format!("row {i}, column {name}: bad value {v:?}")))
                    .collect()
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }
}

fn parse_cell(v: &str, ty: ColumnType) -> Option<Cell> {
    Some(match ty {
        ColumnType::Int => Cell::Int(v.parse().ok()?),
        ColumnType::Float => Cell::Float(v.parse().ok()?),
        ColumnType::Bool => Cell::Bool(v.parse().ok()?),
        ColumnType::Text => Cell::Text(v.to_string()),
    })
}

/// Reads a table written by [`Table::to_text`], checking every value against the schema.
pub fn read_table(text: &str) -> Result<Table, String> {
    let mut lines = text.lines();
    let name = lines
        .next()
        .and_then(|l| l.strip_prefix("# table: "))
        .ok_or("missing `# table:` header")?
        .to_string();
    let cols = lines.next().and_then(|l| l.strip_prefix("# columns: ")).ok_or("missing `# columns:` header")?;
    let mut columns = Vec::new();
    for c in cols.split(',') {
        let (n, t) = c.split_once(':').ok_or_else(|| format!("column {c:?} has no type"))?;
        columns.push((n.to_string(), ColumnType::parse(t).ok_or_else(|| format!("unknown column type {t:?}"))?));
    }
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        if l.is_empty() {
            continue;
        }
        let r: Vec<String> = l.split(',').map(str::to_string).collect();
        if r.len() != columns.len() {
            return Err(format!("row {i} has {} values, expected {}", r.len(), columns.len()));
        }
        rows.push(r);
    }
    let t = Table { name, columns, rows };
    t.cells()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_read_round_trip() {
        let mut t = Table::new("demo", &[("n", ColumnType::Int), ("x", ColumnType::Float), ("ok", ColumnType::Bool)]);
        for (i, x) in [0.1, 1.0 / 3.0, f64::INFINITY, f64::NAN, -1e-300, 6.02e23].into_iter().enumerate() {
            t.push(vec![i.into(), x.into(), (i % 2 == 0).into()]);
        }
        let back = read_table(&t.to_text()).unwrap();
        assert_eq!(back, t);
        let cells = back.cells().unwrap();
        assert_eq!(cells[1][1].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert!(cells[3][1].as_f64().unwrap().is_nan());
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(read_table("1,2\n").is_err());
        assert!(read_table("# table: t\n# columns: a:int\nx\n").is_err());
        assert!(read_table("# table: t\n# columns: a:int,b:int\n1\n").is_err());
        assert!(read_table("# table: t\n# columns: a:complex\n").is_err());
    }
}
