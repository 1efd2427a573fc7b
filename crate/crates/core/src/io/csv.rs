//! Rectangular CSV tables with a trailing `# key=value` metadata block.
//!
//! Header cells read `name[unit]`. Numbers are written with the shortest
//! representation that parses back to the same `f64`.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            Cell::Num(_) => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Vec<(String, String)>,
}

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Format(format!("{what} must not be empty")));
    }
    if s.chars()
        .any(|c| matches!(c, ',' | '\n' | '\r' | '[' | ']' | '#' | '"'))
    {
        return Err(Error::Format(format!(
            "{what} `{s}` contains a reserved character"
        )));
    }
    Ok(())
}

impl CsvTable {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Format("a table needs at least one column".into()));
        }
        for c in &columns {
            check_token(&c.name, "column name")?;
            if !c.unit.is_empty() {
                check_token(&c.unit, "column unit")?;
            }
        }
        Ok(Self {
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        })
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Format(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for cell in &row {
            if let Cell::Text(s) = cell {
                check_token(s, "text cell")?;
                if s.parse::<f64>().is_ok() {
                    return Err(Error::Format(format!(
                        "text cell `{s}` would read back as a number"
                    )));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_meta(&mut self, key: &str, value: impl fmt::Display) -> Result<()> {
        let value = value.to_string();
        check_token(key, "metadata key")?;
        if key.contains('=') || value.contains('\n') || value.contains('\r') {
            return Err(Error::Format(format!(
                "metadata `{key}` cannot be stored on one line"
            )));
        }
        self.metadata.push((key.into(), value));
        Ok(())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Header and data rows, without metadata.
    pub fn body(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}[{}]", c.name, c.unit))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.body();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}

fn parse_header_cell(cell: &str) -> Result<Column> {
    let cell = cell.trim();
    let (name, rest) = cell
        .split_once('[')
        .ok_or_else(|| Error::Format(format!("header cell `{cell}` lacks a `[unit]` suffix")))?;
    let unit = rest
        .strip_suffix(']')
        .ok_or_else(|| Error::Format(format!("header cell `{cell}` lacks a closing `]`")))?;
    check_token(name, "column name")?;
    if !unit.is_empty() {
        check_token(unit, "column unit")?;
    }
    Ok(Column::new(name, unit))
}

/// Parses the output of [`CsvTable::to_csv_string`].
pub fn parse_csv_table(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV document".into()))?;
    let columns = header
        .split(',')
        .map(parse_header_cell)
        .collect::<Result<Vec<_>>>()?;
    let mut table = CsvTable::new(columns)?;
    let mut in_meta = false;
    for (i, line) in lines {
        let lineno = i + 1;
        if let Some(meta) = line.strip_prefix('#') {
            in_meta = true;
            let (k, v) = meta.trim_start().split_once('=').ok_or_else(|| {
                Error::Format(format!("line {lineno}: metadata needs `key=value`"))
            })?;
            table
                .push_meta(k, v)
                .map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
            continue;
        }
        if in_meta {
            return Err(Error::Format(format!(
                "line {lineno}: data row after the metadata block"
            )));
        }
        let row: Vec<Cell> = line
            .split(',')
            .map(|s| match s.parse::<f64>() {
                Ok(v) => Cell::Num(v),
                Err(_) => Cell::Text(s.into()),
            })
            .collect();
        table
            .push_row(row)
            .map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
    }
    Ok(table)
}
