//! CSV result tables: comma-separated, Unix newlines, header row, floats with
//! 17 significant digits (value-preserving round trip), '#'-prefixed footer
//! comment lines.

use std::io::Write;

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    footers: Vec<String>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            footers: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        for cell in &row {
            if let Cell::Float(x) = cell {
                assert!(x.is_finite(), "non-finite value in output row");
            }
        }
        self.rows.push(row);
    }

    pub fn footer<S: Into<String>>(&mut self, line: S) {
        self.footers.push(line.into());
    }

    pub fn write_to(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let rendered: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Float(x) => format_float(*x),
                    Cell::Int(x) => x.to_string(),
                })
                .collect();
            writeln!(out, "{}", rendered.join(","))?;
        }
        for line in &self.footers {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }
}

/// 17 significant digits; parses back to the identical f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
