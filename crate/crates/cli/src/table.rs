//! Column-oriented results and their CSV form.
//!
//! Reals are written as `{:.16e}` (17 significant digits, `.` separator), which
//! parses back to the identical `f64`.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

pub const NUMBER_FORMAT: &str =
    "reals in %.16e (17 significant digits, '.' decimal separator); integers plain";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    provenance: Vec<String>,
}

impl ResultTable {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.provenance.push(line.into());
    }

    /// Inserts lines ahead of the existing provenance.
    pub fn prepend_notes(&mut self, lines: Vec<String>) {
        self.provenance.splice(0..0, lines);
    }

    /// Real values of one column; integers are widened.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[i] {
                    Cell::Int(v) => v as f64,
                    Cell::Real(v) => v,
                })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in &self.provenance {
            // keep every provenance line a single comment line
            writeln!(out, "# {}", line.replace(['\n', '\r'], " "))?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.write_all(b",")?;
                }
                first = false;
                match cell {
                    Cell::Int(v) => write!(out, "{v}")?,
                    Cell::Real(v) => write!(out, "{v:.16e}")?,
                }
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(&["n", "value"]);
        t.note("first");
        t.note("multi\nline");
        t.push(vec![3usize.into(), 0.5.into()]);
        t.push(vec![4usize.into(), (-1.25e-300).into()]);
        assert_eq!(
            t.to_csv_string(),
            "# first\n# multi line\nn,value\n3,5.0000000000000000e-1\n4,-1.2500000000000000e-300\n"
        );
    }

    #[test]
    fn reals_round_trip() {
        let xs = [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            2.0f64.sqrt() * 1e-17,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324,
        ];
        let mut t = ResultTable::new(&["x"]);
        for x in xs {
            t.push(vec![x.into()]);
        }
        let text = t.to_csv_string();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, xs);
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn ragged_rows_rejected() {
        ResultTable::new(&["a", "b"]).push(vec![1usize.into()]);
    }

    #[test]
    fn column_access() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.push(vec![1usize.into(), 2.5.into()]);
        assert_eq!(t.column("a"), Some(vec![1.0]));
        assert_eq!(t.column("b"), Some(vec![2.5]));
        assert_eq!(t.column("c"), None);
    }
}
