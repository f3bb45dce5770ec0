use std::path::Path;

use crate::error::Result;
use crate::geometry::io::atomic_write;

/// A header and string cells, written as RFC 4180 CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub fn write_csv(table: &CsvTable, path: &Path) -> Result<()> {
    atomic_write(path, table.render().as_bytes())
}

/// Scientific notation with 12 significant digits; empty for `NaN`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.11e}")
    }
}

/// `x` rounded to 12 significant digits, for JSON output.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().unwrap_or(x)
    } else {
        x
    }
}

pub(crate) fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, format_sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_and_digits() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["disk:r=1".into(), "x,y".into()]);
        assert_eq!(t.render(), "a,b\ndisk:r=1,\"x,y\"\n");
        assert_eq!(format_sig(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_sig(f64::NAN), "");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn header_only_table() {
        assert_eq!(CsvTable::new(&["x"]).render(), "x\n");
    }
}
