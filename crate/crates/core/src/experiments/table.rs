//! CSV output: one `#`-prefixed header naming the columns, then data rows.

use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, Check, ExperimentError};

/// Numeric table. Cells are finite except in columns declared as allowing
/// infinities; NaN is never written.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<String>,
    infinite_ok: Vec<bool>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            infinite_ok: vec![false; columns.len()],
            rows: Vec::new(),
        }
    }

    /// Marks a column as one that may hold ±∞.
    pub fn allow_infinite(mut self, column: &str) -> Self {
        if let Some(i) = self.columns.iter().position(|c| c == column) {
            self.infinite_ok[i] = true;
        }
        self
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<(), ExperimentError> {
        if row.len() != self.columns.len() {
            return Err(ExperimentError::Output(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for ((x, name), ok) in row.iter().zip(&self.columns).zip(&self.infinite_ok) {
            if x.is_nan() || (x.is_infinite() && !ok) {
                return Err(ExperimentError::Output(format!(
                    "non-finite value {x} in column {name}"
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_cell(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        write_file(path, &self.to_csv())
    }
}

/// Shortest round-trip decimal, in exponent form outside [1e-4, 1e15);
/// infinities as `inf` / `-inf`.
pub fn format_cell(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Check verdicts as CSV.
pub fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("# check,subject,time,value,lower,upper,passed\n");
    let opt = |x: Option<f64>| x.map(format_cell).unwrap_or_default();
    for c in checks {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.name,
            c.subject,
            opt(c.time),
            format_cell(c.value),
            opt(c.lower),
            opt(c.upper),
            u8::from(c.passed)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["t", "s"]).allow_infinite("s");
        t.push(vec![0.0, 0.5]).unwrap();
        t.push(vec![0.1, f64::NEG_INFINITY]).unwrap();
        assert_eq!(t.to_csv(), "# t,s\n0,0.5\n0.1,-inf\n");
        assert_eq!(format_cell(2.5e-16), "2.5e-16");
        assert_eq!(format_cell(-0.001), "-0.001");
    }

    #[test]
    fn rejects_nan_and_unflagged_infinity() {
        let mut t = Table::new(&["t", "s"]).allow_infinite("s");
        assert!(t.push(vec![f64::NAN, 0.0]).is_err());
        assert!(t.push(vec![f64::INFINITY, 0.0]).is_err());
        assert!(t.push(vec![0.0]).is_err());
        assert!(t.rows().is_empty());
    }
}
