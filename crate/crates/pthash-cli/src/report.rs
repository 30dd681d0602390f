//! CSV run reports.

use std::fmt::Display;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

/// Column order for every emitted row.
pub(crate) const CSV_HEADER: &str = "n,c,alpha,encoder,workers,mode,construction_seconds,\
                                     bits_per_key,lookup_ns_per_key,pilot_attempts,seed";

/// One run's facts. `build` fills the construction columns and leaves the
/// lookup column empty; `bench` does the opposite. An empty cell means "not
/// measured by this command", keeping the schema identical everywhere.
pub(crate) struct RunReport {
    pub n: u64,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub encoder: &'static str,
    pub workers: Option<usize>,
    /// `internal-flat`, `external-flat` or `internal-hem` for build rows;
    /// `flat` or `hem` for bench rows (a file does not record how it was
    /// built).
    pub mode: &'static str,
    pub construction_seconds: Option<f64>,
    pub bits_per_key: f64,
    pub lookup_ns_per_key: Option<f64>,
    pub pilot_attempts: Option<u64>,
    pub seed: u64,
}

fn cell<T: Display>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

impl RunReport {
    pub(crate) fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{},{}",
            self.n,
            cell(self.c),
            cell(self.alpha),
            self.encoder,
            cell(self.workers),
            self.mode,
            cell(self.construction_seconds.map(|s| format!("{s:.6}"))),
            self.bits_per_key,
            cell(self.lookup_ns_per_key.map(|ns| format!("{ns:.2}"))),
            cell(self.pilot_attempts),
            self.seed,
        )
    }
}

/// Writes rows to stdout, or appends them to `path`. Each destination gets
/// the header exactly once: stdout on every invocation, a report file only
/// while it is still empty (so repeated appends stay parseable as one CSV).
pub(crate) fn emit_rows(rows: &[RunReport], path: Option<&Path>) -> io::Result<()> {
    match path {
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "{CSV_HEADER}")?;
            for row in rows {
                writeln!(out, "{}", row.csv_row())?;
            }
            Ok(())
        }
        Some(path) => {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            if file.metadata()?.len() == 0 {
                writeln!(file, "{CSV_HEADER}")?;
            }
            for row in rows {
                writeln!(file, "{}", row.csv_row())?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build_row() -> RunReport {
        RunReport {
            n: 1000,
            c: Some(7.0),
            alpha: Some(0.94),
            encoder: "dd",
            workers: Some(2),
            mode: "internal-flat",
            construction_seconds: Some(0.125),
            bits_per_key: 3.25,
            lookup_ns_per_key: None,
            pilot_attempts: Some(4242),
            seed: 1,
        }
    }

    #[test]
    fn header_and_rows_have_matching_arity() {
        let columns = CSV_HEADER.split(',').count();
        assert_eq!(columns, 11);
        assert_eq!(build_row().csv_row().split(',').count(), columns);
    }

    #[test]
    fn absent_measurements_become_empty_cells() {
        let row = build_row().csv_row();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], "1000");
        assert_eq!(cells[1], "7");
        assert_eq!(cells[2], "0.94");
        assert_eq!(cells[6], "0.125000");
        assert_eq!(cells[7], "3.250");
        assert_eq!(cells[8], "", "lookup time is not measured at build time");
        assert_eq!(cells[10], "1");
    }

    #[test]
    fn report_file_gets_one_header_across_appends() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        emit_rows(&[build_row()], Some(&path)).unwrap();
        emit_rows(&[build_row()], Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1..].iter().all(|l| !l.starts_with("n,")));
    }
}
