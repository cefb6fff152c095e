use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// `(name, value)` in emission order.
    pub metrics: Vec<(String, f64)>,
    /// Per-method loss recorded at every training step.
    pub loss_histories: Vec<(String, Vec<f64>)>,
    pub config_echo: String,
    pub seed: u64,
    /// Not written to the CSV so reruns stay byte-identical.
    pub wall_clock_secs: f64,
    /// SHA-256 of the shared initial checkpoint.
    pub init_digest: String,
}

impl Report {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TEXT: &str = "report.txt";
pub const LOSSES_CSV: &str = "losses.csv";

/// Six significant digits, as used in the text table.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

pub fn report_csv(report: &Report) -> String {
    let mut s = String::from("metric,value\n");
    for (name, value) in &report.metrics {
        writeln!(s, "{name},{value:e}").unwrap();
    }
    s
}

pub fn report_text(report: &Report) -> String {
    let width = report.metrics.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
    let mut s = String::new();
    writeln!(s, "{:<width$}  value", "metric").unwrap();
    writeln!(s, "{}  {}", "-".repeat(width), "-".repeat(12)).unwrap();
    for (name, value) in &report.metrics {
        writeln!(s, "{name:<width$}  {}", format_sig6(*value)).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "seed: {}", report.seed).unwrap();
    writeln!(s, "initial parameters sha256: {}", report.init_digest).unwrap();
    writeln!(s, "wall clock: {:.1} s", report.wall_clock_secs).unwrap();
    s
}

/// `step,<method>...` with one row per training step.
pub fn losses_csv(report: &Report) -> String {
    let mut s = String::from("step");
    for (name, _) in &report.loss_histories {
        write!(s, ",{name}").unwrap();
    }
    s.push('\n');
    let n = report.loss_histories.iter().map(|(_, h)| h.len()).max().unwrap_or(0);
    for step in 0..n {
        write!(s, "{step}").unwrap();
        for (_, h) in &report.loss_histories {
            match h.get(step) {
                Some(v) => write!(s, ",{v:e}").unwrap(),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// Writes the report in `format` plus the per-step loss CSV into `dir` and
/// returns the paths written.
pub fn emit_report(report: &Report, format: ReportFormat, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let (name, body) = match format {
        ReportFormat::Csv => (REPORT_CSV, report_csv(report)),
        ReportFormat::Text => (REPORT_TEXT, report_text(report)),
    };
    let main = dir.join(name);
    fs::write(&main, body).map_err(|e| Error::io(&main, e))?;
    let losses = dir.join(LOSSES_CSV);
    fs::write(&losses, losses_csv(report)).map_err(|e| Error::io(&losses, e))?;
    Ok(vec![main, losses])
}

/// Parses a `metric,value` CSV back into pairs.
pub fn parse_report_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some("metric,value") {
        return Err(Error::Csv {
            row: 1,
            col: 1,
            msg: "expected header metric,value".into(),
        });
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (name, value) = line.split_once(',').ok_or_else(|| Error::Csv {
                row: i + 2,
                col: 1,
                msg: "expected two fields".into(),
            })?;
            let v = value.trim().parse::<f64>().map_err(|_| Error::Csv {
                row: i + 2,
                col: 2,
                msg: format!("not a number: {value:?}"),
            })?;
            Ok((name.to_string(), v))
        })
        .collect()
}
