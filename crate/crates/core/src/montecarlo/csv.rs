//! Text formats of experiment outputs.
//!
//! Tail curves:
//!
//! ```text
//! #meta key=value              (one line per metadata entry)
//! threshold,n_samples,n_exceed,p_hat,ci_lo,ci_hi
//! <rows>
//! #flag threshold=... n_exceed=0 excluded_from_fit
//! #fit kappa_hat=... c_hat=... logC_hat=... window=[a,b] rss=...
//! #fit-ci kappa_lo=... kappa_hi=...
//! #model kappa=... c_hat=... logC_hat=... rss=...
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so files are
//! byte-stable and parse back to identical values.

use std::fmt::Write;

use super::{ExponentFit, TailCurve, TailRow, VarianceTable};
use crate::error::{LppError, Result};

pub const TAIL_HEADER: &str = "threshold,n_samples,n_exceed,p_hat,ci_lo,ci_hi";
pub const VARIANCE_HEADER: &str = "N,n_samples,variance,variance_se,control_variance,control_variance_se";

fn write_meta(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        writeln!(out, "#meta {k}={v}").unwrap();
    }
}

/// Comment lines describing a fit.
pub fn render_fit_lines(fit: &std::result::Result<ExponentFit, String>) -> Vec<String> {
    let fit = match fit {
        Ok(fit) => fit,
        Err(reason) => return vec![format!("#fit-error reason={}", reason.replace(char::is_whitespace, "_"))],
    };
    let mut lines = vec![format!(
        "#fit kappa_hat={} c_hat={} logC_hat={} window=[{},{}] rss={}",
        fit.kappa_hat, fit.c_hat, fit.log_c_hat, fit.window.0, fit.window.1, fit.rss
    )];
    if let Some((lo, hi)) = fit.kappa_ci {
        lines.push(format!("#fit-ci kappa_lo={lo} kappa_hi={hi}"));
    }
    for c in &fit.comparisons {
        lines.push(format!("#model kappa={} c_hat={} logC_hat={} rss={}", c.kappa, c.c_hat, c.log_c_hat, c.rss));
    }
    lines
}

pub fn write_tail_csv(meta: &[(String, String)], curve: &TailCurve) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    writeln!(out, "{TAIL_HEADER}").unwrap();
    for r in &curve.rows {
        writeln!(out, "{},{},{},{},{},{}", r.threshold, r.n_samples, r.n_exceed, r.p_hat, r.ci_lo, r.ci_hi).unwrap();
    }
    for t in curve.flagged() {
        writeln!(out, "#flag threshold={t} n_exceed=0 excluded_from_fit").unwrap();
    }
    for line in render_fit_lines(&curve.fit) {
        writeln!(out, "{line}").unwrap();
    }
    out
}

pub fn write_variance_csv(meta: &[(String, String)], table: &VarianceTable) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    writeln!(out, "{VARIANCE_HEADER}").unwrap();
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n, r.n_samples, r.variance, r.variance_se, r.control_variance, r.control_variance_se
        )
        .unwrap();
    }
    writeln!(out, "#slope stat=passage slope={} se={}", table.slope, table.slope_se).unwrap();
    writeln!(out, "#slope stat=control slope={} se={}", table.control_slope, table.control_slope_se).unwrap();
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedTailCsv {
    pub meta: Vec<(String, String)>,
    pub rows: Vec<TailRow>,
    /// Every other comment line, verbatim.
    pub comments: Vec<String>,
}

impl ParsedTailCsv {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn parse_tail_csv(text: &str) -> Result<ParsedTailCsv> {
    let mut meta = Vec::new();
    let mut rows = Vec::new();
    let mut comments = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        let err = |message: String| LppError::Csv { line: line_no, message };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#meta ") {
            let (k, v) = rest.split_once('=').ok_or_else(|| err(format!("meta line without '=': {line}")))?;
            meta.push((k.to_string(), v.to_string()));
            continue;
        }
        if line.starts_with('#') {
            comments.push(line.to_string());
            continue;
        }
        if !header_seen {
            if line != TAIL_HEADER {
                return Err(err(format!("expected header '{TAIL_HEADER}', found '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number '{s}': {e}")));
        let int = |s: &str| s.parse::<u64>().map_err(|e| err(format!("bad count '{s}': {e}")));
        let row = TailRow {
            threshold: float(fields[0])?,
            n_samples: int(fields[1])?,
            n_exceed: int(fields[2])?,
            p_hat: float(fields[3])?,
            ci_lo: float(fields[4])?,
            ci_hi: float(fields[5])?,
        };
        if row.n_exceed > row.n_samples {
            return Err(err("n_exceed exceeds n_samples".into()));
        }
        rows.push(row);
    }
    if !header_seen {
        return Err(LppError::Csv { line: 0, message: "missing header".into() });
    }
    Ok(ParsedTailCsv { meta, rows, comments })
}
