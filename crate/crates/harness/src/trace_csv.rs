//! Trace CSV files: `#`-prefixed header lines, then one row per sweep.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bia_core::TraceRecord;

use crate::error::{HarnessError, Result};

pub const COLUMNS: &str =
    "iter,objective,rel_objective,support_match,support_error,grad_dist,step_norm,dissipation_slack,wall_ms";

/// Shortest round-trip decimal form, so reruns give byte-identical files.
fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn render_trace_csv(header: &[(String, String)], records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        // values are single-line by construction; keep the format robust anyway
        let v = v.replace('\n', " ");
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(COLUMNS);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.3}",
            r.iter,
            num(r.objective),
            num(r.rel_objective),
            num(r.support_match),
            num(r.support_error),
            num(r.grad_dist),
            num(r.step_norm),
            num(r.dissipation_slack),
            r.wall_ms
        );
    }
    out
}

pub fn write_trace_csv(path: &Path, header: &[(String, String)], records: &[TraceRecord]) -> Result<()> {
    fs::write(path, render_trace_csv(header, records)).map_err(|e| HarnessError::io(path, e))
}

/// Parsed trace file: header pairs and rows of the nine columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: Vec<(String, String)>,
    pub rows: Vec<TraceRecord>,
}

pub fn parse_trace_csv(text: &str) -> std::result::Result<TraceFile, String> {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (lineno, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(": ").ok_or_else(|| format!("line {}: bad header", lineno + 1))?;
            header.push((k.to_string(), v.to_string()));
            continue;
        }
        if !seen_columns {
            if line != COLUMNS {
                return Err(format!("line {}: unexpected column header {line:?}", lineno + 1));
            }
            seen_columns = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(format!("line {}: expected 9 fields, found {}", lineno + 1, f.len()));
        }
        let p = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 1));
        rows.push(TraceRecord {
            iter: f[0].parse().map_err(|e| format!("line {}: {e}", lineno + 1))?,
            objective: p(f[1])?,
            rel_objective: p(f[2])?,
            support_match: p(f[3])?,
            support_error: p(f[4])?,
            grad_dist: p(f[5])?,
            step_norm: p(f[6])?,
            dissipation_slack: p(f[7])?,
            wall_ms: p(f[8])?,
        });
    }
    if !seen_columns {
        return Err("missing column header".into());
    }
    Ok(TraceFile { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iter: usize, objective: f64) -> TraceRecord {
        TraceRecord {
            iter,
            objective,
            rel_objective: 0.1 / iter as f64,
            support_match: f64::NAN,
            support_error: f64::NAN,
            grad_dist: 1.0 / 3.0,
            step_norm: 0.0,
            dissipation_slack: -1e-300,
            wall_ms: 1.25,
        }
    }

    #[test]
    fn round_trip_preserves_values_bitwise() {
        let header = vec![("preset".to_string(), "gaussian_noiseless".to_string())];
        let records: Vec<_> = (1..=4).map(|k| rec(k, -123.456 / k as f64)).collect();
        let text = render_trace_csv(&header, &records);
        let parsed = parse_trace_csv(&text).unwrap();
        assert_eq!(parsed.header, header);
        assert_eq!(parsed.rows.len(), 4);
        for (a, b) in parsed.rows.iter().zip(&records) {
            assert_eq!(a.objective.to_bits(), b.objective.to_bits());
            assert_eq!(a.grad_dist.to_bits(), b.grad_dist.to_bits());
            assert_eq!(a.dissipation_slack.to_bits(), b.dissipation_slack.to_bits());
            assert!(a.support_match.is_nan());
        }
    }

    #[test]
    fn exact_column_header() {
        let text = render_trace_csv(&[], &[rec(1, 0.0)]);
        assert_eq!(text.lines().next().unwrap(), COLUMNS);
        assert!(parse_trace_csv("iter,objective\n").is_err());
    }
}
