//! CSV emission with a frozen column layout.
//!
//! The header and number formatting are part of the tool's contract: the same
//! config and seed must produce byte-identical files across runs, so golden
//! outputs can be diffed.

use std::cmp::Ordering;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::experiment::CurvePoint;

pub const CSV_HEADER: &str =
    "experiment,case,x,y_analytic,y_montecarlo,ci_halfwidth,trials,seed";

/// Format with six significant digits in plain decimal notation.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let decimals = (5 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Render curve points as a CSV string, sorted by case label and then by the
/// sweep coordinate.
pub fn render_csv(
    points: &[CurvePoint],
    experiment: &str,
    trials: u64,
    seed: u64,
) -> Result<String> {
    if points.is_empty() {
        bail!("no curve points to report; refusing to write an empty file");
    }
    let mut rows: Vec<&CurvePoint> = points.iter().collect();
    rows.sort_by(|a, b| {
        match a.case_label.cmp(&b.case_label) {
            Ordering::Equal => a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal),
            other => other,
        }
    });
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            experiment,
            p.case_label,
            format_sig(p.x),
            format_sig(p.y_analytic),
            format_sig(p.y_montecarlo),
            format_sig(p.ci_halfwidth),
            trials,
            seed,
        ));
    }
    Ok(out)
}

/// Render and write the CSV to `path`.
pub fn write_csv(
    points: &[CurvePoint],
    experiment: &str,
    trials: u64,
    seed: u64,
    path: &Path,
) -> Result<()> {
    let text = render_csv(points, experiment, trials, seed)?;
    std::fs::write(path, text)
        .with_context(|| format!("cannot write report to {}", path.display()))
}
