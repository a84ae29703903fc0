//! Batch persistence: one JSON object per line for records, CSV for summaries.

use std::io::{BufRead, Write};

use serde::Serialize;

use super::{BatchSummary, SampleRecord};
use crate::classes::ClassSpec;

pub fn write_jsonl<W: Write>(records: &[SampleRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> std::io::Result<Vec<SampleRecord>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|line| serde_json::from_str(&line?).map_err(std::io::Error::other))
        .collect()
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    label: &'a str,
    m: f64,
    beta: f64,
    alpha_re: Option<f64>,
    alpha_im: Option<f64>,
    trials: u64,
    accepted: u64,
    violations: u64,
    errors: u64,
    truncated: u64,
    min_margin_a2: Option<f64>,
    min_margin_a3: Option<f64>,
    min_margin_combo: Option<f64>,
    max_abs_a2: Option<f64>,
    max_abs_a3: Option<f64>,
    max_abs_combo: Option<f64>,
}

/// One CSV row per `(label, spec, summary)`.
pub fn write_summary_csv<W: Write>(
    rows: &[(String, ClassSpec, BatchSummary)],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (label, spec, s) in rows {
        w.serialize(SummaryRow {
            label,
            m: spec.m,
            beta: spec.beta,
            alpha_re: spec.alpha.map(|a| a.re),
            alpha_im: spec.alpha.map(|a| a.im),
            trials: s.trials,
            accepted: s.accepted,
            violations: s.violations,
            errors: s.errors,
            truncated: s.truncated,
            min_margin_a2: s.min_margin_a2,
            min_margin_a3: s.min_margin_a3,
            min_margin_combo: s.min_margin_combo,
            max_abs_a2: s.max_abs_a2,
            max_abs_a3: s.max_abs_a3,
            max_abs_combo: s.max_abs_combo,
        })?;
    }
    w.flush()?;
    Ok(())
}
