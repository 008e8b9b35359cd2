//! Report rows and their CSV / JSON serialization.
//!
//! Rationals are written as `num/den` strings and floats in scientific
//! notation with 15 significant digits, so identical inputs always produce
//! identical bytes.

use std::io::Write;

use serde::Serialize;

use definetti_core::bounds::{BoundResult, BoundValue, CheckEntry, CheckOutcome};
use definetti_core::divergence::{DivergenceValue, Metric, RelativeEntropy};
use definetti_core::ExactRational;

use crate::args::Format;
use crate::CliError;

/// One line of a report. Column order is the CSV column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Row {
    pub subject_id: String,
    pub c: Option<usize>,
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub metric: String,
    pub value: String,
    pub bound_id: String,
    pub bound_value: String,
    pub convention: String,
    pub valid: Option<bool>,
    pub pass: Option<bool>,
    pub slack: String,
    pub error_bound: String,
    pub note: String,
}

pub const COLUMNS: [&str; 14] = [
    "subject_id",
    "c",
    "n",
    "k",
    "metric",
    "value",
    "bound_id",
    "bound_value",
    "convention",
    "valid",
    "pass",
    "slack",
    "error_bound",
    "note",
];

pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.14e}")
    }
}

fn fmt_err(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn convention(metric: Metric) -> &'static str {
    match metric {
        Metric::TvL1 => "L1",
        Metric::Kl => "nats",
    }
}

pub fn fmt_divergence(d: &DivergenceValue) -> (String, String) {
    match d {
        DivergenceValue::Tv(r) => (r.to_string(), fmt_err(0.0)),
        DivergenceValue::Kl(RelativeEntropy::Infinite) => ("inf".into(), fmt_err(0.0)),
        DivergenceValue::Kl(RelativeEntropy::Finite(p)) => (fmt_f64(p.to_f64()), fmt_err(p.error_bound_f64())),
    }
}

pub fn fmt_bound(v: &BoundValue) -> String {
    match v {
        BoundValue::Exact(r) => r.to_string(),
        BoundValue::Approx(p) => fmt_f64(p.to_f64()),
    }
}

/// Extra facts about a bound, joined into the `note` column.
pub fn bound_note(res: &BoundResult, kind_note: bool) -> Vec<String> {
    let mut note = Vec::new();
    if kind_note {
        note.push(format!("kind={}", res.kind.as_str()));
    }
    if let Some(reason) = &res.reason {
        note.push(format!("invalid: {reason}"));
    }
    if let Some(relaxed) = &res.relaxation {
        note.push(format!("relaxation={}", fmt_bound(relaxed)));
    }
    if let Some(half) = &res.half_l1 {
        note.push(format!("half_l1={half}"));
    }
    note
}

/// A divergence row without a bound.
pub fn divergence_row(subject: &str, c: usize, n: u64, k: u64, d: &DivergenceValue) -> Row {
    let (value, error_bound) = fmt_divergence(d);
    Row {
        subject_id: subject.to_string(),
        c: Some(c),
        n: Some(n),
        k: Some(k),
        metric: d.metric().to_string(),
        value,
        convention: convention(d.metric()).into(),
        error_bound,
        ..Row::default()
    }
}

/// A row for one verification entry, with `value` taken from `div` when
/// the entry itself carries no divergence (skipped entries).
pub fn entry_row(subject: &str, c: usize, n: u64, k: u64, e: &CheckEntry, div: Option<&DivergenceValue>) -> Row {
    let d = e.divergence.as_ref().or(div);
    let (value, div_err) = d.map(fmt_divergence).unwrap_or_default();
    let bound_value = e.bound.as_ref().and_then(|b| b.value.as_ref());
    let error_bound = {
        let b_err = bound_value.map(BoundValue::error_bound_f64).unwrap_or(0.0);
        let d_err = d.map(DivergenceValue::error_bound_f64).unwrap_or(0.0);
        if d.is_some() || bound_value.is_some() {
            fmt_err(b_err + d_err)
        } else {
            div_err
        }
    };
    let mut note = e.bound.as_ref().map(|b| bound_note(b, true)).unwrap_or_default();
    let pass = match &e.outcome {
        CheckOutcome::Pass => Some(true),
        CheckOutcome::Fail => Some(false),
        CheckOutcome::Skipped(reason) => {
            if e.bound.as_ref().is_some_and(BoundResult::valid) {
                note.push(format!("not asserted: {reason}"));
            }
            None
        }
    };
    if e.tight {
        note.push("tight".into());
    }
    Row {
        subject_id: subject.to_string(),
        c: Some(c),
        n: Some(n),
        k: Some(k),
        metric: e.metric.to_string(),
        value,
        bound_id: e.bound_id.to_string(),
        bound_value: bound_value.map(fmt_bound).unwrap_or_default(),
        convention: convention(e.metric).into(),
        valid: Some(e.bound.as_ref().is_some_and(BoundResult::valid)),
        pass,
        slack: e.slack.map(fmt_f64).unwrap_or_default(),
        error_bound,
        note: note.join("; "),
    }
}

/// `{(2,0):1/6, (1,1):2/3, ...}`
pub fn summarize_pmf<'a, K: std::fmt::Display + 'a>(
    entries: impl Iterator<Item = (&'a K, &'a ExactRational)>,
) -> String {
    let parts: Vec<String> = entries.map(|(s, p)| format!("{s}:{p}")).collect();
    format!("{{{}}}", parts.join(" "))
}

pub fn write_rows<W: Write>(out: W, rows: &[Row], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(COLUMNS)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_fifteen_significant_digits() {
        assert_eq!(fmt_f64(std::f64::consts::LN_2), "6.93147180559945e-1");
        assert_eq!(fmt_f64(0.0), "0.00000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn empty_table_has_header_only() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[], Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), COLUMNS.join(",") + "\n");
        let mut buf = Vec::new();
        write_rows(&mut buf, &[], Format::Json).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[]\n");
    }

    #[test]
    fn row_fields_match_columns() {
        let row = Row {
            subject_id: "s".into(),
            c: Some(2),
            pass: Some(true),
            ..Row::default()
        };
        let v = serde_json::to_value(&row).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = COLUMNS.to_vec();
        expected.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, expected);
    }
}
