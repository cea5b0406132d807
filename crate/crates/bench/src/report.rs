use std::cmp::Ordering;
use std::io::Write;

use crate::Result;

/// One summarised grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub task: String,
    pub mechanism: String,
    pub n: Option<usize>,
    pub budget: Option<f64>,
    pub k: Option<usize>,
    pub metric: String,
    pub mean: f64,
    pub p25: f64,
    pub p75: f64,
    pub trials: usize,
}

pub const CSV_HEADER: &str = "task,mechanism,n,budget,k,metric,mean,p25,p75,trials";

/// Percentile by linear interpolation between order statistics of a sorted
/// slice.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of no values");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(mean, p25, p75)`. The mean is accumulated over the sorted values so it
/// does not depend on trial completion order.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    (mean, percentile(&sorted, 0.25), percentile(&sorted, 0.75))
}

fn cmp_rows(a: &ResultRow, b: &ResultRow) -> Ordering {
    let budget = |r: &ResultRow| r.budget.unwrap_or(f64::NEG_INFINITY);
    a.task
        .cmp(&b.task)
        .then_with(|| a.mechanism.cmp(&b.mechanism))
        .then_with(|| a.n.cmp(&b.n))
        .then_with(|| budget(a).total_cmp(&budget(b)))
        .then_with(|| a.k.cmp(&b.k))
        .then_with(|| a.metric.cmp(&b.metric))
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(cmp_rows);
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(mut w: impl Write, rows: &[ResultRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.task,
            r.mechanism,
            opt(r.n),
            r.budget.map(num).unwrap_or_default(),
            opt(r.k),
            r.metric,
            num(r.mean),
            num(r.p25),
            num(r.p75),
            r.trials
        )?;
    }
    Ok(())
}
