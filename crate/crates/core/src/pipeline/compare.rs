//! Descriptive before/after summaries around an intervention date.
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use super::table::MetricSeriesTable;
use crate::error::{Error, Result};
use crate::windowing::YearMonth;

pub const COMPARE_HEADER: [&str; 11] = [
    "series",
    "metric",
    "n_before",
    "n_after",
    "mean_before",
    "mean_after",
    "mean_diff",
    "slope_before",
    "slope_after",
    "slope_diff",
    "note",
];

/// Summary statistics on one side of the date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideSummary {
    pub mean: f64,
    /// OLS slope of value on the table-wide window index.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub series: String,
    pub metric: String,
    pub n_before: usize,
    pub n_after: usize,
    /// Both sides, or `None` when either side has fewer than two windows.
    pub summary: Option<(SideSummary, SideSummary)>,
    pub note: String,
}

impl ComparisonRow {
    pub fn mean_diff(&self) -> Option<f64> {
        self.summary.map(|(b, a)| a.mean - b.mean)
    }

    pub fn slope_diff(&self) -> Option<f64> {
        self.summary.map(|(b, a)| a.slope - b.slope)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Ordinary least squares slope of `y` on `x`. Needs two distinct `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn summarize(points: &[(f64, f64)]) -> SideSummary {
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    SideSummary {
        mean: mean(&ys),
        slope: ols_slope(points),
    }
}

/// (window index, value) pairs of one side.
type Points = Vec<(f64, f64)>;

/// Per (series, metric): means and slopes of windows starting before `date`
/// versus windows starting on or after it.
pub fn compare(table: &MetricSeriesTable, date: NaiveDate) -> Result<Vec<ComparisonRow>> {
    if table.is_empty() {
        return Err(Error::InvalidInput("cannot compare an empty table".into()));
    }
    let windows = table.windows();
    let months: Vec<YearMonth> = windows
        .iter()
        .map(|w| w.parse())
        .collect::<Result<_>>()?;
    let (first, last) = (months[0].first_day(), months[months.len() - 1].first_day());
    if date < first || date > last {
        return Err(Error::Config(format!(
            "intervention date {date} lies outside the table's windows [{first}, {last}]"
        )));
    }
    let index: BTreeMap<&str, (f64, bool)> = windows
        .iter()
        .zip(&months)
        .enumerate()
        .map(|(i, (w, m))| (*w, (i as f64, m.first_day() < date)))
        .collect();

    let mut groups: BTreeMap<(&str, &str), (Points, Points)> = BTreeMap::new();
    for r in table.rows() {
        let (x, before) = index[r.window.as_str()];
        let g = groups.entry((&r.series, &r.metric)).or_default();
        if before {
            g.0.push((x, r.value));
        } else {
            g.1.push((x, r.value));
        }
    }

    Ok(groups
        .into_iter()
        .map(|((series, metric), (before, after))| {
            let enough = before.len() >= 2 && after.len() >= 2;
            ComparisonRow {
                series: series.to_string(),
                metric: metric.to_string(),
                n_before: before.len(),
                n_after: after.len(),
                summary: enough.then(|| (summarize(&before), summarize(&after))),
                note: if enough {
                    String::new()
                } else {
                    "skipped: fewer than 2 windows on one side".to_string()
                },
            }
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(COMPARE_HEADER).expect("in-memory write");
    for r in rows {
        let (b, a) = (r.summary.map(|s| s.0), r.summary.map(|s| s.1));
        w.write_record([
            r.series.clone(),
            r.metric.clone(),
            r.n_before.to_string(),
            r.n_after.to_string(),
            opt(b.map(|s| s.mean)),
            opt(a.map(|s| s.mean)),
            opt(r.mean_diff()),
            opt(b.map(|s| s.slope)),
            opt(a.map(|s| s.slope)),
            opt(r.slope_diff()),
            r.note.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn write_comparison(rows: &[ComparisonRow], path: &Path) -> Result<()> {
    fs::write(path, comparison_csv(rows)).map_err(|e| Error::io(path, e))
}
