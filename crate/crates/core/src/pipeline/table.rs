use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["window", "series", "metric", "value", "n"];

/// Series name for data-side (profile) rows.
pub const DATA_SERIES: &str = "data";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub window: String,
    /// Algorithm name, or `data` for profile rows.
    pub series: String,
    pub metric: String,
    pub value: f64,
    /// Users behind the value: eligible users for experiment rows, active users for profile rows.
    pub n: u64,
}

impl MetricRow {
    pub fn new(window: &str, series: &str, metric: &str, value: f64, n: u64) -> Self {
        MetricRow {
            window: window.to_string(),
            series: series.to_string(),
            metric: metric.to_string(),
            value,
            n,
        }
    }

    fn key(&self) -> (&str, &str, &str) {
        (&self.window, &self.series, &self.metric)
    }
}

/// Rows sorted by `(window, series, metric)` with unique keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricSeriesTable {
    rows: Vec<MetricRow>,
}

impl MetricSeriesTable {
    pub fn new(mut rows: Vec<MetricRow>) -> Result<Self> {
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        for pair in rows.windows(2) {
            if pair[0].key() == pair[1].key() {
                let (w, s, m) = pair[0].key();
                return Err(Error::InvalidInput(format!("duplicate row ({w}, {s}, {m})")));
            }
        }
        if let Some(r) = rows.iter().find(|r| !r.value.is_finite()) {
            let (w, s, m) = r.key();
            return Err(Error::InvalidInput(format!("non-finite value in row ({w}, {s}, {m})")));
        }
        Ok(MetricSeriesTable { rows })
    }

    pub fn rows(&self) -> &[MetricRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn windows(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.window.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn series(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.series.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn metrics(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.metric.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn get(&self, window: &str, series: &str, metric: &str) -> Option<&MetricRow> {
        self.rows
            .binary_search_by(|r| r.key().cmp(&(window, series, metric)))
            .ok()
            .map(|i| &self.rows[i])
    }

    /// `(window, value)` pairs of one series, in window order.
    pub fn series_values(&self, series: &str, metric: &str) -> Vec<(&str, f64)> {
        self.rows
            .iter()
            .filter(|r| r.series == series && r.metric == metric)
            .map(|r| (r.window.as_str(), r.value))
            .collect()
    }

    pub fn merge(self, other: MetricSeriesTable) -> Result<Self> {
        let mut rows = self.rows;
        rows.extend(other.rows);
        Self::new(rows)
    }

    /// CSV text. Values use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.window.as_str(),
                &r.series,
                &r.metric,
                &r.value.to_string(),
                &r.n.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv<R: Read>(input: R, source_name: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = reader.headers().map_err(|e| Error::Format {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Format {
                source_name: source_name.to_string(),
                message: format!("expected header `{}`", CSV_HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Format {
                source_name: source_name.to_string(),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let field = |i: usize| rec.get(i).unwrap_or("");
            let parse_err = |column: &str, message: String| Error::Parse {
                source_name: source_name.to_string(),
                line,
                column: column.to_string(),
                message,
            };
            let value: f64 = field(3)
                .parse()
                .map_err(|e| parse_err("value", format!("{e}")))?;
            let n: u64 = field(4).parse().map_err(|e| parse_err("n", format!("{e}")))?;
            rows.push(MetricRow::new(field(0), field(1), field(2), value, n));
        }
        Self::new(rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(file, &path.display().to_string())
    }
}
