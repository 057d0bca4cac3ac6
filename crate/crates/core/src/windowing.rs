//! Calendar-month bucketing and rolling train/test splits.
//!
//! All window membership is decided by a record's `last_ts`. Window bounds are
//! always the first second of a UTC calendar month.
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::InteractionRecord;

/// A UTC calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Window(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    /// Month containing the given epoch second.
    pub fn from_timestamp(ts: i64) -> Self {
        let dt = DateTime::from_timestamp(ts, 0).expect("timestamp within chrono range");
        YearMonth {
            year: dt.year(),
            month: dt.month(),
        }
    }

    /// Month containing the date; errors unless the date is the 1st.
    pub fn from_first_day(date: NaiveDate) -> Result<Self> {
        if date.day() != 1 {
            return Err(Error::Window(format!(
                "{date} is not the first day of a month"
            )));
        }
        Ok(YearMonth {
            year: date.year(),
            month: date.month(),
        })
    }

    pub fn containing(date: NaiveDate) -> Self {
        YearMonth {
            year: date.year(),
            month: date.month(),
        }
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(n: i64) -> Self {
        YearMonth {
            year: n.div_euclid(12) as i32,
            month: (n.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.plus(1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    /// Epoch second of 00:00:00 UTC on the first day of the month.
    pub fn start_ts(self) -> i64 {
        self.first_day()
            .and_hms_opt(0, 0, 0)
            .expect("midnight")
            .and_utc()
            .timestamp()
    }

    /// `[start of self, start of self + months)`.
    pub fn window(self, months: i64) -> TimeWindow {
        TimeWindow {
            start: self.start_ts(),
            end: self.plus(months).start_ts(),
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Window(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

/// Half-open interval of epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start >= end {
            return Err(Error::Window(format!("empty window [{start}, {end})")));
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts < self.end
    }
}

/// Half-open range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthRange {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthRange {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if start >= end {
            return Err(Error::Window(format!("empty month range [{start}, {end})")));
        }
        Ok(MonthRange { start, end })
    }

    pub fn len(&self) -> usize {
        self.start.months_until(self.end).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> {
        let start = self.start;
        (0..self.len() as i64).map(move |k| start.plus(k))
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow {
            start: self.start.start_ts(),
            end: self.end.start_ts(),
        }
    }
}

impl Default for MonthRange {
    fn default() -> Self {
        MonthRange {
            start: YearMonth { year: 2007, month: 1 },
            end: YearMonth { year: 2017, month: 11 },
        }
    }
}

/// Bucket records by the UTC month of a chosen timestamp.
///
/// Every month of the range is emitted, empty or not. Records outside the
/// range are dropped.
pub fn bucket_by<F>(
    records: &[InteractionRecord],
    range: MonthRange,
    key: F,
) -> Result<Vec<(YearMonth, Vec<&InteractionRecord>)>>
where
    F: Fn(&InteractionRecord) -> i64,
{
    if range.is_empty() {
        return Err(Error::Window(format!(
            "empty month range [{}, {})",
            range.start, range.end
        )));
    }
    let mut buckets: Vec<(YearMonth, Vec<&InteractionRecord>)> =
        range.months().map(|m| (m, Vec::new())).collect();
    for r in records {
        let m = YearMonth::from_timestamp(key(r));
        let k = range.start.months_until(m);
        if k >= 0 && (k as usize) < buckets.len() {
            buckets[k as usize].1.push(r);
        }
    }
    Ok(buckets)
}

/// Bucket records by the month of their `last_ts`.
pub fn monthly_buckets(
    records: &[InteractionRecord],
    range: MonthRange,
) -> Result<Vec<(YearMonth, Vec<&InteractionRecord>)>> {
    bucket_by(records, range, |r| r.last_ts)
}

fn default_data_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2007, 1, 1).unwrap()
}

fn default_first_test_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2009, 1, 1).unwrap()
}

fn default_horizon_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 10, 31).unwrap()
}

fn default_test_months() -> u32 {
    2
}

fn default_train_months() -> u32 {
    24
}

/// Parameters of the rolling evaluation design.
///
/// `horizon_end` is the last calendar day of usable data (inclusive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_data_start")]
    pub data_start: NaiveDate,
    #[serde(default = "default_first_test_start")]
    pub first_test_start: NaiveDate,
    #[serde(default = "default_test_months")]
    pub test_months: u32,
    #[serde(default = "default_train_months")]
    pub train_months: u32,
    #[serde(default = "default_horizon_end")]
    pub horizon_end: NaiveDate,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            data_start: default_data_start(),
            first_test_start: default_first_test_start(),
            test_months: default_test_months(),
            train_months: default_train_months(),
            horizon_end: default_horizon_end(),
        }
    }
}

impl SplitConfig {
    /// The month range spanned by the data, `[data_start, horizon_end]`.
    pub fn data_range(&self) -> Result<MonthRange> {
        MonthRange::new(
            YearMonth::containing(self.data_start),
            YearMonth::containing(self.horizon_end).succ(),
        )
    }

    fn horizon_exclusive(&self) -> i64 {
        self.horizon_end
            .succ_opt()
            .expect("date in range")
            .and_hms_opt(0, 0, 0)
            .unwrap()
            .and_utc()
            .timestamp()
    }
}

/// The train/test windows of one split, before eligibility is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitWindows {
    pub test_month: YearMonth,
    pub train: TimeWindow,
    pub test: TimeWindow,
}

impl SplitWindows {
    /// Label used in output tables: the month the test window starts.
    pub fn label(&self) -> String {
        self.test_month.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSplit {
    pub windows: SplitWindows,
    pub eligible_users: BTreeSet<String>,
}

impl ExperimentSplit {
    pub fn train(&self) -> TimeWindow {
        self.windows.train
    }

    pub fn test(&self) -> TimeWindow {
        self.windows.test
    }

    pub fn label(&self) -> String {
        self.windows.label()
    }
}

/// Tile the timeline with test windows and pair each with its training window.
///
/// Test windows start at `first_test_start` and advance by `test_months`. A
/// split is kept only if its test window ends by the horizon and its training
/// window starts no earlier than `data_start`.
pub fn split_windows(config: &SplitConfig) -> Result<Vec<SplitWindows>> {
    if config.test_months == 0 || config.train_months == 0 {
        return Err(Error::Config(
            "test_months and train_months must be positive".into(),
        ));
    }
    let first = YearMonth::from_first_day(config.first_test_start)?;
    let data_start = YearMonth::from_first_day(config.data_start)?;
    let horizon = config.horizon_exclusive();
    let test_len = config.test_months as i64;
    let train_len = config.train_months as i64;

    let mut out = Vec::new();
    let mut test_month = first;
    loop {
        let test = test_month.window(test_len);
        if test.end > horizon {
            break;
        }
        let train_start = test_month.plus(-train_len);
        if train_start >= data_start {
            out.push(SplitWindows {
                test_month,
                train: train_start.window(train_len),
                test,
            });
        }
        test_month = test_month.plus(test_len);
    }
    if out.is_empty() {
        return Err(Error::Window(format!(
            "no complete {}-month test window fits between {} and {}",
            config.test_months, config.first_test_start, config.horizon_end
        )));
    }
    Ok(out)
}

/// Users with at least one record in `train` and at least one in `test`.
pub fn eligible_users(
    records: &[InteractionRecord],
    train: TimeWindow,
    test: TimeWindow,
) -> BTreeSet<String> {
    let mut in_train = BTreeSet::new();
    let mut in_test = BTreeSet::new();
    for r in records {
        if train.contains(r.last_ts) {
            in_train.insert(r.user_id.as_str());
        }
        if test.contains(r.last_ts) {
            in_test.insert(r.user_id.as_str());
        }
    }
    in_train
        .intersection(&in_test)
        .map(|u| u.to_string())
        .collect()
}

/// Build every rolling split along with its eligible users.
pub fn rolling_splits(
    records: &[InteractionRecord],
    config: &SplitConfig,
) -> Result<Vec<ExperimentSplit>> {
    Ok(split_windows(config)?
        .into_iter()
        .map(|windows| ExperimentSplit {
            eligible_users: eligible_users(records, windows.train, windows.test),
            windows,
        })
        .collect())
}

/// Records whose `last_ts` lies in the window.
pub fn records_in(records: &[InteractionRecord], window: TimeWindow) -> Vec<&InteractionRecord> {
    records.iter().filter(|r| window.contains(r.last_ts)).collect()
}
