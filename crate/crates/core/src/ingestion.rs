//! Loading of the three flat input files.
//!
//! * interactions: `user_id,item_id,timestamp,rating` — one row per raw shelving or
//!   rating event, timestamps in epoch seconds (UTC), rating empty or 1..=5;
//! * genres: `item_id,genre,count` — raw shelf-application counts per genre;
//! * authors: `item_id,author_id,position,gender` — one row per credited author.
//!
//! Raw events are collapsed to one [`InteractionRecord`] per user–item pair by
//! [`deduplicate`]. Genre counts are normalized into per-item distributions.
//! Only the lowest-position author of each item is kept as its primary author.
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use crate::error::{Error, Result};

pub const INTERACTION_COLUMNS: [&str; 4] = ["user_id", "item_id", "timestamp", "rating"];
pub const GENRE_COLUMNS: [&str; 3] = ["item_id", "genre", "count"];
pub const AUTHOR_COLUMNS: [&str; 4] = ["item_id", "author_id", "position", "gender"];

/// A single shelving or rating action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub user_id: String,
    pub item_id: String,
    pub timestamp: i64,
    pub rating: Option<u8>,
}

/// All events between one user and one item, collapsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub user_id: String,
    pub item_id: String,
    pub first_ts: i64,
    pub last_ts: i64,
    pub last_rating: Option<u8>,
}

/// Describes the delimiter-separated layout of an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FileFormat {
    pub delimiter: u8,
}

impl Default for FileFormat {
    fn default() -> Self {
        FileFormat { delimiter: b',' }
    }
}

/// Column positions resolved from a header row.
struct Columns<'a> {
    source_name: &'a str,
    names: &'static [&'static str],
    index: Vec<usize>,
}

impl<'a> Columns<'a> {
    fn resolve(
        source_name: &'a str,
        header: &StringRecord,
        names: &'static [&'static str],
    ) -> Result<Self> {
        let mut index = Vec::with_capacity(names.len());
        for name in names {
            match header.iter().position(|h| h.trim() == *name) {
                Some(pos) => index.push(pos),
                None => {
                    return Err(Error::Parse {
                        source_name: source_name.to_string(),
                        line: 1,
                        column: name.to_string(),
                        message: "missing column in header".into(),
                    })
                }
            }
        }
        Ok(Columns {
            source_name,
            names,
            index,
        })
    }

    fn field<'r>(&self, rec: &'r StringRecord, col: usize) -> Result<&'r str> {
        rec.get(self.index[col])
            .map(str::trim)
            .ok_or_else(|| self.error(rec, col, "missing column"))
    }

    fn error(&self, rec: &StringRecord, col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source_name.to_string(),
            line: line_of(rec),
            column: self.names[col].to_string(),
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, rec: &StringRecord, col: usize, what: &str) -> Result<T> {
        let raw = self.field(rec, col)?;
        raw.parse()
            .map_err(|_| self.error(rec, col, format!("malformed {what} `{raw}`")))
    }
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn reader<R: Read>(input: R, format: FileFormat) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn csv_error(source_name: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        column: String::new(),
        message: err.to_string(),
    }
}

fn read_rows<R: Read>(
    input: R,
    format: FileFormat,
    source_name: &str,
    names: &'static [&'static str],
    mut row: impl FnMut(&Columns<'_>, &StringRecord) -> Result<()>,
) -> Result<()> {
    let mut rdr = reader(input, format);
    let header = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();
    let cols = Columns::resolve(source_name, &header, names)?;
    let mut rec = StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(true) => row(&cols, &rec)?,
            Ok(false) => break,
            Err(e) => return Err(csv_error(source_name, e)),
        }
    }
    Ok(())
}

/// Parse an interaction event file. Events come back in file order.
pub fn parse_interactions<R: Read>(
    input: R,
    format: FileFormat,
    source_name: &str,
) -> Result<Vec<RawEvent>> {
    let mut events = Vec::new();
    read_rows(input, format, source_name, &INTERACTION_COLUMNS, |cols, rec| {
        let user_id = cols.field(rec, 0)?;
        let item_id = cols.field(rec, 1)?;
        if user_id.is_empty() {
            return Err(cols.error(rec, 0, "empty user id"));
        }
        if item_id.is_empty() {
            return Err(cols.error(rec, 1, "empty item id"));
        }
        let timestamp: i64 = cols.parse(rec, 2, "timestamp")?;
        if timestamp <= 0 {
            return Err(cols.error(rec, 2, format!("timestamp {timestamp} is not positive")));
        }
        let rating = match cols.field(rec, 3)? {
            "" => None,
            raw => match raw.parse::<u8>() {
                Ok(r) if (1..=5).contains(&r) => Some(r),
                _ => return Err(cols.error(rec, 3, format!("rating `{raw}` outside 1..5"))),
            },
        };
        events.push(RawEvent {
            user_id: user_id.to_string(),
            item_id: item_id.to_string(),
            timestamp,
            rating,
        });
        Ok(())
    })?;
    Ok(events)
}

struct PairState {
    first_ts: i64,
    last_ts: i64,
    rated: Option<(i64, u8)>,
}

/// Collapse raw events into one record per (user, item) pair.
///
/// The output is sorted by `(user_id, item_id)`. `last_rating` is the rating of
/// the latest rated event; ties on timestamp go to the event later in the input.
pub fn deduplicate(events: &[RawEvent]) -> Vec<InteractionRecord> {
    let mut table: HashMap<(&str, &str), PairState> = HashMap::new();
    for ev in events {
        let rated = ev.rating.map(|r| (ev.timestamp, r));
        match table.entry((ev.user_id.as_str(), ev.item_id.as_str())) {
            Entry::Vacant(v) => {
                v.insert(PairState {
                    first_ts: ev.timestamp,
                    last_ts: ev.timestamp,
                    rated,
                });
            }
            Entry::Occupied(mut o) => {
                let st = o.get_mut();
                st.first_ts = st.first_ts.min(ev.timestamp);
                st.last_ts = st.last_ts.max(ev.timestamp);
                if let Some((ts, r)) = rated {
                    match st.rated {
                        Some((cur, _)) if cur > ts => {}
                        _ => st.rated = Some((ts, r)),
                    }
                }
            }
        }
    }

    let mut records: Vec<InteractionRecord> = table
        .into_iter()
        .map(|((u, i), st)| InteractionRecord {
            user_id: u.to_string(),
            item_id: i.to_string(),
            first_ts: st.first_ts,
            last_ts: st.last_ts,
            last_rating: st.rated.map(|(_, r)| r),
        })
        .collect();
    records.sort_unstable_by(|a, b| (&a.user_id, &a.item_id).cmp(&(&b.user_id, &b.item_id)));
    records
}

/// Validate externally supplied records: timestamps ordered, one record per pair.
///
/// Records that violate `first_ts <= last_ts` are rejected, not repaired.
pub fn validate_records(records: &[InteractionRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        if r.first_ts > r.last_ts {
            return Err(Error::InvalidInput(format!(
                "record ({}, {}) has first_ts {} after last_ts {}",
                r.user_id, r.item_id, r.first_ts, r.last_ts
            )));
        }
        if let Some(rating) = r.last_rating {
            if !(1..=5).contains(&rating) {
                return Err(Error::InvalidInput(format!(
                    "record ({}, {}) has rating {rating} outside 1..5",
                    r.user_id, r.item_id
                )));
            }
        }
        if !seen.insert((r.user_id.as_str(), r.item_id.as_str())) {
            return Err(Error::InvalidInput(format!(
                "duplicate record for ({}, {})",
                r.user_id, r.item_id
            )));
        }
    }
    Ok(())
}

/// Per-item genre distributions P(g|b) over a vocabulary discovered at load time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenreTable {
    genres: Vec<String>,
    items: HashMap<String, Vec<(usize, f64)>>,
}

impl GenreTable {
    /// Build from raw `(item, genre, count)` triples. Duplicate rows are summed.
    pub fn from_counts<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, u64)>,
    {
        let mut counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
        let mut vocab = BTreeSet::new();
        for (item, genre, count) in rows {
            vocab.insert(genre);
            *counts.entry(item).or_default().entry(genre).or_default() += count;
        }
        let genres: Vec<String> = vocab.iter().map(|g| g.to_string()).collect();
        let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, g)| (*g, i)).collect();

        let mut items = HashMap::new();
        for (item, gc) in counts {
            let total: u64 = gc.values().sum();
            if total == 0 {
                continue;
            }
            let row: Vec<(usize, f64)> = gc
                .iter()
                .filter(|(_, c)| **c > 0)
                .map(|(g, c)| (index[g], *c as f64 / total as f64))
                .collect();
            items.insert(item.to_string(), row);
        }
        GenreTable { genres, items }
    }

    /// Genre names, indexed by the ids used in [`GenreTable::get`].
    pub fn genres(&self) -> &[String] {
        &self.genres
    }

    pub fn n_genres(&self) -> usize {
        self.genres.len()
    }

    /// Sparse distribution for an item, sorted by genre index.
    pub fn get(&self, item_id: &str) -> Option<&[(usize, f64)]> {
        self.items.get(item_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = (&str, &[(usize, f64)])> {
        self.items.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Load a genre-count file and normalize it.
pub fn load_genres<R: Read>(input: R, format: FileFormat, source_name: &str) -> Result<GenreTable> {
    let mut rows: Vec<(String, String, u64)> = Vec::new();
    read_rows(input, format, source_name, &GENRE_COLUMNS, |cols, rec| {
        let item = cols.field(rec, 0)?;
        let genre = cols.field(rec, 1)?;
        if item.is_empty() {
            return Err(cols.error(rec, 0, "empty item id"));
        }
        if genre.is_empty() {
            return Err(cols.error(rec, 1, "empty genre"));
        }
        let count: i64 = cols.parse(rec, 2, "count")?;
        if count < 0 {
            return Err(cols.error(rec, 2, format!("negative count {count}")));
        }
        rows.push((item.to_string(), genre.to_string(), count as u64));
        Ok(())
    })?;
    Ok(GenreTable::from_counts(
        rows.iter().map(|(i, g, c)| (i.as_str(), g.as_str(), *c)),
    ))
}

/// Author gender label. Ambiguous and missing source labels collapse to `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
    Unknown,
}

impl Gender {
    /// Parse a source token. Tokens are lowercase ASCII and matched exactly.
    pub fn parse_token(token: &str) -> Option<Gender> {
        match token {
            "female" => Some(Gender::Female),
            "male" => Some(Gender::Male),
            "unknown" | "ambiguous" | "" => Some(Gender::Unknown),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unknown => "unknown",
        }
    }

    pub fn is_known(self) -> bool {
        self != Gender::Unknown
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryAuthor {
    pub author_id: String,
    pub gender: Gender,
}

/// Item → primary author, and author → gender.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuthorTable {
    items: HashMap<String, PrimaryAuthor>,
    authors: HashMap<String, Gender>,
}

impl AuthorTable {
    pub fn primary(&self, item_id: &str) -> Option<&PrimaryAuthor> {
        self.items.get(item_id)
    }

    pub fn gender_of_item(&self, item_id: &str) -> Option<Gender> {
        self.items.get(item_id).map(|a| a.gender)
    }

    pub fn author_gender(&self, author_id: &str) -> Option<Gender> {
        self.authors.get(author_id).copied()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_authors(&self) -> usize {
        self.authors.len()
    }

    /// Build from `(item, author, position, gender)` rows.
    pub fn from_rows<'a, I>(rows: I) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = (&'a str, &'a str, u32, Gender)>,
    {
        let mut best: HashMap<&str, (u32, &str, Gender, bool)> = HashMap::new();
        let mut authors: HashMap<String, Gender> = HashMap::new();
        for (item, author, pos, gender) in rows {
            match authors.entry(author.to_string()) {
                Entry::Vacant(v) => {
                    v.insert(gender);
                }
                Entry::Occupied(o) if *o.get() != gender => {
                    return Err(format!(
                        "author `{author}` has conflicting genders `{}` and `{gender}`",
                        o.get()
                    ));
                }
                Entry::Occupied(_) => {}
            }
            match best.entry(item) {
                Entry::Vacant(v) => {
                    v.insert((pos, author, gender, false));
                }
                Entry::Occupied(mut o) => {
                    let cur = o.get_mut();
                    if pos < cur.0 {
                        *cur = (pos, author, gender, false);
                    } else if pos == cur.0 {
                        cur.3 = true;
                    }
                }
            }
        }
        let mut items = HashMap::with_capacity(best.len());
        for (item, (pos, author, gender, dup)) in best {
            if dup {
                return Err(format!(
                    "item `{item}` has more than one author at position {pos}"
                ));
            }
            items.insert(
                item.to_string(),
                PrimaryAuthor {
                    author_id: author.to_string(),
                    gender,
                },
            );
        }
        Ok(AuthorTable { items, authors })
    }
}

/// Load an author file, keeping each item's lowest-position author.
pub fn load_authors<R: Read>(input: R, format: FileFormat, source_name: &str) -> Result<AuthorTable> {
    let mut rows: Vec<(String, String, u32, Gender)> = Vec::new();
    let mut lines: HashMap<(String, u32), u64> = HashMap::new();
    read_rows(input, format, source_name, &AUTHOR_COLUMNS, |cols, rec| {
        let item = cols.field(rec, 0)?;
        let author = cols.field(rec, 1)?;
        if item.is_empty() {
            return Err(cols.error(rec, 0, "empty item id"));
        }
        if author.is_empty() {
            return Err(cols.error(rec, 1, "empty author id"));
        }
        let position: u32 = cols.parse(rec, 2, "position")?;
        let token = cols.field(rec, 3)?;
        let gender = Gender::parse_token(token)
            .ok_or_else(|| cols.error(rec, 3, format!("unrecognized gender `{token}`")))?;
        if let Some(prev) = lines.insert((item.to_string(), position), line_of(rec)) {
            return Err(cols.error(
                rec,
                2,
                format!("item `{item}` already has an author at position {position} (line {prev})"),
            ));
        }
        rows.push((item.to_string(), author.to_string(), position, gender));
        Ok(())
    })?;
    AuthorTable::from_rows(
        rows.iter()
            .map(|(i, a, p, g)| (i.as_str(), a.as_str(), *p, *g)),
    )
    .map_err(|message| Error::Format {
        source_name: source_name.to_string(),
        message,
    })
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_interactions_file(path: &Path) -> Result<Vec<RawEvent>> {
    parse_interactions(open(path)?, FileFormat::default(), &path.display().to_string())
}

pub fn read_genres_file(path: &Path) -> Result<GenreTable> {
    load_genres(open(path)?, FileFormat::default(), &path.display().to_string())
}

pub fn read_authors_file(path: &Path) -> Result<AuthorTable> {
    load_authors(open(path)?, FileFormat::default(), &path.display().to_string())
}
