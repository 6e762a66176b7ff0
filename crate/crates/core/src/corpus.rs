//! Interaction log ingestion, cleaning and temporal splitting.
//!
//! The canonical preprocessing order is dedupe, binarize, k-core filter,
//! global temporal split and finally cold-start pruning of the held-out
//! partitions. Every stage is a pure function from one [`Dataset`] to the
//! next, and every stage leaves its output sorted by
//! `(timestamp, user_id, item_id)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `(user, item, timestamp, rating)` event.
#[derive(Clone, Debug, PartialEq)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    /// Seconds since the epoch.
    pub timestamp: i64,
    pub rating: Option<f64>,
}

impl Interaction {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, timestamp: i64) -> Self {
        Interaction {
            user_id: user_id.into(),
            item_id: item_id.into(),
            timestamp,
            rating: None,
        }
    }

    pub fn with_rating(mut self, rating: f64) -> Self {
        self.rating = Some(rating);
        self
    }

    fn sort_key(&self) -> (i64, &str, &str) {
        (self.timestamp, &self.user_id, &self.item_id)
    }
}

/// A collection of interactions kept sorted by `(timestamp, user_id, item_id)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub interactions: Vec<Interaction>,
    /// `(min, max)` of the explicit rating scale, absent for implicit logs.
    pub rating_range: Option<(f64, f64)>,
}

impl Dataset {
    /// Builds a dataset and sorts it into canonical order.
    pub fn new(interactions: Vec<Interaction>, rating_range: Option<(f64, f64)>) -> Self {
        let mut d = Dataset {
            interactions,
            rating_range,
        };
        d.sort();
        d
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interaction> {
        self.interactions.iter()
    }

    fn sort(&mut self) {
        self.interactions
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    pub fn users(&self) -> HashSet<&str> {
        self.interactions
            .iter()
            .map(|i| i.user_id.as_str())
            .collect()
    }

    pub fn items(&self) -> HashSet<&str> {
        self.interactions
            .iter()
            .map(|i| i.item_id.as_str())
            .collect()
    }

    /// Item ids per user, in chronological order.
    pub fn histories(&self) -> HashMap<&str, Vec<&str>> {
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for i in &self.interactions {
            out.entry(i.user_id.as_str())
                .or_default()
                .push(i.item_id.as_str());
        }
        out
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            interactions: self.len(),
            users: self.users().len(),
            items: self.items().len(),
            first_timestamp: self.interactions.first().map(|i| i.timestamp),
            last_timestamp: self.interactions.last().map(|i| i.timestamp),
        }
    }
}

/// Counts and timespan of a dataset, rendered as `key = value` lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSummary {
    pub interactions: usize,
    pub users: usize,
    pub items: usize,
    pub first_timestamp: Option<i64>,
    pub last_timestamp: Option<i64>,
}

impl DatasetSummary {
    pub fn timespan_seconds(&self) -> i64 {
        match (self.first_timestamp, self.last_timestamp) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "interactions = {}", self.interactions)?;
        writeln!(f, "users = {}", self.users)?;
        writeln!(f, "items = {}", self.items)?;
        if let (Some(a), Some(b)) = (self.first_timestamp, self.last_timestamp) {
            writeln!(f, "first_timestamp = {a}")?;
            writeln!(f, "last_timestamp = {b}")?;
        }
        writeln!(f, "timespan_seconds = {}", self.timespan_seconds())?;
        write!(
            f,
            "timespan_days = {:.4}",
            self.timespan_seconds() as f64 / 86_400.0
        )
    }
}

/// Selects a column either by header name or by zero-based position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Column {
    fn resolve(&self, headers: Option<&csv::StringRecord>) -> Result<usize> {
        match self {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => headers
                .and_then(|h| h.iter().position(|c| c.trim() == name))
                .ok_or_else(|| Error::MissingColumn(name.clone())),
        }
    }
}

/// How to read a delimiter-separated interaction log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputFormat {
    #[serde(with = "delimiter_serde")]
    pub delimiter: u8,
    pub has_header: bool,
    pub user: Column,
    pub item: Column,
    pub timestamp: Column,
    pub rating: Option<Column>,
    /// Multiplier that converts the raw timestamp unit into seconds.
    pub time_scale: f64,
    pub rating_range: Option<(f64, f64)>,
}

impl Default for InputFormat {
    fn default() -> Self {
        InputFormat {
            delimiter: b',',
            has_header: false,
            user: Column::Index(0),
            item: Column::Index(1),
            timestamp: Column::Index(2),
            rating: None,
            time_scale: 1.0,
            rating_range: None,
        }
    }
}

impl InputFormat {
    /// The layout written by [`write_interactions`].
    pub fn canonical(delimiter: u8) -> Self {
        InputFormat {
            delimiter,
            has_header: true,
            user: Column::Name("user_id".into()),
            item: Column::Name("item_id".into()),
            timestamp: Column::Name("timestamp".into()),
            rating: Some(Column::Name("rating".into())),
            time_scale: 1.0,
            rating_range: None,
        }
    }
}

mod delimiter_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &u8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&(*d as char).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u8, D::Error> {
        let s = String::deserialize(d)?;
        let s = match s.as_str() {
            "\\t" | "tab" => "\t",
            other => other,
        };
        match s.as_bytes() {
            [b] => Ok(*b),
            _ => Err(serde::de::Error::custom(format!(
                "delimiter must be a single byte, got {s:?}"
            ))),
        }
    }
}

/// Row accounting from [`load_interactions`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    pub skipped: usize,
}

fn parse_timestamp(raw: &str, scale: f64) -> Option<i64> {
    let raw = raw.trim();
    let ts = if let Ok(v) = raw.parse::<i64>() {
        if scale == 1.0 {
            v
        } else {
            (v as f64 * scale).floor() as i64
        }
    } else {
        let v = raw.parse::<f64>().ok().filter(|v| v.is_finite())?;
        (v * scale).floor() as i64
    };
    (ts >= 0).then_some(ts)
}

/// Reads a delimiter-separated log into a sorted [`Dataset`].
///
/// Rows with a missing field, an empty id, an unparseable or negative
/// timestamp, or an unparseable rating are skipped and counted in the
/// returned [`LoadReport`].
pub fn load_interactions<R: Read>(
    source: R,
    format: &InputFormat,
) -> Result<(Dataset, LoadReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = if format.has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };
    let user_col = format.user.resolve(headers.as_ref())?;
    let item_col = format.item.resolve(headers.as_ref())?;
    let ts_col = format.timestamp.resolve(headers.as_ref())?;
    let rating_col = match &format.rating {
        Some(c) => Some(c.resolve(headers.as_ref())?),
        None => None,
    };

    let mut report = LoadReport::default();
    let mut bad_timestamps = 0;
    let mut interactions = Vec::new();
    for record in reader.records() {
        let record = record?;
        report.rows += 1;
        let (Some(user), Some(item), Some(ts)) = (
            record.get(user_col),
            record.get(item_col),
            record.get(ts_col),
        ) else {
            report.skipped += 1;
            continue;
        };
        if user.is_empty() || item.is_empty() {
            report.skipped += 1;
            continue;
        }
        let Some(timestamp) = parse_timestamp(ts, format.time_scale) else {
            bad_timestamps += 1;
            report.skipped += 1;
            continue;
        };
        let rating = match rating_col {
            Some(c) => match record.get(c).map(str::trim) {
                None | Some("") => None,
                Some(r) => match r.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        report.skipped += 1;
                        continue;
                    }
                },
            },
            None => None,
        };
        interactions.push(Interaction {
            user_id: user.to_string(),
            item_id: item.to_string(),
            timestamp,
            rating,
        });
    }

    if interactions.is_empty() {
        if report.rows > 0 && bad_timestamps == report.rows {
            return Err(Error::TimestampColumn { rows: report.rows });
        }
        return Err(Error::NoRows {
            skipped: report.skipped,
        });
    }
    Ok((Dataset::new(interactions, format.rating_range), report))
}

/// Writes the canonical layout: header `user_id, item_id, timestamp, rating`.
pub fn write_interactions<W: Write>(d: &Dataset, delimiter: u8, sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(sink);
    w.write_record(["user_id", "item_id", "timestamp", "rating"])?;
    for i in &d.interactions {
        let rating = i.rating.map(|r| r.to_string()).unwrap_or_default();
        w.write_record([
            i.user_id.as_str(),
            i.item_id.as_str(),
            &i.timestamp.to_string(),
            &rating,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Keeps interactions rated strictly above the midpoint of `range`.
///
/// With no range the dataset is implicit feedback and is returned unchanged.
/// The output carries no rating range, so binarizing twice is a no-op.
pub fn binarize(d: &Dataset, range: Option<(f64, f64)>) -> Result<Dataset> {
    let Some((lo, hi)) = range else {
        return Ok(Dataset {
            interactions: d.interactions.clone(),
            rating_range: None,
        });
    };
    if !(hi > lo) {
        return Err(Error::Config(format!(
            "rating range max ({hi}) must exceed min ({lo})"
        )));
    }
    let midpoint = (lo + hi) / 2.0;
    let mut kept = Vec::with_capacity(d.len());
    for i in &d.interactions {
        let r = i.rating.ok_or_else(|| Error::MissingRating {
            user: i.user_id.clone(),
            item: i.item_id.clone(),
        })?;
        if r > midpoint {
            kept.push(i.clone());
        }
    }
    Ok(Dataset {
        interactions: kept,
        rating_range: None,
    })
}

/// Keeps only the earliest interaction of each `(user, item)` pair.
pub fn dedupe(d: &Dataset) -> Dataset {
    let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(d.len());
    // input is time-sorted, so the first occurrence is the earliest
    let interactions = d
        .interactions
        .iter()
        .filter(|i| seen.insert((i.user_id.as_str(), i.item_id.as_str())))
        .cloned()
        .collect();
    Dataset {
        interactions,
        rating_range: d.rating_range,
    }
}

/// Iteratively drops users and items with fewer than `k` interactions until
/// nothing changes, yielding the maximal (k, k)-core.
pub fn kcore_filter(d: &Dataset, k: usize) -> Dataset {
    let mut alive: Vec<bool> = vec![true; d.len()];
    loop {
        let mut user_count: HashMap<&str, usize> = HashMap::new();
        let mut item_count: HashMap<&str, usize> = HashMap::new();
        for (i, _) in d.interactions.iter().zip(&alive).filter(|(_, a)| **a) {
            *user_count.entry(&i.user_id).or_default() += 1;
            *item_count.entry(&i.item_id).or_default() += 1;
        }
        let mut changed = false;
        for (i, a) in d.interactions.iter().zip(alive.iter_mut()) {
            if *a && (user_count[i.user_id.as_str()] < k || item_count[i.item_id.as_str()] < k) {
                *a = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let interactions = d
        .interactions
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(i, _)| i.clone())
        .collect();
    Dataset {
        interactions,
        rating_range: d.rating_range,
    }
}

/// Fractions of the time-ordered sequence assigned to each partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let sum = self.train + self.validation + self.test;
        let ok = [self.train, self.validation, self.test]
            .iter()
            .all(|r| r.is_finite() && *r > 0.0)
            && (sum - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "split ratios must be positive and sum to 1, got {self:?}"
            )))
        }
    }

    /// Partition sizes for `n` interactions: validation and test take
    /// `max(1, floor(ratio * n))`, the remainder goes to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let part = |r: f64| ((r * n as f64 + 1e-9).floor() as usize).max(1);
        let val = part(self.validation);
        let test = part(self.test);
        (n - val - test, val, test)
    }
}

/// Train/validation/test partitions of a globally time-ordered dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// Last timestamp of the train and validation partitions.
    pub boundaries: (i64, i64),
}

/// Splits by position in the sorted sequence (first 80%, next 10%, last 10%
/// by default). Interactions sharing a timestamp land wherever their sorted
/// position puts them.
pub fn temporal_split(d: &Dataset, ratios: SplitRatios) -> Result<SplitResult> {
    ratios.validate()?;
    let n = d.len();
    if n < 3 {
        return Err(Error::SplitTooSmall(n));
    }
    let (n_train, n_val, _) = ratios.sizes(n);
    if n_train == 0 {
        return Err(Error::SplitTooSmall(n));
    }
    let part = |range: std::ops::Range<usize>| Dataset {
        interactions: d.interactions[range].to_vec(),
        rating_range: d.rating_range,
    };
    let train = part(0..n_train);
    let validation = part(n_train..n_train + n_val);
    let test = part(n_train + n_val..n);
    let boundaries = (
        train
            .interactions
            .last()
            .map(|i| i.timestamp)
            .unwrap_or_default(),
        validation
            .interactions
            .last()
            .map(|i| i.timestamp)
            .unwrap_or_default(),
    );
    Ok(SplitResult {
        train,
        validation,
        test,
        boundaries,
    })
}

/// Drops validation/test interactions whose user or item never occurs in train.
pub fn remove_cold_start(s: &SplitResult) -> SplitResult {
    let users = s.train.users();
    let items = s.train.items();
    let keep = |d: &Dataset| Dataset {
        interactions: d
            .interactions
            .iter()
            .filter(|i| users.contains(i.user_id.as_str()) && items.contains(i.item_id.as_str()))
            .cloned()
            .collect(),
        rating_range: d.rating_range,
    };
    SplitResult {
        train: s.train.clone(),
        validation: keep(&s.validation),
        test: keep(&s.test),
        boundaries: s.boundaries,
    }
}

/// Train and validation concatenated and re-sorted, for fitting final models.
pub fn merge_train_val(s: &SplitResult) -> Dataset {
    let mut all = s.train.interactions.clone();
    all.extend(s.validation.interactions.iter().cloned());
    Dataset::new(all, s.train.rating_range)
}

/// Settings for the full cleaning and splitting pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub rating_range: Option<(f64, f64)>,
    pub min_interactions: usize,
    pub ratios: SplitRatios,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            rating_range: None,
            min_interactions: 5,
            ratios: SplitRatios::default(),
        }
    }
}

/// dedupe, binarize and k-core filter.
pub fn clean(d: &Dataset, cfg: &PreprocessConfig) -> Result<Dataset> {
    if cfg.min_interactions == 0 {
        return Err(Error::Config("min_interactions must be at least 1".into()));
    }
    let d = dedupe(d);
    let d = binarize(&d, cfg.rating_range)?;
    Ok(kcore_filter(&d, cfg.min_interactions))
}

/// The whole preprocessing protocol: [`clean`], [`temporal_split`], then
/// [`remove_cold_start`].
pub fn preprocess(d: &Dataset, cfg: &PreprocessConfig) -> Result<SplitResult> {
    let cleaned = clean(d, cfg)?;
    if cleaned.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let split = temporal_split(&cleaned, cfg.ratios)?;
    Ok(remove_cold_start(&split))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[(&str, &str, i64)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(u, i, t)| Interaction::new(*u, *i, *t))
                .collect(),
            None,
        )
    }

    fn load(text: &str, format: &InputFormat) -> Result<(Dataset, LoadReport)> {
        load_interactions(text.as_bytes(), format)
    }

    #[test]
    fn loads_well_formed_rows() {
        let (d, report) = load("u1,a,30\nu2,b,10\nu1,c,20\n", &InputFormat::default()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(report.skipped, 0);
        let ts: Vec<i64> = d.iter().map(|i| i.timestamp).collect();
        assert_eq!(ts, vec![10, 20, 30]);
    }

    #[test]
    fn skips_non_numeric_timestamp() {
        let text = "u1,a,1\nu1,b,2\nu1,c,yesterday\nu2,a,4\nu2,b,5\n";
        let (d, report) = load(text, &InputFormat::default()).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(
            report,
            LoadReport {
                rows: 5,
                skipped: 1
            }
        );
    }

    #[test]
    fn named_columns_ratings_and_scale() {
        let text = "rating\tts_ms\titem\tuser\n4\t5000\ti1\tu1\n2\t1000\ti2\tu1\n";
        let format = InputFormat {
            delimiter: b'\t',
            has_header: true,
            user: Column::Name("user".into()),
            item: Column::Name("item".into()),
            timestamp: Column::Name("ts_ms".into()),
            rating: Some(Column::Name("rating".into())),
            time_scale: 0.001,
            rating_range: Some((1.0, 5.0)),
        };
        let (d, _) = load(text, &format).unwrap();
        assert_eq!(d.interactions[0].timestamp, 1);
        assert_eq!(d.interactions[0].rating, Some(2.0));
        assert_eq!(d.interactions[1].timestamp, 5);
        assert_eq!(d.rating_range, Some((1.0, 5.0)));
    }

    #[test]
    fn load_errors() {
        let fmt = InputFormat::default();
        assert!(matches!(
            load("u,a,x\nv,b,y\n", &fmt),
            Err(Error::TimestampColumn { rows: 2 })
        ));
        assert!(matches!(load("", &fmt), Err(Error::NoRows { .. })));
        assert!(matches!(
            load(",a,1\n", &fmt),
            Err(Error::NoRows { skipped: 1 })
        ));
        let named = InputFormat {
            has_header: true,
            user: Column::Name("nope".into()),
            ..InputFormat::default()
        };
        assert!(matches!(
            load("a,b,c\n", &named),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn negative_timestamp_is_malformed() {
        let (d, r) = load("u,a,-5\nu,b,5\n", &InputFormat::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(r.skipped, 1);
    }

    #[test]
    fn binarize_keeps_strictly_above_midpoint() {
        let d = Dataset::new(
            (1..=5)
                .map(|r| Interaction::new("u", format!("i{r}"), r as i64).with_rating(r as f64))
                .collect(),
            Some((1.0, 5.0)),
        );
        let b = binarize(&d, Some((1.0, 5.0))).unwrap();
        let kept: Vec<f64> = b.iter().map(|i| i.rating.unwrap()).collect();
        assert_eq!(kept, vec![4.0, 5.0]);
        assert_eq!(b.rating_range, None);
    }

    #[test]
    fn binarize_without_range_is_noop() {
        let d = ds(&[("u", "a", 1), ("u", "b", 2)]);
        assert_eq!(binarize(&d, None).unwrap(), d);
    }

    #[test]
    fn binarize_midpoint_ties_dropped() {
        let d = Dataset::new(
            (0..4)
                .map(|t| Interaction::new("u", format!("i{t}"), t).with_rating(3.0))
                .collect(),
            None,
        );
        assert!(binarize(&d, Some((1.0, 5.0))).unwrap().is_empty());
    }

    #[test]
    fn binarize_requires_ratings() {
        let d = ds(&[("u", "a", 1)]);
        assert!(matches!(
            binarize(&d, Some((1.0, 5.0))),
            Err(Error::MissingRating { .. })
        ));
        assert!(matches!(
            binarize(&d, Some((5.0, 5.0))),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dedupe_keeps_earliest() {
        let d = ds(&[("u", "a", 20), ("u", "a", 10), ("u", "b", 15)]);
        let out = dedupe(&d);
        // brute-force group-by: min timestamp per pair
        let mut expected: HashMap<(String, String), i64> = HashMap::new();
        for i in d.iter() {
            let e = expected
                .entry((i.user_id.clone(), i.item_id.clone()))
                .or_insert(i.timestamp);
            *e = (*e).min(i.timestamp);
        }
        assert_eq!(out.len(), expected.len());
        for i in out.iter() {
            assert_eq!(
                expected[&(i.user_id.clone(), i.item_id.clone())],
                i.timestamp
            );
        }
        assert_eq!(out.interactions[0].timestamp, 10);
    }

    #[test]
    fn dedupe_identity_and_empty() {
        let d = ds(&[("u", "a", 1), ("v", "a", 2)]);
        assert_eq!(dedupe(&d), d);
        assert!(dedupe(&Dataset::default()).is_empty());
    }

    #[test]
    fn kcore_star_graph_is_empty() {
        let d = ds(&[
            ("u1", "a", 1),
            ("u2", "a", 2),
            ("u3", "a", 3),
            ("u4", "a", 4),
        ]);
        assert!(kcore_filter(&d, 5).is_empty());
    }

    #[test]
    fn kcore_identity_when_dense() {
        let mut rows = Vec::new();
        for u in 0..3 {
            for i in 0..3 {
                rows.push((format!("u{u}"), format!("i{i}"), (u * 3 + i) as i64));
            }
        }
        let d = Dataset::new(
            rows.into_iter()
                .map(|(u, i, t)| Interaction::new(u, i, t))
                .collect(),
            None,
        );
        assert_eq!(kcore_filter(&d, 3), d);
    }

    #[test]
    fn kcore_cascades() {
        // u1..u2 each see a, b; u3 sees only b and c. k=2:
        // u3 keeps 2 interactions but c has 1 -> c dropped -> u3 has 1 -> u3 dropped.
        let d = ds(&[
            ("u1", "a", 1),
            ("u1", "b", 2),
            ("u2", "a", 3),
            ("u2", "b", 4),
            ("u3", "b", 5),
            ("u3", "c", 6),
        ]);
        let out = kcore_filter(&d, 2);
        assert_eq!(out.len(), 4);
        assert!(!out.users().contains("u3"));
    }

    #[test]
    fn split_sizes() {
        let mk = |n: i64| ds(&(0..n).map(|t| ("u", "i", t)).collect::<Vec<_>>());
        let s = temporal_split(&mk(10), SplitRatios::default()).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        let s = temporal_split(&mk(7), SplitRatios::default()).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (5, 1, 1));
        assert_eq!(s.boundaries, (4, 5));
        assert!(matches!(
            temporal_split(&mk(2), SplitRatios::default()),
            Err(Error::SplitTooSmall(2))
        ));
    }

    #[test]
    fn split_identical_timestamps_uses_sorted_position() {
        let d = ds(&(0..10)
            .map(|i| {
                (
                    "u",
                    ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"][i],
                    7,
                )
            })
            .collect::<Vec<_>>());
        let s = temporal_split(&d, SplitRatios::default()).unwrap();
        assert_eq!(s.test.interactions[0].item_id, "j");
        assert_eq!(s.validation.interactions[0].item_id, "i");
    }

    #[test]
    fn cold_start_needs_user_and_item() {
        let s = SplitResult {
            train: ds(&[("u1", "a", 1)]),
            validation: Dataset::default(),
            test: ds(&[
                ("u1", "a", 5),
                ("u1", "b", 6),
                ("u2", "a", 7),
                ("u2", "b", 8),
            ]),
            boundaries: (1, 1),
        };
        let pruned = remove_cold_start(&s);
        assert_eq!(pruned.test.len(), 1);
        assert_eq!(pruned.test.interactions[0].timestamp, 5);
        assert_eq!(remove_cold_start(&pruned), pruned);
    }

    #[test]
    fn merge_sorted_and_empty_validation() {
        let s = SplitResult {
            train: ds(&[("u", "a", 1), ("u", "b", 3)]),
            validation: ds(&[("v", "a", 3)]),
            test: Dataset::default(),
            boundaries: (3, 3),
        };
        let m = merge_train_val(&s);
        assert_eq!(m.len(), 3);
        let keys: Vec<_> = m.iter().map(|i| (i.timestamp, i.user_id.clone())).collect();
        assert_eq!(
            keys,
            vec![(1, "u".into()), (3, "u".into()), (3, "v".into())]
        );
        let s2 = SplitResult {
            validation: Dataset::default(),
            ..s.clone()
        };
        assert_eq!(merge_train_val(&s2), s.train);
    }

    #[test]
    fn canonical_round_trip() {
        let d = Dataset::new(
            vec![
                Interaction::new("u", "a", 1).with_rating(4.5),
                Interaction::new("v", "b", 2),
            ],
            None,
        );
        let mut buf = Vec::new();
        write_interactions(&d, b'\t', &mut buf).unwrap();
        let (back, _) = load_interactions(buf.as_slice(), &InputFormat::canonical(b'\t')).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn summary_renders_key_values() {
        let d = ds(&[("u", "a", 0), ("v", "b", 86_400)]);
        let text = d.summary().to_string();
        assert!(text.contains("interactions = 2"));
        assert!(text.contains("timespan_days = 1.0000"));
    }
}
