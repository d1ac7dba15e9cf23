//! Bibliographic record store: ingestion, normalization, deduplication and
//! append-only persistence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::Datelike;
use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::error::{Error, Result};
use crate::text::normalize_title;

pub const MIN_YEAR: i32 = 1500;

pub fn current_year() -> i32 {
    chrono::Utc::now().year()
}

/// One publication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub authors: Vec<String>,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub reference_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_citation_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_tag: Option<String>,
}

impl ArticleRecord {
    pub fn new(id: impl Into<String>, title: impl Into<String>, year: Option<i32>) -> Self {
        ArticleRecord {
            id: id.into(),
            title: title.into(),
            year,
            venue: None,
            authors: Vec::new(),
            abstract_text: None,
            reference_ids: Vec::new(),
            global_citation_count: None,
            source_tag: None,
        }
    }

    pub fn with_references<I, S>(mut self, refs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.reference_ids = refs.into_iter().map(Into::into).collect();
        self.clean_references();
        self
    }

    pub fn with_citations(mut self, count: u64) -> Self {
        self.global_citation_count = Some(count);
        self
    }

    /// Drops empty, duplicate and self references, keeping first occurrence order.
    fn clean_references(&mut self) {
        let mut seen = HashSet::new();
        let own = self.id.clone();
        self.reference_ids.retain(|r| {
            let r = r.trim();
            !r.is_empty() && r != own && seen.insert(r.to_owned())
        });
        for r in &mut self.reference_ids {
            let trimmed = r.trim();
            if trimmed.len() != r.len() {
                *r = trimmed.to_owned();
            }
        }
    }
}

/// Canonical identifier: the source id verbatim, else the hex sha1 of
/// `normalized_title:year`.
pub fn canonical_id(source_id: Option<&str>, title: &str, year: i32) -> String {
    match source_id.map(str::trim) {
        Some(id) if !id.is_empty() => id.to_owned(),
        _ => {
            let mut hasher = Sha1::new();
            hasher.update(normalize_title(title).as_bytes());
            hasher.update(b":");
            hasher.update(year.to_string().as_bytes());
            hasher
                .finalize()
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    DimensionsCsv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimensions-csv" => Ok(InputFormat::DimensionsCsv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::DimensionsCsv => "dimensions-csv",
            InputFormat::Jsonl => "jsonl",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line_number: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Valid rows accepted.
    pub loaded: usize,
    /// Rows that created a new record.
    pub inserted: usize,
    /// Rows merged into an existing record.
    pub merged: usize,
    pub rejected: Vec<Rejection>,
}

impl LoadReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["line_number", "reason"])?;
        for r in &self.rejected {
            w.write_record([r.line_number.to_string(), r.reason.clone()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeOutcome {
    Inserted,
    Updated,
    Unchanged,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnrichReport {
    pub enriched: usize,
    /// Records that already carried an abstract.
    pub already_present: usize,
    /// (line, key) of entries that matched no record.
    pub unmatched: Vec<(usize, String)>,
    pub malformed: Vec<Rejection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJsonRecord {
    id: Option<String>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default, deserialize_with = "present")]
    year: Option<Option<i64>>,
    #[serde(default)]
    venue: Option<String>,
    #[serde(default)]
    authors: Option<Vec<String>>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    reference_ids: Option<Vec<String>>,
    #[serde(default)]
    global_citation_count: Option<u64>,
    #[serde(default)]
    source_tag: Option<String>,
}

// Distinguishes an explicit `null` from an absent key.
fn present<'de, D>(de: D) -> std::result::Result<Option<Option<i64>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<i64>::deserialize(de).map(Some)
}

#[derive(Deserialize)]
struct RawEnrichment {
    id: Option<String>,
    title: Option<String>,
    year: Option<i32>,
    #[serde(rename = "abstract")]
    abstract_text: String,
}

/// In-memory index over records, optionally backed by an append-only JSONL
/// file.
#[derive(Clone, Debug, Default)]
pub struct RecordStore {
    records: BTreeMap<String, ArticleRecord>,
    path: Option<PathBuf>,
    pending: Vec<String>,
}

impl PartialEq for RecordStore {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl RecordStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<I: IntoIterator<Item = ArticleRecord>>(records: I) -> Self {
        let mut store = Self::new();
        for r in records {
            store.merge(r);
        }
        store.pending.clear();
        store
    }

    /// Opens (or prepares) a store file. Later lines supersede earlier ones
    /// for the same id.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut records = BTreeMap::new();
        if path.exists() {
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: ArticleRecord = serde_json::from_str(&line).map_err(|e| {
                    Error::invalid(format!("{}:{}: {e}", path.display(), i + 1))
                })?;
                records.insert(rec.id.clone(), rec);
            }
        }
        Ok(RecordStore {
            records,
            path: Some(path),
            pending: Vec::new(),
        })
    }

    /// Appends every record changed since the last flush to the backing file.
    pub fn flush(&mut self) -> Result<usize> {
        let Some(path) = self.path.clone() else {
            self.pending.clear();
            return Ok(0);
        };
        if self.pending.is_empty() {
            return Ok(0);
        }
        let mut ids = std::mem::take(&mut self.pending);
        ids.sort();
        ids.dedup();
        let mut buf = String::new();
        for id in &ids {
            buf.push_str(&serde_json::to_string(&self.records[id])?);
            buf.push('\n');
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        f.write_all(buf.as_bytes()).map_err(|e| Error::io(&path, e))?;
        Ok(ids.len())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ArticleRecord> {
        self.records.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &ArticleRecord> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    /// Inserts a record or merges it into the stored one with the same id.
    ///
    /// The record with the longer reference list supplies references and
    /// optional fields (ties keep the stored one); the stored title and year
    /// are never replaced, only filled when absent.
    pub fn merge(&mut self, mut incoming: ArticleRecord) -> MergeOutcome {
        incoming.clean_references();
        let id = incoming.id.clone();
        let outcome = match self.records.get_mut(&id) {
            None => {
                self.records.insert(id.clone(), incoming);
                MergeOutcome::Inserted
            }
            Some(existing) => {
                let before = existing.clone();
                let title = if before.title.is_empty() { incoming.title.clone() } else { before.title.clone() };
                let year = before.year.or(incoming.year);
                let (mut winner, loser) = if incoming.reference_ids.len() > before.reference_ids.len() {
                    (incoming, before.clone())
                } else {
                    (before.clone(), incoming)
                };
                winner.title = title;
                winner.year = year;
                winner.venue = winner.venue.or(loser.venue);
                if winner.authors.is_empty() {
                    winner.authors = loser.authors;
                }
                winner.abstract_text = winner.abstract_text.or(loser.abstract_text);
                winner.global_citation_count =
                    winner.global_citation_count.or(loser.global_citation_count);
                winner.source_tag = winner.source_tag.or(loser.source_tag);
                if winner == before {
                    MergeOutcome::Unchanged
                } else {
                    *existing = winner;
                    MergeOutcome::Updated
                }
            }
        };
        if outcome != MergeOutcome::Unchanged {
            self.pending.push(id);
        }
        outcome
    }

    pub fn ingest(&mut self, source_path: impl AsRef<Path>, format: InputFormat) -> Result<LoadReport> {
        let path = source_path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.ingest_str(&content, format)
    }

    pub fn ingest_str(&mut self, content: &str, format: InputFormat) -> Result<LoadReport> {
        let rows = match format {
            InputFormat::Jsonl => parse_jsonl(content),
            InputFormat::DimensionsCsv => parse_dimensions_csv(content)?,
        };
        let mut report = LoadReport::default();
        for row in rows {
            match row {
                Ok(rec) => {
                    report.loaded += 1;
                    match self.merge(rec) {
                        MergeOutcome::Inserted => report.inserted += 1,
                        MergeOutcome::Updated | MergeOutcome::Unchanged => report.merged += 1,
                    }
                }
                Err(rej) => report.rejected.push(rej),
            }
        }
        Ok(report)
    }

    pub fn enrich_abstracts(&mut self, enrichment_path: impl AsRef<Path>) -> Result<EnrichReport> {
        let path = enrichment_path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(self.enrich_abstracts_str(&content))
    }

    /// Applies enrichment rows keyed by id, or by normalized title + year.
    /// Existing abstracts are never overwritten.
    pub fn enrich_abstracts_str(&mut self, content: &str) -> EnrichReport {
        let mut by_title: HashMap<(String, i32), Vec<String>> = HashMap::new();
        for r in self.records.values() {
            if let Some(y) = r.year {
                by_title
                    .entry((normalize_title(&r.title), y))
                    .or_default()
                    .push(r.id.clone());
            }
        }
        let mut report = EnrichReport::default();
        for (i, line) in content.lines().enumerate() {
            let line_number = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let entry: RawEnrichment = match serde_json::from_str(line) {
                Ok(e) => e,
                Err(e) => {
                    log::warn!("enrichment line {line_number} skipped: {e}");
                    report.malformed.push(Rejection {
                        line_number,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let (targets, key) = match (&entry.id, &entry.title, entry.year) {
                (Some(id), _, _) if !id.trim().is_empty() => {
                    let id = id.trim().to_owned();
                    let hits = if self.records.contains_key(&id) { vec![id.clone()] } else { vec![] };
                    (hits, id)
                }
                (_, Some(title), Some(year)) => {
                    let key = (normalize_title(title), year);
                    let hits = by_title.get(&key).cloned().unwrap_or_default();
                    (hits, format!("{}:{}", key.0, key.1))
                }
                _ => {
                    report.malformed.push(Rejection {
                        line_number,
                        reason: "entry needs an id or a title and year".into(),
                    });
                    continue;
                }
            };
            if targets.is_empty() {
                report.unmatched.push((line_number, key));
                continue;
            }
            for id in targets {
                let rec = self.records.get_mut(&id).expect("indexed id exists");
                if rec.abstract_text.as_deref().is_some_and(|a| !a.trim().is_empty()) {
                    report.already_present += 1;
                } else {
                    rec.abstract_text = Some(entry.abstract_text.clone());
                    report.enriched += 1;
                    self.pending.push(id);
                }
            }
        }
        report
    }
}

fn validate_year(y: i64) -> std::result::Result<i32, String> {
    let max = current_year() as i64 + 1;
    if (MIN_YEAR as i64..=max).contains(&y) {
        Ok(y as i32)
    } else {
        Err(format!("year {y} outside [{MIN_YEAR}, {max}]"))
    }
}

fn parse_jsonl(content: &str) -> Vec<std::result::Result<ArticleRecord, Rejection>> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let line_number = i + 1;
            let reject = |reason: String| Rejection { line_number, reason };
            let raw: RawJsonRecord = serde_json::from_str(line).map_err(|e| reject(e.to_string()))?;
            let year = match raw.year {
                None => return Err(reject("missing year".into())),
                Some(None) => None,
                Some(Some(y)) => Some(validate_year(y).map_err(reject)?),
            };
            let title = raw.title.unwrap_or_default();
            let id = match (raw.id.as_deref().map(str::trim), year) {
                (Some(id), _) if !id.is_empty() => id.to_owned(),
                (_, Some(y)) if !title.trim().is_empty() => canonical_id(None, &title, y),
                _ => return Err(reject("missing id".into())),
            };
            let mut rec = ArticleRecord::new(id, title, year);
            rec.venue = raw.venue;
            rec.authors = raw.authors.unwrap_or_default();
            rec.abstract_text = raw.abstract_text;
            rec.reference_ids = raw.reference_ids.unwrap_or_default();
            rec.global_citation_count = raw.global_citation_count;
            rec.source_tag = raw.source_tag.or_else(|| Some("jsonl".into()));
            Ok(rec)
        })
        .collect()
}

fn parse_dimensions_csv(content: &str) -> Result<Vec<std::result::Result<ArticleRecord, Rejection>>> {
    // Dimensions exports may carry a banner line above the header.
    let header_offset = content
        .lines()
        .position(|l| l.contains("Publication ID"))
        .ok_or_else(|| Error::invalid("dimensions-csv: no header with `Publication ID`"))?;
    let body: String = content
        .lines()
        .skip(header_offset)
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
    };
    let id_col = col("Publication ID").expect("header line contains it");
    let title_col = col("Title").ok_or_else(|| Error::invalid("dimensions-csv: missing column `Title`"))?;
    let year_col = col("PubYear").ok_or_else(|| Error::invalid("dimensions-csv: missing column `PubYear`"))?;
    let refs_col = col("Cited references");
    let cited_col = col("Times cited");
    let authors_col = col("Authors");
    let venue_col = col("Source title");
    let abstract_col = col("Abstract");

    let mut out = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0) + header_offset;
                out.push(Err(Rejection {
                    line_number: line,
                    reason: e.to_string(),
                }));
                continue;
            }
        };
        let line_number = row.position().map(|p| p.line() as usize).unwrap_or(0) + header_offset;
        let field = |c: Option<usize>| {
            c.and_then(|c| row.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
        };
        let reject = |reason: &str| Rejection {
            line_number,
            reason: reason.to_owned(),
        };
        let title = field(Some(title_col)).unwrap_or_default();
        let year = match field(Some(year_col)) {
            None => {
                out.push(Err(reject("missing year")));
                continue;
            }
            Some(y) => match y.parse::<i64>() {
                Ok(y) => match validate_year(y) {
                    Ok(y) => y,
                    Err(reason) => {
                        out.push(Err(reject(&reason)));
                        continue;
                    }
                },
                Err(_) => {
                    out.push(Err(reject(&format!("unparseable year `{y}`"))));
                    continue;
                }
            },
        };
        let id = match field(Some(id_col)) {
            Some(id) => id,
            None if !title.is_empty() => canonical_id(None, &title, year),
            None => {
                out.push(Err(reject("missing id")));
                continue;
            }
        };
        let global = match field(cited_col) {
            None => None,
            Some(c) => match c.parse::<u64>() {
                Ok(c) => Some(c),
                Err(_) => {
                    out.push(Err(reject(&format!("invalid citation count `{c}`"))));
                    continue;
                }
            },
        };
        let mut rec = ArticleRecord::new(id, title, Some(year));
        rec.reference_ids = field(refs_col)
            .map(|s| {
                s.split(';')
                    .map(|r| r.trim().trim_matches(|c| c == '[' || c == ']').trim().to_owned())
                    .filter(|r| !r.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        rec.global_citation_count = global;
        rec.authors = field(authors_col)
            .map(|a| a.split(';').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default();
        rec.venue = field(venue_col);
        rec.abstract_text = field(abstract_col);
        rec.source_tag = Some("dimensions-csv".into());
        out.push(Ok(rec));
    }
    Ok(out)
}
