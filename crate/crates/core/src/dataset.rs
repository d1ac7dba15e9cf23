//! Named datasets, their provenance and descriptive statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::RecordStore;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Query { text: String },
    Expansion { spec: String, trace: String },
    Union { inputs: Vec<String> },
}

impl Provenance {
    pub fn describe(&self) -> String {
        match self {
            Provenance::Query { text } => format!("search: {text}"),
            Provenance::Expansion { spec, .. } => format!("expansion: {spec}"),
            Provenance::Union { inputs } => format!("union of {}", inputs.join(", ")),
        }
    }
}

/// Current UTC time in RFC 3339, or the instant given by the
/// `SOURCE_DATE_EPOCH` environment variable for reproducible builds.
pub fn timestamp_now() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub member_ids: BTreeSet<String>,
    pub provenance: Provenance,
    /// RFC 3339 timestamp.
    pub created_at: String,
}

impl Dataset {
    pub fn new<I, S>(name: impl Into<String>, members: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Dataset {
            name: name.into(),
            member_ids: members.into_iter().map(Into::into).collect(),
            provenance,
            created_at: timestamp_now(),
        }
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.member_ids.contains(id)
    }

    /// Members that have no record in `store`.
    pub fn missing_from<'a>(&'a self, store: &RecordStore) -> Vec<&'a str> {
        self.member_ids
            .iter()
            .filter(|id| !store.contains(id))
            .map(String::as_str)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YearDistribution {
    pub dataset_name: String,
    pub counts: BTreeMap<i32, usize>,
    /// Members with no known year.
    pub unknown: usize,
    /// Min and max year with a nonzero count; `None` when every year is unknown.
    pub range: Option<(i32, i32)>,
    /// ln(1 + count) per year.
    pub log_counts: BTreeMap<i32, f64>,
}

impl YearDistribution {
    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.unknown
    }

    /// Counts for every year in the range, zero-filled.
    pub fn dense(&self) -> Vec<(i32, usize)> {
        match self.range {
            None => Vec::new(),
            Some((lo, hi)) => (lo..=hi)
                .map(|y| (y, self.counts.get(&y).copied().unwrap_or(0)))
                .collect(),
        }
    }
}

pub fn year_distribution(dataset: &Dataset, store: &RecordStore) -> Result<YearDistribution> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset(dataset.name.clone()));
    }
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    let mut unknown = 0;
    for id in &dataset.member_ids {
        match store.get(id).and_then(|r| r.year) {
            Some(y) => *counts.entry(y).or_default() += 1,
            None => unknown += 1,
        }
    }
    let range = match (counts.keys().next(), counts.keys().next_back()) {
        (Some(&lo), Some(&hi)) => Some((lo, hi)),
        _ => None,
    };
    let log_counts = counts
        .iter()
        .map(|(&y, &c)| (y, (c as f64).ln_1p()))
        .collect();
    Ok(YearDistribution {
        dataset_name: dataset.name.clone(),
        counts,
        unknown,
        range,
        log_counts,
    })
}

pub fn dataset_union(datasets: &[&Dataset], name: impl Into<String>) -> Result<Dataset> {
    if datasets.is_empty() {
        return Err(Error::invalid("union needs at least one dataset"));
    }
    let members: BTreeSet<String> = datasets
        .iter()
        .flat_map(|d| d.member_ids.iter().cloned())
        .collect();
    Ok(Dataset::new(
        name,
        members,
        Provenance::Union {
            inputs: datasets.iter().map(|d| d.name.clone()).collect(),
        },
    ))
}

/// Datasets of one comparison session, keyed by unique name.
#[derive(Clone, Debug, Default)]
pub struct DatasetCatalog {
    datasets: BTreeMap<String, Dataset>,
}

impl DatasetCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dataset: Dataset) -> Result<()> {
        if self.datasets.contains_key(&dataset.name) {
            return Err(Error::DuplicateName(dataset.name));
        }
        self.datasets.insert(dataset.name.clone(), dataset);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Dataset> {
        self.datasets
            .get(name)
            .ok_or_else(|| Error::NotFound(format!("dataset `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.datasets.keys().map(String::as_str)
    }

    pub fn union(&mut self, inputs: &[&str], name: &str) -> Result<&Dataset> {
        if self.datasets.contains_key(name) {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        let sets = inputs
            .iter()
            .map(|n| self.get(n))
            .collect::<Result<Vec<_>>>()?;
        let union = dataset_union(&sets, name)?;
        self.insert(union)?;
        Ok(&self.datasets[name])
    }
}
