//! Access to citation links: who cites an article (forward) and what it
//! cites (backward).
//!
//! [`CitationSnapshot`] is the offline backend built from a record store.
//! [`remote::RemoteSource`] implements the same contract over an HTTP-style
//! transport with throttling, retries and a write-through disk cache.

pub mod remote;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::store::{ArticleRecord, RecordStore};

/// Resolved references of an article plus the cited ids with no record.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Links {
    pub ids: Vec<String>,
    #[serde(default)]
    pub unresolved: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationCount {
    pub value: u64,
    /// Set when the source reported no universe-wide count and the value is
    /// the number of citers inside the snapshot.
    pub snapshot_local: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    /// Snapshots carry no full text, so this matches title and abstract,
    /// same as `PhraseInTitleAbstract`.
    PhraseInFulltextProxy,
    PhraseInTitleAbstract,
    IdLookup,
}

impl FromStr for QueryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phrase-in-fulltext-proxy" | "fulltext" => Ok(QueryKind::PhraseInFulltextProxy),
            "phrase-in-title-abstract" | "title-abstract" => Ok(QueryKind::PhraseInTitleAbstract),
            "id-lookup" | "id" => Ok(QueryKind::IdLookup),
            other => Err(Error::invalid(format!("unknown query kind `{other}`"))),
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::PhraseInFulltextProxy => "phrase-in-fulltext-proxy",
            QueryKind::PhraseInTitleAbstract => "phrase-in-title-abstract",
            QueryKind::IdLookup => "id-lookup",
        })
    }
}

/// OR-combined phrase (or id) query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceQuery {
    pub kind: QueryKind,
    pub phrases: Vec<String>,
}

impl SourceQuery {
    pub fn new<I, S>(kind: QueryKind, phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SourceQuery {
            kind,
            phrases: phrases.into_iter().map(Into::into).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phrases.iter().all(|p| p.trim().is_empty()) {
            return Err(Error::invalid("query needs at least one phrase"));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let terms: Vec<String> = self.phrases.iter().map(|p| format!("\"{p}\"")).collect();
        format!("{}: {}", self.kind, terms.join(" OR "))
    }

    /// Whether `record` satisfies the query.
    pub fn matches(&self, record: &ArticleRecord) -> bool {
        match self.kind {
            QueryKind::IdLookup => self.phrases.iter().any(|p| p.trim() == record.id),
            QueryKind::PhraseInFulltextProxy | QueryKind::PhraseInTitleAbstract => {
                let title = record.title.to_lowercase();
                let abs = record.abstract_text.as_deref().unwrap_or("").to_lowercase();
                self.phrases
                    .iter()
                    .map(|p| p.trim().to_lowercase())
                    .filter(|p| !p.is_empty())
                    .any(|p| title.contains(&p) || abs.contains(&p))
            }
        }
    }
}

/// The uniform citation-link contract used by expansion.
pub trait CitationSource: Sync {
    /// Whether the id names a record known to the source.
    fn resolves(&self, id: &str) -> Result<bool>;
    fn get_references(&self, id: &str) -> Result<Links>;
    fn get_citers(&self, id: &str) -> Result<Vec<String>>;
    fn citation_count(&self, id: &str) -> Result<CitationCount>;
    fn search(&self, query: &SourceQuery, name: &str) -> Result<Dataset>;
}

/// Immutable in-memory citation graph over a record store.
#[derive(Clone, Debug)]
pub struct CitationSnapshot {
    store: RecordStore,
    citer_index: HashMap<String, Vec<String>>,
}

impl CitationSnapshot {
    pub fn new(store: RecordStore) -> Self {
        let mut citer_index: HashMap<String, Vec<String>> = HashMap::new();
        // records iterate in id order, so each citer list comes out sorted
        for rec in store.records() {
            for r in &rec.reference_ids {
                citer_index.entry(r.clone()).or_default().push(rec.id.clone());
            }
        }
        CitationSnapshot { store, citer_index }
    }

    pub fn store(&self) -> &RecordStore {
        &self.store
    }

    pub fn record(&self, id: &str) -> Option<&ArticleRecord> {
        self.store.get(id)
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    /// Citers of any id, resolvable or not. Sorted.
    pub fn citers_of(&self, id: &str) -> &[String] {
        self.citer_index.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Citation count without the not-found check.
    pub fn count_of(&self, id: &str) -> u64 {
        match self.store.get(id).and_then(|r| r.global_citation_count) {
            Some(c) => c,
            None => self.citers_of(id).len() as u64,
        }
    }

    /// Full scan check that the citer index is the exact inverse of the
    /// reference relation.
    pub fn check_inverse_relation(&self) -> std::result::Result<(), String> {
        for rec in self.store.records() {
            for r in &rec.reference_ids {
                if self.citers_of(r).binary_search(&rec.id).is_err() {
                    return Err(format!("{} cites {r} but is missing from its citers", rec.id));
                }
            }
        }
        for (cited, citers) in &self.citer_index {
            for c in citers {
                let cites = self
                    .store
                    .get(c)
                    .is_some_and(|rec| rec.reference_ids.iter().any(|r| r == cited));
                if !cites {
                    return Err(format!("{c} listed as citer of {cited} without citing it"));
                }
            }
        }
        Ok(())
    }

    fn require(&self, id: &str) -> Result<&ArticleRecord> {
        self.store
            .get(id)
            .ok_or_else(|| Error::NotFound(format!("publication `{id}`")))
    }
}

impl CitationSource for CitationSnapshot {
    fn resolves(&self, id: &str) -> Result<bool> {
        Ok(self.store.contains(id))
    }

    fn get_references(&self, id: &str) -> Result<Links> {
        let rec = self.require(id)?;
        let (ids, unresolved) = rec
            .reference_ids
            .iter()
            .cloned()
            .partition(|r| self.store.contains(r));
        Ok(Links { ids, unresolved })
    }

    fn get_citers(&self, id: &str) -> Result<Vec<String>> {
        self.require(id)?;
        Ok(self.citers_of(id).to_vec())
    }

    fn citation_count(&self, id: &str) -> Result<CitationCount> {
        let rec = self.require(id)?;
        Ok(match rec.global_citation_count {
            Some(value) => CitationCount {
                value,
                snapshot_local: false,
            },
            None => CitationCount {
                value: self.citers_of(id).len() as u64,
                snapshot_local: true,
            },
        })
    }

    fn search(&self, query: &SourceQuery, name: &str) -> Result<Dataset> {
        query.validate()?;
        let members = self
            .store
            .records()
            .filter(|r| query.matches(r))
            .map(|r| r.id.clone());
        Ok(Dataset::new(
            name,
            members,
            Provenance::Query {
                text: query.describe(),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn rec(id: &str, refs: &[&str]) -> ArticleRecord {
        ArticleRecord::new(id, id, Some(2000)).with_references(refs.iter().copied())
    }

    #[test]
    fn references_split_resolved_and_unresolved() {
        let snap = CitationSnapshot::new(RecordStore::from_records([
            rec("a", &["b", "ghost"]),
            rec("b", &[]),
        ]));
        let links = snap.get_references("a").unwrap();
        assert_eq!(links.ids, vec!["b"]);
        assert_eq!(links.unresolved, vec!["ghost"]);
        // found with zero references is not the same as not found
        assert_eq!(snap.get_references("b").unwrap(), Links::default());
        assert!(matches!(snap.get_references("zzz"), Err(Error::NotFound(_))));
    }

    #[test]
    fn twenty_five_references() {
        let refs: Vec<String> = (0..25).map(|i| format!("r{i:02}")).collect();
        let mut records: Vec<ArticleRecord> = refs.iter().map(|r| rec(r, &[])).collect();
        records.push(ArticleRecord::new("swanson1986a", "Fish oil", Some(1986)).with_references(refs.clone()));
        let snap = CitationSnapshot::new(RecordStore::from_records(records));
        assert_eq!(snap.get_references("swanson1986a").unwrap().ids.len(), 25);
    }

    #[test]
    fn citers_exact() {
        let snap = CitationSnapshot::new(RecordStore::from_records([
            rec("p", &["r"]),
            rec("q", &["r"]),
            rec("r", &[]),
            rec("s", &[]),
        ]));
        assert_eq!(snap.get_citers("r").unwrap(), vec!["p", "q"]);
        assert!(snap.get_citers("s").unwrap().is_empty());
        assert!(snap.get_citers("nobody").is_err());
    }

    #[test]
    fn citation_counts() {
        let snap = CitationSnapshot::new(RecordStore::from_records([
            rec("b86", &[]).with_citations(157),
            rec("local", &[]),
            rec("x", &["local"]),
            rec("y", &["local"]),
            rec("z", &["local"]),
            rec("iso", &[]),
        ]));
        assert_eq!(snap.citation_count("b86").unwrap(), CitationCount { value: 157, snapshot_local: false });
        assert_eq!(snap.citation_count("local").unwrap(), CitationCount { value: 3, snapshot_local: true });
        assert_eq!(snap.citation_count("iso").unwrap().value, 0);
        assert!(snap.citation_count("nope").is_err());
    }

    fn random_snapshot(n: usize, seed: u64) -> CitationSnapshot {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = (0..n).map(|i| {
            let k = rng.gen_range(0..6);
            let refs: Vec<String> = (0..k).map(|_| format!("n{:03}", rng.gen_range(0..n + 5))).collect();
            ArticleRecord::new(format!("n{i:03}"), format!("title {i}"), Some(2000)).with_references(refs)
        });
        CitationSnapshot::new(RecordStore::from_records(records))
    }

    #[test]
    fn citers_match_brute_force_scan() {
        let snap = random_snapshot(50, 7);
        snap.check_inverse_relation().unwrap();
        for id in snap.store().ids() {
            let brute: Vec<String> = snap
                .store()
                .records()
                .filter(|r| r.reference_ids.iter().any(|x| x == id))
                .map(|r| r.id.clone())
                .collect();
            let got = snap.get_citers(id).unwrap();
            assert_eq!(got, brute, "citers of {id}");
            assert!(!got.iter().any(|c| c == id));
        }
    }

    #[test]
    fn search_singleton_and_or() {
        let mut a = rec("a", &[]);
        a.title = "Literature-based discovery".into();
        let mut b = rec("b", &[]);
        b.title = "Other".into();
        b.abstract_text = Some("On UNDISCOVERED public knowledge.".into());
        let snap = CitationSnapshot::new(RecordStore::from_records([a, b, rec("c", &[])]));
        let one = snap
            .search(&SourceQuery::new(QueryKind::PhraseInTitleAbstract, ["literature-based discovery"]), "F")
            .unwrap();
        assert_eq!(one.member_ids, BTreeSet::from(["a".to_owned()]));
        let both = snap
            .search(
                &SourceQuery::new(
                    QueryKind::PhraseInFulltextProxy,
                    ["literature-based discovery", "undiscovered public knowledge"],
                ),
                "F",
            )
            .unwrap();
        assert_eq!(both.len(), 2);
        assert!(matches!(both.provenance, Provenance::Query { ref text } if text.contains(" OR ")));
        let ids = snap.search(&SourceQuery::new(QueryKind::IdLookup, ["c", "zz"]), "I").unwrap();
        assert_eq!(ids.len(), 1);
        assert!(snap.search(&SourceQuery::new(QueryKind::IdLookup, Vec::<String>::new()), "E").is_err());
    }

    #[test]
    fn search_matches_linear_scan_oracle() {
        let words = ["fish", "oil", "raynaud", "discovery", "literature", "public", "knowledge", "drug"];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let records: Vec<ArticleRecord> = (0..100)
            .map(|i| {
                let title: Vec<&str> = (0..4).map(|_| words[rng.gen_range(0..words.len())]).collect();
                ArticleRecord::new(format!("p{i}"), title.join(" "), Some(2000))
            })
            .collect();
        let snap = CitationSnapshot::new(RecordStore::from_records(records.clone()));
        for phrases in [vec!["fish oil"], vec!["drug", "public knowledge"], vec!["LITERATURE discovery"]] {
            let q = SourceQuery::new(QueryKind::PhraseInTitleAbstract, phrases.clone());
            let got = snap.search(&q, "q").unwrap().member_ids;
            let mut expected = BTreeSet::new();
            for r in &records {
                let t = r.title.to_lowercase();
                if phrases.iter().any(|p| t.find(&p.to_lowercase()).is_some()) {
                    expected.insert(r.id.clone());
                }
            }
            assert_eq!(got, expected);
        }
    }

    proptest! {
        #[test]
        fn search_monotone_in_phrases(seed in 0u64..50, extra in "[a-z]{1,3}") {
            let snap = random_snapshot(40, seed);
            let base = SourceQuery::new(QueryKind::PhraseInTitleAbstract, ["title 1"]);
            let more = SourceQuery::new(QueryKind::PhraseInTitleAbstract, ["title 1".to_owned(), extra]);
            let a = snap.search(&base, "a").unwrap().member_ids;
            let b = snap.search(&more, "b").unwrap().member_ids;
            prop_assert!(a.is_subset(&b));
        }

        #[test]
        fn inverse_relation_holds(seed in 0u64..200) {
            let snap = random_snapshot(60, seed);
            prop_assert!(snap.check_inverse_relation().is_ok());
        }
    }
}
