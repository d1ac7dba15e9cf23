//! Cluster labels from citing-article titles, and top citers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::Cluster;
use crate::cocitation::CoCitationNetwork;
use crate::source::CitationSnapshot;
use crate::text::phrases;

/// Scores a phrase from a 2×2 contingency table: `k1` of `n1` cluster
/// citers and `k2` of `n2` other citers use it. `None` rejects the phrase.
pub trait PhraseScorer {
    fn score(&self, k1: u64, n1: u64, k2: u64, n2: u64) -> Option<f64>;
}

/// Dunning's log-likelihood ratio (G²), keeping only phrases that are
/// over-represented among the cluster's citers.
#[derive(Clone, Copy, Debug, Default)]
pub struct LlrScorer;

fn x_ln_x_over(o: f64, e: f64) -> f64 {
    if o == 0.0 {
        0.0
    } else {
        o * (o / e).ln()
    }
}

pub fn log_likelihood_ratio(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let (k1, n1, k2, n2) = (k1 as f64, n1 as f64, k2 as f64, n2 as f64);
    let n = n1 + n2;
    let k = k1 + k2;
    if n == 0.0 || k == 0.0 || k == n {
        return 0.0;
    }
    let cells = [
        (k1, n1 * k / n),
        (n1 - k1, n1 * (n - k) / n),
        (k2, n2 * k / n),
        (n2 - k2, n2 * (n - k) / n),
    ];
    2.0 * cells.iter().map(|&(o, e)| x_ln_x_over(o, e)).sum::<f64>()
}

impl PhraseScorer for LlrScorer {
    fn score(&self, k1: u64, n1: u64, k2: u64, n2: u64) -> Option<f64> {
        if n1 == 0 || k1 == 0 {
            return None;
        }
        // over-representation: k1/n1 > k2/n2
        if n2 > 0 && (k1 as u128) * (n2 as u128) <= (k2 as u128) * (n1 as u128) {
            return None;
        }
        let g2 = log_likelihood_ratio(k1, n1, k2, n2);
        (g2 > 0.0).then_some(g2)
    }
}

fn citers_of_members<'a>(members: impl IntoIterator<Item = &'a String>, snapshot: &CitationSnapshot) -> BTreeSet<String> {
    members
        .into_iter()
        .flat_map(|m| snapshot.citers_of(m).iter().cloned())
        .filter(|c| snapshot.record(c).is_some())
        .collect()
}

fn title_phrases(snapshot: &CitationSnapshot, id: &str) -> Vec<String> {
    let mut v: Vec<String> = snapshot
        .record(id)
        .map(|r| phrases(&r.title, 2, 4).into_iter().collect())
        .unwrap_or_default();
    v.sort_unstable();
    v
}

/// Title phrases of every citer of a network, extracted once and shared
/// by all clusters labeled against that network.
pub struct LabelContext<'a> {
    snapshot: &'a CitationSnapshot,
    universe: BTreeSet<String>,
    phrases: HashMap<String, Vec<String>>,
    /// Number of universe citers whose title contains each phrase.
    df: HashMap<String, u64>,
}

impl<'a> LabelContext<'a> {
    pub fn new(network: &CoCitationNetwork, snapshot: &'a CitationSnapshot) -> Self {
        let universe = citers_of_members(network.nodes.keys(), snapshot);
        let mut phrases = HashMap::new();
        let mut df: HashMap<String, u64> = HashMap::new();
        for c in &universe {
            let ps = title_phrases(snapshot, c);
            for p in &ps {
                *df.entry(p.clone()).or_insert(0) += 1;
            }
            phrases.insert(c.clone(), ps);
        }
        LabelContext { snapshot, universe, phrases, df }
    }

    fn phrases_of(&self, id: &str) -> std::borrow::Cow<'_, [String]> {
        match self.phrases.get(id) {
            Some(v) => std::borrow::Cow::Borrowed(v.as_slice()),
            None => std::borrow::Cow::Owned(title_phrases(self.snapshot, id)),
        }
    }

    /// Highest-scoring 2–4 word title phrase of the cluster's citers
    /// against the other citers of the network. Ties go to the more
    /// frequent phrase, then alphabetical order; if nothing scores, the
    /// most frequent bigram.
    pub fn label(&self, cluster: &Cluster, scorer: &dyn PhraseScorer) -> String {
        let unlabeled = || format!("unlabeled-{}", cluster.index);
        let inside = citers_of_members(&cluster.members, self.snapshot);
        if inside.is_empty() {
            return unlabeled();
        }
        // k1 over all cluster citers; k1u over those also in the universe,
        // so that df - k1u counts the outside citers.
        let mut k1: BTreeMap<String, (u64, u64)> = BTreeMap::new();
        for c in &inside {
            let in_universe = self.universe.contains(c) as u64;
            for p in self.phrases_of(c).iter() {
                let e = k1.entry(p.clone()).or_insert((0, 0));
                e.0 += 1;
                e.1 += in_universe;
            }
        }
        let n1 = inside.len() as u64;
        let n2 = self.universe.iter().filter(|c| !inside.contains(*c)).count() as u64;
        let best = k1
            .iter()
            .filter_map(|(p, &(f, fu))| {
                let other = self.df.get(p).copied().unwrap_or(0) - fu;
                scorer.score(f, n1, other, n2).map(|s| (s, f, p))
            })
            .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| b.2.cmp(a.2)));
        if let Some((_, _, p)) = best {
            return p.clone();
        }
        k1.iter()
            .filter(|(p, _)| p.split(' ').count() == 2)
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then_with(|| b.0.cmp(a.0)))
            .map(|(p, _)| p.clone())
            .unwrap_or_else(unlabeled)
    }
}

/// Labels one cluster; see [`LabelContext::label`]. Prefer a shared
/// context when labeling many clusters of the same network.
pub fn label_cluster(cluster: &Cluster, network: &CoCitationNetwork, snapshot: &CitationSnapshot, scorer: &dyn PhraseScorer) -> String {
    LabelContext::new(network, snapshot).label(cluster, scorer)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopCiter {
    pub id: String,
    pub members_cited: usize,
    pub citations: u64,
}

/// Citers ranked by distinct cluster members cited, then global citation
/// count, then id.
pub fn top_citing_articles(cluster: &Cluster, snapshot: &CitationSnapshot, k: usize) -> Vec<TopCiter> {
    let mut cited: BTreeMap<&str, usize> = BTreeMap::new();
    let members: BTreeSet<&String> = cluster.members.iter().collect();
    for m in members {
        for c in snapshot.citers_of(m) {
            *cited.entry(c.as_str()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<TopCiter> = cited
        .into_iter()
        .map(|(id, members_cited)| TopCiter {
            id: id.to_owned(),
            members_cited,
            citations: snapshot.count_of(id),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.members_cited
            .cmp(&a.members_cited)
            .then(b.citations.cmp(&a.citations))
            .then_with(|| a.id.cmp(&b.id))
    });
    ranked.truncate(k);
    ranked
}
