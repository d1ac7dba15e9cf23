//! Phrase-containment concept trees over a cluster's citing articles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Cluster;
use crate::source::CitationSnapshot;
use crate::text::phrases;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub phrase: String,
    pub support: usize,
    pub children: Vec<ConceptNode>,
}

/// A forest of concepts under an implicit root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptTree {
    pub roots: Vec<ConceptNode>,
}

#[derive(Clone, Copy, Debug)]
pub struct ConceptTreeOptions {
    /// Phrases supported by fewer articles are dropped.
    pub min_support: usize,
    /// Keep at most this many phrases (highest support first).
    pub max_phrases: usize,
}

impl Default for ConceptTreeOptions {
    fn default() -> Self {
        ConceptTreeOptions { min_support: 2, max_phrases: 60 }
    }
}

fn token_set(p: &str) -> BTreeSet<&str> {
    p.split(' ').collect()
}

impl ConceptTree {
    /// Builds the hierarchy from (phrase, support) pairs. A phrase hangs
    /// under the best-supported strictly shorter phrase whose tokens it
    /// contains and whose support is at least its own.
    pub fn from_phrases<S: AsRef<str>>(items: &[(S, usize)]) -> ConceptTree {
        let mut items: Vec<(String, usize)> = items.iter().map(|(p, s)| (p.as_ref().to_owned(), *s)).collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        items.dedup_by(|a, b| a.0 == b.0);
        let lens: Vec<usize> = items.iter().map(|(p, _)| p.split(' ').count()).collect();

        let mut parent: Vec<Option<usize>> = vec![None; items.len()];
        for (i, (p, sp)) in items.iter().enumerate() {
            let tokens = token_set(p);
            parent[i] = items
                .iter()
                .enumerate()
                .filter(|&(j, (q, sq))| lens[j] < lens[i] && sq >= sp && token_set(q).is_subset(&tokens))
                .max_by(|(j1, (q1, s1)), (j2, (q2, s2))| {
                    s1.cmp(s2).then(lens[*j1].cmp(&lens[*j2])).then_with(|| q2.cmp(q1))
                })
                .map(|(j, _)| j);
        }
        let mut children: BTreeMap<Option<usize>, Vec<usize>> = BTreeMap::new();
        for (i, p) in parent.iter().enumerate() {
            children.entry(*p).or_default().push(i);
        }
        fn build(i: usize, items: &[(String, usize)], children: &BTreeMap<Option<usize>, Vec<usize>>) -> ConceptNode {
            ConceptNode {
                phrase: items[i].0.clone(),
                support: items[i].1,
                children: order(children.get(&Some(i)), items)
                    .into_iter()
                    .map(|c| build(c, items, children))
                    .collect(),
            }
        }
        fn order(ids: Option<&Vec<usize>>, items: &[(String, usize)]) -> Vec<usize> {
            let mut v = ids.cloned().unwrap_or_default();
            v.sort_by(|&a, &b| items[b].1.cmp(&items[a].1).then_with(|| items[a].0.cmp(&items[b].0)));
            v
        }
        ConceptTree {
            roots: order(children.get(&None), &items)
                .into_iter()
                .map(|r| build(r, &items, &children))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn phrase_count(&self) -> usize {
        fn count(n: &ConceptNode) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        self.roots.iter().map(count).sum()
    }

    /// Two-space indentation per depth, `phrase (support)` per line.
    pub fn to_text(&self) -> String {
        fn walk(n: &ConceptNode, depth: usize, out: &mut String) {
            out.push_str(&format!("{}{} ({})\n", "  ".repeat(depth), n.phrase, n.support));
            for c in &n.children {
                walk(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        for r in &self.roots {
            walk(r, 0, &mut out);
        }
        out
    }
}

/// Concept tree from 1–4 word phrases in titles and abstracts of the
/// articles citing the cluster's members.
pub fn build_concept_tree(cluster: &Cluster, snapshot: &CitationSnapshot, options: ConceptTreeOptions) -> ConceptTree {
    let citers: BTreeSet<&String> = cluster
        .members
        .iter()
        .flat_map(|m| snapshot.citers_of(m).iter())
        .collect();
    let mut support: BTreeMap<String, usize> = BTreeMap::new();
    for c in citers {
        let Some(r) = snapshot.record(c) else { continue };
        let mut text = r.title.clone();
        if let Some(a) = &r.abstract_text {
            // keep phrases from spanning the title/abstract boundary
            text.push_str(" . ");
            text.push_str(a);
        }
        for p in phrases(&text, 1, 4) {
            *support.entry(p).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = support.into_iter().filter(|(_, s)| *s >= options.min_support).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    kept.truncate(options.max_phrases);
    ConceptTree::from_phrases(&kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{ArticleRecord, RecordStore};

    fn check_invariants(n: &ConceptNode, path: &mut Vec<String>) {
        assert!(!path.contains(&n.phrase));
        path.push(n.phrase.clone());
        for c in &n.children {
            assert!(c.support <= n.support);
            check_invariants(c, path);
        }
        path.pop();
    }

    #[test]
    fn longer_phrase_nests_under_contained_phrase() {
        let t = ConceptTree::from_phrases(&[("fish oil", 10), ("fish oil supplementation", 4)]);
        assert_eq!(t.roots.len(), 1);
        assert_eq!(t.roots[0].phrase, "fish oil");
        assert_eq!(t.roots[0].children[0].phrase, "fish oil supplementation");
    }

    #[test]
    fn unrelated_phrases_form_a_forest() {
        let t = ConceptTree::from_phrases(&[("migraine", 3), ("magnesium", 5)]);
        let roots: Vec<&str> = t.roots.iter().map(|r| r.phrase.as_str()).collect();
        assert_eq!(roots, vec!["magnesium", "migraine"]);
        assert!(t.roots.iter().all(|r| r.children.is_empty()));
    }

    #[test]
    fn planted_vocabulary_yields_hand_built_hierarchy() {
        let titles = [
            "protein interaction networks",
            "protein interaction networks in yeast",
            "protein interaction maps",
            "protein folding",
            "computational drug design",
            "computational drug screening",
        ];
        let mut records: Vec<ArticleRecord> = vec![ArticleRecord::new("m", "member", Some(2000))];
        for (i, t) in titles.iter().enumerate() {
            records.push(ArticleRecord::new(format!("c{i}"), *t, Some(2010)).with_references(["m".to_string()]));
        }
        let snap = CitationSnapshot::new(RecordStore::from_records(records));
        let cluster = Cluster {
            index: 0,
            members: vec!["m".into()],
            label: String::new(),
            silhouette: 0.0,
            mean_year: None,
        };
        let tree = build_concept_tree(&cluster, &snap, ConceptTreeOptions::default());
        // Parents are chosen by support first, so the three-word phrase
        // hangs under `protein` (4) rather than `protein interaction` (3).
        let expected = "\
protein (4)
  protein interaction (3)
  protein interaction networks (2)
interaction (3)
  interaction networks (2)
computational (2)
  computational drug (2)
drug (2)
networks (2)
";
        assert_eq!(tree.to_text(), expected);
        assert_eq!(tree.phrase_count(), 9);
        for r in &tree.roots {
            check_invariants(r, &mut Vec::new());
        }
    }

    #[test]
    fn no_text_gives_empty_tree() {
        let snap = CitationSnapshot::new(RecordStore::from_records(vec![ArticleRecord::new("m", "x", Some(2000))]));
        let cluster = Cluster {
            index: 0,
            members: vec!["m".into()],
            label: String::new(),
            silhouette: 0.0,
            mean_year: None,
        };
        assert!(build_concept_tree(&cluster, &snap, ConceptTreeOptions::default()).is_empty());
    }
}
