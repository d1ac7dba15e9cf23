//! Community detection, partition scoring and cluster drill-down.

mod concepts;
mod label;

pub use concepts::{build_concept_tree, ConceptNode, ConceptTree, ConceptTreeOptions};
pub use label::{label_cluster, log_likelihood_ratio, top_citing_articles, LabelContext, LlrScorer, PhraseScorer, TopCiter};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocitation::CoCitationNetwork;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::source::CitationSnapshot;

/// Merges whose gain does not exceed this are treated as non-positive.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub index: usize,
    pub members: Vec<String>,
    pub label: String,
    pub silhouette: f64,
    /// Mean publication year of members with a known year.
    pub mean_year: Option<f64>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// `#3` at the top level, `#3.1` for a sub-cluster of `#3`.
    pub fn display_id(&self, parent: Option<usize>) -> String {
        match parent {
            Some(p) => format!("#{p}.{}", self.index),
            None => format!("#{}", self.index),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// 1 for a top-level partition, 2 for sub-clusters.
    pub level: u8,
    pub parent: Option<usize>,
    pub assignment: BTreeMap<String, usize>,
    pub clusters: Vec<Cluster>,
    pub modularity: f64,
    /// Unweighted mean of per-cluster silhouettes.
    pub mean_silhouette: f64,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, id: &str) -> Option<&Cluster> {
        self.assignment.get(id).map(|&c| &self.clusters[c])
    }

    pub fn member_sets(&self) -> Vec<BTreeSet<String>> {
        self.clusters.iter().map(|c| c.members.iter().cloned().collect()).collect()
    }

    /// One row per node: `node,cluster,silhouette` (node-level silhouette).
    pub fn to_csv(&self, node_silhouettes: &BTreeMap<String, f64>) -> String {
        let mut out = String::from("node,cluster,silhouette\n");
        for (id, c) in &self.assignment {
            let s = node_silhouettes.get(id).copied().unwrap_or(0.0);
            out.push_str(&format!("{},{},{:.6}\n", csv_field(id), c, s));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    gain: f64,
    a: usize,
    b: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    /// Max-heap order: larger gain first, then the smaller pair.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

/// Greedy agglomerative modularity maximization on a weighted graph.
/// Returns groups of node indices; a community is identified by its
/// smallest member index, and ties in gain go to the smallest pair.
pub fn greedy_modularity_groups(graph: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let total = graph.total_weight();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    if total <= 0.0 {
        return members.into_iter().flatten().collect();
    }
    let mut strength: Vec<f64> = (0..n).map(|i| graph.strength(i)).collect();
    let mut links: Vec<BTreeMap<usize, f64>> = graph.adj.iter().map(|ns| ns.iter().copied().collect()).collect();

    let gain = |w: f64, sa: f64, sb: f64| w / total - sa * sb / (2.0 * total * total);
    let mut heap = BinaryHeap::new();
    for (a, ns) in links.iter().enumerate() {
        for (&b, &w) in ns.range(a + 1..) {
            heap.push(Candidate { gain: gain(w, strength[a], strength[b]), a, b });
        }
    }
    while let Some(c) = heap.pop() {
        if members[c.a].is_none() || members[c.b].is_none() {
            continue;
        }
        let Some(&w) = links[c.a].get(&c.b) else { continue };
        let current = gain(w, strength[c.a], strength[c.b]);
        if current.to_bits() != c.gain.to_bits() {
            continue; // stale entry; the fresh one is also queued
        }
        if current <= MIN_GAIN {
            break;
        }
        let (keep, gone) = (c.a, c.b);
        let moved = members[gone].take().expect("alive");
        members[keep].as_mut().expect("alive").extend(moved);
        strength[keep] += strength[gone];
        let gone_links = std::mem::take(&mut links[gone]);
        for (nb, w) in gone_links {
            links[nb].remove(&gone);
            if nb == keep {
                continue;
            }
            *links[keep].entry(nb).or_insert(0.0) += w;
            *links[nb].entry(keep).or_insert(0.0) += w;
        }
        for (&nb, &w) in &links[keep] {
            let (a, b) = if keep < nb { (keep, nb) } else { (nb, keep) };
            heap.push(Candidate { gain: gain(w, strength[a], strength[b]), a, b });
        }
    }
    members
        .into_iter()
        .flatten()
        .map(|mut m| {
            m.sort_unstable();
            m
        })
        .collect()
}

/// Weighted modularity of a grouping given as community index per node.
pub fn modularity_of(graph: &WeightedGraph, community: &[usize]) -> f64 {
    let total = graph.total_weight();
    if total <= 0.0 {
        return 0.0;
    }
    let k = community.iter().copied().max().map_or(0, |m| m + 1);
    let mut inner = vec![0.0; k];
    let mut strength = vec![0.0; k];
    for (i, ns) in graph.adj.iter().enumerate() {
        for &(j, w) in ns {
            strength[community[i]] += w;
            if i < j && community[i] == community[j] {
                inner[community[i]] += w;
            }
        }
    }
    inner
        .iter()
        .zip(&strength)
        .map(|(&wc, &sc)| wc / total - (sc / (2.0 * total)).powi(2))
        .sum()
}

fn community_vector(graph: &WeightedGraph, assignment: &BTreeMap<String, usize>) -> Result<Vec<usize>> {
    graph
        .ids
        .iter()
        .map(|id| {
            assignment
                .get(id)
                .copied()
                .ok_or_else(|| Error::PartitionMismatch(format!("node `{id}` is not assigned to a cluster")))
        })
        .collect()
}

/// Modularity of an arbitrary node → cluster assignment over `network`.
pub fn modularity(network: &CoCitationNetwork, assignment: &BTreeMap<String, usize>) -> Result<f64> {
    let graph = network.graph();
    Ok(modularity_of(&graph, &community_vector(&graph, assignment)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteScores {
    pub per_node: BTreeMap<String, f64>,
    /// Indexed by cluster index.
    pub per_cluster: Vec<f64>,
    pub mean: f64,
}

/// Cosine similarity of adjacency rows for every pair with overlapping
/// support; all other pairs have similarity 0.
fn profile_similarities(graph: &WeightedGraph, i: usize, norms: &[f64]) -> BTreeMap<usize, f64> {
    let mut dots: BTreeMap<usize, f64> = BTreeMap::new();
    if norms[i] == 0.0 {
        return dots;
    }
    // dot(i, j) = sum over shared neighbors k of w_ik * w_jk
    for &(k, wik) in &graph.adj[i] {
        for &(j, wjk) in &graph.adj[k] {
            if j != i {
                *dots.entry(j).or_insert(0.0) += wik * wjk;
            }
        }
    }
    for (j, d) in dots.iter_mut() {
        *d /= norms[i] * norms[*j];
    }
    dots
}

/// Node silhouettes over `1 − cosine` distances of weighted adjacency rows.
pub fn silhouette_of(graph: &WeightedGraph, community: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = graph.len();
    let k = community.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in community {
        sizes[c] += 1;
    }
    let norms: Vec<f64> = graph
        .adj
        .iter()
        .map(|ns| ns.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt())
        .collect();
    let node_scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = community[i];
            if k < 2 || sizes[own] < 2 {
                return 0.0;
            }
            let mut sim_sum = vec![0.0; k];
            for (j, s) in profile_similarities(graph, i, &norms) {
                sim_sum[community[j]] += s;
            }
            let a = ((sizes[own] - 1) as f64 - sim_sum[own]) / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| (sizes[c] as f64 - sim_sum[c]) / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom <= 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    let mut per_cluster = vec![0.0; k];
    for (i, s) in node_scores.iter().enumerate() {
        per_cluster[community[i]] += s;
    }
    for (c, total) in per_cluster.iter_mut().enumerate() {
        if sizes[c] > 0 {
            *total /= sizes[c] as f64;
        }
    }
    (node_scores, per_cluster)
}

/// Silhouette per node, per cluster, and the unweighted cluster mean.
/// A single-cluster partition scores 0.
pub fn silhouette(network: &CoCitationNetwork, assignment: &BTreeMap<String, usize>) -> Result<SilhouetteScores> {
    let graph = network.graph();
    let community = community_vector(&graph, assignment)?;
    let (nodes, per_cluster) = silhouette_of(&graph, &community);
    if per_cluster.len() < 2 {
        log::warn!("silhouette of a single-cluster partition is defined as 0");
    }
    let mean = if per_cluster.is_empty() {
        0.0
    } else {
        per_cluster.iter().sum::<f64>() / per_cluster.len() as f64
    };
    Ok(SilhouetteScores {
        per_node: graph.ids.iter().cloned().zip(nodes).collect(),
        per_cluster,
        mean,
    })
}

fn mean_year(network: &CoCitationNetwork, members: &[String]) -> Option<f64> {
    let years: Vec<f64> = members
        .iter()
        .filter_map(|m| network.nodes.get(m).and_then(|n| n.year))
        .map(f64::from)
        .collect();
    (!years.is_empty()).then(|| years.iter().sum::<f64>() / years.len() as f64)
}

/// Orders groups by size descending, then older mean year, then smallest
/// member id, and assembles a scored partition.
fn assemble(network: &CoCitationNetwork, groups: Vec<Vec<String>>, level: u8, parent: Option<usize>) -> Result<ClusterPartition> {
    let mut keyed: Vec<(Vec<String>, Option<f64>)> = groups
        .into_iter()
        .map(|mut g| {
            g.sort();
            let y = mean_year(network, &g);
            (g, y)
        })
        .collect();
    keyed.sort_by(|(ga, ya), (gb, yb)| {
        gb.len()
            .cmp(&ga.len())
            .then_with(|| match (ya, yb) {
                (Some(a), Some(b)) => a.total_cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| ga[0].cmp(&gb[0]))
    });
    let mut assignment = BTreeMap::new();
    for (c, (g, _)) in keyed.iter().enumerate() {
        for id in g {
            assignment.insert(id.clone(), c);
        }
    }
    let q = modularity(network, &assignment)?;
    let sil = silhouette(network, &assignment)?;
    let clusters = keyed
        .into_iter()
        .enumerate()
        .map(|(index, (members, mean_year))| Cluster {
            index,
            members,
            label: format!("unlabeled-{index}"),
            silhouette: sil.per_cluster[index],
            mean_year,
        })
        .collect();
    Ok(ClusterPartition {
        level,
        parent,
        assignment,
        clusters,
        modularity: q,
        mean_silhouette: sil.mean,
    })
}

/// Deterministic greedy modularity clustering. Isolated nodes become
/// singleton clusters. Labels are placeholders until [`apply_labels`].
pub fn detect_communities(network: &CoCitationNetwork) -> Result<ClusterPartition> {
    if network.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let graph = network.graph();
    let groups = greedy_modularity_groups(&graph)
        .into_iter()
        .map(|g| g.into_iter().map(|i| graph.ids[i].clone()).collect())
        .collect();
    assemble(network, groups, 1, None)
}

/// Re-clusters the subgraph induced by one cluster. Parents with fewer
/// than three members come back as a single sub-cluster.
pub fn sub_cluster(parent: &Cluster, network: &CoCitationNetwork) -> Result<ClusterPartition> {
    let members: BTreeSet<String> = parent.members.iter().cloned().collect();
    let sub = network.induced(&members);
    if sub.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    if members.len() < 3 {
        log::warn!("cluster #{} has {} members; not subdividing", parent.index, members.len());
        return assemble(&sub, vec![parent.members.clone()], 2, Some(parent.index));
    }
    let mut partition = detect_communities(&sub)?;
    partition.level = 2;
    partition.parent = Some(parent.index);
    Ok(partition)
}

/// Replaces placeholder labels using citing-article titles; the citer
/// universe is the citers of any node in `network`.
pub fn apply_labels(partition: &mut ClusterPartition, network: &CoCitationNetwork, snapshot: &CitationSnapshot) {
    let context = LabelContext::new(network, snapshot);
    let labels: Vec<String> = partition.clusters.iter().map(|c| context.label(c, &LlrScorer)).collect();
    for (c, l) in partition.clusters.iter_mut().zip(labels) {
        c.label = l;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub index: usize,
    pub size: usize,
    pub label: String,
    pub silhouette: f64,
    pub mean_year: Option<f64>,
    pub top_citers: Vec<TopCiter>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub level: u8,
    pub parent: Option<usize>,
    pub modularity: f64,
    pub mean_silhouette: f64,
    pub silhouette_mean_kind: String,
    pub clusters: Vec<ClusterSummary>,
}

pub fn summarize(partition: &ClusterPartition, snapshot: &CitationSnapshot, top_k: usize) -> PartitionSummary {
    PartitionSummary {
        level: partition.level,
        parent: partition.parent,
        modularity: partition.modularity,
        mean_silhouette: partition.mean_silhouette,
        silhouette_mean_kind: "unweighted mean of cluster scores".into(),
        clusters: partition
            .clusters
            .iter()
            .map(|c| ClusterSummary {
                index: c.index,
                size: c.size(),
                label: c.label.clone(),
                silhouette: c.silhouette,
                mean_year: c.mean_year,
                top_citers: top_citing_articles(c, snapshot, top_k),
            })
            .collect(),
    }
}
