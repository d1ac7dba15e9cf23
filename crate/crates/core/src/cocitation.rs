//! Time-sliced document co-citation networks.
//!
//! Citers from a dataset are grouped into year slices and the most cited
//! ones per slice are kept. Each selected citer contributes every pair of
//! its references published within the look-back window. Edge weight is
//! the number of distinct citers co-citing the pair; the edge year is the
//! earliest such citer's year. Links are then pruned to a link-to-node
//! ratio.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{largest, WeightedGraph};
use crate::source::CitationSnapshot;
use crate::store::ArticleRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// Link-to-node ratio used for pruning.
    pub lrf: f64,
    /// Look-back years; `None` means unlimited.
    pub lby: Option<u32>,
    /// Minimum citation count for a citer to participate.
    pub min_citations: u64,
    /// Most-cited citers kept per slice.
    pub top_n: usize,
    pub slice_years: u32,
    /// Recorded for provenance only; it does not affect construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_param: Option<f64>,
    /// Prune each slice separately and merge, instead of pruning the merged
    /// network once.
    #[serde(default)]
    pub per_slice_pruning: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            lrf: 4.0,
            lby: Some(10),
            min_citations: 1,
            top_n: 100,
            slice_years: 1,
            e_param: None,
            per_slice_pruning: false,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lrf > 0.0 && self.lrf.is_finite()) {
            return Err(Error::invalid("lrf must be positive"));
        }
        if self.lby == Some(0) {
            return Err(Error::invalid("lby must be at least 1"));
        }
        if self.top_n == 0 {
            return Err(Error::invalid("top_n must be at least 1"));
        }
        if self.slice_years == 0 {
            return Err(Error::invalid("slice_years must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAttrs {
    /// Publication year of the cited reference.
    pub year: Option<i32>,
    /// Selected citers that include this reference in at least one pair.
    pub count: u32,
    /// Year of the earliest such citer.
    pub first_cited_year: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub weight: u32,
    pub first_cocited_year: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceInfo {
    pub start: i32,
    pub end: i32,
    pub qualifying: usize,
    pub selected: usize,
}

/// Unordered pair stored as (smaller, larger).
pub type Pair = (String, String);

pub fn pair(a: &str, b: &str) -> Pair {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoCitationNetwork {
    pub config: NetworkConfig,
    pub nodes: BTreeMap<String, NodeAttrs>,
    pub edges: BTreeMap<Pair, EdgeAttrs>,
    pub slices: Vec<SliceInfo>,
}

impl CoCitationNetwork {
    pub fn empty(config: NetworkConfig) -> Self {
        CoCitationNetwork {
            config,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            slices: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&EdgeAttrs> {
        self.edges.get(&pair(a, b))
    }

    pub fn graph(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.nodes.keys().cloned());
        for ((a, b), e) in &self.edges {
            let (ia, ib) = (g.index[a], g.index[b]);
            g.add_edge(ia, ib, e.weight as f64);
        }
        g
    }

    /// (min, max) first co-citation year over all edges.
    pub fn edge_year_range(&self) -> Option<(i32, i32)> {
        let years = self.edges.values().map(|e| e.first_cocited_year);
        let min = years.clone().min()?;
        Some((min, years.max()?))
    }

    /// Subgraph induced by `members` with original attributes.
    pub fn induced(&self, members: &BTreeSet<String>) -> CoCitationNetwork {
        CoCitationNetwork {
            config: self.config.clone(),
            nodes: self
                .nodes
                .iter()
                .filter(|(id, _)| members.contains(*id))
                .map(|(id, n)| (id.clone(), n.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|((a, b), _)| members.contains(a) && members.contains(b))
                .map(|(p, e)| (p.clone(), *e))
                .collect(),
            slices: self.slices.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceInterval {
    pub start: i32,
    pub end: i32,
}

/// Partitions the dataset into consecutive year slices and keeps the top-N
/// most cited qualifying citers per slice (count descending, id ascending).
pub fn slice_citers(
    snapshot: &CitationSnapshot,
    dataset: &Dataset,
    config: &NetworkConfig,
) -> Result<Vec<(SliceInterval, Vec<String>)>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset(dataset.name.clone()));
    }
    let mut dated: Vec<(&ArticleRecord, u64)> = Vec::new();
    let mut skipped = 0;
    for id in &dataset.member_ids {
        match snapshot.record(id) {
            Some(rec) if rec.year.is_some() => dated.push((rec, snapshot.count_of(id))),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!(
            "{skipped} member(s) of `{}` lack a record or a year and cannot be sliced",
            dataset.name
        );
    }
    let Some(lo) = dated.iter().filter_map(|(r, _)| r.year).min() else {
        return Ok(Vec::new());
    };
    let hi = dated.iter().filter_map(|(r, _)| r.year).max().expect("non-empty");
    let width = config.slice_years as i32;
    let mut slices = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = start + width - 1;
        let mut members: Vec<(&str, u64)> = dated
            .iter()
            .filter(|(r, c)| {
                let y = r.year.expect("dated");
                y >= start && y <= end && *c >= config.min_citations
            })
            .map(|(r, c)| (r.id.as_str(), *c))
            .collect();
        members.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        members.truncate(config.top_n);
        slices.push((
            SliceInterval { start, end },
            members.into_iter().map(|(id, _)| id.to_owned()).collect(),
        ));
        start += width;
    }
    Ok(slices)
}

/// References of `citer` eligible for pairing: resolvable, dated, not
/// newer than the citer and within the look-back window. Sorted.
fn eligible_references(citer: &ArticleRecord, snapshot: &CitationSnapshot, config: &NetworkConfig) -> Vec<String> {
    let Some(cy) = citer.year else {
        return Vec::new();
    };
    let mut refs: Vec<String> = citer
        .reference_ids
        .iter()
        .filter(|r| {
            snapshot
                .record(r)
                .and_then(|rec| rec.year)
                .is_some_and(|ry| ry <= cy && config.lby.is_none_or(|lby| cy - ry <= lby as i32))
        })
        .cloned()
        .collect();
    refs.sort();
    refs.dedup();
    refs
}

/// All unordered pairs of the citer's eligible references.
pub fn cocite_pairs(citer: &ArticleRecord, snapshot: &CitationSnapshot, config: &NetworkConfig) -> BTreeSet<Pair> {
    let refs = eligible_references(citer, snapshot, config);
    let mut out = BTreeSet::new();
    for (i, a) in refs.iter().enumerate() {
        for b in &refs[i + 1..] {
            out.insert((a.clone(), b.clone()));
        }
    }
    out
}

fn aggregate(citers: &[&ArticleRecord], snapshot: &CitationSnapshot, config: &NetworkConfig) -> CoCitationNetwork {
    let per_citer: Vec<(i32, Vec<String>)> = citers
        .par_iter()
        .map(|c| (c.year.expect("sliced citers are dated"), eligible_references(c, snapshot, config)))
        .filter(|(_, refs)| refs.len() >= 2)
        .collect();
    let mut edges: HashMap<Pair, EdgeAttrs> = HashMap::new();
    let mut nodes: BTreeMap<String, NodeAttrs> = BTreeMap::new();
    for (year, refs) in &per_citer {
        for (i, a) in refs.iter().enumerate() {
            let node = nodes.entry(a.clone()).or_insert_with(|| NodeAttrs {
                year: snapshot.record(a).and_then(|r| r.year),
                count: 0,
                first_cited_year: *year,
            });
            node.count += 1;
            node.first_cited_year = node.first_cited_year.min(*year);
            for b in &refs[i + 1..] {
                let e = edges.entry((a.clone(), b.clone())).or_insert(EdgeAttrs {
                    weight: 0,
                    first_cocited_year: *year,
                });
                e.weight += 1;
                e.first_cocited_year = e.first_cocited_year.min(*year);
            }
        }
    }
    let mut net = CoCitationNetwork::empty(config.clone());
    net.nodes = nodes;
    net.edges = edges.into_iter().collect();
    net
}

fn merge_into(target: &mut CoCitationNetwork, part: CoCitationNetwork) {
    for (id, n) in part.nodes {
        target
            .nodes
            .entry(id)
            .and_modify(|t| {
                t.count += n.count;
                t.first_cited_year = t.first_cited_year.min(n.first_cited_year);
            })
            .or_insert(n);
    }
    for (p, e) in part.edges {
        target
            .edges
            .entry(p)
            .and_modify(|t| {
                t.weight += e.weight;
                t.first_cocited_year = t.first_cocited_year.min(e.first_cocited_year);
            })
            .or_insert(e);
    }
}

/// Network before link pruning.
pub fn build_unpruned(snapshot: &CitationSnapshot, dataset: &Dataset, config: &NetworkConfig) -> Result<CoCitationNetwork> {
    let slices = slice_citers(snapshot, dataset, config)?;
    let mut infos = Vec::with_capacity(slices.len());
    let mut citers: Vec<&ArticleRecord> = Vec::new();
    for (interval, ids) in &slices {
        let qualifying = dataset
            .member_ids
            .iter()
            .filter_map(|id| snapshot.record(id))
            .filter(|r| {
                r.year.is_some_and(|y| y >= interval.start && y <= interval.end)
                    && snapshot.count_of(&r.id) >= config.min_citations
            })
            .count();
        infos.push(SliceInfo {
            start: interval.start,
            end: interval.end,
            qualifying,
            selected: ids.len(),
        });
        citers.extend(ids.iter().filter_map(|id| snapshot.record(id)));
    }
    let mut net = aggregate(&citers, snapshot, config);
    net.slices = infos;
    Ok(net)
}

pub fn build_network(snapshot: &CitationSnapshot, dataset: &Dataset, config: &NetworkConfig) -> Result<CoCitationNetwork> {
    let net = if config.per_slice_pruning {
        let slices = slice_citers(snapshot, dataset, config)?;
        let mut merged = CoCitationNetwork::empty(config.clone());
        for (interval, ids) in &slices {
            let citers: Vec<&ArticleRecord> = ids.iter().filter_map(|id| snapshot.record(id)).collect();
            let part = prune_links(&aggregate(&citers, snapshot, config), config.lrf);
            merged.slices.push(SliceInfo {
                start: interval.start,
                end: interval.end,
                qualifying: ids.len(),
                selected: ids.len(),
            });
            merge_into(&mut merged, part);
        }
        merged
    } else {
        prune_links(&build_unpruned(snapshot, dataset, config)?, config.lrf)
    };
    if net.edges.is_empty() {
        log::warn!("dataset `{}` produced no co-citation pairs", dataset.name);
    }
    Ok(net)
}

/// Keeps the ⌊lrf·|nodes|⌋ strongest links (weight desc, earlier year,
/// then pair order). Nodes are never removed.
pub fn prune_links(network: &CoCitationNetwork, lrf: f64) -> CoCitationNetwork {
    let budget = (lrf * network.nodes.len() as f64).floor() as usize;
    let mut out = network.clone();
    if network.edges.len() <= budget {
        return out;
    }
    let mut ranked: Vec<(&Pair, &EdgeAttrs)> = network.edges.iter().collect();
    ranked.sort_by(|a, b| {
        b.1.weight
            .cmp(&a.1.weight)
            .then_with(|| a.1.first_cocited_year.cmp(&b.1.first_cocited_year))
            .then_with(|| a.0.cmp(b.0))
    });
    out.edges = ranked
        .into_iter()
        .take(budget)
        .map(|(p, e)| (p.clone(), *e))
        .collect();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Cosine,
    Dice,
}

/// Co-citation strength normalized by node citation counts.
pub fn normalized_weights(network: &CoCitationNetwork, kind: Normalization) -> BTreeMap<Pair, f64> {
    network
        .edges
        .iter()
        .map(|(p, e)| {
            let ca = network.nodes[&p.0].count as f64;
            let cb = network.nodes[&p.1].count as f64;
            let w = e.weight as f64;
            let v = match kind {
                Normalization::Cosine => w / (ca * cb).sqrt(),
                Normalization::Dice => 2.0 * w / (ca + cb),
            };
            (p.clone(), v)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LccResult {
    pub nodes: BTreeSet<String>,
    pub size: usize,
    pub total: usize,
    /// 100·size/total rounded half up.
    pub percent_rounded: u32,
    /// 100·size/total truncated.
    pub percent_truncated: u32,
}

impl LccResult {
    fn new(nodes: BTreeSet<String>, total: usize) -> Self {
        let size = nodes.len();
        LccResult {
            nodes,
            size,
            total,
            percent_rounded: percent_rounded(size, total),
            percent_truncated: (100 * size).checked_div(total).unwrap_or(0) as u32,
        }
    }
}

pub fn percent_rounded(part: usize, total: usize) -> u32 {
    if total == 0 {
        0
    } else {
        ((200 * part + total) / (2 * total)) as u32
    }
}

fn lcc_with(network: &CoCitationNetwork, dsu: bool) -> Result<LccResult> {
    if network.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let g = network.graph();
    let comps = if dsu { g.components_dsu() } else { g.components_bfs() };
    let best = largest(&comps).expect("non-empty graph has a component");
    let nodes = best.iter().map(|&i| g.ids[i].clone()).collect();
    Ok(LccResult::new(nodes, g.len()))
}

/// Largest connected component by traversal. Size ties go to the component
/// holding the smallest node id.
pub fn largest_connected_component(network: &CoCitationNetwork) -> Result<LccResult> {
    lcc_with(network, false)
}

/// Same as [`largest_connected_component`], computed with union-find.
pub fn largest_connected_component_dsu(network: &CoCitationNetwork) -> Result<LccResult> {
    lcc_with(network, true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub lcc_size: usize,
    pub lcc_percent: u32,
    pub lcc_percent_truncated: u32,
    pub density: f64,
}

pub fn network_stats(network: &CoCitationNetwork) -> NetworkStats {
    let n = network.node_count();
    let e = network.edge_count();
    let lcc = largest_connected_component(network).ok();
    NetworkStats {
        nodes: n,
        edges: e,
        lcc_size: lcc.as_ref().map_or(0, |l| l.size),
        lcc_percent: lcc.as_ref().map_or(0, |l| l.percent_rounded),
        lcc_percent_truncated: lcc.as_ref().map_or(0, |l| l.percent_truncated),
        density: if n < 2 {
            0.0
        } else {
            2.0 * e as f64 / (n as f64 * (n as f64 - 1.0))
        },
    }
}
