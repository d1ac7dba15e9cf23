//! Dataset comparison: overlap matrix, overlay projection onto a base
//! network and per-cluster coverage classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cluster::{csv_field, ClusterPartition};
use crate::cocitation::CoCitationNetwork;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.10;
pub const DEFAULT_FULL_EPSILON: f64 = 0.05;

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub names: Vec<String>,
    pub sizes: Vec<usize>,
    /// `intersections[i][j] = |D_i ∩ D_j|`.
    pub intersections: Vec<Vec<usize>>,
    /// `values[i][j] = 100·|D_i ∩ D_j| / |D_j|`, rounded to two decimals.
    pub values: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    /// The unrounded percentage.
    pub fn exact(&self, i: usize, j: usize) -> f64 {
        percent(self.intersections[i][j], self.sizes[j])
    }

    /// Checks `values[i][j]·|D_j| = values[j][i]·|D_i|` in exact
    /// arithmetic: both sides reduce to `100·|D_i ∩ D_j|`.
    pub fn symmetric_identity_holds(&self) -> bool {
        let n = self.names.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                // (100·x_ij / s_j)·s_j vs (100·x_ji / s_i)·s_i as fractions
                // with denominators s_j and s_i, cross-multiplied.
                let (si, sj) = (self.sizes[i] as u128, self.sizes[j] as u128);
                let lhs = 100 * self.intersections[i][j] as u128 * sj * si;
                let rhs = 100 * self.intersections[j][i] as u128 * si * sj;
                lhs == rhs
            })
        })
    }

    /// CSV laid out like a published overlap table: a note line, a header
    /// of dataset names, optional year-range and size rows, then the
    /// percentage matrix with one row per dataset.
    pub fn to_csv(&self, ranges: Option<&[Option<(i32, i32)>]>) -> String {
        let mut out = String::new();
        out.push_str(
            "# cell(row i, column j) = 100 * |D_i intersect D_j| / |D_j|; a ratio to the set union would be symmetric and could not give a 100.00 diagonal with asymmetric off-diagonal cells\n",
        );
        out.push_str(&std::iter::once(String::new()).chain(self.names.iter().map(|n| csv_field(n))).collect::<Vec<_>>().join(","));
        out.push('\n');
        if let Some(ranges) = ranges {
            out.push_str("Range");
            for r in ranges {
                out.push(',');
                if let Some((a, b)) = r {
                    out.push_str(&format!("{a}-{b}"));
                }
            }
            out.push('\n');
        }
        out.push_str("Articles");
        for s in &self.sizes {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
        for (i, name) in self.names.iter().enumerate() {
            out.push_str(&csv_field(name));
            for v in &self.values[i] {
                out.push_str(&format!(",{v:.2}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn percent(part: usize, whole: usize) -> f64 {
    100.0 * part as f64 / whole as f64
}

/// Pairwise overlap percentages between at least two non-empty datasets.
pub fn overlap_matrix(datasets: &[&Dataset]) -> Result<OverlapMatrix> {
    if datasets.len() < 2 {
        return Err(Error::invalid("need at least 2 datasets"));
    }
    let mut seen = BTreeSet::new();
    for d in datasets {
        if d.is_empty() {
            return Err(Error::EmptyDataset(d.name.clone()));
        }
        if !seen.insert(d.name.as_str()) {
            return Err(Error::DuplicateName(d.name.clone()));
        }
    }
    let n = datasets.len();
    let mut intersections = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i..n {
            let (small, large) = if datasets[i].len() <= datasets[j].len() {
                (datasets[i], datasets[j])
            } else {
                (datasets[j], datasets[i])
            };
            let x = small.member_ids.iter().filter(|id| large.contains(id)).count();
            intersections[i][j] = x;
            intersections[j][i] = x;
        }
    }
    let sizes: Vec<usize> = datasets.iter().map(|d| d.len()).collect();
    let values = (0..n)
        .map(|i| (0..n).map(|j| round2(percent(intersections[i][j], sizes[j]))).collect())
        .collect();
    Ok(OverlapMatrix {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        sizes,
        intersections,
        values,
    })
}

/// Membership of one base node across the compared datasets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership(pub Vec<bool>);

impl Membership {
    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Membership {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Membership {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(serde::de::Error::custom(format!("invalid membership bit `{other}`"))),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Membership)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayProjection {
    pub dataset_names: Vec<String>,
    pub membership: BTreeMap<String, Membership>,
    /// `coverage[c][d]`: fraction of cluster `c`'s nodes present in dataset `d`.
    pub coverage: Vec<Vec<f64>>,
}

impl OverlayProjection {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Nodes of the base network that belong to dataset `d`.
    pub fn members_of(&self, d: usize) -> BTreeSet<&str> {
        self.membership
            .iter()
            .filter(|(_, m)| m.0[d])
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn check_partition(base: &CoCitationNetwork, partition: &ClusterPartition) -> Result<()> {
    if partition.assignment.len() != base.nodes.len() || !base.nodes.keys().all(|id| partition.assignment.contains_key(id)) {
        return Err(Error::PartitionMismatch(
            "partition does not cover exactly the base network's nodes".into(),
        ));
    }
    Ok(())
}

/// Marks each base node with the datasets that contain it and computes
/// per-cluster coverage fractions.
pub fn project_overlay(base: &CoCitationNetwork, datasets: &[&Dataset], partition: &ClusterPartition) -> Result<OverlayProjection> {
    if base.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    check_partition(base, partition)?;
    let membership: BTreeMap<String, Membership> = base
        .nodes
        .keys()
        .map(|id| (id.clone(), Membership(datasets.iter().map(|d| d.contains(id)).collect())))
        .collect();
    let coverage = partition
        .clusters
        .iter()
        .map(|c| {
            (0..datasets.len())
                .map(|d| {
                    let present = c.members.iter().filter(|m| membership[*m].0[d]).count();
                    present as f64 / c.members.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(OverlayProjection {
        dataset_names: datasets.iter().map(|d| d.name.clone()).collect(),
        membership,
        coverage,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CoverageClass {
    Full,
    Partial,
    Missed,
}

impl fmt::Display for CoverageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverageClass::Full => "FULL",
            CoverageClass::Partial => "PARTIAL",
            CoverageClass::Missed => "MISSED",
        })
    }
}

pub fn classify(coverage: f64, threshold: f64, epsilon: f64) -> CoverageClass {
    if coverage >= 1.0 - epsilon {
        CoverageClass::Full
    } else if coverage >= threshold {
        CoverageClass::Partial
    } else {
        CoverageClass::Missed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub cluster: usize,
    pub label: String,
    pub size: usize,
    pub fractions: Vec<f64>,
    pub classes: Vec<CoverageClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub dataset_names: Vec<String>,
    pub threshold: f64,
    pub epsilon: f64,
    pub rows: Vec<CoverageRow>,
    /// Clusters covered at or above the threshold by every dataset.
    pub common_core: Vec<usize>,
}

impl CoverageReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster,label,size");
        for n in &self.dataset_names {
            out.push(',');
            out.push_str(&csv_field(n));
        }
        for n in &self.dataset_names {
            out.push(',');
            out.push_str(&csv_field(&format!("{n} coverage")));
        }
        out.push_str(",common_core\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.cluster, csv_field(&r.label), r.size));
            for c in &r.classes {
                out.push_str(&format!(",{c}"));
            }
            for f in &r.fractions {
                out.push_str(&format!(",{f:.4}"));
            }
            let core = self.common_core.contains(&r.cluster);
            out.push_str(if core { ",yes\n" } else { ",no\n" });
        }
        out
    }
}

pub fn coverage_report(projection: &OverlayProjection, partition: &ClusterPartition, threshold: f64, epsilon: f64) -> Result<CoverageReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("coverage threshold {threshold} must lie strictly between 0 and 1")));
    }
    if !(0.0..1.0).contains(&epsilon) || 1.0 - epsilon < threshold {
        return Err(Error::invalid(format!(
            "epsilon {epsilon} must be in [0, 1) with 1 - epsilon >= threshold"
        )));
    }
    if projection.coverage.len() != partition.clusters.len() {
        return Err(Error::PartitionMismatch(format!(
            "projection has {} clusters, partition has {}",
            projection.coverage.len(),
            partition.clusters.len()
        )));
    }
    let rows: Vec<CoverageRow> = partition
        .clusters
        .iter()
        .zip(&projection.coverage)
        .map(|(c, fr)| CoverageRow {
            cluster: c.index,
            label: c.label.clone(),
            size: c.size(),
            fractions: fr.clone(),
            classes: fr.iter().map(|&f| classify(f, threshold, epsilon)).collect(),
        })
        .collect();
    let common_core = rows
        .iter()
        .filter(|r| !r.fractions.is_empty() && r.fractions.iter().all(|&f| f >= threshold))
        .map(|r| r.cluster)
        .collect();
    Ok(CoverageReport {
        dataset_names: projection.dataset_names.clone(),
        threshold,
        epsilon,
        rows,
        common_core,
    })
}
