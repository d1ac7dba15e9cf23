//! Session directory: persisted store, datasets, networks, reports and
//! renders, with one pipeline method per command.
//!
//! Layout under the session root:
//! `session.json`, `store.jsonl`, `datasets/`, `networks/`, `reports/`,
//! `renders/`, `traces/`, plus a `.lock` file while a command runs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{
    apply_labels, build_concept_tree, detect_communities, silhouette, sub_cluster, summarize, ClusterPartition,
    ConceptTree, ConceptTreeOptions, PartitionSummary,
};
use crate::cocitation::{build_network, network_stats, percent_rounded, CoCitationNetwork, NetworkConfig, NetworkStats};
use crate::dataset::{dataset_union, timestamp_now, year_distribution, Dataset};
use crate::error::{Error, Result};
use crate::expansion::{run_cascade, ExpansionSpec, ExpansionTrace};
use crate::export::{from_json, to_graphml, to_json};
use crate::overlay::{
    coverage_report, overlap_matrix, project_overlay, CoverageReport, OverlapMatrix, OverlayProjection,
    DEFAULT_COVERAGE_THRESHOLD, DEFAULT_FULL_EPSILON,
};
use crate::render::{artifact_name, render_distribution, render_map, to_html, RenderSpec};
use crate::source::{CitationSnapshot, CitationSource, SourceQuery};
use crate::store::{EnrichReport, InputFormat, LoadReport, RecordStore};

pub const CONFIG_FILE: &str = "session.json";
pub const STORE_FILE: &str = "store.jsonl";
pub const LOCK_FILE: &str = ".lock";
const SUBDIRS: [&str; 5] = ["datasets", "networks", "reports", "renders", "traces"];
/// Name under which comparison artifacts are written.
pub const COMPARISON: &str = "comparison";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub network: NetworkConfig,
    pub theta_citer: u64,
    pub theta_ref: u64,
    pub render: RenderSpec,
    pub coverage_threshold: f64,
    pub coverage_epsilon: f64,
    /// Number of top clusters that are sub-clustered and get concept trees.
    pub top_k_clusters: usize,
    pub top_citers: usize,
    /// Fixed RFC 3339 creation time for new datasets; unset means now.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinned_timestamp: Option<String>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            network: NetworkConfig::default(),
            theta_citer: 10,
            theta_ref: 10,
            render: RenderSpec::default(),
            coverage_threshold: DEFAULT_COVERAGE_THRESHOLD,
            coverage_epsilon: DEFAULT_FULL_EPSILON,
            top_k_clusters: 5,
            top_citers: 10,
            pinned_timestamp: None,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.render.validate()?;
        if let Some(ts) = &self.pinned_timestamp {
            chrono::DateTime::parse_from_rfc3339(ts)
                .map_err(|e| Error::invalid(format!("pinned_timestamp `{ts}`: {e}")))?;
        }
        Ok(())
    }
}

/// Dataset names double as file stems.
pub fn validate_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 100
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "invalid name `{name}`: use letters, digits, `_`, `-` or `.`"
        )))
    }
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Session {
    root: PathBuf,
    pub config: SessionConfig,
    _lock: LockGuard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkReport {
    pub name: String,
    pub dataset_size: usize,
    pub config: NetworkConfig,
    pub stats: NetworkStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterOutcome {
    pub partition: ClusterPartition,
    pub sub_partitions: Vec<ClusterPartition>,
    pub concept_trees: Vec<(usize, ConceptTree)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOutcome {
    pub matrix: OverlapMatrix,
    pub projection: OverlayProjection,
    pub coverage: CoverageReport,
}

/// Which datasets a comparison covered; written next to its reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonManifest {
    pub base: String,
    pub datasets: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    Datasets,
    Overlap,
    Networks,
    Coverage,
}

impl std::str::FromStr for ReportKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "datasets" => Ok(ReportKind::Datasets),
            "overlap" => Ok(ReportKind::Overlap),
            "networks" => Ok(ReportKind::Networks),
            "coverage" => Ok(ReportKind::Coverage),
            other => Err(Error::invalid(format!(
                "unknown report kind `{other}` (expected datasets, overlap, networks or coverage)"
            ))),
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    // Skip rewriting identical content so timestamps stay put on re-runs.
    if fs::read(path).is_ok_and(|old| old == content.as_bytes()) {
        return Ok(());
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path, hint: &str) -> Result<String> {
    if !path.exists() {
        return Err(Error::NotFound(format!("{} ({hint})", path.display())));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl Session {
    /// Opens or creates a session directory and takes its lock.
    pub fn open(root: impl AsRef<Path>) -> Result<Session> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let lock_path = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(Error::Locked(lock_path)),
            Err(e) => return Err(Error::io(&lock_path, e)),
        }
        let lock = LockGuard(lock_path);
        for d in SUBDIRS {
            let p = root.join(d);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        let config_path = root.join(CONFIG_FILE);
        let config = if config_path.exists() {
            let cfg: SessionConfig = serde_json::from_str(&read_file(&config_path, "session config")?)?;
            cfg.validate()?;
            cfg
        } else {
            let cfg = SessionConfig::default();
            write_file(&config_path, &pretty_json(&cfg)?)?;
            cfg
        };
        Ok(Session { root, config, _lock: lock })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn save_config(&self) -> Result<()> {
        self.config.validate()?;
        write_file(&self.root.join(CONFIG_FILE), &pretty_json(&self.config)?)
    }

    pub fn path(&self, dir: &str, file: &str) -> PathBuf {
        self.root.join(dir).join(file)
    }

    pub fn store(&self) -> Result<RecordStore> {
        RecordStore::open(self.root.join(STORE_FILE))
    }

    pub fn snapshot(&self) -> Result<CitationSnapshot> {
        Ok(CitationSnapshot::new(self.store()?))
    }

    fn now(&self) -> String {
        self.config.pinned_timestamp.clone().unwrap_or_else(timestamp_now)
    }

    // ---- datasets -------------------------------------------------------

    pub fn dataset_path(&self, name: &str) -> PathBuf {
        self.path("datasets", &format!("{name}.json"))
    }

    pub fn load_dataset(&self, name: &str) -> Result<Dataset> {
        validate_name(name)?;
        let text = read_file(&self.dataset_path(name), "no such dataset")?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn dataset_names(&self) -> Result<Vec<String>> {
        let dir = self.root.join("datasets");
        let mut names = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            if let Some(stem) = entry.file_name().to_str().and_then(|f| f.strip_suffix(".json")) {
                names.push(stem.to_owned());
            }
        }
        names.sort();
        Ok(names)
    }

    /// Writes a dataset; an existing file with the same members and
    /// provenance keeps its original creation time.
    pub fn save_dataset(&self, mut dataset: Dataset) -> Result<Dataset> {
        validate_name(&dataset.name)?;
        dataset.created_at = self.now();
        let path = self.dataset_path(&dataset.name);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(old) = serde_json::from_str::<Dataset>(&text) {
                if old.member_ids == dataset.member_ids && old.provenance == dataset.provenance {
                    dataset.created_at = old.created_at;
                }
            }
        }
        write_file(&path, &pretty_json(&dataset)?)?;
        Ok(dataset)
    }

    // ---- commands -------------------------------------------------------

    pub fn ingest(&self, input: &Path, format: InputFormat) -> Result<LoadReport> {
        let mut store = self.store()?;
        let report = store.ingest(input, format)?;
        store.flush()?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
        write_file(&self.path("reports", &format!("ingest-{stem}.rejections.csv")), &report.to_csv()?)?;
        Ok(report)
    }

    pub fn enrich(&self, input: &Path) -> Result<EnrichReport> {
        let mut store = self.store()?;
        let report = store.enrich_abstracts(input)?;
        store.flush()?;
        let mut csv = String::from("line_number,key\n");
        for (line, key) in &report.unmatched {
            csv.push_str(&format!("{line},{}\n", crate::cluster::csv_field(key)));
        }
        write_file(&self.path("reports", "enrich.unmatched.csv"), &csv)?;
        Ok(report)
    }

    pub fn search(&self, query: &SourceQuery, name: &str) -> Result<Dataset> {
        validate_name(name)?;
        let dataset = self.snapshot()?.search(query, name)?;
        self.save_dataset(dataset)
    }

    pub fn expand(&self, spec: &ExpansionSpec, name: &str) -> Result<(Dataset, ExpansionTrace)> {
        validate_name(name)?;
        let snapshot = self.snapshot()?;
        let (dataset, trace) = run_cascade(&snapshot, spec, name)?;
        write_file(&self.path("traces", &format!("{name}.csv")), &trace.to_csv()?)?;
        write_file(&self.path("traces", &format!("{name}.spec.json")), &pretty_json(spec)?)?;
        Ok((self.save_dataset(dataset)?, trace))
    }

    pub fn union(&self, inputs: &[String], name: &str) -> Result<Dataset> {
        validate_name(name)?;
        let sets = inputs.iter().map(|n| self.load_dataset(n)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Dataset> = sets.iter().collect();
        self.save_dataset(dataset_union(&refs, name)?)
    }

    pub fn network_path(&self, name: &str) -> PathBuf {
        self.path("networks", &format!("{name}.json"))
    }

    pub fn load_network(&self, name: &str) -> Result<CoCitationNetwork> {
        validate_name(name)?;
        from_json(&read_file(&self.network_path(name), "run `network` first")?)
    }

    pub fn network(&self, dataset_name: &str, config: &NetworkConfig) -> Result<(CoCitationNetwork, NetworkReport)> {
        let dataset = self.load_dataset(dataset_name)?;
        let snapshot = self.snapshot()?;
        let network = build_network(&snapshot, &dataset, config)?;
        let report = NetworkReport {
            name: dataset_name.to_owned(),
            dataset_size: dataset.len(),
            config: config.clone(),
            stats: network_stats(&network),
        };
        write_file(&self.network_path(dataset_name), &to_json(&network)?)?;
        write_file(&self.path("networks", &format!("{dataset_name}.graphml")), &to_graphml(&network)?)?;
        write_file(&self.path("reports", &format!("{dataset_name}.network.json")), &pretty_json(&report)?)?;
        Ok((network, report))
    }

    pub fn load_partition(&self, name: &str) -> Result<ClusterPartition> {
        validate_name(name)?;
        let text = read_file(&self.path("networks", &format!("{name}.partition.json")), "run `cluster` first")?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Clusters a stored network. `levels >= 2` also sub-clusters the top
    /// clusters; concept trees are built for the top clusters either way.
    pub fn cluster(&self, name: &str, levels: u8) -> Result<ClusterOutcome> {
        if !(1..=2).contains(&levels) {
            return Err(Error::invalid("levels must be 1 or 2"));
        }
        let network = self.load_network(name)?;
        let snapshot = self.snapshot()?;
        let mut partition = detect_communities(&network)?;
        apply_labels(&mut partition, &network, &snapshot);
        let sil = silhouette(&network, &partition.assignment)?;
        write_file(&self.path("networks", &format!("{name}.partition.csv")), &partition.to_csv(&sil.per_node))?;
        write_file(&self.path("networks", &format!("{name}.partition.json")), &pretty_json(&partition)?)?;
        let summary = summarize(&partition, &snapshot, self.config.top_citers);
        write_file(&self.path("reports", &format!("{name}.clusters.json")), &pretty_json(&summary)?)?;

        let top: Vec<_> = partition.clusters.iter().take(self.config.top_k_clusters).collect();
        let mut sub_partitions = Vec::new();
        if levels >= 2 {
            let mut summaries: Vec<PartitionSummary> = Vec::new();
            for parent in &top {
                let sub_net = network.induced(&parent.members.iter().cloned().collect());
                let mut sub = sub_cluster(parent, &network)?;
                apply_labels(&mut sub, &sub_net, &snapshot);
                let sub_sil = silhouette(&sub_net, &sub.assignment)?;
                write_file(
                    &self.path("networks", &format!("{name}.c{}.partition.csv", parent.index)),
                    &sub.to_csv(&sub_sil.per_node),
                )?;
                summaries.push(summarize(&sub, &snapshot, self.config.top_citers));
                sub_partitions.push(sub);
            }
            write_file(&self.path("reports", &format!("{name}.subclusters.json")), &pretty_json(&summaries)?)?;
        }

        let mut concept_trees = Vec::new();
        let mut text = String::new();
        for c in &top {
            let tree = build_concept_tree(c, &snapshot, ConceptTreeOptions::default());
            text.push_str(&format!("#{} {}\n", c.index, c.label));
            for line in tree.to_text().lines() {
                text.push_str("  ");
                text.push_str(line);
                text.push('\n');
            }
            concept_trees.push((c.index, tree));
        }
        write_file(&self.path("reports", &format!("{name}.concepts.txt")), &text)?;
        let json: BTreeMap<String, &ConceptTree> = concept_trees.iter().map(|(i, t)| (format!("#{i}"), t)).collect();
        write_file(&self.path("reports", &format!("{name}.concepts.json")), &pretty_json(&json)?)?;
        Ok(ClusterOutcome { partition, sub_partitions, concept_trees })
    }

    /// Overlap matrix over the base plus the listed datasets, and their
    /// projection onto the base network's clusters.
    pub fn compare(&self, datasets: &[String], base: &str) -> Result<CompareOutcome> {
        let individual: Vec<&String> = datasets.iter().filter(|d| d.as_str() != base).collect();
        if individual.len() < 2 {
            return Err(Error::invalid("need at least 2 datasets"));
        }
        let base_set = self.load_dataset(base)?;
        let sets = individual.iter().map(|n| self.load_dataset(n)).collect::<Result<Vec<_>>>()?;
        let mut all: Vec<&Dataset> = vec![&base_set];
        all.extend(sets.iter());
        let matrix = overlap_matrix(&all)?;
        let store = self.store()?;
        let ranges: Vec<Option<(i32, i32)>> = all
            .iter()
            .map(|d| year_distribution(d, &store).map(|y| y.range))
            .collect::<Result<_>>()?;
        write_file(&self.path("reports", &format!("{COMPARISON}.overlap.csv")), &matrix.to_csv(Some(&ranges)))?;

        let network = self.load_network(base)?;
        let partition = self.load_partition(base)?;
        let set_refs: Vec<&Dataset> = sets.iter().collect();
        let projection = project_overlay(&network, &set_refs, &partition)?;
        let coverage = coverage_report(&projection, &partition, self.config.coverage_threshold, self.config.coverage_epsilon)?;
        write_file(&self.path("reports", &format!("{COMPARISON}.projection.json")), &projection.to_json()?)?;
        write_file(&self.path("reports", &format!("{COMPARISON}.coverage.csv")), &coverage.to_csv())?;
        let manifest = ComparisonManifest {
            base: base.to_owned(),
            datasets: individual.iter().map(|s| s.to_string()).collect(),
        };
        write_file(&self.path("reports", &format!("{COMPARISON}.json")), &pretty_json(&manifest)?)?;
        Ok(CompareOutcome { matrix, projection, coverage })
    }

    fn write_svg(&self, subject: &str, kind: &str, svg: &str, html_title: Option<&str>) -> Result<Vec<PathBuf>> {
        let svg_path = self.path("renders", &artifact_name(subject, kind));
        write_file(&svg_path, svg)?;
        let mut out = vec![svg_path];
        if let Some(title) = html_title {
            let html_path = self.path("renders", &format!("{subject}.{kind}.html"));
            write_file(&html_path, &to_html(svg, title))?;
            out.push(html_path);
        }
        Ok(out)
    }

    /// Map of a stored network, with cluster labels when a partition exists.
    pub fn render_map(&self, name: &str) -> Result<Vec<PathBuf>> {
        let network = self.load_network(name)?;
        let partition = match self.load_partition(name) {
            Ok(p) => Some(p),
            Err(Error::NotFound(_)) => None,
            Err(e) => return Err(e),
        };
        let title = format!("Co-citation network of {name}");
        let svg = render_map(&network, partition.as_ref(), None, &self.config.render, &title)?;
        self.write_svg(name, "map", &svg, Some(&title))
    }

    /// Overlay of the last comparison's datasets on its base network.
    pub fn render_overlay(&self) -> Result<Vec<PathBuf>> {
        let manifest: ComparisonManifest = serde_json::from_str(&read_file(
            &self.path("reports", &format!("{COMPARISON}.json")),
            "run `compare` first",
        )?)?;
        let network = self.load_network(&manifest.base)?;
        let partition = self.load_partition(&manifest.base)?;
        let projection: OverlayProjection = serde_json::from_str(&read_file(
            &self.path("reports", &format!("{COMPARISON}.projection.json")),
            "run `compare` first",
        )?)?;
        let title = format!("{} on {}", manifest.datasets.join(", "), manifest.base);
        let svg = render_map(&network, Some(&partition), Some(&projection), &self.config.render, &title)?;
        self.write_svg(COMPARISON, "overlay", &svg, Some(&title))
    }

    pub fn render_distribution(&self, names: &[String], log: bool) -> Result<Vec<PathBuf>> {
        if names.is_empty() {
            return Err(Error::invalid("need at least 1 dataset"));
        }
        let store = self.store()?;
        let dists = names
            .iter()
            .map(|n| year_distribution(&self.load_dataset(n)?, &store))
            .collect::<Result<Vec<_>>>()?;
        let svg = render_distribution(&dists, log, &self.config.render)?;
        let subject = if names.len() == 1 { names[0].as_str() } else { COMPARISON };
        let kind = if log { "distribution-log" } else { "distribution" };
        self.write_svg(subject, kind, &svg, None)
    }

    // ---- reports --------------------------------------------------------

    pub fn report(&self, kind: ReportKind) -> Result<String> {
        match kind {
            ReportKind::Datasets => {
                let text = self.datasets_table()?;
                write_file(&self.path("reports", "datasets.csv"), &text)?;
                Ok(text)
            }
            ReportKind::Overlap => read_file(&self.path("reports", &format!("{COMPARISON}.overlap.csv")), "run `compare` first"),
            ReportKind::Coverage => read_file(&self.path("reports", &format!("{COMPARISON}.coverage.csv")), "run `compare` first"),
            ReportKind::Networks => {
                let text = self.networks_table()?;
                write_file(&self.path("reports", "networks.csv"), &text)?;
                Ok(text)
            }
        }
    }

    /// One row per dataset: name, provenance, size, members with abstracts.
    fn datasets_table(&self) -> Result<String> {
        let store = self.store()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["Set", "Description", "Records", "Records with Abstracts", "Year range"])?;
        for name in self.dataset_names()? {
            let d = self.load_dataset(&name)?;
            let with_abstract = d
                .member_ids
                .iter()
                .filter(|id| store.get(id).is_some_and(|r| r.abstract_text.as_deref().is_some_and(|a| !a.trim().is_empty())))
                .count();
            let range = if d.is_empty() {
                String::new()
            } else {
                year_distribution(&d, &store)?.range.map_or_else(String::new, |(a, b)| format!("{a}-{b}"))
            };
            w.write_record([
                d.name.clone(),
                d.provenance.describe(),
                thousands(d.len()),
                thousands(with_abstract),
                range,
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    /// Network properties with one column per clustered network.
    fn networks_table(&self) -> Result<String> {
        let dir = self.root.join("networks");
        let mut names = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let file = entry.file_name().to_string_lossy().into_owned();
            if let Some(stem) = file.strip_suffix(".json") {
                if !stem.contains(".partition") {
                    names.push(stem.to_owned());
                }
            }
        }
        names.sort();
        let mut rows: Vec<Vec<String>> = vec![
            vec![String::new()],
            vec!["Nodes".into()],
            vec!["Links".into()],
            vec!["LCC (%)".into()],
            vec!["LCC % (truncated)".into()],
            vec!["Modularity".into()],
            vec!["Silhouette".into()],
        ];
        for name in &names {
            let net = self.load_network(name)?;
            let s = network_stats(&net);
            let part = match self.load_partition(name) {
                Ok(p) => Some(p),
                Err(Error::NotFound(_)) => None,
                Err(e) => return Err(e),
            };
            rows[0].push(name.clone());
            rows[1].push(thousands(s.nodes));
            rows[2].push(thousands(s.edges));
            rows[3].push(format!("{} ({})", thousands(s.lcc_size), percent_rounded(s.lcc_size, s.nodes)));
            rows[4].push(s.lcc_percent_truncated.to_string());
            rows[5].push(part.as_ref().map_or_else(String::new, |p| format!("{:.2}", p.modularity)));
            rows[6].push(part.as_ref().map_or_else(String::new, |p| format!("{:.2}", p.mean_silhouette)));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        let mut out = String::from("# LCC percentages: rounded half-up in `LCC (%)`, truncated in the next row; silhouette is the unweighted mean over clusters\n");
        out.push_str(&String::from_utf8(bytes).expect("csv writer emits utf-8"));
        Ok(out)
    }
}
