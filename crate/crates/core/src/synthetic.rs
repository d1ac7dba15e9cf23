//! Deterministic synthetic citation corpora for tests, demos and fixtures.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::store::ArticleRecord;

const TOPICS: &[&str] = &[
    "fish oil",
    "raynaud syndrome",
    "magnesium deficiency",
    "migraine headache",
    "drug discovery",
    "information retrieval",
    "text mining",
    "gene expression",
    "protein interaction",
    "knowledge graph",
    "citation analysis",
    "hypothesis generation",
];

const QUALIFIERS: &[&str] = &[
    "clinical", "computational", "novel", "systematic", "large scale", "exploratory", "statistical", "comparative",
];

const NOUNS: &[&str] = &[
    "study", "review", "model", "framework", "evaluation", "trial", "analysis", "approach", "survey", "method",
];

const CONTEXTS: &[&str] = &[
    "patients", "biomedical literature", "public health", "literature databases", "cohort data", "open data",
];

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub articles: usize,
    pub topics: usize,
    pub start_year: i32,
    pub end_year: i32,
    pub mean_refs: usize,
    /// Probability that a reference stays within the citing article's topic.
    pub topic_affinity: f64,
    /// Fraction of records without a source-reported citation count.
    pub missing_count_fraction: f64,
    /// Fraction of records that also cite an id absent from the corpus.
    pub dangling_ref_fraction: f64,
    pub abstracts: bool,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            articles: 500,
            topics: 6,
            start_year: 1980,
            end_year: 2019,
            mean_refs: 8,
            topic_affinity: 0.8,
            missing_count_fraction: 0.1,
            dangling_ref_fraction: 0.05,
            abstracts: true,
            seed: 7,
        }
    }
}

pub fn synthetic_id(i: usize) -> String {
    format!("syn.{i:05}")
}

/// Generates a citation DAG: every reference points to an article with a
/// smaller index and a year no later than the citing article's.
pub fn generate(config: &SyntheticConfig) -> Vec<ArticleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.articles;
    let topics = config.topics.clamp(1, TOPICS.len());
    let span = (config.end_year - config.start_year).max(0) as f64;
    let years: Vec<i32> = (0..n)
        .map(|i| config.start_year + if n > 1 { (span * i as f64 / (n - 1) as f64).floor() as i32 } else { 0 })
        .collect();
    let topic_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..topics)).collect();
    let mut indegree = vec![0u64; n];
    let mut records = Vec::with_capacity(n);

    for i in 0..n {
        let t = topic_of[i];
        let earlier: Vec<usize> = (0..i).filter(|&j| years[j] <= years[i]).collect();
        let mut refs: Vec<usize> = Vec::new();
        if !earlier.is_empty() {
            let want = rng.gen_range(0..=2 * config.mean_refs).min(earlier.len());
            let same: Vec<usize> = earlier.iter().copied().filter(|&j| topic_of[j] == t).collect();
            let mut attempts = 0;
            while refs.len() < want && attempts < want * 10 {
                attempts += 1;
                let pool = if !same.is_empty() && rng.gen_bool(config.topic_affinity) { &same } else { &earlier };
                // preferential attachment on in-degree
                let pick = pool
                    .choose_weighted(&mut rng, |&j| 1 + indegree[j])
                    .copied()
                    .expect("non-empty pool with positive weights");
                if !refs.contains(&pick) {
                    refs.push(pick);
                }
            }
        }
        refs.sort_unstable();
        for &r in &refs {
            indegree[r] += 1;
        }
        let mut ref_ids: Vec<String> = refs.iter().map(|&r| synthetic_id(r)).collect();
        if rng.gen_bool(config.dangling_ref_fraction) {
            ref_ids.push(format!("ext.{i:05}"));
        }

        let title = format!(
            "{} {} {} in {}",
            QUALIFIERS[rng.gen_range(0..QUALIFIERS.len())],
            TOPICS[t],
            NOUNS[rng.gen_range(0..NOUNS.len())],
            CONTEXTS[rng.gen_range(0..CONTEXTS.len())]
        );
        let mut rec = ArticleRecord::new(synthetic_id(i), title, Some(years[i])).with_references(ref_ids);
        rec.venue = Some(format!("Journal {}", (b'A' + (t % 26) as u8) as char));
        rec.authors = vec![format!("Author {}", rng.gen_range(1..200))];
        if config.abstracts && rng.gen_bool(0.6) {
            let other = TOPICS[rng.gen_range(0..topics)];
            rec.abstract_text = Some(format!(
                "We report a {} of {} and its relation to {}.",
                NOUNS[rng.gen_range(0..NOUNS.len())],
                TOPICS[t],
                other
            ));
        }
        records.push(rec);
    }
    // Source-reported counts see citations from outside the corpus too.
    for (i, rec) in records.iter_mut().enumerate() {
        if !rng.gen_bool(config.missing_count_fraction) {
            rec.global_citation_count = Some(indegree[i] + rng.gen_range(0..15));
        }
    }
    records
}

/// One JSON object per line, in id order.
pub fn to_jsonl(records: &[ArticleRecord]) -> String {
    let mut sorted: Vec<&ArticleRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::new();
    for r in sorted {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}
