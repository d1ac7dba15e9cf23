//! Staged cascading citation expansion with citation-count thresholds and a
//! per-generation audit trace.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::source::CitationSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Add articles citing the frontier.
    #[serde(rename = "F", alias = "FORWARD", alias = "forward")]
    Forward,
    /// Add articles cited by the frontier.
    #[serde(rename = "B", alias = "BACKWARD", alias = "backward")]
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "F",
            Direction::Backward => "B",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" | "FORWARD" | "forward" => Ok(Direction::Forward),
            "B" | "b" | "BACKWARD" | "backward" => Ok(Direction::Backward),
            other => Err(Error::invalid(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    #[serde(rename = "dir")]
    pub direction: Direction,
    #[serde(rename = "gens")]
    pub generations: u32,
}

impl Stage {
    pub fn new(direction: Direction, generations: u32) -> Self {
        Stage {
            direction,
            generations,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.direction, self.generations)
    }
}

/// Parses `F:3,B:1` into stages applied left to right.
pub fn parse_stages(s: &str) -> Result<Vec<Stage>> {
    s.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (dir, gens) = part
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("stage `{part}` is not DIR:GENS")))?;
            let generations = gens
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad generation count in `{part}`")))?;
            Ok(Stage::new(dir.parse()?, generations))
        })
        .collect()
}

pub fn format_stages(stages: &[Stage]) -> String {
    stages.iter().map(Stage::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub seeds: BTreeSet<String>,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub theta_citer: u64,
    #[serde(default)]
    pub theta_ref: u64,
    #[serde(rename = "cap", default, skip_serializing_if = "Option::is_none")]
    pub per_generation_cap: Option<usize>,
}

impl ExpansionSpec {
    pub fn new<I, S>(seeds: I, stages: Vec<Stage>, theta_citer: u64, theta_ref: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ExpansionSpec {
            seeds: seeds.into_iter().map(Into::into).collect(),
            stages,
            theta_citer,
            theta_ref,
            per_generation_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("expansion needs at least one seed"));
        }
        if self.stages.is_empty() {
            return Err(Error::invalid("expansion needs at least one stage"));
        }
        if let Some(s) = self.stages.iter().find(|s| s.generations == 0) {
            return Err(Error::invalid(format!("stage {s} has zero generations")));
        }
        if self.per_generation_cap == Some(0) {
            return Err(Error::invalid("per-generation cap must be positive"));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "stages {} from {} seed(s); theta_citer={} theta_ref={}",
            format_stages(&self.stages),
            self.seeds.len(),
            self.theta_citer,
            self.theta_ref
        );
        if let Some(cap) = self.per_generation_cap {
            s.push_str(&format!(" cap={cap}"));
        }
        s
    }

    fn threshold(&self, direction: Direction) -> u64 {
        match direction {
            Direction::Forward => self.theta_citer,
            Direction::Backward => self.theta_ref,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalReason {
    GenerationsExhausted,
    EmptyFrontier,
    CapReached,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalReason::GenerationsExhausted => "generations exhausted",
            TerminalReason::EmptyFrontier => "empty frontier",
            TerminalReason::CapReached => "cap reached",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1-based, counted across all stages.
    pub generation: usize,
    /// 0-based stage index.
    pub stage: usize,
    pub direction: Direction,
    pub frontier_in: Vec<String>,
    /// Distinct linked ids not yet accumulated.
    pub candidates_found: usize,
    /// Candidates meeting the citation threshold.
    pub candidates_qualified: usize,
    pub added_ids: Vec<String>,
    pub accumulated_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionTrace {
    pub seeds: Vec<String>,
    pub generations: Vec<GenerationRecord>,
    /// Why each executed stage stopped.
    pub stage_endings: Vec<TerminalReason>,
    pub terminal_reason: TerminalReason,
}

impl ExpansionTrace {
    /// One CSV row per generation; the terminal reason fills the last row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "generation",
            "stage",
            "direction",
            "examined",
            "found",
            "qualified",
            "added",
            "accumulated",
            "terminal_reason",
        ])?;
        let last = self.generations.len().saturating_sub(1);
        for (i, g) in self.generations.iter().enumerate() {
            let reason = if i == last {
                self.terminal_reason.to_string()
            } else {
                String::new()
            };
            w.write_record([
                g.generation.to_string(),
                g.stage.to_string(),
                g.direction.to_string(),
                g.frontier_in.len().to_string(),
                g.candidates_found.to_string(),
                g.candidates_qualified.to_string(),
                g.added_ids.len().to_string(),
                g.accumulated_size.to_string(),
                reason,
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// CSV summary of a completed trace.
pub fn trace_report(trace: &ExpansionTrace) -> Result<String> {
    trace.to_csv()
}

struct StepOutcome {
    found: usize,
    /// Qualified candidates with their citation counts, in id order.
    qualified: Vec<(String, u64)>,
}

fn linked<S: CitationSource>(source: &S, direction: Direction, id: &str) -> Result<Vec<String>> {
    let result = match direction {
        Direction::Forward => source.get_citers(id),
        Direction::Backward => source.get_references(id).map(|l| l.ids),
    };
    match result {
        Err(Error::NotFound(_)) => {
            log::warn!("skipping unknown id `{id}` during expansion");
            Ok(Vec::new())
        }
        other => other,
    }
}

/// Batches smaller than this are looked up sequentially; scheduling them on
/// the thread pool costs more than the lookups themselves.
const PARALLEL_MIN_BATCH: usize = 64;

fn map_ids<T, F>(ids: &[String], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&String) -> Result<T> + Sync + Send,
{
    if ids.len() < PARALLEL_MIN_BATCH {
        ids.iter().map(f).collect()
    } else {
        ids.par_iter().map(f).collect()
    }
}

fn step<S: CitationSource>(
    source: &S,
    direction: Direction,
    frontier: &[String],
    exclude: &BTreeSet<String>,
    threshold: u64,
) -> Result<StepOutcome> {
    let per_id = map_ids(frontier, |id| linked(source, direction, id))?;
    let candidates: BTreeSet<String> = per_id
        .into_iter()
        .flatten()
        .filter(|c| !exclude.contains(c))
        .collect();
    let candidates: Vec<String> = candidates.into_iter().collect();
    let counts = map_ids(&candidates, |c| source.citation_count(c).map(|n| n.value))?;
    let qualified = candidates
        .iter()
        .zip(counts)
        .filter(|(_, n)| *n >= threshold)
        .map(|(c, n)| (c.clone(), n))
        .collect();
    Ok(StepOutcome {
        found: candidates.len(),
        qualified,
    })
}

fn one_step<S: CitationSource>(
    source: &S,
    direction: Direction,
    current: &BTreeSet<String>,
    threshold: u64,
) -> Result<BTreeSet<String>> {
    if current.is_empty() {
        return Err(Error::invalid("expansion step needs a non-empty set"));
    }
    let frontier: Vec<String> = current.iter().cloned().collect();
    let outcome = step(source, direction, &frontier, current, threshold)?;
    Ok(outcome.qualified.into_iter().map(|(id, _)| id).collect())
}

/// Citers of `current` with at least `theta_citer` citations, minus `current`.
pub fn forward_step<S: CitationSource>(
    source: &S,
    current: &BTreeSet<String>,
    theta_citer: u64,
) -> Result<BTreeSet<String>> {
    one_step(source, Direction::Forward, current, theta_citer)
}

/// Resolvable references of `current` with at least `theta_ref` citations,
/// minus `current`.
pub fn backward_step<S: CitationSource>(
    source: &S,
    current: &BTreeSet<String>,
    theta_ref: u64,
) -> Result<BTreeSet<String>> {
    one_step(source, Direction::Backward, current, theta_ref)
}

/// Runs the stages in order. Each generation expands only the previous
/// generation's additions; the first generation of a stage expands the
/// whole accumulated set. Seeds are admitted without thresholds.
pub fn run_cascade<S: CitationSource>(
    source: &S,
    spec: &ExpansionSpec,
    name: &str,
) -> Result<(Dataset, ExpansionTrace)> {
    spec.validate()?;
    let mut missing = Vec::new();
    for seed in &spec.seeds {
        if !source.resolves(seed)? {
            missing.push(seed.as_str());
        }
    }
    if !missing.is_empty() {
        return Err(Error::NotFound(format!("seed(s) {}", missing.join(", "))));
    }

    let mut accumulated = spec.seeds.clone();
    let mut generations = Vec::new();
    let mut stage_endings = Vec::new();
    let mut generation = 0;
    'stages: for (stage_idx, stage) in spec.stages.iter().enumerate() {
        let threshold = spec.threshold(stage.direction);
        let mut frontier: Vec<String> = accumulated.iter().cloned().collect();
        let mut ending = TerminalReason::GenerationsExhausted;
        for _ in 0..stage.generations {
            generation += 1;
            let outcome = step(source, stage.direction, &frontier, &accumulated, threshold)?;
            let mut admitted = outcome.qualified.clone();
            let mut capped = false;
            if let Some(cap) = spec.per_generation_cap {
                if admitted.len() > cap {
                    admitted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                    admitted.truncate(cap);
                    capped = true;
                }
            }
            let mut added: Vec<String> = admitted.into_iter().map(|(id, _)| id).collect();
            added.sort();
            accumulated.extend(added.iter().cloned());
            generations.push(GenerationRecord {
                generation,
                stage: stage_idx,
                direction: stage.direction,
                frontier_in: frontier,
                candidates_found: outcome.found,
                candidates_qualified: outcome.qualified.len(),
                added_ids: added.clone(),
                accumulated_size: accumulated.len(),
            });
            if capped {
                stage_endings.push(TerminalReason::CapReached);
                break 'stages;
            }
            if added.is_empty() {
                ending = TerminalReason::EmptyFrontier;
                break;
            }
            frontier = added;
        }
        stage_endings.push(ending);
    }
    let terminal_reason = *stage_endings.last().expect("at least one stage ran");
    let trace = ExpansionTrace {
        seeds: spec.seeds.iter().cloned().collect(),
        generations,
        stage_endings,
        terminal_reason,
    };
    let dataset = Dataset::new(
        name,
        accumulated,
        Provenance::Expansion {
            spec: spec.describe(),
            trace: format!("traces/{name}.csv"),
        },
    );
    Ok((dataset, trace))
}
