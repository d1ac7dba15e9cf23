mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use citecascade::error::{Error, Result};
use citecascade::expansion::{parse_stages, ExpansionSpec};
use citecascade::session::{ReportKind, Session};
use citecascade::synthetic::{generate, to_jsonl, SyntheticConfig};
use citecascade::{InputFormat, QueryKind, SourceQuery};

use args::{Cli, Command};

const EXIT_VALIDATION: u8 = 3;
const EXIT_DATA: u8 = 4;

fn infer_format(path: &Path, explicit: Option<&str>) -> Result<InputFormat> {
    match explicit {
        Some(f) => f.parse(),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(InputFormat::DimensionsCsv),
            Some("jsonl") | Some("json") => Ok(InputFormat::Jsonl),
            other => Err(Error::UnknownFormat(format!(
                "cannot infer format from extension {:?}; pass --format",
                other.unwrap_or("")
            ))),
        },
    }
}

fn parse_lby(s: &str) -> Result<Option<u32>> {
    match s {
        "none" | "inf" | "unlimited" => Ok(None),
        n => n
            .parse()
            .map(Some)
            .map_err(|_| Error::Invalid(format!("--lby expects a number or `none`, got `{n}`"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Synth(a) = &cli.command {
        let records = generate(&SyntheticConfig { articles: a.articles, seed: a.seed, ..SyntheticConfig::default() });
        fs::write(&a.out, to_jsonl(&records)).map_err(|e| Error::Io { path: a.out.clone(), source: e })?;
        println!("wrote {} records to {}", records.len(), a.out.display());
        return Ok(());
    }
    let mut session = Session::open(&cli.session)?;
    match cli.command {
        Command::Ingest(a) => {
            let format = infer_format(&a.input, a.format.as_deref())?;
            let r = session.ingest(&a.input, format)?;
            println!(
                "loaded {} records: {} new, {} merged, {} rejected",
                r.loaded,
                r.inserted,
                r.merged,
                r.rejected.len()
            );
        }
        Command::Enrich(a) => {
            let r = session.enrich(&a.input)?;
            println!(
                "enriched {} records; {} already had abstracts, {} unmatched, {} malformed",
                r.enriched,
                r.already_present,
                r.unmatched.len(),
                r.malformed.len()
            );
        }
        Command::Search(a) => {
            let kind: QueryKind = a.kind.parse()?;
            let d = session.search(&SourceQuery::new(kind, a.phrases), &a.name)?;
            println!("dataset {}: {} records", d.name, d.len());
        }
        Command::Expand(a) => {
            let spec = match (&a.spec, &a.stages) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    let mut spec: ExpansionSpec = serde_json::from_str(&text)
                        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
                    if let Some(t) = a.theta_citer {
                        spec.theta_citer = t;
                    }
                    if let Some(t) = a.theta_ref {
                        spec.theta_ref = t;
                    }
                    if a.cap.is_some() {
                        spec.per_generation_cap = a.cap;
                    }
                    spec
                }
                (None, Some(stages)) => {
                    let mut spec = ExpansionSpec::new(
                        a.seeds.iter().cloned(),
                        parse_stages(stages)?,
                        a.theta_citer.unwrap_or(session.config.theta_citer),
                        a.theta_ref.unwrap_or(session.config.theta_ref),
                    );
                    spec.per_generation_cap = a.cap;
                    spec
                }
                (None, None) => return Err(Error::Invalid("expand needs --spec or --seed with --stages".into())),
            };
            let (d, trace) = session.expand(&spec, &a.name)?;
            println!(
                "dataset {}: {} records after {} generation(s), {} (trace: traces/{}.csv)",
                d.name,
                d.len(),
                trace.generations.len(),
                trace.terminal_reason,
                d.name
            );
        }
        Command::Union(a) => {
            let d = session.union(&a.datasets, &a.name)?;
            println!("dataset {}: {} records", d.name, d.len());
        }
        Command::Network(a) => {
            let mut cfg = session.config.network.clone();
            if let Some(v) = a.lrf {
                cfg.lrf = v;
            }
            if let Some(v) = &a.lby {
                cfg.lby = parse_lby(v)?;
            }
            if let Some(v) = a.top_n {
                cfg.top_n = v;
            }
            if let Some(v) = a.min_citations {
                cfg.min_citations = v;
            }
            if let Some(v) = a.slice_years {
                cfg.slice_years = v;
            }
            cfg.per_slice_pruning |= a.per_slice_pruning;
            cfg.validate()?;
            let (_, r) = session.network(&a.dataset, &cfg)?;
            println!(
                "network {}: {} nodes, {} links, LCC {} ({}%)",
                r.name, r.stats.nodes, r.stats.edges, r.stats.lcc_size, r.stats.lcc_percent
            );
        }
        Command::Cluster(a) => {
            if let Some(k) = a.top_k {
                session.config.top_k_clusters = k;
            }
            let out = session.cluster(&a.network, a.levels)?;
            let p = &out.partition;
            println!(
                "network {}: {} clusters, modularity {:.4}, mean silhouette {:.4}",
                a.network,
                p.len(),
                p.modularity,
                p.mean_silhouette
            );
            for c in p.clusters.iter().take(session.config.top_k_clusters) {
                println!("  #{} ({} members) {}", c.index, c.size(), c.label);
            }
            for sub in &out.sub_partitions {
                for c in &sub.clusters {
                    println!("    {} ({} members) {}", c.display_id(sub.parent), c.size(), c.label);
                }
            }
        }
        Command::Compare(a) => {
            if let Some(t) = a.threshold {
                session.config.coverage_threshold = t;
            }
            if let Some(e) = a.epsilon {
                session.config.coverage_epsilon = e;
            }
            let out = session.compare(&a.datasets, &a.base)?;
            println!(
                "compared {} datasets against {}: {} clusters, common core {:?}",
                out.projection.dataset_names.len(),
                a.base,
                out.coverage.rows.len(),
                out.coverage.common_core
            );
        }
        Command::Render(a) => {
            if let Some(seed) = a.seed {
                session.config.render.seed = seed;
            }
            let written = match a.kind.as_str() {
                "map" => {
                    let name = a.network.ok_or_else(|| Error::Invalid("render map needs --network".into()))?;
                    session.render_map(&name)?
                }
                "overlay" => session.render_overlay()?,
                "distribution" => session.render_distribution(&a.datasets, a.log)?,
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown render kind `{other}` (expected map, overlay or distribution)"
                    )))
                }
            };
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Report(a) => {
            let text = if a.kind == "trace" {
                let name = a.name.ok_or_else(|| Error::Invalid("report --kind trace needs --name".into()))?;
                citecascade::session::validate_name(&name)?;
                let path = session.path("traces", &format!("{name}.csv"));
                fs::read_to_string(&path).map_err(|_| Error::NotFound(format!("trace of `{name}`")))?
            } else {
                session.report(a.kind.parse::<ReportKind>()?)?
            };
            print!("{text}");
        }
        Command::Synth(_) => unreachable!("handled before opening the session"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {message}", e.kind());
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_DATA })
        }
    }
}
