//! Remote citation source over a pluggable HTTP-style transport.
//!
//! Wire format (all bodies JSON):
//!
//! - `GET {base}/publications/{id}` -> `{"id": .., "global_citation_count": n|null, "snapshot_citers": n}`
//! - `GET {base}/publications/{id}/references` -> `{"ids": [..], "unresolved": [..]}`
//! - `GET {base}/publications/{id}/citers` -> `{"ids": [..]}`
//! - `GET {base}/search?kind=..&q=..&page=N` -> `{"ids": [..], "next_page": n|null}`
//!
//! 404 means not found. 429 and 503 are throttle responses and are retried
//! with exponential backoff. Successful bodies are written through to
//! `cache/<op>/<id>.json`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use super::{CitationCount, CitationSource, Links, SourceQuery};
use crate::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};

pub const TOKEN_ENV: &str = "CITESRC_TOKEN";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    /// Environment variable holding the bearer token.
    pub token_env: String,
    pub rate_limit_per_sec: f64,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: String::new(),
            token_env: TOKEN_ENV.into(),
            rate_limit_per_sec: 10.0,
            max_in_flight: 4,
            max_retries: 5,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            cache_dir: None,
        }
    }
}

impl RemoteConfig {
    pub fn token(&self) -> Option<String> {
        std::env::var(&self.token_env).ok().filter(|t| !t.is_empty())
    }

    pub fn backoff_delay(&self, attempt: u32) -> Duration {
        let ms = self
            .backoff_base_ms
            .saturating_mul(1u64 << attempt.min(20))
            .min(self.backoff_max_ms);
        Duration::from_millis(ms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub url: String,
    pub bearer: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

/// Blocking GET. Implementations wrap whatever HTTP client is at hand.
pub trait Transport: Sync {
    fn get(&self, request: &Request) -> std::result::Result<Response, String>;
}

/// Write-through cache laid out as `<root>/<op>/<id>.json`.
#[derive(Clone, Debug)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskCache { root: root.into() }
    }

    pub fn path(&self, op: &str, id: &str) -> PathBuf {
        self.root.join(op).join(format!("{}.json", file_key(id)))
    }

    pub fn get(&self, op: &str, id: &str) -> Option<String> {
        fs::read_to_string(self.path(op, id)).ok()
    }

    pub fn put(&self, op: &str, id: &str, body: &str) -> Result<()> {
        let path = self.path(op, id);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        fs::write(&path, body).map_err(|e| Error::io(&path, e))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

/// Maps an id onto a file-name-safe string; unsafe bytes become `%XX`.
fn file_key(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'.' || b == b'-' || b == b'_' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    if out.starts_with('.') {
        out.replace_range(0..1, "%2E");
    }
    out
}

fn encode_component(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
pub struct CountBody {
    pub id: String,
    pub global_citation_count: Option<u64>,
    #[serde(default)]
    pub snapshot_citers: u64,
}

#[derive(Serialize, Deserialize)]
pub struct IdsBody {
    pub ids: Vec<String>,
    #[serde(default)]
    pub unresolved: Vec<String>,
}

#[derive(Serialize, Deserialize)]
pub struct SearchPage {
    pub ids: Vec<String>,
    pub next_page: Option<u32>,
}

pub struct RemoteSource<T> {
    config: RemoteConfig,
    transport: T,
    cache: Option<DiskCache>,
    last_request: Mutex<Option<Instant>>,
}

enum Fetched {
    Body(String),
    NotFound,
}

impl<T: Transport> RemoteSource<T> {
    pub fn new(config: RemoteConfig, transport: T) -> Self {
        let cache = config.cache_dir.clone().map(DiskCache::new);
        RemoteSource {
            config,
            transport,
            cache,
            last_request: Mutex::new(None),
        }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn throttle(&self) {
        if self.config.rate_limit_per_sec <= 0.0 {
            return;
        }
        let interval = Duration::from_secs_f64(1.0 / self.config.rate_limit_per_sec);
        let mut last = self.last_request.lock().expect("rate limiter lock");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < interval {
                thread::sleep(interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn fetch(&self, op: &str, key: &str, url: String) -> Result<Fetched> {
        if let Some(body) = self.cache.as_ref().and_then(|c| c.get(op, key)) {
            return Ok(Fetched::Body(body));
        }
        let request = Request {
            url,
            bearer: self.config.token(),
        };
        let mut attempt = 0;
        loop {
            self.throttle();
            let resp = self.transport.get(&request).map_err(Error::Remote)?;
            match resp.status {
                200 => {
                    if let Some(cache) = &self.cache {
                        cache.put(op, key, &resp.body)?;
                    }
                    return Ok(Fetched::Body(resp.body));
                }
                404 => return Ok(Fetched::NotFound),
                429 | 503 if attempt < self.config.max_retries => {
                    thread::sleep(self.config.backoff_delay(attempt));
                    attempt += 1;
                }
                status => {
                    return Err(Error::Remote(format!(
                        "{} returned {status} after {attempt} retries",
                        request.url
                    )))
                }
            }
        }
    }

    fn fetch_json<B: for<'de> Deserialize<'de>>(&self, op: &str, id: &str, url: String) -> Result<B> {
        match self.fetch(op, id, url)? {
            Fetched::Body(body) => Ok(serde_json::from_str(&body)?),
            Fetched::NotFound => Err(Error::NotFound(format!("publication `{id}`"))),
        }
    }

    fn publication_url(&self, id: &str, suffix: &str) -> String {
        format!(
            "{}/publications/{}{suffix}",
            self.config.base_url.trim_end_matches('/'),
            encode_component(id)
        )
    }

    /// Looks up many ids with at most `max_in_flight` concurrent requests.
    /// Results come back in ascending id order.
    pub fn fetch_many<R, F>(&self, ids: &[String], f: F) -> Vec<(String, Result<R>)>
    where
        R: Send,
        F: Fn(&Self, &str) -> Result<R> + Sync,
    {
        let mut sorted: Vec<&String> = ids.iter().collect::<BTreeSet<_>>().into_iter().collect();
        sorted.sort();
        let mut out = Vec::with_capacity(sorted.len());
        for chunk in sorted.chunks(self.config.max_in_flight.max(1)) {
            let results: Vec<(String, Result<R>)> = thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|id| {
                        let f = &f;
                        s.spawn(move || ((*id).clone(), f(self, id)))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("lookup thread panicked"))
                    .collect()
            });
            out.extend(results);
        }
        out
    }

    pub fn search_page(&self, query: &SourceQuery, page: u32) -> Result<SearchPage> {
        let phrases = query.phrases.join("\u{1f}");
        let url = format!(
            "{}/search?kind={}&q={}&page={page}",
            self.config.base_url.trim_end_matches('/'),
            query.kind,
            encode_component(&phrases)
        );
        let mut hasher = Sha1::new();
        hasher.update(format!("{}|{phrases}|{page}", query.kind).as_bytes());
        let key: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        match self.fetch("search", &key, url)? {
            Fetched::Body(body) => Ok(serde_json::from_str(&body)?),
            Fetched::NotFound => Ok(SearchPage {
                ids: Vec::new(),
                next_page: None,
            }),
        }
    }
}

impl<T: Transport> CitationSource for RemoteSource<T> {
    fn resolves(&self, id: &str) -> Result<bool> {
        match self.citation_count(id) {
            Ok(_) => Ok(true),
            Err(Error::NotFound(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn get_references(&self, id: &str) -> Result<Links> {
        let body: IdsBody = self.fetch_json("references", id, self.publication_url(id, "/references"))?;
        Ok(Links {
            ids: body.ids,
            unresolved: body.unresolved,
        })
    }

    fn get_citers(&self, id: &str) -> Result<Vec<String>> {
        let body: IdsBody = self.fetch_json("citers", id, self.publication_url(id, "/citers"))?;
        Ok(body.ids)
    }

    fn citation_count(&self, id: &str) -> Result<CitationCount> {
        let body: CountBody = self.fetch_json("publication", id, self.publication_url(id, ""))?;
        Ok(match body.global_citation_count {
            Some(value) => CitationCount {
                value,
                snapshot_local: false,
            },
            None => CitationCount {
                value: body.snapshot_citers,
                snapshot_local: true,
            },
        })
    }

    fn search(&self, query: &SourceQuery, name: &str) -> Result<Dataset> {
        query.validate()?;
        let mut members = BTreeSet::new();
        let mut page = 0;
        loop {
            let result = self.search_page(query, page)?;
            members.extend(result.ids);
            match result.next_page {
                Some(next) if next > page => page = next,
                _ => break,
            }
        }
        Ok(Dataset::new(
            name,
            members,
            Provenance::Query {
                text: query.describe(),
            },
        ))
    }
}
