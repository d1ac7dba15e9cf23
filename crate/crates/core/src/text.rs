//! Title normalization, tokenization and candidate phrase extraction.

use std::collections::HashSet;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

/// Version tag of the bundled stopword list.
pub const STOPWORDS_VERSION: &str = "v1";

const STOPWORDS_RAW: &str = include_str!("../data/stopwords-v1.txt");

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_RAW
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopword_set().contains(token)
}

/// Lowercase, NFC, punctuation removed, whitespace collapsed.
pub fn normalize_title(title: &str) -> String {
    let cleaned: String = title
        .nfc()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased alphanumeric tokens. Apostrophes are dropped so that
/// possessives stay in one token.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered: String = text
        .nfc()
        .flat_map(char::to_lowercase)
        .filter(|c| *c != '\'' && *c != '\u{2019}')
        .collect();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Maximal runs of consecutive non-stopword tokens. Purely numeric tokens
/// also break a run.
pub fn content_runs(text: &str) -> Vec<Vec<String>> {
    let mut runs = Vec::new();
    let mut current = Vec::new();
    for tok in tokenize(text) {
        if is_stopword(&tok) || tok.chars().all(|c| c.is_ascii_digit()) {
            if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        } else {
            current.push(tok);
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Distinct contiguous phrases of `min_len..=max_len` tokens drawn from
/// content runs of `text`.
pub fn phrases(text: &str, min_len: usize, max_len: usize) -> HashSet<String> {
    let mut out = HashSet::new();
    for run in content_runs(text) {
        for len in min_len..=max_len.min(run.len()) {
            for window in run.windows(len) {
                out.insert(window.join(" "));
            }
        }
    }
    out
}
