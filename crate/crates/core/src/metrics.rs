//! Encoding-efficiency measurements: per-language compression ratios against
//! an English baseline tokenizer, and plain corpus token statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Document;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::tokenizer::Vocabulary;

/// One line of a parallel corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelPair {
    pub lang: String,
    pub text: String,
    pub english: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<ParallelPair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<ParallelPair>) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            if p.text.is_empty() || p.english.is_empty() {
                return Err(Error::invalid(format!("parallel pair {i} has an empty side")));
            }
            if p.lang.trim().is_empty() {
                return Err(Error::invalid(format!("parallel pair {i} has no language code")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let pairs: Vec<ParallelPair> = jsonl::read(path)?;
        if pairs.is_empty() {
            return Err(Error::invalid(format!("{}: parallel corpus is empty", path.display())));
        }
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[ParallelPair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageRatio {
    /// Mean of per-pair ratios.
    pub mean_ratio: f64,
    /// Total subject tokens over total baseline tokens.
    pub total_ratio: f64,
    pub lang_tokens: u64,
    pub baseline_tokens: u64,
    pub pair_count: u64,
    /// Pairs whose English side encoded to zero tokens.
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CompressionReport {
    pub per_language: BTreeMap<String, LanguageRatio>,
    /// Languages for which every pair was skipped.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub errors: BTreeMap<String, String>,
}

/// Ratio of subject-tokenized length to baseline-tokenized English length,
/// averaged per language.
pub fn compression_ratio(
    subject: &Vocabulary,
    baseline: &Vocabulary,
    corpus: &ParallelCorpus,
) -> Result<CompressionReport> {
    if corpus.is_empty() {
        return Err(Error::invalid("parallel corpus is empty"));
    }
    #[derive(Default)]
    struct Acc {
        ratio_sum: f64,
        lang_tokens: u64,
        baseline_tokens: u64,
        pairs: u64,
        skipped: u64,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    for pair in corpus.pairs() {
        let entry = acc.entry(pair.lang.as_str()).or_default();
        let base_len = baseline.tokenize(&pair.english)?.len() as u64;
        if base_len == 0 {
            entry.skipped += 1;
            continue;
        }
        let lang_len = subject.tokenize(&pair.text)?.len() as u64;
        entry.ratio_sum += lang_len as f64 / base_len as f64;
        entry.lang_tokens += lang_len;
        entry.baseline_tokens += base_len;
        entry.pairs += 1;
    }
    let mut report = CompressionReport::default();
    for (lang, a) in acc {
        if a.pairs == 0 {
            report.errors.insert(
                lang.to_owned(),
                format!("all {} pairs had an empty baseline encoding", a.skipped),
            );
            continue;
        }
        report.per_language.insert(
            lang.to_owned(),
            LanguageRatio {
                mean_ratio: a.ratio_sum / a.pairs as f64,
                total_ratio: a.lang_tokens as f64 / a.baseline_tokens as f64,
                lang_tokens: a.lang_tokens,
                baseline_tokens: a.baseline_tokens,
                pair_count: a.pairs,
                skipped: a.skipped,
            },
        );
    }
    Ok(report)
}

/// Renders reports side by side: one row per language, one column per
/// named tokenizer, two decimals.
pub fn render_table(columns: &[(&str, &CompressionReport)]) -> String {
    let mut langs: Vec<&str> = columns
        .iter()
        .flat_map(|(_, r)| r.per_language.keys().chain(r.errors.keys()).map(String::as_str))
        .collect();
    langs.sort_unstable();
    langs.dedup();
    let lang_w = langs.iter().map(|l| l.chars().count()).max().unwrap_or(0).max("Language".len());
    let widths: Vec<usize> = columns.iter().map(|(n, _)| n.chars().count().max(6)).collect();

    let mut out = String::new();
    let _ = write!(out, "{:<lang_w$}", "Language");
    for ((name, _), w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for lang in langs {
        let _ = write!(out, "{lang:<lang_w$}");
        for ((_, report), w) in columns.iter().zip(&widths) {
            let cell = match report.per_language.get(lang) {
                Some(r) => format!("{:.2}", r.mean_ratio),
                None => "-".to_owned(),
            };
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageStats {
    pub docs: u64,
    pub tokens: u64,
    pub chars: u64,
    pub tokens_per_char: f64,
    pub byte_fallback_fraction: f64,
}

/// Exact per-language token counts. Documents without a language tag are
/// reported under `"unknown"`.
pub fn corpus_token_stats(vocab: &Vocabulary, corpus: &[Document]) -> Result<BTreeMap<String, LanguageStats>> {
    let mut acc: BTreeMap<String, (u64, u64, u64, u64)> = BTreeMap::new();
    for doc in corpus {
        let lang = doc.lang.clone().unwrap_or_else(|| "unknown".to_owned());
        let entry = acc.entry(lang).or_default();
        entry.0 += 1;
        for text in doc.texts() {
            let seq = vocab.tokenize(text)?;
            entry.1 += seq.len() as u64;
            entry.2 += text.chars().count() as u64;
            entry.3 += seq.ids().iter().filter(|&&id| vocab.is_byte_fallback(id)).count() as u64;
        }
    }
    Ok(acc
        .into_iter()
        .map(|(lang, (docs, tokens, chars, fallback))| {
            let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
            (
                lang,
                LanguageStats {
                    docs,
                    tokens,
                    chars,
                    tokens_per_char: ratio(tokens, chars),
                    byte_fallback_fraction: ratio(fallback, tokens),
                },
            )
        })
        .collect())
}
