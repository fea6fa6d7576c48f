//! Vocabulary extension by exhaustive merging against a target vocabulary.
//!
//! Each document is tokenized with the working vocabulary, then adjacent
//! pieces are merged left-to-right whenever their concatenation exists in the
//! target vocabulary. Merged pieces that the working vocabulary does not yet
//! hold become extension candidates. After the corpus is processed, rare
//! candidates are pruned and the survivors are appended to the base.

use std::io::Write;
use std::path::Path;

use indexmap::{IndexMap, IndexSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quality::{FilterConfig, Rejection};
use crate::tokenizer::Vocabulary;

/// Result of [`exhaustive_merge`] on one token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MergeOutcome {
    pub merged: Vec<String>,
    /// Merged pieces absent from the working vocabulary, in discovery order.
    pub new_tokens: IndexSet<String>,
    pub merge_count: usize,
    /// Product of every merge, in merge order (repeats included).
    pub products: Vec<String>,
}

/// Merges adjacent pieces until no consecutive pair concatenates to a
/// `target` token.
///
/// Semantically each merge restarts the scan from the leftmost pair. Pairs to
/// the left of a merge are untouched by it and were already known to be
/// unmergeable, so the scan resumes one position before the merge instead.
pub fn exhaustive_merge(current: &Vocabulary, target: &Vocabulary, seq: &[String]) -> MergeOutcome {
    let mut merged: Vec<String> = seq.to_vec();
    let mut new_tokens = IndexSet::new();
    let mut products = Vec::new();
    let mut buf = String::new();
    let mut i = 0usize;
    while i + 1 < merged.len() {
        buf.clear();
        buf.push_str(&merged[i]);
        buf.push_str(&merged[i + 1]);
        if !target.contains(&buf) {
            i += 1;
            continue;
        }
        merged[i].clone_from(&buf);
        merged.remove(i + 1);
        if !current.contains(&buf) && !new_tokens.contains(buf.as_str()) {
            new_tokens.insert(buf.clone());
        }
        products.push(buf.clone());
        i = i.saturating_sub(1);
    }
    MergeOutcome {
        merge_count: seq.len() - merged.len(),
        merged,
        new_tokens,
        products,
    }
}

/// Candidate occurrence counts and the pruning threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    counts: IndexMap<String, u64>,
    min_freq: u64,
}

impl FrequencyTable {
    pub fn new(min_freq: u64) -> Result<Self> {
        if min_freq == 0 {
            return Err(Error::invalid("min_freq must be at least 1"));
        }
        Ok(Self {
            counts: IndexMap::new(),
            min_freq,
        })
    }

    pub fn min_freq(&self) -> u64 {
        self.min_freq
    }

    pub fn get(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    pub fn add(&mut self, token: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.to_owned()).or_insert(0) += n;
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Rows sorted by descending count, then token text.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }

    /// `token<TAB>count` lines in [`sorted`](Self::sorted) order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (token, count) in self.sorted() {
            out.push_str(token);
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }
}

/// Splits `candidates` into those meeting `min_freq` and those below it.
pub fn prune_candidates<'a, I>(
    candidates: I,
    freq: &FrequencyTable,
    min_freq: u64,
) -> Result<(Vec<String>, Vec<String>)>
where
    I: IntoIterator<Item = &'a String>,
{
    let mut kept = Vec::new();
    let mut pruned = Vec::new();
    for c in candidates {
        let f = freq.get(c).ok_or_else(|| Error::MissingFrequency(c.clone()))?;
        if f >= min_freq {
            kept.push(c.clone());
        } else {
            pruned.push(c.clone());
        }
    }
    Ok((kept, pruned))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub min_freq: u64,
    /// Every candidate in first-discovery order.
    pub candidates: Vec<String>,
    pub kept: Vec<String>,
    pub pruned: Vec<String>,
    /// Candidates removed by the quality filter, with the failing rule.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<Rejection>,
    pub new_per_doc: Vec<Vec<String>>,
    pub merges_per_doc: Vec<usize>,
    pub frequencies: FrequencyTable,
    #[serde(skip)]
    pub final_vocab: Vocabulary,
}

impl ExtensionReport {
    /// Drops kept tokens that fail `rules` and rebuilds the final vocabulary.
    pub fn apply_quality_filter(mut self, rules: &FilterConfig, base: &Vocabulary) -> Result<Self> {
        let (kept, rejected) = crate::quality::quality_filter(&self.kept, rules, base.marker());
        self.final_vocab = base.extended(&kept)?;
        self.kept = kept;
        self.rejected = rejected;
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn write_frequencies(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.frequencies.to_tsv().as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Extends `base` with pieces from `target` discovered on `corpus`.
///
/// Documents are processed in order; each is tokenized with the working
/// vocabulary, which already includes candidates found in earlier documents.
/// A candidate's frequency counts every instance of it that exists while its
/// document is processed: pieces produced directly by tokenization plus every
/// merge that produces it.
pub fn vocab_extend<S: AsRef<str>>(
    base: &Vocabulary,
    target: &Vocabulary,
    corpus: &[S],
    min_freq: u64,
) -> Result<ExtensionReport> {
    if base.marker() != target.marker() {
        return Err(Error::MarkerMismatch {
            base: base.marker(),
            target: target.marker(),
        });
    }
    let mut freq = FrequencyTable::new(min_freq)?;
    let mut working = base.clone();
    let mut candidates: IndexSet<String> = IndexSet::new();
    let mut new_per_doc = Vec::with_capacity(corpus.len());
    let mut merges_per_doc = Vec::with_capacity(corpus.len());

    for doc in corpus {
        let pieces = working.tokenize_to_pieces(doc.as_ref())?;
        let outcome = exhaustive_merge(&working, target, &pieces);
        for t in &outcome.new_tokens {
            working.push_extension(t)?;
            candidates.insert(t.clone());
        }
        for piece in pieces.iter().chain(&outcome.products) {
            if candidates.contains(piece.as_str()) {
                freq.add(piece, 1);
            }
        }
        new_per_doc.push(outcome.new_tokens.into_iter().collect());
        merges_per_doc.push(outcome.merge_count);
    }

    let (kept, pruned) = prune_candidates(&candidates, &freq, min_freq)?;
    let final_vocab = base.extended(&kept)?;
    Ok(ExtensionReport {
        min_freq,
        candidates: candidates.into_iter().collect(),
        kept,
        pruned,
        rejected: Vec::new(),
        new_per_doc,
        merges_per_doc,
        frequencies: freq,
        final_vocab,
    })
}
