//! File-to-file workflows shared by the command line and foreign bindings,
//! so both produce identical artifacts for identical inputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{read_corpus, Document};
use crate::error::{Error, Result};
use crate::extend::vocab_extend;
use crate::metrics::{compression_ratio, CompressionReport, ParallelCorpus};
use crate::quality::FilterConfig;
use crate::tokenizer::{load_vocab, save_vocab};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendRequest {
    pub base: PathBuf,
    pub target: PathBuf,
    pub corpus: PathBuf,
    pub min_freq: u64,
    pub out: PathBuf,
    /// Defaults to [`report_path_for`] of `out`.
    pub report: Option<PathBuf>,
    /// Defaults to [`frequencies_path_for`] of `out`.
    pub frequencies: Option<PathBuf>,
    /// Restrict the corpus to documents tagged with this language.
    pub lang: Option<String>,
    pub filter: FilterConfig,
}

impl ExtendRequest {
    pub fn new(base: impl Into<PathBuf>, target: impl Into<PathBuf>, corpus: impl Into<PathBuf>, min_freq: u64, out: impl Into<PathBuf>) -> Self {
        Self {
            base: base.into(),
            target: target.into(),
            corpus: corpus.into(),
            min_freq,
            out: out.into(),
            report: None,
            frequencies: None,
            lang: None,
            filter: FilterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtendSummary {
    pub candidates: usize,
    pub kept: usize,
    pub pruned: usize,
    pub rejected: usize,
    pub vocab_size: usize,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

/// `dir/v.json` → `dir/v.report.json`.
pub fn report_path_for(out: &Path) -> PathBuf {
    sibling(out, ".report.json")
}

/// `dir/v.json` → `dir/v.freq.tsv`.
pub fn frequencies_path_for(out: &Path) -> PathBuf {
    sibling(out, ".freq.tsv")
}

/// Every text field of the selected documents, in corpus order. Each field
/// is treated as a separate document during extension.
pub fn extension_texts<'a>(docs: &'a [Document], lang: Option<&str>) -> Vec<&'a str> {
    docs.iter()
        .filter(|d| lang.is_none_or(|l| d.lang.as_deref() == Some(l)))
        .flat_map(Document::texts)
        .collect()
}

/// Loads both vocabularies and the corpus, extends, and writes the final
/// vocabulary, the JSON report and the frequency table.
pub fn extend_files(req: &ExtendRequest) -> Result<ExtendSummary> {
    let base = load_vocab(&req.base)?;
    let target = load_vocab(&req.target)?;
    let docs = read_corpus(&req.corpus)?;
    let texts = extension_texts(&docs, req.lang.as_deref());
    let mut report = vocab_extend(&base, &target, &texts, req.min_freq)?;
    if req.filter != FilterConfig::default() {
        report = report.apply_quality_filter(&req.filter, &base)?;
    }
    save_vocab(&report.final_vocab, &req.out)?;
    let report_path = req.report.clone().unwrap_or_else(|| report_path_for(&req.out));
    report.write_json(&report_path)?;
    let freq_path = req.frequencies.clone().unwrap_or_else(|| frequencies_path_for(&req.out));
    report.write_frequencies(&freq_path)?;
    Ok(ExtendSummary {
        candidates: report.candidates.len(),
        kept: report.kept.len(),
        pruned: report.pruned.len(),
        rejected: report.rejected.len(),
        vocab_size: report.final_vocab.len(),
    })
}

/// Compression reports for each named subject vocabulary against one
/// baseline, keyed by name.
pub fn ratio_files(subjects: &[(String, PathBuf)], baseline: &Path, parallel: &Path) -> Result<BTreeMap<String, CompressionReport>> {
    if subjects.is_empty() {
        return Err(Error::invalid("at least one subject vocabulary is required"));
    }
    let corpus = ParallelCorpus::load(parallel)?;
    let baseline = load_vocab(baseline)?;
    let mut out = BTreeMap::new();
    for (name, path) in subjects {
        let subject = load_vocab(path)?;
        if out.insert(name.clone(), compression_ratio(&subject, &baseline, &corpus)?).is_some() {
            return Err(Error::invalid(format!("subject name {name:?} given twice")));
        }
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(report_path_for(Path::new("out/v.json")), Path::new("out/v.report.json"));
        assert_eq!(frequencies_path_for(Path::new("v")), Path::new("v.freq.tsv"));
    }

    #[test]
    fn language_selection() {
        let docs = vec![
            Document::pretrain("a", Some("tha")),
            Document::sft("q", "r", Some("vie")),
            Document::pretrain("b", None),
        ];
        assert_eq!(extension_texts(&docs, None), ["a", "q", "r", "b"]);
        assert_eq!(extension_texts(&docs, Some("vie")), ["q", "r"]);
    }
}
