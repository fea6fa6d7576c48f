use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Vocabulary, DEFAULT_MARKER};
use crate::error::{Error, Result};

pub const VOCAB_FILE_VERSION: u64 = 1;

/// On-disk layout. Token order defines ids.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocabFile {
    version: u64,
    base_size: usize,
    marker: String,
    byte_fallback: bool,
    specials: Vec<String>,
    tokens: Vec<String>,
}

pub fn save_vocab(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, vocab_to_json(vocab)?).map_err(|e| Error::io(path, e))
}

pub(crate) fn vocab_to_json(vocab: &Vocabulary) -> Result<String> {
    let file = VocabFile {
        version: VOCAB_FILE_VERSION,
        base_size: vocab.base_size(),
        marker: vocab.marker().to_string(),
        byte_fallback: vocab.byte_fallback(),
        specials: vocab.specials(),
        tokens: vocab.tokens().iter().map(|t| t.text().to_owned()).collect(),
    };
    let mut out = serde_json::to_string_pretty(&file)?;
    out.push('\n');
    Ok(out)
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    vocab_from_json(&text)
}

pub(crate) fn vocab_from_json(text: &str) -> Result<Vocabulary> {
    // Check the version before the full schema so old files fail clearly.
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::VocabFormat(e.to_string()))?;
    match raw.get("version").and_then(serde_json::Value::as_u64) {
        Some(VOCAB_FILE_VERSION) => {}
        Some(found) => {
            return Err(Error::VersionMismatch {
                found,
                expected: VOCAB_FILE_VERSION,
            })
        }
        None => return Err(Error::VocabFormat("missing or non-integer field `version`".into())),
    }
    let file: VocabFile =
        serde_json::from_value(raw).map_err(|e| Error::VocabFormat(e.to_string()))?;
    let mut chars = file.marker.chars();
    let marker = match (chars.next(), chars.next()) {
        (Some(c), None) => c,
        _ => {
            return Err(Error::VocabFormat(format!(
                "marker must be a single character, got {:?}",
                file.marker
            )))
        }
    };
    Vocabulary::from_parts(file.tokens, file.base_size, marker, file.byte_fallback, &file.specials)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportFormat {
    /// One token per line.
    PlainList,
    /// `token<TAB>score` per line; scores are ignored.
    TsvWithScores,
}

impl FromStr for ImportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain_list" | "plain" => Ok(Self::PlainList),
            "tsv_with_scores" | "tsv" => Ok(Self::TsvWithScores),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

/// Reads an exported token list (for example a sentence-piece vocabulary
/// dump) into a vocabulary with the same surface forms in file order. The
/// result uses the default marker and has byte fallback disabled.
pub fn import_external_vocab(path: impl AsRef<Path>, format: ImportFormat) -> Result<Vocabulary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    for line in text.lines() {
        let surface = match format {
            ImportFormat::PlainList => line,
            ImportFormat::TsvWithScores => line.split('\t').next().unwrap_or_default(),
        };
        if !surface.is_empty() {
            tokens.push(surface);
        }
    }
    if tokens.is_empty() {
        return Err(Error::EmptyVocabulary(path.display().to_string()));
    }
    Vocabulary::build(&tokens, DEFAULT_MARKER, false, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vocabulary {
        Vocabulary::build(&["▁a", "b", "<sep>"], DEFAULT_MARKER, true, &["<sep>", "<pad>"])
            .unwrap()
            .extended(["▁ab"])
            .unwrap()
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        let v = sample();
        save_vocab(&v, &path).unwrap();
        let back = load_vocab(&path).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.base_size(), v.base_size());
        assert_eq!(back.specials(), v.specials());
        assert_eq!(vocab_to_json(&back).unwrap(), fs::read_to_string(&path).unwrap());
    }

    #[test]
    fn load_rejects_duplicates() {
        let json = r#"{"version":1,"base_size":2,"marker":"▁","byte_fallback":false,"specials":[],"tokens":["a","a"]}"#;
        assert!(matches!(vocab_from_json(json), Err(Error::DuplicateToken(_))));
    }

    #[test]
    fn load_names_missing_field() {
        let json = r#"{"version":1,"marker":"▁","byte_fallback":false,"specials":[],"tokens":["a"]}"#;
        let err = vocab_from_json(json).unwrap_err().to_string();
        assert!(err.contains("base_size"), "{err}");
    }

    #[test]
    fn load_rejects_other_versions() {
        let json = r#"{"version":2,"base_size":1,"marker":"▁","byte_fallback":false,"specials":[],"tokens":["a"]}"#;
        assert!(matches!(
            vocab_from_json(json),
            Err(Error::VersionMismatch { found: 2, expected: 1 })
        ));
        assert!(matches!(vocab_from_json("not json"), Err(Error::VocabFormat(_))));
    }

    #[test]
    fn load_requires_complete_byte_table() {
        let json = r#"{"version":1,"base_size":1,"marker":"▁","byte_fallback":true,"specials":[],"tokens":["a"]}"#;
        assert!(matches!(vocab_from_json(json), Err(Error::VocabFormat(_))));
    }

    #[test]
    fn import_plain_and_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("plain.txt");
        fs::write(&plain, "a\nb\n▁c\nd\ne\n").unwrap();
        let v = import_external_vocab(&plain, ImportFormat::PlainList).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v.id("▁c"), Some(2));

        let tsv = dir.path().join("scores.tsv");
        fs::write(&tsv, "tok\t-3.2\n▁มาก\t-7.5\n").unwrap();
        let v = import_external_vocab(&tsv, ImportFormat::TsvWithScores).unwrap();
        let texts: Vec<_> = v.tokens().iter().map(|t| t.text()).collect();
        assert_eq!(texts, ["tok", "▁มาก"]);
    }

    #[test]
    fn import_rejects_empty_and_unknown_format() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.txt");
        fs::write(&empty, "").unwrap();
        assert!(matches!(
            import_external_vocab(&empty, ImportFormat::PlainList),
            Err(Error::EmptyVocabulary(_))
        ));
        assert!(matches!("bpe".parse::<ImportFormat>(), Err(Error::UnknownFormat(_))));
    }
}
