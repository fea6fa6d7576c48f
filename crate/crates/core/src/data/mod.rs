//! Training-data preparation: language filtering, scheduled multi-stream
//! sampling, sequence packing with loss masks and multi-turn joining.

pub mod langid;
pub mod multiturn;
pub mod pack;
pub mod sampler;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub use langid::{filter_corpus, Allowed, Detection, FilterOutcome, LanguageIdentifier, ProfileSet, SubprocessIdentifier};
pub use multiturn::{default_turns_distribution, join_multiturn, parse_turns_distribution};
pub use pack::{pack_documents, pack_hybrid, PackConfig, PackedSequence, Packer, TurnMarkers};
pub use sampler::{ExhaustionPolicy, Phase, Sampled, Sampler, SamplingSchedule};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    High,
    #[default]
    Standard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turn {
    pub prompt: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Pretrain { text: String },
    /// One or more prompt/response turns.
    Sft { turns: Vec<Turn> },
}

/// A corpus record. Serialized as one JSON object per line; single-turn
/// instruction records use flat `prompt`/`response` fields, conversations a
/// `turns` array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument", into = "RawDocument")]
pub struct Document {
    pub lang: Option<String>,
    pub quality: Quality,
    pub body: Body,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    #[default]
    Pretrain,
    Sft,
}

#[derive(Serialize, Deserialize)]
struct RawDocument {
    #[serde(default)]
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    turns: Option<Vec<Turn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default)]
    quality: Quality,
}

impl TryFrom<RawDocument> for Document {
    type Error = String;

    fn try_from(raw: RawDocument) -> std::result::Result<Self, String> {
        let body = match raw.kind {
            Kind::Pretrain => {
                if raw.prompt.is_some() || raw.response.is_some() || raw.turns.is_some() {
                    return Err("pretrain records take only `text`".into());
                }
                Body::Pretrain {
                    text: raw.text.ok_or("pretrain record without `text`")?,
                }
            }
            Kind::Sft => {
                if raw.text.is_some() {
                    return Err("sft records take `prompt`/`response` or `turns`, not `text`".into());
                }
                let turns = match (raw.prompt, raw.response, raw.turns) {
                    (Some(prompt), Some(response), None) => vec![Turn { prompt, response }],
                    (None, None, Some(turns)) => turns,
                    _ => return Err("sft record needs `prompt` and `response`, or `turns`".into()),
                };
                Body::Sft { turns }
            }
        };
        let doc = Document {
            lang: raw.lang,
            quality: raw.quality,
            body,
        };
        doc.validate().map_err(|e| e.to_string())?;
        Ok(doc)
    }
}

impl From<Document> for RawDocument {
    fn from(doc: Document) -> Self {
        let mut raw = RawDocument {
            kind: Kind::Pretrain,
            text: None,
            prompt: None,
            response: None,
            turns: None,
            lang: doc.lang,
            quality: doc.quality,
        };
        match doc.body {
            Body::Pretrain { text } => raw.text = Some(text),
            Body::Sft { mut turns } => {
                raw.kind = Kind::Sft;
                if turns.len() == 1 {
                    let t = turns.pop().expect("one turn");
                    raw.prompt = Some(t.prompt);
                    raw.response = Some(t.response);
                } else {
                    raw.turns = Some(turns);
                }
            }
        }
        raw
    }
}

impl Document {
    pub fn pretrain(text: impl Into<String>, lang: Option<&str>) -> Self {
        Self {
            lang: lang.map(str::to_owned),
            quality: Quality::Standard,
            body: Body::Pretrain { text: text.into() },
        }
    }

    pub fn sft(prompt: impl Into<String>, response: impl Into<String>, lang: Option<&str>) -> Self {
        Self {
            lang: lang.map(str::to_owned),
            quality: Quality::Standard,
            body: Body::Sft {
                turns: vec![Turn {
                    prompt: prompt.into(),
                    response: response.into(),
                }],
            },
        }
    }

    pub fn with_quality(mut self, quality: Quality) -> Self {
        self.quality = quality;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.body {
            Body::Pretrain { text } if text.is_empty() => Err(Error::invalid("pretrain document has empty text")),
            Body::Sft { turns } if turns.is_empty() => Err(Error::invalid("sft document has no turns")),
            Body::Sft { turns } if turns.iter().any(|t| t.prompt.is_empty() || t.response.is_empty()) => {
                Err(Error::invalid("sft turn has an empty prompt or response"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_sft(&self) -> bool {
        matches!(self.body, Body::Sft { .. })
    }

    /// Every text field, in reading order.
    pub fn texts(&self) -> Vec<&str> {
        match &self.body {
            Body::Pretrain { text } => vec![text],
            Body::Sft { turns } => turns
                .iter()
                .flat_map(|t| [t.prompt.as_str(), t.response.as_str()])
                .collect(),
        }
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    jsonl::read(path)
}

pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    jsonl::write(path, docs)
}
