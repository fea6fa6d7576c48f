//! Language identification and corpus filtering.
//!
//! The built-in identifier ranks character n-grams (words padded with a
//! space on both sides) and compares rank orders with the out-of-place
//! distance. External classifiers plug in through [`LanguageIdentifier`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Document;
use crate::error::{Error, Result};
use crate::subprocess::LineProcess;

pub const UNKNOWN_LANG: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub lang: String,
    pub confidence: f64,
}

impl Detection {
    pub fn unknown() -> Self {
        Self {
            lang: UNKNOWN_LANG.to_owned(),
            confidence: 0.0,
        }
    }

    pub fn is_unknown(&self) -> bool {
        self.lang == UNKNOWN_LANG
    }
}

pub trait LanguageIdentifier {
    fn identify(&self, text: &str) -> Result<Detection>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileConfig {
    pub max_n: usize,
    pub top_k: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { max_n: 3, top_k: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Profile {
    ranks: HashMap<String, usize>,
}

fn ranked_ngrams(text: &str, cfg: ProfileConfig) -> Vec<String> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for word in text.split_whitespace() {
        let padded: Vec<char> = std::iter::once(' ').chain(word.chars()).chain(std::iter::once(' ')).collect();
        for n in 1..=cfg.max_n {
            for w in padded.windows(n) {
                if n == 1 && w[0] == ' ' {
                    continue;
                }
                *counts.entry(w.iter().collect()).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cfg.top_k);
    ranked.into_iter().map(|(g, _)| g).collect()
}

/// Per-language n-gram rank profiles trained from seed text.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    profiles: BTreeMap<String, Profile>,
    cfg: ProfileConfig,
}

impl ProfileSet {
    pub fn train<K, V>(seeds: impl IntoIterator<Item = (K, V)>, cfg: ProfileConfig) -> Result<Self>
    where
        K: Into<String>,
        V: AsRef<str>,
    {
        if cfg.max_n == 0 || cfg.top_k == 0 {
            return Err(Error::invalid("n-gram order and profile size must be positive"));
        }
        let mut profiles = BTreeMap::new();
        for (lang, text) in seeds {
            let ranks = ranked_ngrams(text.as_ref(), cfg)
                .into_iter()
                .enumerate()
                .map(|(r, g)| (g, r))
                .collect();
            profiles.insert(lang.into(), Profile { ranks });
        }
        if profiles.is_empty() {
            return Err(Error::invalid("no language profiles were trained"));
        }
        Ok(Self { profiles, cfg })
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }
}

impl LanguageIdentifier for ProfileSet {
    /// Nearest profile by out-of-place distance. Confidence is one minus the
    /// distance over its maximum; ties go to the smallest language code.
    fn identify(&self, text: &str) -> Result<Detection> {
        let doc = ranked_ngrams(text, self.cfg);
        if doc.is_empty() {
            return Ok(Detection::unknown());
        }
        let penalty = self.cfg.top_k;
        let max_distance = (doc.len() * penalty) as f64;
        let mut best: Option<(&str, usize)> = None;
        for (lang, profile) in &self.profiles {
            let d: usize = doc
                .iter()
                .enumerate()
                .map(|(r, g)| profile.ranks.get(g).map_or(penalty, |&pr| pr.abs_diff(r)))
                .sum();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((lang, d));
            }
        }
        let (lang, d) = best.expect("at least one profile");
        Ok(Detection {
            lang: lang.to_owned(),
            confidence: 1.0 - d as f64 / max_distance,
        })
    }
}

/// Delegates to an external classifier speaking one JSON object per line:
/// `{"text":…}` in, `{"lang":…,"confidence":…}` out.
pub struct SubprocessIdentifier {
    process: Mutex<LineProcess>,
}

impl SubprocessIdentifier {
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let process = LineProcess::spawn(command, timeout).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Self {
            process: Mutex::new(process),
        })
    }
}

impl LanguageIdentifier for SubprocessIdentifier {
    fn identify(&self, text: &str) -> Result<Detection> {
        #[derive(Serialize)]
        struct Query<'a> {
            text: &'a str,
        }
        let line = serde_json::to_string(&Query { text })?;
        let reply = self
            .process
            .lock()
            .expect("identifier lock")
            .request(&line)
            .map_err(|e| Error::invalid(format!("language identifier: {e}")))?;
        let det: Detection = serde_json::from_str(&reply)
            .map_err(|e| Error::invalid(format!("language identifier sent {reply:?}: {e}")))?;
        if !(0.0..=1.0).contains(&det.confidence) {
            return Err(Error::invalid(format!("language identifier confidence out of range in {reply:?}")));
        }
        Ok(det)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Allowed {
    All,
    Only(BTreeSet<String>),
}

impl Allowed {
    pub fn permits(&self, lang: &str) -> bool {
        match self {
            Allowed::All => true,
            Allowed::Only(set) => set.contains(lang),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    NotAllowed,
    LowConfidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<Document>,
    pub discarded: BTreeMap<DiscardReason, usize>,
}

/// Keeps documents whose detected language is allowed with confidence at
/// least `threshold`, in input order.
pub fn filter_corpus(
    corpus: Vec<Document>,
    identifier: &dyn LanguageIdentifier,
    allowed: &Allowed,
    threshold: f64,
) -> Result<FilterOutcome> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold {threshold} is outside [0, 1]")));
    }
    let mut kept = Vec::with_capacity(corpus.len());
    let mut discarded = BTreeMap::new();
    for doc in corpus {
        let det = identifier.identify(&doc.texts().join("\n"))?;
        let reason = if !allowed.permits(&det.lang) {
            Some(DiscardReason::NotAllowed)
        } else if det.confidence < threshold {
            Some(DiscardReason::LowConfidence)
        } else {
            None
        };
        match reason {
            Some(r) => *discarded.entry(r).or_insert(0) += 1,
            None => kept.push(doc),
        }
    }
    Ok(FilterOutcome { kept, discarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THA: &str = "ภาษาไทยเป็นภาษาที่มีวรรณยุกต์ คนไทยพูดภาษาไทยทุกวัน เด็กไปโรงเรียนทุกวัน";
    const VIE: &str = "tiếng việt là ngôn ngữ có thanh điệu người việt nói tiếng việt mỗi ngày";
    const IND: &str = "bahasa indonesia adalah bahasa resmi orang indonesia berbicara setiap hari";

    fn profiles() -> ProfileSet {
        ProfileSet::train([("tha", THA), ("vie", VIE), ("ind", IND)], ProfileConfig::default()).unwrap()
    }

    #[test]
    fn seed_text_matches_its_own_profile() {
        let p = profiles();
        assert_eq!(p.identify("คนไทยพูดภาษาไทย").unwrap().lang, "tha");
        assert_eq!(p.identify("người việt nói tiếng việt").unwrap().lang, "vie");
        assert_eq!(p.identify("orang indonesia berbicara").unwrap().lang, "ind");
        let d = p.identify(VIE).unwrap();
        assert!(d.confidence > 0.0 && d.confidence <= 1.0);
    }

    #[test]
    fn empty_text_is_unknown() {
        let p = profiles();
        assert_eq!(p.identify("").unwrap(), Detection::unknown());
        assert_eq!(p.identify("  \n\t").unwrap(), Detection::unknown());
    }

    #[test]
    fn identical_profiles_tie_break_lexicographically() {
        let p = ProfileSet::train([("zzz", VIE), ("aaa", VIE)], ProfileConfig::default()).unwrap();
        assert_eq!(p.identify("tiếng việt").unwrap().lang, "aaa");
    }

    #[test]
    fn training_needs_profiles() {
        let none: Vec<(String, String)> = vec![];
        assert!(ProfileSet::train(none, ProfileConfig::default()).is_err());
    }

    fn mixed() -> Vec<Document> {
        vec![
            Document::pretrain("คนไทยพูดภาษาไทย", None),
            Document::pretrain("người việt nói tiếng việt", None),
            Document::sft("orang indonesia", "berbicara setiap hari", None),
            Document::pretrain("เด็กไปโรงเรียน", None),
        ]
    }

    #[test]
    fn filter_identity_and_empty_allow_list() {
        let p = profiles();
        let out = filter_corpus(mixed(), &p, &Allowed::All, 0.0).unwrap();
        assert_eq!(out.kept, mixed());
        let out = filter_corpus(mixed(), &p, &Allowed::Only(BTreeSet::new()), 0.0).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.discarded[&DiscardReason::NotAllowed], 4);
        assert!(filter_corpus(mixed(), &p, &Allowed::All, 1.5).is_err());
    }

    #[test]
    fn filter_keeps_exactly_the_allowed_detections() {
        let p = profiles();
        let allowed = Allowed::Only(["tha".to_owned()].into());
        let out = filter_corpus(mixed(), &p, &allowed, 0.0).unwrap();
        let expected: Vec<Document> = mixed()
            .into_iter()
            .filter(|d| p.identify(&d.texts().join("\n")).unwrap().lang == "tha")
            .collect();
        assert_eq!(out.kept, expected);
        assert_eq!(out.kept.len(), 2);
    }

    #[test]
    fn threshold_discards_low_confidence() {
        let p = profiles();
        let out = filter_corpus(mixed(), &p, &Allowed::All, 1.0).unwrap();
        assert!(out.kept.len() < 4);
        assert!(out.discarded[&DiscardReason::LowConfidence] > 0);
    }

    #[test]
    fn subprocess_identifier_round_trip() {
        let cmd = r#"while IFS= read -r line; do echo '{"lang":"tha","confidence":0.9}'; done"#;
        let id = SubprocessIdentifier::spawn(cmd, Duration::from_secs(5)).unwrap();
        let d = id.identify("anything").unwrap();
        assert_eq!(d.lang, "tha");
        assert_eq!(d.confidence, 0.9);

        let bad = SubprocessIdentifier::spawn("while read -r l; do echo nope; done", Duration::from_secs(5)).unwrap();
        assert!(bad.identify("x").is_err());
    }
}
