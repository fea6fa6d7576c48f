//! Synthetic agglutinative-script corpus: words are runs of Thai syllables
//! written without spaces, paired with space-separated English glosses. The
//! base vocabulary only holds single Thai characters, so unextended Thai
//! text costs one token per character; the target vocabulary holds every
//! word and its character prefixes, so extension recovers one token per word.
//! Expected ratios are computed with the oracles in the parent module.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use seatok::data::{write_corpus, Document};
use seatok::metrics::ParallelPair;
use seatok::tokenizer::save_vocab;
use seatok::{jsonl, Vocabulary};

use super::{oracle_mean_ratio, oracle_vocab_extend, MARKER};

pub const SEED: u64 = 20_240_917;
pub const MIN_FREQ: u64 = 2;
pub const SPECIALS: [&str; 2] = ["<pad>", "<sep>"];

const CONSONANTS: &str = "กขคงจฉชซดตถทนบปผพฟมยรลวสหอฮ";
const VOWELS: &str = "าิีุูเแโ";
const FINALS: &str = "กงนมย";
const ENGLISH: &[&str] = &[
    "river", "house", "market", "rice", "water", "teacher", "school", "road", "mother", "father", "child", "friend",
    "morning", "evening", "city", "village", "boat", "temple", "garden", "forest", "rain", "sun", "book", "letter",
    "kitchen", "doctor", "farmer", "bridge", "island", "mountain", "window", "door", "table", "chair", "train",
    "station", "festival", "music", "dance", "story",
];
const FUNCTION_WORDS: &[&str] = &["the", "a", "to", "of", "in", "and", "with", "near"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub min_freq: u64,
    pub mean_ratio_before: f64,
    pub mean_ratio_after: f64,
    pub extension_tokens: usize,
    pub final_vocab_size: usize,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub base_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub corpus: Vec<String>,
    pub parallel: Vec<ParallelPair>,
    pub expected: Expected,
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn syllable(rng: &mut ChaCha8Rng) -> String {
    let (c, v, f) = (chars(CONSONANTS), chars(VOWELS), chars(FINALS));
    let mut s = String::new();
    let vowel = *v.choose(rng).unwrap();
    let lead = matches!(vowel, 'เ' | 'แ' | 'โ');
    if lead {
        s.push(vowel);
    }
    s.push(*c.choose(rng).unwrap());
    if !lead {
        s.push(vowel);
    }
    if rng.gen_bool(0.4) {
        s.push(*f.choose(rng).unwrap());
    }
    s
}

/// Prefix-free lexicon, so greedy matching over concatenated words never
/// swallows the start of the next word.
fn lexicon(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(n);
    while words.len() < n {
        let w: String = (0..rng.gen_range(2..=3)).map(|_| syllable(rng)).collect();
        if words.iter().all(|o| !o.starts_with(&w) && !w.starts_with(o.as_str())) {
            words.push(w);
        }
    }
    words
}

fn sentence(rng: &mut ChaCha8Rng, words: &[String]) -> (String, String) {
    let mut thai = String::new();
    let mut english = Vec::new();
    for _ in 0..rng.gen_range(4..=8) {
        let k = rng.gen_range(0..words.len());
        english.push(ENGLISH[k]);
        if rng.gen_bool(0.2) {
            english.push(FUNCTION_WORDS.choose(rng).unwrap());
        }
        thai.push_str(&words[k]);
    }
    (thai, english.join(" "))
}

pub fn build() -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let words = lexicon(&mut rng, ENGLISH.len());

    let corpus: Vec<String> = (0..200).map(|_| sentence(&mut rng, &words).0).collect();
    let parallel: Vec<ParallelPair> = (0..60)
        .map(|_| {
            let (text, english) = sentence(&mut rng, &words);
            ParallelPair {
                lang: "th".into(),
                text,
                english,
            }
        })
        .collect();

    let mut base_tokens: Vec<String> = vec![MARKER.to_string()];
    for w in ENGLISH.iter().chain(FUNCTION_WORDS) {
        base_tokens.push((*w).to_owned());
        base_tokens.push(format!("{MARKER}{w}"));
    }
    let mut seen: HashSet<char> = HashSet::new();
    for c in words.iter().flat_map(|w| w.chars()) {
        if seen.insert(c) {
            base_tokens.push(c.to_string());
        }
    }
    let mut target_tokens: Vec<String> = Vec::new();
    let mut in_target: HashSet<String> = HashSet::new();
    for w in &words {
        let cs = chars(w);
        for end in 1..=cs.len() {
            let prefix: String = cs[..end].iter().collect();
            if in_target.insert(prefix.clone()) {
                target_tokens.push(prefix);
            }
        }
    }

    let specials: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
    let base = Vocabulary::build(&base_tokens, MARKER, true, &specials).expect("valid base");
    let base_all: Vec<String> = base.tokens().iter().map(|t| t.text().to_owned()).collect();
    let ext = oracle_vocab_extend(&base_all, &specials, true, &in_target, &corpus, MIN_FREQ);

    let normal = |tokens: &[String]| -> HashSet<String> {
        tokens
            .iter()
            .filter(|t| !specials.contains(t) && !super::is_byte_piece(t))
            .cloned()
            .collect()
    };
    let before_set = normal(&base_all);
    let after_set = normal(&ext.final_tokens);
    let pairs: Vec<(String, String)> = parallel.iter().map(|p| (p.text.clone(), p.english.clone())).collect();
    let expected = Expected {
        min_freq: MIN_FREQ,
        mean_ratio_before: oracle_mean_ratio(&before_set, &before_set, &pairs),
        mean_ratio_after: oracle_mean_ratio(&after_set, &before_set, &pairs),
        extension_tokens: ext.final_tokens.len() - base_all.len(),
        final_vocab_size: ext.final_tokens.len(),
    };
    Fixture {
        base_tokens,
        target_tokens,
        corpus,
        parallel,
        expected,
    }
}

/// Writes `base.json`, `target.json`, `corpus.jsonl`, `parallel.jsonl` and
/// `expected.json` into `dir`.
pub fn write(fixture: &Fixture, dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let specials: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
    let base = Vocabulary::build(&fixture.base_tokens, MARKER, true, &specials).unwrap();
    save_vocab(&base, dir.join("base.json")).unwrap();
    let target = Vocabulary::build(&fixture.target_tokens, MARKER, false, &[]).unwrap();
    save_vocab(&target, dir.join("target.json")).unwrap();
    let docs: Vec<Document> = fixture.corpus.iter().map(|t| Document::pretrain(t.clone(), Some("th"))).collect();
    write_corpus(dir.join("corpus.jsonl"), &docs).unwrap();
    jsonl::write(dir.join("parallel.jsonl"), &fixture.parallel).unwrap();
    let mut expected = serde_json::to_string_pretty(&fixture.expected).unwrap();
    expected.push('\n');
    std::fs::write(dir.join("expected.json"), expected).unwrap();
}
