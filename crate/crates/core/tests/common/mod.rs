//! Test oracles written independently of the library: a brute-force greedy
//! tokenizer, a literal interpreter of the vocabulary-extension pseudocode,
//! random instance generators and the synthetic compression fixture.

#![allow(dead_code)]

pub mod synthetic;

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

pub const MARKER: char = '▁';

pub fn byte_piece(b: u8) -> String {
    format!("<0x{b:02X}>")
}

pub fn is_byte_piece(s: &str) -> bool {
    s.len() == 6 && s.starts_with("<0x") && s.ends_with('>') && s[3..5].chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_lowercase())
}

/// Longest token of `normal` that `s` starts with, found by checking every
/// token.
fn longest_at<'a>(normal: &'a HashSet<String>, s: &str) -> Option<&'a str> {
    normal
        .iter()
        .filter(|t| s.starts_with(t.as_str()))
        .max_by_key(|t| t.len())
        .map(String::as_str)
}

fn push_bytes(out: &mut Vec<String>, bytes: &[u8], fallback: bool) -> bool {
    if !fallback {
        return false;
    }
    out.extend(bytes.iter().map(|&b| byte_piece(b)));
    true
}

fn greedy(normal: &HashSet<String>, s: &str, synthetic_marker: bool, fallback: bool, out: &mut Vec<String>) -> bool {
    let mut pos = 0;
    while pos < s.len() {
        if let Some(t) = longest_at(normal, &s[pos..]) {
            out.push(t.to_owned());
            pos += t.len();
        } else if synthetic_marker && pos == 0 {
            if !push_bytes(out, b" ", fallback) {
                return false;
            }
            pos = MARKER.len_utf8();
        } else {
            let c = s[pos..].chars().next().unwrap();
            let mut buf = [0u8; 4];
            if !push_bytes(out, c.encode_utf8(&mut buf).as_bytes(), fallback) {
                return false;
            }
            pos += c.len_utf8();
        }
    }
    true
}

/// Segments before every space; the space becomes a marker glued to the
/// following characters, literal markers are emitted as bytes, and each
/// piece is matched greedily. `None` when a byte is uncovered without
/// fallback.
pub fn oracle_tokenize(normal: &HashSet<String>, fallback: bool, text: &str) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut segments: Vec<&str> = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ' ' && i > start {
            segments.push(&text[start..i]);
            start = i;
        }
    }
    if start < text.len() {
        segments.push(&text[start..]);
    }
    for seg in segments {
        let (boundary, body) = match seg.strip_prefix(' ') {
            Some(rest) => (true, rest),
            None => (false, seg),
        };
        let parts: Vec<&str> = body.split(MARKER).collect();
        for (k, part) in parts.iter().enumerate() {
            if k > 0 {
                let mut buf = [0u8; 4];
                if !push_bytes(&mut out, MARKER.encode_utf8(&mut buf).as_bytes(), fallback) {
                    return None;
                }
            }
            let ok = if k == 0 && boundary {
                greedy(normal, &format!("{MARKER}{part}"), true, fallback, &mut out)
            } else {
                greedy(normal, part, false, fallback, &mut out)
            };
            if !ok {
                return None;
            }
        }
    }
    Some(out)
}

/// Inverse of [`oracle_tokenize`].
pub fn oracle_detokenize(pieces: &[String]) -> Option<String> {
    let mut bytes = Vec::new();
    for p in pieces {
        if is_byte_piece(p) {
            bytes.push(u8::from_str_radix(&p[3..5], 16).unwrap());
        } else {
            bytes.extend(p.replace(MARKER, " ").into_bytes());
        }
    }
    String::from_utf8(bytes).ok()
}

/// Result of the literal extension interpreter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleExtension {
    /// Base tokens followed by kept extension tokens.
    pub final_tokens: Vec<String>,
    /// Every token the merge step added to T, in order.
    pub t: Vec<String>,
    pub freq: BTreeMap<String, u64>,
    pub merges_per_doc: Vec<usize>,
}

/// ExhaustiveMerge as written, with the loop running until a full pass
/// performs no merge. Returns T_new, the merged sequence and the product of
/// every merge.
pub fn oracle_exhaustive_merge(target: &HashSet<String>, t_v: &[String]) -> (Vec<String>, Vec<String>, Vec<String>) {
    let mut t_v = t_v.to_vec();
    let mut t_new: Vec<String> = Vec::new();
    let mut products = Vec::new();
    loop {
        let mut merged = false;
        for i in 0..t_v.len().saturating_sub(1) {
            let t_merged = format!("{}{}", t_v[i], t_v[i + 1]);
            if target.contains(&t_merged) {
                t_v.splice(i..i + 2, [t_merged.clone()]);
                if !t_new.contains(&t_merged) {
                    t_new.push(t_merged.clone());
                }
                products.push(t_merged);
                merged = true;
                break;
            }
        }
        if !merged {
            break;
        }
    }
    (t_new, t_v, products)
}

/// VocabExtend as written. `base` lists every base token in id order;
/// `specials` are excluded from matching, as are byte tokens.
pub fn oracle_vocab_extend(
    base: &[String],
    specials: &[String],
    fallback: bool,
    target: &HashSet<String>,
    docs: &[String],
    m: u64,
) -> OracleExtension {
    let base_set: HashSet<String> = base.iter().cloned().collect();
    let mut v: HashSet<String> = base
        .iter()
        .filter(|t| !specials.contains(t) && !is_byte_piece(t))
        .cloned()
        .collect();
    let mut t: Vec<String> = Vec::new();
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    let mut merges_per_doc = Vec::new();
    for d in docs {
        let t_v = oracle_tokenize(&v, fallback, d).expect("oracle instances use byte fallback");
        let (t_new, merged, products) = oracle_exhaustive_merge(target, &t_v);
        merges_per_doc.push(t_v.len() - merged.len());
        for tok in t_new {
            v.insert(tok.clone());
            if !t.contains(&tok) {
                t.push(tok);
            }
        }
        for piece in t_v.iter().chain(&products) {
            if t.contains(piece) {
                *freq.entry(piece.clone()).or_default() += 1;
            }
        }
    }
    let mut final_tokens = base.to_vec();
    for tok in &t {
        if freq.get(tok).copied().unwrap_or(0) >= m && !base_set.contains(tok) {
            final_tokens.push(tok.clone());
        }
    }
    OracleExtension {
        final_tokens,
        t,
        freq,
        merges_per_doc,
    }
}

/// Mean over pairs of `|subject(text)| / |baseline(english)|`.
pub fn oracle_mean_ratio(subject: &HashSet<String>, baseline: &HashSet<String>, pairs: &[(String, String)]) -> f64 {
    let ratios: Vec<f64> = pairs
        .iter()
        .map(|(text, english)| {
            let s = oracle_tokenize(subject, true, text).unwrap().len() as f64;
            let b = oracle_tokenize(baseline, true, english).unwrap().len() as f64;
            s / b
        })
        .collect();
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

/// A randomized vocabulary-extension instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub base: Vec<String>,
    pub target: Vec<String>,
    pub docs: Vec<String>,
    pub m: u64,
}

const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'ก', 'า', ' '];

fn random_string<R: Rng>(rng: &mut R, max: usize) -> String {
    let len = rng.gen_range(1..=max);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// Random instance with at most 20 base tokens, 50 target tokens and 10
/// documents of at most 30 characters. Most single characters are base
/// tokens and target tokens are mostly drawn from the documents' own
/// substrings, so that merges actually happen.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let docs: Vec<String> = (0..rng.gen_range(0..=10)).map(|_| random_string(rng, 30)).collect();
    let as_tokens = |s: String| s.replace(' ', &MARKER.to_string());

    let mut base: Vec<String> = ALPHABET
        .iter()
        .filter(|_| rng.gen_bool(0.8))
        .map(|c| as_tokens(c.to_string()))
        .collect();
    for _ in 0..rng.gen_range(1..=20 - base.len()) {
        let t = as_tokens(random_string(rng, 2));
        if !base.contains(&t) {
            base.push(t);
        }
    }
    let mut target: Vec<String> = Vec::new();
    let max_target = rng.gen_range(0..=50);
    let mut attempts = 0;
    while target.len() < max_target && attempts < 500 {
        attempts += 1;
        let t = match docs.choose(rng) {
            Some(d) if rng.gen_bool(0.85) => {
                let chars: Vec<char> = d.chars().collect();
                let a = rng.gen_range(0..chars.len());
                let b = rng.gen_range(a + 1..=chars.len().min(a + 6));
                as_tokens(chars[a..b].iter().collect())
            }
            _ => as_tokens(random_string(rng, 4)),
        };
        if !target.contains(&t) {
            target.push(t);
        }
    }
    Instance {
        base,
        target,
        docs,
        m: rng.gen_range(1..=3),
    }
}

/// Random text mixing ASCII, Thai, Khmer, Lao, Burmese and CJK characters,
/// spaces, literal markers and arbitrary scalar values.
pub fn random_text<R: Rng>(rng: &mut R, max_chars: usize) -> String {
    const RANGES: &[(u32, u32)] = &[
        (0x20, 0x7E),
        (0x0E00, 0x0E7F),
        (0x1780, 0x17FF),
        (0x0E80, 0x0EFF),
        (0x1000, 0x109F),
        (0x4E00, 0x9FFF),
    ];
    let len = rng.gen_range(0..=max_chars);
    (0..len)
        .map(|_| match rng.gen_range(0..20) {
            0 => ' ',
            1 => MARKER,
            2 => loop {
                if let Some(c) = char::from_u32(rng.gen_range(0..=0x10FFFF)) {
                    break c;
                }
            },
            _ => {
                let (lo, hi) = RANGES[rng.gen_range(0..RANGES.len())];
                char::from_u32(rng.gen_range(lo..=hi)).unwrap_or('?')
            }
        })
        .collect()
}
