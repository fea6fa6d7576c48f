//! Configurable predicates for rejecting low-quality extension tokens.

use serde::{Deserialize, Serialize};
use unicode_script::{Script, UnicodeScript};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Maximum token length in characters, word-boundary marker excluded.
    pub max_chars: Option<usize>,
    /// Require every character (marker, Common and Inherited excluded) to
    /// come from one Unicode script.
    pub script_purity: bool,
    /// Reject tokens containing digits or punctuation.
    pub reject_digits_punct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    MaxChars,
    ScriptPurity,
    DigitsOrPunctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub token: String,
    pub rule: FilterRule,
}

/// Returns the first rule `token` violates, if any.
pub fn check_token(token: &str, rules: &FilterConfig, marker: char) -> Option<FilterRule> {
    let body = || token.chars().filter(move |&c| c != marker);
    if let Some(max) = rules.max_chars {
        if body().count() > max {
            return Some(FilterRule::MaxChars);
        }
    }
    if rules.script_purity {
        let mut seen: Option<Script> = None;
        for c in body() {
            let script = c.script();
            if matches!(script, Script::Common | Script::Inherited | Script::Unknown) {
                continue;
            }
            match seen {
                None => seen = Some(script),
                Some(s) if s != script => return Some(FilterRule::ScriptPurity),
                Some(_) => {}
            }
        }
    }
    if rules.reject_digits_punct && body().any(|c| c.is_numeric() || c.is_ascii_punctuation() || is_general_punct(c)) {
        return Some(FilterRule::DigitsOrPunctuation);
    }
    None
}

// Punctuation outside ASCII that commonly leaks into vocabularies.
fn is_general_punct(c: char) -> bool {
    matches!(c, '\u{2000}'..='\u{206F}' | '\u{3000}'..='\u{303F}' | '\u{FF01}'..='\u{FF0F}' | '\u{0E2F}' | '\u{0E5A}' | '\u{0E5B}')
}

/// Splits `candidates` into kept tokens and rejections, preserving order.
pub fn quality_filter<S: AsRef<str>>(
    candidates: &[S],
    rules: &FilterConfig,
    marker: char,
) -> (Vec<String>, Vec<Rejection>) {
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for c in candidates {
        let c = c.as_ref();
        match check_token(c, rules, marker) {
            None => kept.push(c.to_owned()),
            Some(rule) => rejected.push(Rejection {
                token: c.to_owned(),
                rule,
            }),
        }
    }
    (kept, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: char = '▁';

    fn purity() -> FilterConfig {
        FilterConfig {
            script_purity: true,
            ..Default::default()
        }
    }

    #[test]
    fn mixed_scripts_are_rejected() {
        assert_eq!(check_token("aก", &purity(), M), Some(FilterRule::ScriptPurity));
    }

    #[test]
    fn marker_is_exempt_from_purity() {
        assert_eq!(check_token("▁มาก", &purity(), M), None);
        // Thai combining vowels belong to the Thai script.
        assert_eq!(check_token("▁ที่", &purity(), M), None);
    }

    #[test]
    fn disabled_rules_keep_everything() {
        let cands = ["aก", "12", "▁.", "▁xxxxxxxxxxxxxxxx"];
        let (kept, rejected) = quality_filter(&cands, &FilterConfig::default(), M);
        assert_eq!(kept, cands);
        assert!(rejected.is_empty());
    }

    #[test]
    fn length_and_digit_rules() {
        let rules = FilterConfig {
            max_chars: Some(3),
            reject_digits_punct: true,
            ..Default::default()
        };
        assert_eq!(check_token("▁abc", &rules, M), None);
        assert_eq!(check_token("abcd", &rules, M), Some(FilterRule::MaxChars));
        assert_eq!(check_token("a1", &rules, M), Some(FilterRule::DigitsOrPunctuation));
        assert_eq!(check_token("a,", &rules, M), Some(FilterRule::DigitsOrPunctuation));
        assert_eq!(check_token("๒", &rules, M), Some(FilterRule::DigitsOrPunctuation));
        let (kept, rejected) = quality_filter(&["ok", "toolong"], &rules, M);
        assert_eq!(kept, ["ok"]);
        assert_eq!(rejected[0].rule, FilterRule::MaxChars);
    }
}
