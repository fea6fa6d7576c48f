mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seatok::extend::{exhaustive_merge, vocab_extend};
use seatok::quality::FilterConfig;
use seatok::tokenizer::load_vocab;
use seatok::workflow::{self, ExtendRequest};
use seatok::Vocabulary;

use common::{oracle_exhaustive_merge, oracle_vocab_extend, random_instance, MARKER};

fn fixture(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn vocab(tokens: &[&str]) -> Vocabulary {
    Vocabulary::build(tokens, MARKER, false, &[]).unwrap()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn texts(v: &Vocabulary) -> Vec<String> {
    v.tokens().iter().map(|t| t.text().to_owned()).collect()
}

#[test]
fn merge_keeps_merging_known_tokens_so_longer_ones_can_form() {
    let out = exhaustive_merge(&vocab(&["a", "b", "c"]), &vocab(&["ab", "abc"]), &strings(&["a", "b", "a", "b", "c"]));
    assert_eq!(out.merged, ["ab", "abc"]);
    assert_eq!(out.new_tokens.iter().collect::<Vec<_>>(), ["ab", "abc"]);
    assert_eq!(out.merge_count, 3);
}

#[test]
fn ab_fixture_counts_occurrences() {
    let base = load_vocab(fixture("ab/base.json")).unwrap();
    let target = load_vocab(fixture("ab/target.json")).unwrap();
    let docs = ["ab", "ab"];
    let kept = vocab_extend(&base, &target, &docs, 2).unwrap();
    assert_eq!(kept.kept, ["ab"]);
    assert_eq!(kept.frequencies.get("ab"), Some(2));
    assert_eq!(kept.merges_per_doc, [1, 0]);
    let pruned = vocab_extend(&base, &target, &docs, 3).unwrap();
    assert_eq!(pruned.final_vocab, base);
    assert_eq!(pruned.pruned, ["ab"]);
}

#[test]
fn extend_files_writes_vocab_report_and_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let req = ExtendRequest::new(fixture("ab/base.json"), fixture("ab/target.json"), fixture("ab/corpus.jsonl"), 2, &out);
    let summary = workflow::extend_files(&req).unwrap();
    assert_eq!((summary.candidates, summary.kept, summary.vocab_size), (1, 1, 3));
    assert_eq!(load_vocab(&out).unwrap().extension_tokens()[0].text(), "ab");
    let tsv = std::fs::read_to_string(workflow::frequencies_path_for(&out)).unwrap();
    assert!(tsv.contains("ab\t2"));
    assert!(workflow::report_path_for(&out).exists());
}

#[test]
fn bundled_synthetic_fixture_is_current() {
    let dir = tempfile::tempdir().unwrap();
    common::synthetic::write(&common::synthetic::build(), dir.path());
    for name in ["base.json", "target.json", "corpus.jsonl", "parallel.jsonl", "expected.json"] {
        let fresh = std::fs::read(dir.path().join(name)).unwrap();
        let bundled = std::fs::read(fixture("synthetic").join(name)).unwrap();
        assert!(fresh == bundled, "{name} is stale; rerun the build_synthetic_fixture example");
    }
}

#[test]
fn random_instances_exercise_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut extended = 0;
    let mut pruned_some = 0;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng);
        let base = Vocabulary::build(&inst.base, MARKER, true, &[]).unwrap();
        let target = Vocabulary::build(&inst.target, MARKER, false, &[]).unwrap();
        let r = vocab_extend(&base, &target, &inst.docs, inst.m).unwrap();
        extended += usize::from(!r.kept.is_empty());
        pruned_some += usize::from(!r.pruned.is_empty());
    }
    assert!(extended > 500, "only {extended} instances kept a token");
    assert!(pruned_some > 200, "only {pruned_some} instances pruned a token");
}

#[test]
fn quality_filter_only_removes_kept_tokens() {
    let base = load_vocab(fixture("synthetic/base.json")).unwrap();
    let target = load_vocab(fixture("synthetic/target.json")).unwrap();
    let docs = seatok::data::read_corpus(fixture("synthetic/corpus.jsonl")).unwrap();
    let corpus = workflow::extension_texts(&docs, None);
    let plain = vocab_extend(&base, &target, &corpus, 2).unwrap();
    let rules = FilterConfig {
        max_chars: Some(4),
        ..FilterConfig::default()
    };
    let filtered = plain.clone().apply_quality_filter(&rules, &base).unwrap();
    assert!(!filtered.rejected.is_empty());
    assert_eq!(filtered.kept.len() + filtered.rejected.len(), plain.kept.len());
    assert!(filtered.kept.iter().all(|t| t.chars().count() <= 4));
    assert_eq!(filtered.final_vocab.len(), base.len() + filtered.kept.len());
}

fn token_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&["a", "b", "c", "▁"][..]), 1..4).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn merge_matches_restart_from_left(
        seq in prop::collection::vec(token_strategy(), 0..12),
        target in prop::collection::btree_set(token_strategy(), 0..16),
    ) {
        let target_vec: Vec<&str> = target.iter().map(String::as_str).collect();
        let out = exhaustive_merge(&vocab(&[]), &vocab(&target_vec), &seq);
        let target_set: HashSet<String> = target.iter().cloned().collect();
        let (_, merged, products) = oracle_exhaustive_merge(&target_set, &seq);
        prop_assert_eq!(out.merged, merged);
        prop_assert_eq!(out.products, products);
    }

    #[test]
    fn extension_invariants_hold(
        base in prop::collection::btree_set(token_strategy(), 1..10),
        target in prop::collection::btree_set(token_strategy(), 0..30),
        docs in prop::collection::vec("[abc ]{1,20}", 0..8),
        m in 1u64..4,
    ) {
        let base_v = Vocabulary::build(&base.iter().collect::<Vec<_>>(), MARKER, true, &[]).unwrap();
        let target_v = Vocabulary::build(&target.iter().collect::<Vec<_>>(), MARKER, false, &[]).unwrap();
        let r = vocab_extend(&base_v, &target_v, &docs, m).unwrap();
        let fin = texts(&r.final_vocab);
        prop_assert_eq!(&fin[..base_v.len()], &texts(&base_v)[..]);
        let target_set: HashSet<String> = target.iter().cloned().collect();
        let oracle = oracle_vocab_extend(&texts(&base_v), &[], true, &target_set, &docs, m);
        prop_assert_eq!(&fin, &oracle.final_tokens);
        for t in &fin[base_v.len()..] {
            prop_assert!(target.contains(t));
            prop_assert!(oracle.freq[t] >= m);
        }
        prop_assert_eq!(r.kept.len() + r.pruned.len(), r.candidates.len());
    }
}
