//! Self-preferencing dataset construction.
//!
//! Every response pair is judged twice, once per presentation order. A pair
//! survives only when both verdicts point at the same response; ties and
//! order-dependent verdicts are dropped, which removes position bias.

mod judge;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub use judge::{judge_pair, AlwaysFirst, HttpJudge, Judge, JudgeError, JudgeQuery, Lexicographic, LongerWins, SubprocessJudge, Verdict};

/// Two candidate responses to one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponsePair {
    pub prompt: String,
    pub response_a: String,
    pub response_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceRecord {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub judge_id: String,
    /// Verdict with `response_a` shown first.
    pub forward_verdict: Verdict,
    /// Verdict with `response_b` shown first.
    pub reverse_verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Inconsistent,
    Tie,
    JudgeError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub index: usize,
    pub prompt: String,
    pub reason: DropReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreferenceDataset {
    pub records: Vec<PreferenceRecord>,
    pub dropped: Vec<Dropped>,
}

/// The DPO training triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpoRecord {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
}

impl From<&PreferenceRecord> for DpoRecord {
    fn from(r: &PreferenceRecord) -> Self {
        Self {
            prompt: r.prompt.clone(),
            chosen: r.chosen.clone(),
            rejected: r.rejected.clone(),
        }
    }
}

enum Outcome {
    Kept(PreferenceRecord),
    Dropped(Dropped),
}

fn judge_one(pair: &ResponsePair, index: usize, judge: &dyn Judge, seed: u64) -> Outcome {
    let drop = |reason, detail: Option<String>| {
        Outcome::Dropped(Dropped {
            index,
            prompt: pair.prompt.clone(),
            reason,
            detail,
        })
    };
    if pair.response_a == pair.response_b {
        return drop(DropReason::Tie, Some("identical responses".into()));
    }
    let (a, b) = (pair.response_a.as_str(), pair.response_b.as_str());
    // The seed only decides which presentation is queried first.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (forward, reverse) = if rng.gen_bool(0.5) {
        let r = judge_pair(judge, &pair.prompt, b, a);
        (judge_pair(judge, &pair.prompt, a, b), r)
    } else {
        let f = judge_pair(judge, &pair.prompt, a, b);
        (f, judge_pair(judge, &pair.prompt, b, a))
    };
    let (forward, reverse) = match (forward, reverse) {
        (Ok(f), Ok(r)) => (f, r),
        (Err(e), _) | (_, Err(e)) => return drop(DropReason::JudgeError, Some(e.to_string())),
    };
    let chosen_is_a = match (forward, reverse) {
        (Verdict::Tie, _) | (_, Verdict::Tie) => {
            return drop(DropReason::Tie, Some(format!("{forward:?}/{reverse:?}").to_lowercase()))
        }
        (Verdict::First, Verdict::Second) => true,
        (Verdict::Second, Verdict::First) => false,
        _ => {
            return drop(
                DropReason::Inconsistent,
                Some(format!("{forward:?}/{reverse:?}").to_lowercase()),
            )
        }
    };
    let (chosen, rejected) = if chosen_is_a { (a, b) } else { (b, a) };
    Outcome::Kept(PreferenceRecord {
        prompt: pair.prompt.clone(),
        chosen: chosen.to_owned(),
        rejected: rejected.to_owned(),
        judge_id: judge.id(),
        forward_verdict: forward,
        reverse_verdict: reverse,
    })
}

/// Judges every pair in both orders, with at most `max_in_flight` pairs
/// being judged at once. Output order follows input order regardless of
/// scheduling; judge failures become drops rather than aborting the batch.
pub fn build_preference_dataset(
    pairs: &[ResponsePair],
    judge: &dyn Judge,
    seed: u64,
    max_in_flight: usize,
) -> Result<PreferenceDataset> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight.max(1))
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(i, p)| judge_one(p, i, judge, seed))
            .collect()
    });
    let mut out = PreferenceDataset::default();
    for o in outcomes {
        match o {
            Outcome::Kept(r) => out.records.push(r),
            Outcome::Dropped(d) => out.dropped.push(d),
        }
    }
    Ok(out)
}

pub fn export_dpo(records: &[PreferenceRecord], path: impl AsRef<Path>) -> Result<()> {
    let triples: Vec<DpoRecord> = records.iter().map(DpoRecord::from).collect();
    jsonl::write(path, &triples)
}

pub fn load_dpo(path: impl AsRef<Path>) -> Result<Vec<DpoRecord>> {
    jsonl::read(path)
}
