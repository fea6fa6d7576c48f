//! Synthetic multi-turn conversations from single-turn instruction data.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Body, Document, Quality};
use crate::error::{Error, Result};

/// Uniform over 1..=4 turns.
pub fn default_turns_distribution() -> BTreeMap<usize, f64> {
    (1..=4).map(|k| (k, 0.25)).collect()
}

/// Parses `"1:0.25,2:0.75"`.
pub fn parse_turns_distribution(spec: &str) -> Result<BTreeMap<usize, f64>> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, p) = part
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("expected k:probability, got {part:?}")))?;
        let k: usize = k.trim().parse().map_err(|_| Error::invalid(format!("bad turn count {k:?}")))?;
        let p: f64 = p.trim().parse().map_err(|_| Error::invalid(format!("bad probability {p:?}")))?;
        if out.insert(k, p).is_some() {
            return Err(Error::invalid(format!("turn count {k} given twice")));
        }
    }
    Ok(out)
}

fn validate(dist: &BTreeMap<usize, f64>) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::invalid("turn distribution is empty"));
    }
    if dist.keys().any(|&k| k == 0) {
        return Err(Error::invalid("turn counts must be at least 1"));
    }
    if dist.values().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid("turn probabilities must be non-negative"));
    }
    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("turn probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Shuffles `docs` with `seed`, then groups consecutive runs whose length is
/// drawn from `turns` per conversation. A final group shorter than its draw
/// keeps whatever is left.
pub fn join_multiturn(mut docs: Vec<Document>, turns: &BTreeMap<usize, f64>, seed: u64) -> Result<Vec<Document>> {
    validate(turns)?;
    if let Some(i) = docs.iter().position(|d| !d.is_sft()) {
        return Err(Error::invalid(format!("document {i} is not an instruction record")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    docs.shuffle(&mut rng);
    let ks: Vec<usize> = turns.keys().copied().collect();
    let dist = WeightedIndex::new(turns.values().copied()).map_err(|e| Error::invalid(e.to_string()))?;

    let mut out = Vec::new();
    let mut rest = docs.into_iter().peekable();
    while rest.peek().is_some() {
        let k = ks[dist.sample(&mut rng)];
        let group: Vec<Document> = rest.by_ref().take(k).collect();
        out.push(merge_group(group));
    }
    Ok(out)
}

fn merge_group(group: Vec<Document>) -> Document {
    let lang = match group.first().and_then(|d| d.lang.clone()) {
        Some(l) if group.iter().all(|d| d.lang.as_deref() == Some(l.as_str())) => Some(l),
        _ => None,
    };
    let quality = if group.iter().all(|d| d.quality == Quality::High) {
        Quality::High
    } else {
        Quality::Standard
    };
    let turns = group
        .into_iter()
        .flat_map(|d| match d.body {
            Body::Sft { turns } => turns,
            Body::Pretrain { .. } => unreachable!("checked above"),
        })
        .collect();
    Document {
        lang,
        quality,
        body: Body::Sft { turns },
    }
}
