//! Phase-scheduled sampling over named document streams.
//!
//! A schedule is a list of phases. Within a phase every emitted item comes
//! from a stream drawn with the phase's normalized weights; the schedule
//! moves to the next phase after exactly `length` emissions. Up-weighting
//! high-quality streams in a final phase re-feeds that data late in training.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub weights: BTreeMap<String, f64>,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSchedule {
    pub phases: Vec<Phase>,
}

impl SamplingSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let s = Self { phases };
        s.validate()?;
        Ok(s)
    }

    /// A main phase followed by a re-feed phase taking `refeed_fraction` of
    /// `total` emissions (rounded, at least one of each).
    pub fn with_refeed(
        main: BTreeMap<String, f64>,
        refeed: BTreeMap<String, f64>,
        total: usize,
        refeed_fraction: f64,
    ) -> Result<Self> {
        if total < 2 || !(0.0..1.0).contains(&refeed_fraction) {
            return Err(Error::invalid("re-feed schedule needs total >= 2 and a fraction in [0, 1)"));
        }
        let tail = ((total as f64 * refeed_fraction).round() as usize).clamp(1, total - 1);
        Self::new(vec![
            Phase {
                weights: main,
                length: total - tail,
            },
            Phase {
                weights: refeed,
                length: tail,
            },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::invalid("schedule has no phases"));
        }
        for (i, p) in self.phases.iter().enumerate() {
            if p.length == 0 {
                return Err(Error::invalid(format!("phase {i} has length 0")));
            }
            if p.weights.values().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::invalid(format!("phase {i} has a negative or non-finite weight")));
            }
            if !p.weights.values().any(|w| *w > 0.0) {
                return Err(Error::invalid(format!("phase {i} has no positive weight")));
            }
        }
        Ok(())
    }

    pub fn total_length(&self) -> usize {
        self.phases.iter().map(|p| p.length).sum()
    }

    pub fn stream_names(&self) -> BTreeSet<&str> {
        self.phases
            .iter()
            .flat_map(|p| p.weights.keys().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustionPolicy {
    /// Drop exhausted streams and renormalize the remaining weights.
    #[default]
    Renormalize,
    /// Fail as soon as a drawn stream is empty.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled<T> {
    pub stream: String,
    pub phase: usize,
    #[serde(flatten)]
    pub item: T,
}

pub struct Sampler<I: Iterator> {
    streams: BTreeMap<String, I>,
    exhausted: BTreeSet<String>,
    schedule: SamplingSchedule,
    policy: ExhaustionPolicy,
    rng: ChaCha8Rng,
    phase: usize,
    emitted_in_phase: usize,
    done: bool,
}

impl<I: Iterator> Sampler<I> {
    pub fn new(
        streams: BTreeMap<String, I>,
        schedule: SamplingSchedule,
        seed: u64,
        policy: ExhaustionPolicy,
    ) -> Result<Self> {
        schedule.validate()?;
        if let Some(missing) = schedule.stream_names().into_iter().find(|n| !streams.contains_key(*n)) {
            return Err(Error::invalid(format!("schedule references unknown stream {missing:?}")));
        }
        Ok(Self {
            streams,
            exhausted: BTreeSet::new(),
            schedule,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: 0,
            emitted_in_phase: 0,
            done: false,
        })
    }

    fn draw(&mut self) -> Result<Sampled<I::Item>> {
        let phase = &self.schedule.phases[self.phase];
        loop {
            let live: Vec<(&String, f64)> = phase
                .weights
                .iter()
                .filter(|(name, w)| **w > 0.0 && !self.exhausted.contains(*name))
                .map(|(n, w)| (n, *w))
                .collect();
            if live.is_empty() {
                return Err(Error::invalid(format!(
                    "all streams of phase {} exhausted after {} of {} documents",
                    self.phase, self.emitted_in_phase, phase.length
                )));
            }
            let dist = WeightedIndex::new(live.iter().map(|(_, w)| *w)).expect("positive weights");
            let name = live[dist.sample(&mut self.rng)].0.clone();
            match self.streams.get_mut(&name).expect("validated stream").next() {
                Some(item) => {
                    return Ok(Sampled {
                        stream: name,
                        phase: self.phase,
                        item,
                    })
                }
                None if self.policy == ExhaustionPolicy::Error => {
                    return Err(Error::invalid(format!("stream {name:?} exhausted")));
                }
                None => {
                    self.exhausted.insert(name);
                }
            }
        }
    }
}

impl<I: Iterator> Iterator for Sampler<I> {
    type Item = Result<Sampled<I::Item>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        while self.emitted_in_phase == self.schedule.phases[self.phase].length {
            self.phase += 1;
            self.emitted_in_phase = 0;
            if self.phase == self.schedule.phases.len() {
                self.done = true;
                return None;
            }
        }
        let out = self.draw();
        match &out {
            Ok(_) => self.emitted_in_phase += 1,
            Err(_) => self.done = true,
        }
        Some(out)
    }
}
