//! Packing tokenized documents into fixed-length sequences with loss masks.
//!
//! Every document (or chunk of an oversized document) is followed by one
//! separator. Documents that do not fit the space left in the current
//! sequence start a new one; documents longer than `max_len - 1` are split
//! into consecutive chunks. Pads carry mask 0, instruction prompts carry
//! mask 0, everything else (content, responses, separators) carries mask 1.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Body, Document};
use crate::error::{Error, Result};
use crate::tokenizer::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSequence {
    pub ids: Vec<u32>,
    pub mask: Vec<u8>,
    /// `(start, end, doc_id)` content spans, end exclusive, separators excluded.
    pub boundaries: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackConfig {
    pub max_len: usize,
    pub sep_id: u32,
    pub pad_id: u32,
}

impl PackConfig {
    /// Resolves separator and pad ids from special tokens of `vocab`.
    pub fn from_vocab(vocab: &Vocabulary, max_len: usize, sep: &str, pad: &str) -> Result<Self> {
        Ok(Self {
            max_len,
            sep_id: vocab.special_id(sep)?,
            pad_id: vocab.special_id(pad)?,
        })
    }
}

/// Special tokens opening the user and assistant side of each turn. Both
/// belong to the masked source side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnMarkers {
    pub user: u32,
    pub assistant: u32,
}

pub struct Packer {
    cfg: PackConfig,
    current: PackedSequence,
    done: Vec<PackedSequence>,
}

impl Packer {
    pub fn new(cfg: PackConfig) -> Result<Self> {
        if cfg.max_len < 2 {
            return Err(Error::invalid(format!(
                "max_len {} cannot hold one token plus a separator",
                cfg.max_len
            )));
        }
        Ok(Self {
            cfg,
            current: empty_sequence(cfg.max_len),
            done: Vec::new(),
        })
    }

    fn remaining(&self) -> usize {
        self.cfg.max_len - self.current.ids.len()
    }

    /// Adds one document's ids with their loss mask.
    pub fn push(&mut self, doc_id: usize, ids: &[u32], mask: &[u8]) {
        assert_eq!(ids.len(), mask.len(), "ids and mask must align");
        if ids.is_empty() {
            return;
        }
        let need = ids.len() + 1;
        if need > self.remaining() {
            self.flush();
        }
        let chunk = self.cfg.max_len - 1;
        for (ids, mask) in ids.chunks(chunk).zip(mask.chunks(chunk)) {
            if ids.len() + 1 > self.remaining() {
                self.flush();
            }
            self.append(doc_id, ids, mask);
        }
    }

    fn append(&mut self, doc_id: usize, ids: &[u32], mask: &[u8]) {
        let seq = &mut self.current;
        let start = seq.ids.len();
        seq.ids.extend_from_slice(ids);
        seq.mask.extend_from_slice(mask);
        seq.boundaries.push((start, start + ids.len(), doc_id));
        seq.ids.push(self.cfg.sep_id);
        seq.mask.push(1);
        if seq.ids.len() == self.cfg.max_len {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.current.ids.is_empty() {
            return;
        }
        let mut seq = std::mem::replace(&mut self.current, empty_sequence(self.cfg.max_len));
        seq.ids.resize(self.cfg.max_len, self.cfg.pad_id);
        seq.mask.resize(self.cfg.max_len, 0);
        self.done.push(seq);
    }

    pub fn finish(mut self) -> Vec<PackedSequence> {
        self.flush();
        self.done
    }
}

fn empty_sequence(max_len: usize) -> PackedSequence {
    PackedSequence {
        ids: Vec::with_capacity(max_len),
        mask: Vec::with_capacity(max_len),
        boundaries: Vec::new(),
    }
}

/// Ids and loss mask for one document. Pretrain text is fully supervised;
/// instruction turns mask the prompt (and any turn markers) and supervise
/// the response.
pub fn encode_document(doc: &Document, vocab: &Vocabulary, markers: Option<TurnMarkers>) -> Result<(Vec<u32>, Vec<u8>)> {
    let mut ids = Vec::new();
    let mut mask = Vec::new();
    match &doc.body {
        Body::Pretrain { text } => {
            ids = vocab.tokenize(text)?.into_ids();
            mask.resize(ids.len(), 1);
        }
        Body::Sft { turns } => {
            for turn in turns {
                if let Some(m) = markers {
                    ids.push(m.user);
                    mask.push(0);
                }
                let prompt = vocab.tokenize(&turn.prompt)?;
                mask.extend(std::iter::repeat_n(0, prompt.len()));
                ids.extend(prompt.into_ids());
                if let Some(m) = markers {
                    ids.push(m.assistant);
                    mask.push(0);
                }
                let response = vocab.tokenize(&turn.response)?;
                mask.extend(std::iter::repeat_n(1, response.len()));
                ids.extend(response.into_ids());
            }
        }
    }
    Ok((ids, mask))
}

fn pack_encoded(docs: &[Document], vocab: &Vocabulary, cfg: PackConfig, markers: Option<TurnMarkers>) -> Result<Vec<PackedSequence>> {
    let mut packer = Packer::new(cfg)?;
    // Tokenize in parallel; packing consumes results in input order.
    let encoded: Vec<(Vec<u32>, Vec<u8>)> = docs
        .par_iter()
        .map(|d| encode_document(d, vocab, markers))
        .collect::<Result<_>>()?;
    for (doc_id, (ids, mask)) in encoded.iter().enumerate() {
        packer.push(doc_id, ids, mask);
    }
    Ok(packer.finish())
}

/// Packs documents in order. Boundary doc ids are input positions.
pub fn pack_documents(
    docs: impl IntoIterator<Item = Document>,
    vocab: &Vocabulary,
    cfg: PackConfig,
    markers: Option<TurnMarkers>,
) -> Result<Vec<PackedSequence>> {
    let docs: Vec<Document> = docs.into_iter().collect();
    pack_encoded(&docs, vocab, cfg, markers)
}

/// Chooses the document order for hybrid packing: each slot takes an
/// instruction document with probability `mix_ratio`. When one source runs
/// out the other continues alone, unless its probability is zero.
pub fn hybrid_order(pretrain: usize, sft: usize, mix_ratio: f64, seed: u64) -> Result<Vec<(bool, usize)>> {
    if !(0.0..=1.0).contains(&mix_ratio) {
        return Err(Error::invalid(format!("mix_ratio {mix_ratio} is outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut p, mut s) = (0usize, 0usize);
    let mut order = Vec::with_capacity(pretrain + sft);
    loop {
        let p_left = p < pretrain && mix_ratio < 1.0;
        let s_left = s < sft && mix_ratio > 0.0;
        let take_sft = match (p_left, s_left) {
            (true, true) => rng.gen_bool(mix_ratio),
            (false, true) => true,
            (true, false) => false,
            (false, false) => break,
        };
        if take_sft {
            order.push((true, s));
            s += 1;
        } else {
            order.push((false, p));
            p += 1;
        }
    }
    Ok(order)
}

/// Interleaves pretraining and instruction documents by a seeded Bernoulli
/// draw per document, then packs them. Boundary doc ids index the
/// interleaved order.
pub fn pack_hybrid(
    pretrain: &[Document],
    sft: &[Document],
    mix_ratio: f64,
    vocab: &Vocabulary,
    cfg: PackConfig,
    seed: u64,
    markers: Option<TurnMarkers>,
) -> Result<Vec<PackedSequence>> {
    let docs: Vec<Document> = hybrid_order(pretrain.len(), sft.len(), mix_ratio, seed)?
        .into_iter()
        .map(|(is_sft, i)| if is_sft { sft[i].clone() } else { pretrain[i].clone() })
        .collect();
    pack_encoded(&docs, vocab, cfg, markers)
}

/// Writes sequences as little-endian records: `u32` length `n`, then `n`
/// `u32` ids, then `n` mask bytes.
pub fn write_binary(path: impl AsRef<Path>, seqs: &[PackedSequence]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for s in seqs {
        w.write_all(&(s.ids.len() as u32).to_le_bytes()).map_err(io)?;
        for id in &s.ids {
            w.write_all(&id.to_le_bytes()).map_err(io)?;
        }
        w.write_all(&s.mask).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads the format produced by [`write_binary`]. Boundaries are not stored.
pub fn read_binary(bytes: &[u8]) -> Result<Vec<(Vec<u32>, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut rest = bytes;
    let truncated = || Error::invalid("truncated packed binary record");
    while !rest.is_empty() {
        let (len, tail) = rest.split_first_chunk::<4>().ok_or_else(truncated)?;
        let n = u32::from_le_bytes(*len) as usize;
        if tail.len() < n * 5 {
            return Err(truncated());
        }
        let ids = tail[..n * 4]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let mask = tail[n * 4..n * 5].to_vec();
        out.push((ids, mask));
        rest = &tail[n * 5..];
    }
    Ok(out)
}
