//! Subword vocabularies and deterministic text/token conversion.
//!
//! Segmentation is greedy longest-match over the vocabulary's token set.
//! Every U+0020 space starts a new word and is rewritten to the vocabulary's
//! word-boundary marker, so a word's first piece carries the marker. Bytes
//! that no normal token covers are emitted as `<0xNN>` byte-fallback tokens.
//! A marker character that occurs literally in the input is always emitted
//! as byte fallback, which keeps `detokenize(tokenize(s)) == s` exact.

mod io;
mod trie;

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub use io::{import_external_vocab, load_vocab, save_vocab, ImportFormat, VOCAB_FILE_VERSION};
pub use trie::Trie;

pub const DEFAULT_MARKER: char = '▁';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Normal,
    ByteFallback,
    Special,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    text: String,
    kind: TokenKind,
}

impl Token {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }
}

/// Surface form of the byte-fallback token for `byte`.
pub fn byte_token_text(byte: u8) -> String {
    format!("<0x{byte:02X}>")
}

/// Parses the exact `<0xNN>` surface form (uppercase hex).
pub fn parse_byte_token(text: &str) -> Option<u8> {
    let hex = text.strip_prefix("<0x")?.strip_suffix('>')?;
    if hex.len() != 2 || !hex.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b)) {
        return None;
    }
    u8::from_str_radix(hex, 16).ok()
}

/// Ids produced by [`Vocabulary::tokenize`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<u32>);

impl TokenSequence {
    pub fn new(ids: Vec<u32>) -> Self {
        Self(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_ids(self) -> Vec<u32> {
        self.0
    }
}

impl From<Vec<u32>> for TokenSequence {
    fn from(ids: Vec<u32>) -> Self {
        Self(ids)
    }
}

/// An ordered token set with a dense id assignment.
///
/// The first `base_size` tokens are the original vocabulary; anything after
/// that was appended by vocabulary extension. Instances are immutable once
/// handed out and can be shared freely across threads.
#[derive(Clone)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    index: HashMap<String, u32>,
    base_size: usize,
    marker: char,
    byte_fallback: bool,
    byte_ids: Vec<Option<u32>>,
    matcher: Trie,
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vocabulary")
            .field("len", &self.tokens.len())
            .field("base_size", &self.base_size)
            .field("marker", &self.marker)
            .field("byte_fallback", &self.byte_fallback)
            .finish()
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && self.base_size == other.base_size
            && self.marker == other.marker
            && self.byte_fallback == other.byte_fallback
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    /// Builds a fresh vocabulary. Specials missing from `tokens` are appended,
    /// then (with byte fallback on) any missing `<0xNN>` tokens. The result's
    /// `base_size` is its full length.
    pub fn build<S: AsRef<str>>(
        tokens: &[S],
        marker: char,
        byte_fallback: bool,
        specials: &[S],
    ) -> Result<Self> {
        let mut texts: Vec<String> = Vec::with_capacity(tokens.len() + specials.len() + 256);
        let mut seen = HashSet::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            let t = t.as_ref();
            if t.is_empty() {
                return Err(Error::EmptyToken(i));
            }
            if !seen.insert(t.to_owned()) {
                return Err(Error::DuplicateToken(t.to_owned()));
            }
            texts.push(t.to_owned());
        }
        let specials: Vec<String> = specials.iter().map(|s| s.as_ref().to_owned()).collect();
        for s in &specials {
            if s.is_empty() {
                return Err(Error::invalid("special token text must be non-empty"));
            }
            if seen.insert(s.clone()) {
                texts.push(s.clone());
            }
        }
        if byte_fallback {
            for b in 0..=255u8 {
                let t = byte_token_text(b);
                if seen.insert(t.clone()) {
                    texts.push(t);
                }
            }
        }
        let base_size = texts.len();
        Self::from_parts(texts, base_size, marker, byte_fallback, &specials)
    }

    /// Assembles a vocabulary from an explicit token list, as stored on disk.
    pub fn from_parts(
        tokens: Vec<String>,
        base_size: usize,
        marker: char,
        byte_fallback: bool,
        specials: &[String],
    ) -> Result<Self> {
        if base_size > tokens.len() {
            return Err(Error::VocabFormat(format!(
                "base_size {base_size} exceeds token count {}",
                tokens.len()
            )));
        }
        let special_set: HashSet<&str> = specials.iter().map(String::as_str).collect();
        let mut vocab = Self {
            tokens: Vec::with_capacity(tokens.len()),
            index: HashMap::with_capacity(tokens.len()),
            base_size,
            marker,
            byte_fallback,
            byte_ids: vec![None; 256],
            matcher: Trie::new(),
        };
        for (i, text) in tokens.into_iter().enumerate() {
            if text.is_empty() {
                return Err(Error::EmptyToken(i));
            }
            let kind = if special_set.contains(text.as_str()) {
                TokenKind::Special
            } else if parse_byte_token(&text).is_some() {
                TokenKind::ByteFallback
            } else {
                TokenKind::Normal
            };
            vocab.push(text, kind)?;
        }
        for s in specials {
            if !vocab.index.contains_key(s) {
                return Err(Error::MissingSpecial(s.clone()));
            }
        }
        if byte_fallback {
            if let Some(b) = (0..=255u8).find(|&b| vocab.byte_ids[b as usize].is_none()) {
                return Err(Error::VocabFormat(format!(
                    "byte fallback is enabled but {} is missing",
                    byte_token_text(b)
                )));
            }
        }
        Ok(vocab)
    }

    fn push(&mut self, text: String, kind: TokenKind) -> Result<u32> {
        if self.index.contains_key(&text) {
            return Err(Error::DuplicateToken(text));
        }
        let id = self.tokens.len() as u32;
        match kind {
            TokenKind::Normal => self.matcher.insert(text.as_bytes(), id),
            TokenKind::ByteFallback => {
                if let Some(b) = parse_byte_token(&text) {
                    self.byte_ids[b as usize] = Some(id);
                }
            }
            TokenKind::Special => {}
        }
        self.index.insert(text.clone(), id);
        self.tokens.push(Token { text, kind });
        Ok(id)
    }

    /// Appends an extension token after the current end. Only used while a
    /// working vocabulary is being grown; public instances stay immutable.
    pub(crate) fn push_extension(&mut self, text: &str) -> Result<u32> {
        let kind = if parse_byte_token(text).is_some() {
            TokenKind::ByteFallback
        } else {
            TokenKind::Normal
        };
        self.push(text.to_owned(), kind)
    }

    /// Returns a copy with `extra` appended after the existing tokens. The
    /// base partition is preserved.
    pub fn extended<I, S>(&self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = self.clone();
        for t in extra {
            let t = t.as_ref();
            if t.is_empty() {
                return Err(Error::EmptyToken(out.len()));
            }
            out.push_extension(t)?;
        }
        Ok(out)
    }

    /// The base partition alone, as a vocabulary of its own.
    pub fn base(&self) -> Self {
        let texts = self.tokens[..self.base_size].iter().map(|t| t.text.clone()).collect();
        Self::from_parts(texts, self.base_size, self.marker, self.byte_fallback, &self.specials())
            .expect("prefix of a valid vocabulary is valid")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn marker(&self) -> char {
        self.marker
    }

    pub fn byte_fallback(&self) -> bool {
        self.byte_fallback
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, id: u32) -> Option<&Token> {
        self.tokens.get(id as usize)
    }

    pub fn id(&self, text: &str) -> Option<u32> {
        self.index.get(text).copied()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.index.contains_key(text)
    }

    pub fn specials(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Special)
            .map(|t| t.text.clone())
            .collect()
    }

    /// Id of a special token, failing if it is absent or not special.
    pub fn special_id(&self, text: &str) -> Result<u32> {
        match self.id(text) {
            Some(id) if self.tokens[id as usize].kind == TokenKind::Special => Ok(id),
            _ => Err(Error::MissingSpecial(text.to_owned())),
        }
    }

    /// Tokens appended after the base partition.
    pub fn extension_tokens(&self) -> &[Token] {
        &self.tokens[self.base_size..]
    }

    pub fn is_byte_fallback(&self, id: u32) -> bool {
        self.token(id).is_some_and(|t| t.kind == TokenKind::ByteFallback)
    }

    pub fn tokenize(&self, text: &str) -> Result<TokenSequence> {
        let mut ids = Vec::with_capacity(text.len() / 2 + 1);
        self.encode_into(text, &mut ids)?;
        Ok(TokenSequence(ids))
    }

    /// Tokenizes and returns the pieces' surface forms instead of ids.
    pub fn tokenize_to_pieces(&self, text: &str) -> Result<Vec<String>> {
        let seq = self.tokenize(text)?;
        Ok(seq.ids().iter().map(|&id| self.tokens[id as usize].text.clone()).collect())
    }

    fn encode_into(&self, text: &str, out: &mut Vec<u32>) -> Result<()> {
        let mut normalized = String::new();
        for (seg_start, segment) in word_segments(text) {
            let (has_boundary, body, body_start) = match segment.strip_prefix(' ') {
                Some(rest) => (true, rest, seg_start + 1),
                None => (false, segment, seg_start),
            };
            let mut first = true;
            let mut piece_start = 0usize;
            for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), '\0'))) {
                let at_end = i == body.len();
                if !at_end && ch != self.marker {
                    continue;
                }
                let piece = &body[piece_start..i];
                if first && has_boundary {
                    normalized.clear();
                    normalized.push(self.marker);
                    normalized.push_str(piece);
                    self.match_piece(&normalized, Some(seg_start), body_start + piece_start, out)?;
                } else if !piece.is_empty() {
                    self.match_piece(piece, None, body_start + piece_start, out)?;
                }
                first = false;
                if !at_end {
                    // A literal marker never joins a normal token.
                    let mut buf = [0u8; 4];
                    self.emit_bytes(ch.encode_utf8(&mut buf).as_bytes(), body_start + i, out)?;
                    piece_start = i + ch.len_utf8();
                }
            }
        }
        Ok(())
    }

    /// Greedy longest-match over one piece. With `boundary` set, the piece
    /// starts with a synthetic marker standing for the space at that offset;
    /// `origin` is the input offset of the piece's remaining characters.
    fn match_piece(
        &self,
        piece: &str,
        boundary: Option<usize>,
        origin: usize,
        out: &mut Vec<u32>,
    ) -> Result<()> {
        let bytes = piece.as_bytes();
        let marker_len = if boundary.is_some() { self.marker.len_utf8() } else { 0 };
        let mut pos = 0;
        while pos < bytes.len() {
            if let Some((id, len)) = self.matcher.longest_prefix(&bytes[pos..]) {
                out.push(id);
                pos += len;
                continue;
            }
            if let (Some(space_at), 0) = (boundary, pos) {
                self.emit_bytes(b" ", space_at, out)?;
                pos = marker_len;
                continue;
            }
            let ch = piece[pos..].chars().next().expect("pos is on a char boundary");
            let len = ch.len_utf8();
            self.emit_bytes(&bytes[pos..pos + len], origin + pos - marker_len, out)?;
            pos += len;
        }
        Ok(())
    }

    fn emit_bytes(&self, bytes: &[u8], offset: usize, out: &mut Vec<u32>) -> Result<()> {
        if !self.byte_fallback {
            return Err(Error::Unencodable {
                offset,
                byte: bytes[0],
            });
        }
        for &b in bytes {
            out.push(self.byte_ids[b as usize].expect("byte fallback vocabularies hold all 256 bytes"));
        }
        Ok(())
    }

    /// Inverse of [`tokenize`](Self::tokenize); markers become spaces.
    pub fn detokenize(&self, seq: &TokenSequence) -> Result<String> {
        self.decode_ids(seq.ids(), true)
    }

    /// Decodes ids. With `markers_as_spaces` off, marker characters in normal
    /// tokens are kept verbatim.
    pub fn decode_ids(&self, ids: &[u32], markers_as_spaces: bool) -> Result<String> {
        let mut out = String::new();
        let mut pending: Vec<u8> = Vec::new();
        for (index, &id) in ids.iter().enumerate() {
            let token = self.token(id).ok_or(Error::InvalidId {
                id,
                len: self.len(),
            })?;
            if token.kind == TokenKind::ByteFallback {
                pending.push(parse_byte_token(&token.text).expect("byte token surface form"));
                continue;
            }
            flush_bytes(&mut pending, &mut out, index)?;
            match token.kind {
                TokenKind::Normal if markers_as_spaces => {
                    for ch in token.text.chars() {
                        out.push(if ch == self.marker { ' ' } else { ch });
                    }
                }
                _ => out.push_str(&token.text),
            }
        }
        flush_bytes(&mut pending, &mut out, ids.len())?;
        Ok(out)
    }
}

fn flush_bytes(pending: &mut Vec<u8>, out: &mut String, index: usize) -> Result<()> {
    if pending.is_empty() {
        return Ok(());
    }
    let s = std::str::from_utf8(pending).map_err(|_| Error::InvalidByteRun { index })?;
    out.push_str(s);
    pending.clear();
    Ok(())
}

/// Splits `text` before every space. Yields `(byte offset, segment)`.
fn word_segments(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut start = 0;
    let mut done = text.is_empty();
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let rest = &text[start..];
        let end = rest
            .bytes()
            .skip(1)
            .position(|b| b == b' ')
            .map(|p| start + p + 1)
            .unwrap_or(text.len());
        let item = (start, &text[start..end]);
        start = end;
        done = end == text.len();
        Some(item)
    })
}
