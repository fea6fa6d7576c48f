//! Vocabulary extension, encoding-efficiency metrics and multilingual
//! training-data preparation for subword tokenizers.

pub mod cli;
pub mod data;
pub mod error;
pub mod extend;
pub mod jsonl;
pub mod metrics;
pub mod preference;
pub mod quality;
mod subprocess;
pub mod tokenizer;
pub mod workflow;

pub use error::{Error, Result};
pub use tokenizer::{TokenKind, TokenSequence, Vocabulary};
