//! Regenerates `tests/fixtures/synthetic/` from a fixed seed.
//!
//! Usage: cargo run -p seatok --example build_synthetic_fixture [DIR]

#[path = "../tests/common/mod.rs"]
mod common;

use std::path::PathBuf;

fn main() {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic"));
    let fixture = common::synthetic::build();
    common::synthetic::write(&fixture, &dir);
    println!(
        "{}: before {:.4}, after {:.4}, {} extension tokens",
        dir.display(),
        fixture.expected.mean_ratio_before,
        fixture.expected.mean_ratio_after,
        fixture.expected.extension_tokens
    );
}
