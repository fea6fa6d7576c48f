//! Argument structs. Every field is optional on the command line so that it
//! can also come from the config file; requiredness is checked after merging.
//! Field names double as config keys.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "seatok", version, about = "Vocabulary extension, tokenizer metrics and training-data preparation")]
pub struct Cli {
    /// TOML file with one table per subcommand, e.g. [vocab.extend].
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Echo every effective setting to stderr before running.
    #[arg(long, global = true)]
    pub print_effective_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, import, extend and inspect vocabularies.
    #[command(subcommand)]
    Vocab(VocabCommand),
    /// Encoding-efficiency measurements.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Corpus filtering, sampling, packing and multi-turn joining.
    #[command(subcommand)]
    Data(DataCommand),
    /// Preference-pair generation and export.
    #[command(subcommand)]
    Pref(PrefCommand),
}

#[derive(Debug, Subcommand)]
pub enum VocabCommand {
    /// Build a vocabulary file from a plain token list.
    #[command(override_usage = "seatok vocab build --tokens <PATH> --out <PATH> [OPTIONS]")]
    Build(VocabBuild),
    /// Convert an external token list into a vocabulary file.
    #[command(override_usage = "seatok vocab import --input <PATH> --out <PATH> [--format <FORMAT>]")]
    Import(VocabImport),
    /// Extend a base vocabulary with target tokens discovered on a corpus.
    #[command(override_usage = "seatok vocab extend --base <PATH> --target <PATH> --corpus <PATH> --min-freq <N> --out <PATH> [OPTIONS]")]
    Extend(VocabExtend),
    /// Print a vocabulary summary, or the encoding of --text.
    #[command(override_usage = "seatok vocab inspect --vocab <PATH> [--text <TEXT>]")]
    Inspect(VocabInspect),
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Per-language compression ratios against an English baseline.
    #[command(override_usage = "seatok metrics ratio --subject <[NAME=]PATH>... --baseline <PATH> --parallel <PATH> [OPTIONS]")]
    Ratio(MetricsRatio),
    /// Per-language token statistics of a corpus.
    #[command(override_usage = "seatok metrics stats --vocab <PATH> --corpus <PATH> [--out <PATH>]")]
    Stats(MetricsStats),
}

#[derive(Debug, Subcommand)]
pub enum DataCommand {
    /// Keep documents whose detected language is allowed.
    #[command(override_usage = "seatok data filter --corpus <PATH> --out <PATH> (--profiles <PATH> | --identifier <CMD>) [OPTIONS]")]
    Filter(DataFilter),
    /// Draw documents from named streams under a phase schedule.
    #[command(override_usage = "seatok data sample --stream <NAME=PATH>... --phase <WEIGHTS:LEN>... --seed <N> --out <PATH> [OPTIONS]")]
    Sample(DataSample),
    /// Pack documents into fixed-length sequences with loss masks.
    #[command(override_usage = "seatok data pack --corpus <PATH> --vocab <PATH> --max-len <N> --out <PATH> [OPTIONS]")]
    Pack(DataPack),
    /// Interleave pretraining and instruction documents, then pack.
    #[command(override_usage = "seatok data pack-hybrid --pretrain <PATH> --sft <PATH> --vocab <PATH> --max-len <N> --seed <N> --out <PATH> [OPTIONS]")]
    PackHybrid(DataPackHybrid),
    /// Join single-turn instruction records into conversations.
    #[command(override_usage = "seatok data join-multiturn --corpus <PATH> --seed <N> --out <PATH> [--turns <K:P,...>]")]
    JoinMultiturn(DataJoinMultiturn),
}

#[derive(Debug, Subcommand)]
pub enum PrefCommand {
    /// Judge response pairs in both orders and keep consistent preferences.
    #[command(override_usage = "seatok pref generate --pairs <PATH> --judge <JUDGE> --seed <N> --out <PATH> [OPTIONS]")]
    Generate(PrefGenerate),
    /// Write prompt/chosen/rejected triples.
    #[command(override_usage = "seatok pref export --records <PATH> --out <PATH>")]
    Export(PrefExport),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct VocabBuild {
    /// Token list, one token per line.
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    /// Word-boundary marker character [default: ▁].
    #[arg(long)]
    pub marker: Option<String>,
    /// Append the 256 byte tokens [default: true].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub byte_fallback: Option<bool>,
    /// Special token; repeatable.
    #[arg(long)]
    pub special: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct VocabImport {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// plain_list or tsv_with_scores [default: plain_list].
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct VocabExtend {
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// JSONL corpus; every text field counts as one document.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub min_freq: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extension report [default: <out stem>.report.json].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Frequency table [default: <out stem>.freq.tsv].
    #[arg(long)]
    pub frequencies: Option<PathBuf>,
    /// Only use documents tagged with this language.
    #[arg(long)]
    pub lang: Option<String>,
    /// Reject kept tokens longer than this many characters.
    #[arg(long)]
    pub max_chars: Option<usize>,
    /// Reject kept tokens mixing Unicode scripts.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub script_purity: Option<bool>,
    /// Reject kept tokens containing digits or punctuation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub reject_digits_punct: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct VocabInspect {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Encode this text instead of summarizing.
    #[arg(long)]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MetricsRatio {
    /// Subject vocabulary as NAME=PATH or PATH; repeatable.
    #[arg(long)]
    pub subject: Option<Vec<String>>,
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// JSONL of {"lang","text","english"}.
    #[arg(long)]
    pub parallel: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the table to this file.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MetricsStats {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// JSON destination [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataFilter {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSONL of {"lang","text"} seed texts for the built-in identifier.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// External identifier command speaking line-delimited JSON.
    #[arg(long)]
    pub identifier: Option<String>,
    /// Allowed language; repeatable [default: all].
    #[arg(long)]
    pub allow: Option<Vec<String>>,
    /// Minimum confidence [default: 0].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Longest character n-gram [default: 3].
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Profile size [default: 300].
    #[arg(long)]
    pub top_k: Option<usize>,
    /// External identifier timeout [default: 10000].
    #[arg(long)]
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataSample {
    /// Stream as NAME=PATH; repeatable.
    #[arg(long)]
    pub stream: Option<Vec<String>>,
    /// Phase as NAME=W,NAME=W:LENGTH; repeatable, in order.
    #[arg(long)]
    pub phase: Option<Vec<String>>,
    /// Re-feed weights NAME=W,...; splits the single --phase into a main
    /// and a trailing re-feed phase.
    #[arg(long)]
    pub refeed: Option<String>,
    /// Share of the schedule given to the re-feed phase [default: 0.1].
    #[arg(long)]
    pub refeed_fraction: Option<f64>,
    /// renormalize or error [default: renormalize].
    #[arg(long)]
    pub on_exhausted: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PackOptions {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Separator special [default: <sep>].
    #[arg(long)]
    pub sep: Option<String>,
    /// Padding special [default: <pad>].
    #[arg(long)]
    pub pad: Option<String>,
    /// Special inserted before each prompt; needs --assistant-marker.
    #[arg(long)]
    pub user_marker: Option<String>,
    /// Special inserted before each response; needs --user-marker.
    #[arg(long)]
    pub assistant_marker: Option<String>,
    /// JSONL destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional flat binary destination.
    #[arg(long)]
    pub binary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataPack {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub pack: PackOptions,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataPackHybrid {
    #[arg(long)]
    pub pretrain: Option<PathBuf>,
    #[arg(long)]
    pub sft: Option<PathBuf>,
    /// Probability of drawing an instruction document [default: 0.5].
    #[arg(long)]
    pub mix_ratio: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub pack: PackOptions,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataJoinMultiturn {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Turn-count distribution K:P,... [default: 1:0.25,2:0.25,3:0.25,4:0.25].
    #[arg(long)]
    pub turns: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PrefGenerate {
    /// JSONL of {"prompt","response_a","response_b"}.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// mock:longer-wins, mock:lexicographic, mock:always-first, cmd:COMMAND or an http(s):// URL.
    #[arg(long)]
    pub judge: Option<String>,
    /// Rubric text sent with every query.
    #[arg(long)]
    pub criteria: Option<String>,
    /// Read the rubric from a file.
    #[arg(long)]
    pub criteria_file: Option<PathBuf>,
    /// Per-query timeout for external judges [default: 30000].
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Pairs judged concurrently [default: 4].
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Kept records, JSONL.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dropped pairs with reasons, JSONL.
    #[arg(long)]
    pub dropped: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PrefExport {
    /// Records written by `pref generate`.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
