use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::args::*;
use super::{input, output, require, require_seed, required_output, CliError, CliResult, Context};
use crate::data::{
    self, default_turns_distribution, filter_corpus, join_multiturn, pack_documents, pack_hybrid,
    parse_turns_distribution, Allowed, Document, ExhaustionPolicy, LanguageIdentifier, PackConfig, PackedSequence,
    Phase, ProfileSet, Sampler, SamplingSchedule, SubprocessIdentifier, TurnMarkers,
};
use crate::data::langid::ProfileConfig;
use crate::data::pack::write_binary;
use crate::jsonl;
use crate::metrics::{corpus_token_stats, render_table};
use crate::preference::{
    build_preference_dataset, export_dpo, AlwaysFirst, HttpJudge, Judge, Lexicographic, LongerWins,
    PreferenceRecord, ResponsePair, SubprocessJudge,
};
use crate::quality::FilterConfig;
use crate::tokenizer::{import_external_vocab, load_vocab, save_vocab, ImportFormat, Vocabulary, DEFAULT_MARKER};
use crate::workflow::{self, ExtendRequest};

fn write_file(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|e| CliError::runtime("io", format!("{}: {e}", path.display())))
}

fn stdout_line(text: &str) -> CliResult {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .map_err(|e| CliError::runtime("io", format!("stdout: {e}")))
}

fn invalid(code: &'static str, message: impl Into<String>) -> CliError {
    CliError::validation(code, message)
}

/// Splits `NAME=VALUE`.
fn split_named<'a>(item: &'a str, what: &str) -> CliResult<(&'a str, &'a str)> {
    item.split_once('=')
        .filter(|(n, v)| !n.trim().is_empty() && !v.trim().is_empty())
        .map(|(n, v)| (n.trim(), v.trim()))
        .ok_or_else(|| invalid("invalid-value", format!("{what} {item:?} is not NAME=VALUE")))
}

fn parse_weights(spec: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut weights = BTreeMap::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, w) = split_named(part, "weight")?;
        let w: f64 = w
            .parse()
            .map_err(|_| invalid("invalid-value", format!("weight {w:?} for {name:?} is not a number")))?;
        if weights.insert(name.to_owned(), w).is_some() {
            return Err(invalid("invalid-value", format!("stream {name:?} weighted twice in {spec:?}")));
        }
    }
    Ok(weights)
}

/// `a=0.5,b=0.5:100`.
fn parse_phase(spec: &str) -> CliResult<Phase> {
    let (weights, length) = spec
        .rsplit_once(':')
        .ok_or_else(|| invalid("invalid-value", format!("phase {spec:?} is not WEIGHTS:LENGTH")))?;
    let length = length
        .trim()
        .parse()
        .map_err(|_| invalid("invalid-value", format!("phase length {length:?} is not an integer")))?;
    Ok(Phase {
        weights: parse_weights(weights)?,
        length,
    })
}

pub(super) fn vocab_build(ctx: &Context, flags: &VocabBuild) -> CliResult {
    const S: &[&str] = &["vocab", "build"];
    let a: VocabBuild = ctx.resolve(flags, S)?;
    let tokens_path = input(&a.tokens, "tokens", S)?;
    let out = required_output(&a.out, "out", S)?;
    let marker = match a.marker.as_deref() {
        None => DEFAULT_MARKER,
        Some(m) => {
            let mut chars = m.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(invalid("invalid-value", format!("marker {m:?} must be one character"))),
            }
        }
    };
    let text = std::fs::read_to_string(&tokens_path)
        .map_err(|e| CliError::runtime("io", format!("{}: {e}", tokens_path.display())))?;
    let tokens: Vec<String> = text.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect();
    let specials = a.special.unwrap_or_default();
    let vocab = Vocabulary::build(&tokens, marker, a.byte_fallback.unwrap_or(true), &specials)?;
    save_vocab(&vocab, &out)?;
    log::info!("wrote {} tokens to {}", vocab.len(), out.display());
    Ok(())
}

pub(super) fn vocab_import(ctx: &Context, flags: &VocabImport) -> CliResult {
    const S: &[&str] = &["vocab", "import"];
    let a: VocabImport = ctx.resolve(flags, S)?;
    let path = input(&a.input, "input", S)?;
    let out = required_output(&a.out, "out", S)?;
    let format: ImportFormat = a.format.as_deref().unwrap_or("plain_list").parse()?;
    let vocab = import_external_vocab(&path, format)?;
    save_vocab(&vocab, &out)?;
    log::info!("imported {} tokens into {}", vocab.len(), out.display());
    Ok(())
}

pub(super) fn vocab_extend(ctx: &Context, flags: &VocabExtend) -> CliResult {
    const S: &[&str] = &["vocab", "extend"];
    let a: VocabExtend = ctx.resolve(flags, S)?;
    let base = input(&a.base, "base", S)?;
    let target = input(&a.target, "target", S)?;
    let corpus = input(&a.corpus, "corpus", S)?;
    let min_freq = require(&a.min_freq, "min_freq", S)?;
    if min_freq == 0 {
        return Err(invalid("invalid-value", "--min-freq must be at least 1"));
    }
    let out = required_output(&a.out, "out", S)?;
    let mut req = ExtendRequest::new(base, target, corpus, min_freq, out);
    req.report = a.report.as_deref().map(output).transpose()?;
    req.frequencies = a.frequencies.as_deref().map(output).transpose()?;
    req.lang = a.lang;
    req.filter = FilterConfig {
        max_chars: a.max_chars,
        script_purity: a.script_purity.unwrap_or(false),
        reject_digits_punct: a.reject_digits_punct.unwrap_or(false),
    };
    let summary = workflow::extend_files(&req)?;
    stdout_line(&serde_json::to_string(&summary).map_err(crate::Error::from)?)
}

pub(super) fn vocab_inspect(ctx: &Context, flags: &VocabInspect) -> CliResult {
    const S: &[&str] = &["vocab", "inspect"];
    let a: VocabInspect = ctx.resolve(flags, S)?;
    let vocab = load_vocab(input(&a.vocab, "vocab", S)?)?;
    let json = match &a.text {
        Some(text) => {
            #[derive(Serialize)]
            struct Encoding {
                pieces: Vec<String>,
                ids: Vec<u32>,
            }
            let seq = vocab.tokenize(text)?;
            let pieces = seq
                .ids()
                .iter()
                .map(|&id| vocab.token(id).expect("valid id").text().to_owned())
                .collect();
            serde_json::to_string(&Encoding {
                pieces,
                ids: seq.into_ids(),
            })
        }
        None => {
            #[derive(Serialize)]
            struct Summary {
                size: usize,
                base_size: usize,
                extension_size: usize,
                marker: char,
                byte_fallback: bool,
                specials: Vec<String>,
            }
            serde_json::to_string(&Summary {
                size: vocab.len(),
                base_size: vocab.base_size(),
                extension_size: vocab.extension_tokens().len(),
                marker: vocab.marker(),
                byte_fallback: vocab.byte_fallback(),
                specials: vocab.specials(),
            })
        }
    }
    .map_err(crate::Error::from)?;
    stdout_line(&json)
}

fn subject_entry(spec: &str) -> CliResult<(String, PathBuf)> {
    let (name, path) = match spec.split_once('=') {
        Some((n, p)) if !n.is_empty() => (n.to_owned(), PathBuf::from(p)),
        _ => {
            let p = PathBuf::from(spec);
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_owned());
            (name, p)
        }
    };
    Ok((name, super::existing(&path)?))
}

pub(super) fn metrics_ratio(ctx: &Context, flags: &MetricsRatio) -> CliResult {
    const S: &[&str] = &["metrics", "ratio"];
    let a: MetricsRatio = ctx.resolve(flags, S)?;
    let subjects = require(&a.subject, "subject", S)?
        .iter()
        .map(|s| subject_entry(s))
        .collect::<CliResult<Vec<_>>>()?;
    let baseline = input(&a.baseline, "baseline", S)?;
    let parallel = input(&a.parallel, "parallel", S)?;
    let out = a.out.as_deref().map(output).transpose()?;
    let table_path = a.table.as_deref().map(output).transpose()?;
    let reports = workflow::ratio_files(&subjects, &baseline, &parallel)?;
    for (name, report) in &reports {
        for (lang, msg) in &report.errors {
            log::warn!("{name}: {lang}: {msg}");
        }
    }
    let columns: Vec<(&str, &crate::metrics::CompressionReport)> = subjects
        .iter()
        .map(|(name, _)| (name.as_str(), &reports[name]))
        .collect();
    let table = render_table(&columns);
    if let Some(path) = out {
        write_file(&path, &workflow::to_json_pretty(&reports)?)?;
    }
    if let Some(path) = table_path {
        write_file(&path, &table)?;
    }
    stdout_line(&table)
}

pub(super) fn metrics_stats(ctx: &Context, flags: &MetricsStats) -> CliResult {
    const S: &[&str] = &["metrics", "stats"];
    let a: MetricsStats = ctx.resolve(flags, S)?;
    let vocab = load_vocab(input(&a.vocab, "vocab", S)?)?;
    let corpus = data::read_corpus(input(&a.corpus, "corpus", S)?)?;
    let out = a.out.as_deref().map(output).transpose()?;
    let json = workflow::to_json_pretty(&corpus_token_stats(&vocab, &corpus)?)?;
    match out {
        Some(path) => write_file(&path, &json),
        None => stdout_line(&json),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSeed {
    lang: String,
    text: String,
}

pub(super) fn data_filter(ctx: &Context, flags: &DataFilter) -> CliResult {
    const S: &[&str] = &["data", "filter"];
    let a: DataFilter = ctx.resolve(flags, S)?;
    let corpus = data::read_corpus(input(&a.corpus, "corpus", S)?)?;
    let out = required_output(&a.out, "out", S)?;
    let threshold = a.threshold.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(invalid("invalid-value", format!("threshold {threshold} is outside [0, 1]")));
    }
    let identifier: Box<dyn LanguageIdentifier> = match (&a.profiles, &a.identifier) {
        (Some(_), None) => {
            let seeds: Vec<ProfileSeed> = jsonl::read(input(&a.profiles, "profiles", S)?)?;
            let mut texts: BTreeMap<String, String> = BTreeMap::new();
            for s in seeds {
                let t = texts.entry(s.lang).or_default();
                if !t.is_empty() {
                    t.push('\n');
                }
                t.push_str(&s.text);
            }
            let defaults = ProfileConfig::default();
            let cfg = ProfileConfig {
                max_n: a.max_n.unwrap_or(defaults.max_n),
                top_k: a.top_k.unwrap_or(defaults.top_k),
            };
            Box::new(ProfileSet::train(texts, cfg)?)
        }
        (None, Some(cmd)) => Box::new(SubprocessIdentifier::spawn(
            cmd,
            Duration::from_millis(a.timeout_ms.unwrap_or(10_000)),
        )?),
        _ => return Err(invalid("missing-arg", "exactly one of --profiles or --identifier is required").with_usage(super::usage_of(S))),
    };
    let allowed = match a.allow {
        None => Allowed::All,
        Some(langs) => Allowed::Only(langs.into_iter().collect::<BTreeSet<_>>()),
    };
    let outcome = filter_corpus(corpus, identifier.as_ref(), &allowed, threshold)?;
    data::write_corpus(&out, &outcome.kept)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        kept: usize,
        discarded: &'a BTreeMap<data::langid::DiscardReason, usize>,
    }
    let summary = Summary {
        kept: outcome.kept.len(),
        discarded: &outcome.discarded,
    };
    stdout_line(&serde_json::to_string(&summary).map_err(crate::Error::from)?)
}

pub(super) fn data_sample(ctx: &Context, flags: &DataSample) -> CliResult {
    const S: &[&str] = &["data", "sample"];
    let a: DataSample = ctx.resolve(flags, S)?;
    let mut streams = BTreeMap::new();
    for spec in require(&a.stream, "stream", S)? {
        let (name, path) = split_named(&spec, "stream")?;
        let docs = data::read_corpus(super::existing(Path::new(path))?)?;
        if streams.insert(name.to_owned(), docs.into_iter()).is_some() {
            return Err(invalid("invalid-value", format!("stream {name:?} given twice")));
        }
    }
    let phases = require(&a.phase, "phase", S)?
        .iter()
        .map(|p| parse_phase(p))
        .collect::<CliResult<Vec<_>>>()?;
    let schedule = match &a.refeed {
        None => SamplingSchedule::new(phases)?,
        Some(refeed) => {
            let [main] = <[Phase; 1]>::try_from(phases)
                .map_err(|_| invalid("invalid-value", "--refeed needs exactly one --phase to split"))?;
            SamplingSchedule::with_refeed(main.weights, parse_weights(refeed)?, main.length, a.refeed_fraction.unwrap_or(0.1))?
        }
    };
    let policy = match a.on_exhausted.as_deref().unwrap_or("renormalize") {
        "renormalize" => ExhaustionPolicy::Renormalize,
        "error" => ExhaustionPolicy::Error,
        other => return Err(invalid("invalid-value", format!("--on-exhausted {other:?}: expected renormalize or error"))),
    };
    let seed = require_seed(a.seed, S)?;
    let out = required_output(&a.out, "out", S)?;
    let sampled = Sampler::new(streams, schedule, seed, policy)?.collect::<crate::Result<Vec<_>>>()?;
    jsonl::write(&out, &sampled)?;
    log::info!("sampled {} documents into {}", sampled.len(), out.display());
    Ok(())
}

struct PackTarget {
    vocab: Vocabulary,
    cfg: PackConfig,
    markers: Option<TurnMarkers>,
    out: PathBuf,
    binary: Option<PathBuf>,
}

fn pack_target(p: &PackOptions, section: &[&str]) -> CliResult<PackTarget> {
    let vocab = load_vocab(input(&p.vocab, "vocab", section)?)?;
    let max_len = require(&p.max_len, "max_len", section)?;
    let cfg = PackConfig::from_vocab(
        &vocab,
        max_len,
        p.sep.as_deref().unwrap_or("<sep>"),
        p.pad.as_deref().unwrap_or("<pad>"),
    )?;
    let markers = match (&p.user_marker, &p.assistant_marker) {
        (None, None) => None,
        (Some(u), Some(a)) => Some(TurnMarkers {
            user: vocab.special_id(u)?,
            assistant: vocab.special_id(a)?,
        }),
        _ => return Err(invalid("invalid-value", "--user-marker and --assistant-marker go together")),
    };
    Ok(PackTarget {
        out: required_output(&p.out, "out", section)?,
        binary: p.binary.as_deref().map(output).transpose()?,
        vocab,
        cfg,
        markers,
    })
}

fn write_packed(target: &PackTarget, seqs: &[PackedSequence]) -> CliResult {
    jsonl::write(&target.out, seqs)?;
    if let Some(path) = &target.binary {
        write_binary(path, seqs)?;
    }
    log::info!("packed {} sequences into {}", seqs.len(), target.out.display());
    Ok(())
}

pub(super) fn data_pack(ctx: &Context, flags: &DataPack) -> CliResult {
    const S: &[&str] = &["data", "pack"];
    let a: DataPack = ctx.resolve(flags, S)?;
    let docs = data::read_corpus(input(&a.corpus, "corpus", S)?)?;
    let target = pack_target(&a.pack, S)?;
    let seqs = pack_documents(docs, &target.vocab, target.cfg, target.markers)?;
    write_packed(&target, &seqs)
}

pub(super) fn data_pack_hybrid(ctx: &Context, flags: &DataPackHybrid) -> CliResult {
    const S: &[&str] = &["data", "pack-hybrid"];
    let a: DataPackHybrid = ctx.resolve(flags, S)?;
    let pretrain = data::read_corpus(input(&a.pretrain, "pretrain", S)?)?;
    let sft = data::read_corpus(input(&a.sft, "sft", S)?)?;
    if let Some(i) = pretrain.iter().position(Document::is_sft) {
        return Err(invalid("invalid-input", format!("--pretrain record {} is an instruction record", i + 1)));
    }
    if let Some(i) = sft.iter().position(|d| !d.is_sft()) {
        return Err(invalid("invalid-input", format!("--sft record {} is not an instruction record", i + 1)));
    }
    let seed = require_seed(a.seed, S)?;
    let target = pack_target(&a.pack, S)?;
    let mix = a.mix_ratio.unwrap_or(0.5);
    let seqs = pack_hybrid(&pretrain, &sft, mix, &target.vocab, target.cfg, seed, target.markers)?;
    write_packed(&target, &seqs)
}

pub(super) fn data_join_multiturn(ctx: &Context, flags: &DataJoinMultiturn) -> CliResult {
    const S: &[&str] = &["data", "join-multiturn"];
    let a: DataJoinMultiturn = ctx.resolve(flags, S)?;
    let docs = data::read_corpus(input(&a.corpus, "corpus", S)?)?;
    let turns = match &a.turns {
        Some(spec) => parse_turns_distribution(spec)?,
        None => default_turns_distribution(),
    };
    let seed = require_seed(a.seed, S)?;
    let out = required_output(&a.out, "out", S)?;
    let joined = join_multiturn(docs, &turns, seed)?;
    data::write_corpus(&out, &joined)?;
    log::info!("wrote {} conversations to {}", joined.len(), out.display());
    Ok(())
}

fn make_judge(spec: &str, criteria: String, timeout: Duration) -> CliResult<Box<dyn Judge>> {
    let judge: Box<dyn Judge> = match spec {
        "mock:longer-wins" => Box::new(LongerWins),
        "mock:lexicographic" => Box::new(Lexicographic),
        "mock:always-first" => Box::new(AlwaysFirst),
        s if s.starts_with("cmd:") => Box::new(
            SubprocessJudge::spawn(&s["cmd:".len()..], criteria, timeout)
                .map_err(|e| CliError::runtime("judge-spawn", e.to_string()))?,
        ),
        s if s.starts_with("http://") || s.starts_with("https://") => Box::new(HttpJudge::new(s, criteria, timeout)),
        other => {
            return Err(invalid(
                "invalid-value",
                format!("unknown judge {other:?}: expected mock:longer-wins, mock:lexicographic, mock:always-first, cmd:COMMAND or an http(s):// URL"),
            ))
        }
    };
    Ok(judge)
}

pub(super) fn pref_generate(ctx: &Context, flags: &PrefGenerate) -> CliResult {
    const S: &[&str] = &["pref", "generate"];
    let a: PrefGenerate = ctx.resolve(flags, S)?;
    let pairs: Vec<ResponsePair> = jsonl::read(input(&a.pairs, "pairs", S)?)?;
    let judge_spec = require(&a.judge, "judge", S)?;
    let criteria = match (&a.criteria, &a.criteria_file) {
        (Some(_), Some(_)) => return Err(invalid("invalid-value", "--criteria and --criteria-file are exclusive")),
        (Some(c), None) => c.clone(),
        (None, Some(p)) => std::fs::read_to_string(super::existing(p)?)
            .map_err(|e| CliError::runtime("io", format!("{}: {e}", p.display())))?,
        (None, None) => String::new(),
    };
    let seed = require_seed(a.seed, S)?;
    let out = required_output(&a.out, "out", S)?;
    let dropped_path = a.dropped.as_deref().map(output).transpose()?;
    let max_in_flight = a.max_in_flight.unwrap_or(4);
    if max_in_flight == 0 {
        return Err(invalid("invalid-value", "--max-in-flight must be at least 1"));
    }
    let judge = make_judge(&judge_spec, criteria, Duration::from_millis(a.timeout_ms.unwrap_or(30_000)))?;
    let dataset = build_preference_dataset(&pairs, judge.as_ref(), seed, max_in_flight)?;
    jsonl::write(&out, &dataset.records)?;
    if let Some(path) = dropped_path {
        jsonl::write(&path, &dataset.dropped)?;
    }
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for d in &dataset.dropped {
        let key = serde_json::to_value(d.reason).map_err(crate::Error::from)?;
        *reasons.entry(key.as_str().unwrap_or_default().to_owned()).or_default() += 1;
    }
    #[derive(Serialize)]
    struct Summary {
        pairs: usize,
        kept: usize,
        dropped: BTreeMap<String, usize>,
    }
    let summary = Summary {
        pairs: pairs.len(),
        kept: dataset.records.len(),
        dropped: reasons,
    };
    stdout_line(&serde_json::to_string(&summary).map_err(crate::Error::from)?)
}

pub(super) fn pref_export(ctx: &Context, flags: &PrefExport) -> CliResult {
    const S: &[&str] = &["pref", "export"];
    let a: PrefExport = ctx.resolve(flags, S)?;
    let records: Vec<PreferenceRecord> = jsonl::read(input(&a.records, "records", S)?)?;
    let out = required_output(&a.out, "out", S)?;
    export_dpo(&records, &out)?;
    log::info!("exported {} records to {}", records.len(), out.display());
    Ok(())
}
