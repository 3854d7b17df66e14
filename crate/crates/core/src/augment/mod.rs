//! Augmentation strategies: oversampling, paraphrasing, zero/few-shot
//! generation and backtranslation.

pub mod prompts;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info, warn};

use crate::corpus::{CorpusError, Dataset, MultiLabelRecord, Split};
use crate::providers::{
    is_supported_language, ChatProvider, ChatRequest, ProviderError, TranslationProvider, TranslationRequest,
    DEFAULT_SYSTEM_MESSAGE, GENERATION_TEMPERATURE,
};
use crate::seed::{derive_seed, fingerprint, rng_for};

pub const SYNTHETIC_SOURCE: &str = "synthetic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oversample,
    ParaphraseP1,
    ParaphraseP2,
    ZeroShot,
    FewShot,
    Backtranslation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oversample => "oversample",
            Method::ParaphraseP1 => "paraphrase_p1",
            Method::ParaphraseP2 => "paraphrase_p2",
            Method::ZeroShot => "zero_shot",
            Method::FewShot => "few_shot",
            Method::Backtranslation => "backtranslation",
        }
    }

    /// Whether records produced by this method keep their source's labels.
    pub fn preserves_labels(self) -> bool {
        !matches!(self, Method::ZeroShot | Method::FewShot)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    pub id: String,
    pub text: String,
    pub labels: BTreeSet<String>,
    pub source_id: String,
    pub method: Method,
    pub model: String,
    #[serde(default)]
    pub language_chain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_fingerprint: Option<String>,
    #[serde(default)]
    pub split: Split,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl AugmentedRecord {
    /// Checks the per-record invariants.
    pub fn validate(&self) -> Result<(), String> {
        if self.text.trim().is_empty() {
            return Err(format!("record {} has empty text", self.id));
        }
        if self.labels.is_empty() {
            return Err(format!("record {} has no labels", self.id));
        }
        if (self.method == Method::Backtranslation) == self.language_chain.is_empty() {
            return Err(format!(
                "record {}: language chain must be set exactly for backtranslation",
                self.id
            ));
        }
        Ok(())
    }

    pub fn into_record(self) -> MultiLabelRecord {
        let mut metadata = self.metadata;
        metadata.insert("source_id".into(), self.source_id);
        metadata.insert("method".into(), self.method.as_str().into());
        MultiLabelRecord {
            id: self.id,
            text: self.text,
            labels: self.labels,
            split: self.split,
            metadata,
        }
    }
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("class `{class}` yielded {deficit} record(s) fewer than requested")]
    Balance { class: String, deficit: usize },
    #[error("provider failed ({} partial record(s) kept): {source}", partial.len())]
    Provider {
        partial: Vec<AugmentedRecord>,
        #[source]
        source: ProviderError,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Records produced by one strategy plus non-fatal notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Augmentation {
    pub records: Vec<AugmentedRecord>,
    pub warnings: Vec<String>,
}

impl Augmentation {
    fn warn(&mut self, message: String) {
        warn!("{message}");
        self.warnings.push(message);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    P1Iterative,
    P2Batch,
}

impl FromStr for PromptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "p1" | "p1_iterative" => Ok(PromptMode::P1Iterative),
            "p2" | "p2_batch" => Ok(PromptMode::P2Batch),
            _ => Err(format!("unknown prompt mode `{s}` (expected p1 or p2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMode {
    #[default]
    Nmax,
    Nbal,
}

impl FromStr for BalanceMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nmax" => Ok(BalanceMode::Nmax),
            "nbal" => Ok(BalanceMode::Nbal),
            _ => Err(format!("unknown balance mode `{s}` (expected nmax or nbal)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseConfig {
    pub prompt_mode: PromptMode,
    pub n: usize,
    #[serde(default)]
    pub balance: BalanceMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_per_class: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateConfig {
    #[serde(default)]
    pub shots: usize,
    pub n: usize,
    pub per_class: usize,
}

/// Strategy with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Oversample { factor: usize },
    Paraphrase(ParaphraseConfig),
    Generate(GenerateConfig),
    Backtranslation { languages: Vec<String> },
}

impl Strategy {
    pub fn needs_chat(&self) -> bool {
        matches!(self, Strategy::Paraphrase(_) | Strategy::Generate(_))
    }

    pub fn needs_translation(&self) -> bool {
        matches!(self, Strategy::Backtranslation { .. })
    }

    /// Parameter checks that need no data or provider.
    pub fn validate(&self) -> Result<(), AugmentError> {
        match self {
            Strategy::Oversample { factor } if *factor == 0 => {
                Err(AugmentError::Config("oversampling factor must be at least 1".into()))
            }
            Strategy::Paraphrase(c) => {
                if c.n == 0 {
                    return Err(AugmentError::Config("paraphrase n must be at least 1".into()));
                }
                if c.balance == BalanceMode::Nbal && !matches!(c.target_per_class, Some(t) if t > 0) {
                    return Err(AugmentError::Config(
                        "nbal balancing needs a positive target_per_class".into(),
                    ));
                }
                Ok(())
            }
            Strategy::Generate(c) if c.n == 0 || c.per_class == 0 => {
                Err(AugmentError::Config("generation n and per_class must be at least 1".into()))
            }
            Strategy::Backtranslation { languages } => validate_languages(languages),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub target_labels: Vec<String>,
    pub strategy: Strategy,
}

impl AugmentationPlan {
    pub fn validate(&self, dataset: &Dataset) -> Result<(), AugmentError> {
        check_targets(dataset, &self.target_labels)?;
        self.strategy.validate()
    }
}

/// Providers available to a plan. `model` is the label recorded on every
/// emitted record.
#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub chat: Option<&'a dyn ChatProvider>,
    pub translation: Option<&'a dyn TranslationProvider>,
    pub model: &'a str,
}

pub fn run_plan(
    dataset: &Dataset,
    plan: &AugmentationPlan,
    backends: Backends<'_>,
    seed: u64,
) -> Result<Augmentation, AugmentError> {
    plan.validate(dataset)?;
    let targets = &plan.target_labels;
    let chat = || {
        backends
            .chat
            .ok_or_else(|| AugmentError::Config("strategy needs a chat provider".into()))
    };
    match &plan.strategy {
        Strategy::Oversample { factor } => oversample(dataset, targets, *factor),
        Strategy::Paraphrase(c) => paraphrase(dataset, targets, c, chat()?, backends.model, seed),
        Strategy::Generate(c) => generate(targets, c, dataset, chat()?, backends.model, seed),
        Strategy::Backtranslation { languages } => {
            let client = backends
                .translation
                .ok_or_else(|| AugmentError::Config("backtranslation needs a translation provider".into()))?;
            backtranslate(dataset, targets, languages, client, backends.model)
        }
    }
}

fn check_targets(dataset: &Dataset, targets: &[String]) -> Result<(), AugmentError> {
    if targets.is_empty() {
        return Err(AugmentError::Config("no target labels".into()));
    }
    let mut seen = HashSet::new();
    for t in targets {
        if !dataset.vocabulary().contains(t) {
            return Err(AugmentError::Config(format!("target label `{t}` is not in the label vocabulary")));
        }
        if !seen.insert(t) {
            return Err(AugmentError::Config(format!("target label `{t}` listed twice")));
        }
    }
    Ok(())
}

fn validate_languages(languages: &[String]) -> Result<(), AugmentError> {
    if languages.is_empty() {
        return Err(AugmentError::Config("backtranslation needs at least one language".into()));
    }
    let mut seen = HashSet::new();
    for l in languages {
        if l == "en" {
            return Err(AugmentError::Config("backtranslation pivot language cannot be `en`".into()));
        }
        if !is_supported_language(l) {
            return Err(AugmentError::Config(format!("unsupported language `{l}`")));
        }
        if !seen.insert(l) {
            return Err(AugmentError::Config(format!("language `{l}` listed twice")));
        }
    }
    Ok(())
}

/// Train records carrying at least one target label, in dataset order.
fn eligible<'d>(dataset: &'d Dataset, targets: &[String]) -> Vec<&'d MultiLabelRecord> {
    dataset
        .split(Split::Train)
        .filter(|r| targets.iter().any(|t| r.has_label(t)))
        .collect()
}

fn warn_empty_targets(dataset: &Dataset, targets: &[String], out: &mut Augmentation) {
    for t in targets {
        if !dataset.split(Split::Train).any(|r| r.has_label(t)) {
            out.warn(format!("target label `{t}` has no train records"));
        }
    }
}

fn derived(
    source: &MultiLabelRecord,
    id: String,
    text: String,
    method: Method,
    model: &str,
) -> AugmentedRecord {
    AugmentedRecord {
        id,
        text,
        labels: source.labels.clone(),
        source_id: source.id.clone(),
        method,
        model: model.to_string(),
        language_chain: Vec::new(),
        prompt_fingerprint: None,
        split: Split::Train,
        metadata: BTreeMap::new(),
    }
}

/// Adds `factor` copies of every train record carrying a target label. A
/// record with several target labels is still copied `factor` times.
pub fn oversample(dataset: &Dataset, targets: &[String], factor: usize) -> Result<Augmentation, AugmentError> {
    check_targets(dataset, targets)?;
    if factor == 0 {
        return Err(AugmentError::Config("oversampling factor must be at least 1".into()));
    }
    let mut out = Augmentation::default();
    warn_empty_targets(dataset, targets, &mut out);
    let mut sources = eligible(dataset, targets);
    sources.sort_by(|a, b| a.id.cmp(&b.id));
    for src in sources {
        for k in 1..=factor {
            out.records.push(derived(
                src,
                format!("{}~os-{k}", src.id),
                src.text.clone(),
                Method::Oversample,
                "none",
            ));
        }
    }
    info!(records = out.records.len(), "oversampling done");
    Ok(out)
}

fn request_seed(seed: u64, parts: &[&str]) -> Option<u64> {
    Some(derive_seed(seed, parts))
}

/// Paraphrases every target-class train record with a chat model.
pub fn paraphrase(
    dataset: &Dataset,
    targets: &[String],
    config: &ParaphraseConfig,
    client: &dyn ChatProvider,
    model: &str,
    seed: u64,
) -> Result<Augmentation, AugmentError> {
    check_targets(dataset, targets)?;
    Strategy::Paraphrase(config.clone()).validate()?;
    let mut out = Augmentation::default();
    warn_empty_targets(dataset, targets, &mut out);
    let mut sources = eligible(dataset, targets);
    sources.sort_by(|a, b| a.id.cmp(&b.id));
    let method = match config.prompt_mode {
        PromptMode::P1Iterative => Method::ParaphraseP1,
        PromptMode::P2Batch => Method::ParaphraseP2,
    };

    let results: Vec<Result<(Vec<AugmentedRecord>, Vec<String>), ProviderError>> = sources
        .par_iter()
        .map(|src| paraphrase_one(src, config, client, model, seed, method))
        .collect();

    let mut failure = None;
    for r in results {
        match r {
            Ok((recs, notes)) => {
                out.records.extend(recs);
                for n in notes {
                    out.warn(n);
                }
            }
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }
    if let Some(source) = failure {
        return Err(AugmentError::Provider {
            partial: out.records,
            source,
        });
    }

    if config.balance == BalanceMode::Nbal {
        let per_class = config.target_per_class.expect("validated");
        out.records = balance(out.records, targets, per_class, seed)?;
    }
    info!(records = out.records.len(), method = %method, "paraphrasing done");
    Ok(out)
}

fn paraphrase_one(
    src: &MultiLabelRecord,
    config: &ParaphraseConfig,
    client: &dyn ChatProvider,
    model: &str,
    seed: u64,
    method: Method,
) -> Result<(Vec<AugmentedRecord>, Vec<String>), ProviderError> {
    let mut texts: Vec<(String, String)> = Vec::new();
    let mut dropped = 0usize;
    let accept = |candidate: String, fp: &str, texts: &mut Vec<(String, String)>| -> bool {
        if candidate == src.text.trim() || texts.iter().any(|(t, _)| *t == candidate) {
            return false;
        }
        texts.push((candidate, fp.to_string()));
        true
    };
    match config.prompt_mode {
        PromptMode::P1Iterative => {
            let prompt = prompts::paraphrase_single(&src.text);
            let fp = fingerprint(&prompt);
            for k in 0..config.n {
                let mut req = ChatRequest::new(model, DEFAULT_SYSTEM_MESSAGE, prompt.clone());
                req.seed = request_seed(seed, &["p1", &src.id, &k.to_string()]);
                let resp = client.chat_complete(&req)?;
                let first = prompts::parse_lines(&resp.choices[0]).into_iter().next();
                if !first.is_some_and(|line| accept(line, &fp, &mut texts)) {
                    dropped += 1;
                }
            }
        }
        PromptMode::P2Batch => {
            let prompt = prompts::paraphrase_batch(config.n, &src.text);
            let fp = fingerprint(&prompt);
            let mut req = ChatRequest::new(model, DEFAULT_SYSTEM_MESSAGE, prompt);
            req.seed = request_seed(seed, &["p2", &src.id]);
            let resp = client.chat_complete(&req)?;
            let mut lines = prompts::parse_lines(&resp.choices[0]);
            if lines.len() > config.n {
                dropped += lines.len() - config.n;
                lines.truncate(config.n);
            }
            for line in lines {
                if !accept(line, &fp, &mut texts) {
                    dropped += 1;
                }
            }
        }
    }
    let mut notes = Vec::new();
    if dropped > 0 {
        notes.push(format!("{}: dropped {dropped} empty, duplicate or unchanged paraphrase(s)", src.id));
    }
    let tag = if method == Method::ParaphraseP1 { "p1" } else { "p2" };
    let recs = texts
        .into_iter()
        .enumerate()
        .map(|(k, (text, fp))| {
            let mut r = derived(src, format!("{}~{tag}-{}", src.id, k + 1), text, method, model);
            r.prompt_fingerprint = Some(fp);
            r
        })
        .collect();
    debug!(source = %src.id, "paraphrased");
    Ok((recs, notes))
}

/// Equalizes per-class output. Each record counts for the first target
/// label (in plan order) it carries; every class keeps a seeded subset of
/// exactly `per_class` records.
pub fn balance(
    records: Vec<AugmentedRecord>,
    targets: &[String],
    per_class: usize,
    seed: u64,
) -> Result<Vec<AugmentedRecord>, AugmentError> {
    let mut groups: BTreeMap<usize, Vec<usize>> = (0..targets.len()).map(|i| (i, Vec::new())).collect();
    for (i, r) in records.iter().enumerate() {
        if let Some(c) = targets.iter().position(|t| r.labels.contains(t)) {
            groups.get_mut(&c).expect("all classes present").push(i);
        }
    }
    let mut keep = Vec::new();
    for (c, mut idx) in groups {
        if idx.len() < per_class {
            return Err(AugmentError::Balance {
                class: targets[c].clone(),
                deficit: per_class - idx.len(),
            });
        }
        idx.shuffle(&mut rng_for(seed, &["nbal", &targets[c]]));
        keep.extend_from_slice(&idx[..per_class]);
    }
    keep.sort_unstable();
    let keep: HashSet<usize> = keep.into_iter().collect();
    Ok(records
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| keep.contains(&i).then_some(r))
        .collect())
}

/// Generates synthetic records for each target class from the emotion
/// prompt, optionally with `shots` examples from the class's train records.
pub fn generate(
    targets: &[String],
    config: &GenerateConfig,
    dataset: &Dataset,
    client: &dyn ChatProvider,
    model: &str,
    seed: u64,
) -> Result<Augmentation, AugmentError> {
    check_targets(dataset, targets)?;
    Strategy::Generate(*config).validate()?;
    let pools: Vec<Vec<&MultiLabelRecord>> = targets
        .iter()
        .map(|t| dataset.split(Split::Train).filter(|r| r.has_label(t)).collect())
        .collect();
    for (t, pool) in targets.iter().zip(&pools) {
        if pool.len() < config.shots {
            return Err(AugmentError::Precondition(format!(
                "class `{t}` has {} train record(s), fewer than {} shots",
                pool.len(),
                config.shots
            )));
        }
    }
    let method = if config.shots == 0 { Method::ZeroShot } else { Method::FewShot };
    let calls = config.per_class.div_ceil(config.n);
    let jobs: Vec<(usize, usize)> = (0..targets.len()).flat_map(|c| (0..calls).map(move |k| (c, k))).collect();

    let results: Vec<Result<(Vec<String>, String), ProviderError>> = jobs
        .par_iter()
        .map(|&(c, k)| {
            let class = &targets[c];
            let examples: Vec<String> = if config.shots > 0 {
                let mut rng = rng_for(seed, &["shots", class, &k.to_string()]);
                pools[c]
                    .choose_multiple(&mut rng, config.shots)
                    .map(|r| r.text.split_whitespace().collect::<Vec<_>>().join(" "))
                    .collect()
            } else {
                Vec::new()
            };
            let prompt = prompts::generation(config.n, class, &examples);
            let fp = fingerprint(&prompt);
            let mut req = ChatRequest::new(model, prompts::GENERATION_SYSTEM, prompt);
            req.temperature = GENERATION_TEMPERATURE;
            req.seed = request_seed(seed, &["generate", class, &k.to_string()]);
            let resp = client.chat_complete(&req)?;
            Ok((prompts::parse_lines(&resp.choices[0]), fp))
        })
        .collect();

    let mut out = Augmentation::default();
    let mut per_class: Vec<Vec<(String, String)>> = vec![Vec::new(); targets.len()];
    let mut failure = None;
    for ((c, _), r) in jobs.iter().zip(results) {
        match r {
            Ok((lines, fp)) => {
                for l in lines {
                    if !per_class[*c].iter().any(|(t, _)| *t == l) {
                        per_class[*c].push((l, fp.clone()));
                    }
                }
            }
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }

    for (c, mut lines) in per_class.into_iter().enumerate() {
        let class = &targets[c];
        if lines.len() > config.per_class {
            let mut idx: Vec<usize> = (0..lines.len()).collect();
            idx.shuffle(&mut rng_for(seed, &["truncate", class]));
            let mut keep = idx[..config.per_class].to_vec();
            keep.sort_unstable();
            lines = keep.into_iter().map(|i| lines[i].clone()).collect();
        } else if lines.len() < config.per_class && failure.is_none() {
            out.warn(format!(
                "class `{class}`: generated {} of {} requested sentence(s)",
                lines.len(),
                config.per_class
            ));
        }
        for (k, (text, fp)) in lines.into_iter().enumerate() {
            out.records.push(AugmentedRecord {
                id: format!("syn-{class}-{}", k + 1),
                text,
                labels: BTreeSet::from([class.clone()]),
                source_id: SYNTHETIC_SOURCE.into(),
                method,
                model: model.to_string(),
                language_chain: Vec::new(),
                prompt_fingerprint: Some(fp),
                split: Split::Train,
                metadata: BTreeMap::new(),
            });
        }
    }
    if let Some(source) = failure {
        return Err(AugmentError::Provider {
            partial: out.records,
            source,
        });
    }
    info!(records = out.records.len(), method = %method, "generation done");
    Ok(out)
}

/// Round-trips every target-class train record through each pivot
/// language. Failed records are skipped with a warning.
pub fn backtranslate(
    dataset: &Dataset,
    targets: &[String],
    languages: &[String],
    client: &dyn TranslationProvider,
    model: &str,
) -> Result<Augmentation, AugmentError> {
    check_targets(dataset, targets)?;
    validate_languages(languages)?;
    let mut out = Augmentation::default();
    warn_empty_targets(dataset, targets, &mut out);
    let mut sources = eligible(dataset, targets);
    sources.sort_by(|a, b| a.id.cmp(&b.id));
    let jobs: Vec<(&MultiLabelRecord, &String)> =
        sources.iter().flat_map(|s| languages.iter().map(move |l| (*s, l))).collect();

    let results: Vec<Result<String, ProviderError>> = jobs
        .par_iter()
        .map(|(src, lang)| {
            let there = client.translate(&TranslationRequest::new(src.text.clone(), "en", lang))?;
            client.translate(&TranslationRequest::new(there, lang, "en"))
        })
        .collect();

    for ((src, lang), r) in jobs.into_iter().zip(results) {
        match r {
            Ok(text) if !text.trim().is_empty() => {
                let text = text.trim().to_string();
                let mut rec = derived(src, format!("{}~bt-{lang}", src.id), text, Method::Backtranslation, model);
                rec.language_chain = vec!["en".into(), lang.clone(), "en".into()];
                if rec.text == src.text.trim() {
                    rec.metadata.insert("identical".into(), "true".into());
                }
                out.records.push(rec);
            }
            Ok(_) => out.warn(format!("{} via {lang}: empty translation, skipped", src.id)),
            Err(e) => out.warn(format!("{} via {lang}: {e}, skipped", src.id)),
        }
    }
    info!(records = out.records.len(), "backtranslation done");
    Ok(out)
}

/// Result of merging augmented records into a dataset.
#[derive(Debug, Clone)]
pub struct Merged {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// Appends augmented records to the train split and shuffles it. Validation
/// and test records keep their original order and content.
pub fn merge_into_training_set(
    dataset: &Dataset,
    augmented: &[AugmentedRecord],
    seed: u64,
) -> Result<Merged, AugmentError> {
    let mut warnings = Vec::new();
    let mut taken: HashSet<String> = dataset.records().iter().map(|r| r.id.clone()).collect();
    let mut train: Vec<MultiLabelRecord> = dataset.split(Split::Train).cloned().collect();
    for a in augmented {
        a.validate().map_err(AugmentError::Precondition)?;
        let mut rec = a.clone().into_record();
        if rec.split != Split::Train {
            let w = format!("augmented record {} claimed split {}; moved to train", rec.id, rec.split.as_str());
            warn!("{w}");
            warnings.push(w);
            rec.split = Split::Train;
        }
        if taken.contains(&rec.id) {
            let base = rec.id.clone();
            let mut k = 2;
            while taken.contains(&format!("{base}#{k}")) {
                k += 1;
            }
            rec.id = format!("{base}#{k}");
            let w = format!("id {base} already taken; renamed to {}", rec.id);
            warn!("{w}");
            warnings.push(w);
        }
        taken.insert(rec.id.clone());
        train.push(rec);
    }
    train.shuffle(&mut rng_for(seed, &["merge"]));
    let rest = dataset.records().iter().filter(|r| r.split != Split::Train).cloned();
    let records: Vec<MultiLabelRecord> = train.into_iter().chain(rest).collect();
    let dataset = Dataset::new(records, Some(dataset.vocabulary().to_vec()))?;
    Ok(Merged { dataset, warnings })
}

/// Per-label record counts, useful for checking balance.
pub fn label_histogram(records: &[AugmentedRecord]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        for l in &r.labels {
            *h.entry(l.clone()).or_insert(0) += 1;
        }
    }
    h
}

pub fn write_augmented(path: &Path, records: &[AugmentedRecord]) -> Result<(), AugmentError> {
    let io = |source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_augmented(path: &Path) -> Result<Vec<AugmentedRecord>, AugmentError> {
    let io = |source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AugmentedRecord = serde_json::from_str(&line).map_err(|e| {
            AugmentError::Corpus(CorpusError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Counts records per method, for manifests.
pub fn method_counts(records: &[AugmentedRecord]) -> BTreeMap<String, usize> {
    let mut m: HashMap<Method, usize> = HashMap::new();
    for r in records {
        *m.entry(r.method).or_insert(0) += 1;
    }
    m.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect()
}
