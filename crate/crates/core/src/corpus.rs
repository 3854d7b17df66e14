//! Multi-label text datasets: loading, validation, label statistics and
//! writing.
//!
//! Two on-disk layouts are supported. JSONL carries one object per line
//! (`id`, `text`, `labels`, optional `split` and `meta`). TSV follows the
//! GoEmotions layout: `text<TAB>label indices<TAB>id`, with a sidecar label
//! file holding one label name per line (index = line number). An optional
//! fourth TSV column carries the split name so that written files round-trip.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{message}: {}", ids.join(", "))]
    Validation { message: String, ids: Vec<String> },
    #[error("line {line}: label `{label}` is not in the label vocabulary")]
    UnknownLabel { line: usize, label: String },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Argument(String),
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "valid" | "val" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(CorpusError::Argument(format!("unknown split `{other}`"))),
        }
    }
}

/// One text sample with its label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiLabelRecord {
    pub id: String,
    pub text: String,
    pub labels: BTreeSet<String>,
    pub split: Split,
    /// Free-form provenance, e.g. the TSV annotator column. Not used by any
    /// computation.
    pub metadata: BTreeMap<String, String>,
}

impl MultiLabelRecord {
    pub fn new<I, S>(id: impl Into<String>, text: impl Into<String>, labels: I, split: Split) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            text: text.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            split,
            metadata: BTreeMap::new(),
        }
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }
}

/// A validated list of records plus its ordered label vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    records: Vec<MultiLabelRecord>,
    vocabulary: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking every record invariant. With `vocabulary`
    /// set to `None` the vocabulary becomes the sorted union of all labels.
    pub fn new(
        records: Vec<MultiLabelRecord>,
        vocabulary: Option<Vec<String>>,
    ) -> Result<Self, CorpusError> {
        let vocabulary = match vocabulary {
            Some(v) => {
                let mut seen = HashSet::new();
                let dups: Vec<String> = v.iter().filter(|l| !seen.insert(*l)).cloned().collect();
                if !dups.is_empty() {
                    return Err(CorpusError::Validation {
                        message: "duplicate labels in vocabulary".into(),
                        ids: dups,
                    });
                }
                v
            }
            None => records
                .iter()
                .flat_map(|r| r.labels.iter().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        validate_records(&records, &vocabulary)?;
        Ok(Self {
            records,
            vocabulary,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[MultiLabelRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<MultiLabelRecord> {
        self.records
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &MultiLabelRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn has_split(&self, split: Split) -> bool {
        self.records.iter().any(|r| r.split == split)
    }

    /// Keeps only records in the given splits. The vocabulary is unchanged.
    pub fn restrict_to(&self, splits: &[Split]) -> Dataset {
        Dataset {
            records: self
                .records
                .iter()
                .filter(|r| splits.contains(&r.split))
                .cloned()
                .collect(),
            vocabulary: self.vocabulary.clone(),
        }
    }

    /// Concatenates datasets; the vocabulary is the ordered union (first
    /// occurrence wins).
    pub fn concat(parts: Vec<Dataset>) -> Result<Dataset, CorpusError> {
        let mut vocabulary: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        let mut records = Vec::new();
        for part in parts {
            for label in part.vocabulary {
                if seen.insert(label.clone()) {
                    vocabulary.push(label);
                }
            }
            records.extend(part.records);
        }
        Dataset::new(records, Some(vocabulary))
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.vocabulary
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }
}

fn validate_records(records: &[MultiLabelRecord], vocabulary: &[String]) -> Result<(), CorpusError> {
    let empty_text: Vec<String> = records
        .iter()
        .filter(|r| r.text.trim().is_empty())
        .map(|r| r.id.clone())
        .collect();
    if !empty_text.is_empty() {
        return Err(CorpusError::Validation {
            message: "records with empty text".into(),
            ids: empty_text,
        });
    }
    let no_labels: Vec<String> = records
        .iter()
        .filter(|r| r.labels.is_empty())
        .map(|r| r.id.clone())
        .collect();
    if !no_labels.is_empty() {
        return Err(CorpusError::Validation {
            message: "records without labels".into(),
            ids: no_labels,
        });
    }
    let mut seen = HashSet::new();
    let dup: Vec<String> = records
        .iter()
        .filter(|r| !seen.insert(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    if !dup.is_empty() {
        return Err(CorpusError::Validation {
            message: "duplicate record ids".into(),
            ids: dup,
        });
    }
    let vocab: HashSet<&str> = vocabulary.iter().map(String::as_str).collect();
    let unknown: Vec<String> = records
        .iter()
        .filter(|r| r.labels.iter().any(|l| !vocab.contains(l.as_str())))
        .map(|r| r.id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(CorpusError::Validation {
            message: "records with labels outside the vocabulary".into(),
            ids: unknown,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Jsonl,
    Tsv,
}

impl FromStr for DatasetFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(DatasetFormat::Jsonl),
            "tsv" => Ok(DatasetFormat::Tsv),
            other => Err(CorpusError::Argument(format!("unknown dataset format `{other}`"))),
        }
    }
}

/// How to read (or write) a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub format: DatasetFormat,
    /// Label file: required for TSV (index map), optional explicit
    /// vocabulary for JSONL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_file: Option<PathBuf>,
}

impl LoadOptions {
    pub fn jsonl() -> Self {
        Self {
            format: DatasetFormat::Jsonl,
            label_file: None,
        }
    }

    pub fn tsv(label_file: impl Into<PathBuf>) -> Self {
        Self {
            format: DatasetFormat::Tsv,
            label_file: Some(label_file.into()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlRow {
    id: String,
    text: String,
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    meta: BTreeMap<String, String>,
}

pub fn read_label_file(path: &Path) -> Result<Vec<String>, CorpusError> {
    let content = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn split_from_file_name(path: &Path) -> Split {
    path.file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.parse().ok())
        .unwrap_or_default()
}

/// Loads one dataset file. Records keep input order.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<Dataset, CorpusError> {
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let reader = BufReader::new(file);
    let explicit_vocab = match &options.label_file {
        Some(p) => Some(read_label_file(p)?),
        None => None,
    };
    match options.format {
        DatasetFormat::Jsonl => load_jsonl(path, reader, explicit_vocab),
        DatasetFormat::Tsv => {
            let vocab = explicit_vocab.ok_or_else(|| {
                CorpusError::Argument("TSV datasets require a label file".into())
            })?;
            load_tsv(path, reader, vocab)
        }
    }
}

/// Loads and concatenates several files (e.g. GoEmotions train/dev/test).
pub fn load_many(paths: &[PathBuf], options: &LoadOptions) -> Result<Dataset, CorpusError> {
    let parts = paths
        .iter()
        .map(|p| load_dataset(p, options))
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::concat(parts)
}

fn load_jsonl(
    path: &Path,
    reader: impl BufRead,
    vocab: Option<Vec<String>>,
) -> Result<Dataset, CorpusError> {
    let known: Option<HashSet<String>> = vocab.as_ref().map(|v| v.iter().cloned().collect());
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(known) = &known {
            if let Some(bad) = row.labels.iter().find(|l| !known.contains(*l)) {
                return Err(CorpusError::UnknownLabel {
                    line: line_no,
                    label: bad.clone(),
                });
            }
        }
        records.push(MultiLabelRecord {
            id: row.id,
            text: row.text,
            labels: row.labels.into_iter().collect(),
            split: row.split.unwrap_or_default(),
            metadata: row.meta,
        });
    }
    Dataset::new(records, vocab)
}

fn load_tsv(path: &Path, reader: impl BufRead, vocab: Vec<String>) -> Result<Dataset, CorpusError> {
    let default_split = split_from_file_name(path);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("row")
        .to_string();
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| CorpusError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(parse_err(format!(
                "expected at least 2 tab-separated columns, found {}",
                cols.len()
            )));
        }
        let mut labels = BTreeSet::new();
        for raw in cols[1].split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let idx: usize = raw
                .parse()
                .map_err(|_| parse_err(format!("label index `{raw}` is not an integer")))?;
            let name = vocab.get(idx).ok_or_else(|| CorpusError::UnknownLabel {
                line: line_no,
                label: raw.to_string(),
            })?;
            labels.insert(name.clone());
        }
        let id = match cols.get(2).map(|s| s.trim()) {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => format!("{stem}-{line_no}"),
        };
        let split = match cols.get(3).map(|s| s.trim()) {
            Some(s) if !s.is_empty() => s.parse().map_err(|e: CorpusError| parse_err(e.to_string()))?,
            _ => default_split,
        };
        let mut metadata = BTreeMap::new();
        if let Some(extra) = cols.get(2) {
            metadata.insert("annotator".to_string(), extra.trim().to_string());
        }
        records.push(MultiLabelRecord {
            id,
            text: cols[0].to_string(),
            labels,
            split,
            metadata,
        });
    }
    Dataset::new(records, Some(vocab))
}

/// Writes a dataset. For TSV the label file named in `options` is written
/// alongside, holding the dataset vocabulary in index order.
pub fn write_dataset(dataset: &Dataset, path: &Path, options: &LoadOptions) -> Result<(), CorpusError> {
    match options.format {
        DatasetFormat::Jsonl => {
            let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
            let mut w = BufWriter::new(file);
            for r in dataset.records() {
                let row = JsonlRow {
                    id: r.id.clone(),
                    text: r.text.clone(),
                    labels: r.labels.iter().cloned().collect(),
                    split: Some(r.split),
                    meta: r.metadata.clone(),
                };
                let line = serde_json::to_string(&row).expect("record serializes");
                writeln!(w, "{line}").map_err(|e| CorpusError::io(path, e))?;
            }
            w.flush().map_err(|e| CorpusError::io(path, e))
        }
        DatasetFormat::Tsv => {
            let label_file = options.label_file.as_ref().ok_or_else(|| {
                CorpusError::Argument("TSV datasets require a label file".into())
            })?;
            let bad: Vec<String> = dataset
                .records()
                .iter()
                .filter(|r| {
                    r.text.contains(['\t', '\n', '\r']) || r.id.contains(['\t', '\n', '\r'])
                })
                .map(|r| r.id.clone())
                .collect();
            if !bad.is_empty() {
                return Err(CorpusError::Format(format!(
                    "records contain tab or newline characters which TSV cannot represent; use the JSONL format instead (ids: {})",
                    bad.join(", ")
                )));
            }
            let index = dataset.label_index();
            let mut body = String::new();
            for r in dataset.records() {
                let ids: Vec<String> = r.labels.iter().map(|l| index[l.as_str()].to_string()).collect();
                body.push_str(&format!("{}\t{}\t{}\t{}\n", r.text, ids.join(","), r.id, r.split));
            }
            let mut labels = dataset.vocabulary().join("\n");
            if !labels.is_empty() {
                labels.push('\n');
            }
            fs::write(label_file, labels).map_err(|e| CorpusError::io(label_file, e))?;
            fs::write(path, body).map_err(|e| CorpusError::io(path, e))
        }
    }
}

/// Per-label frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: String,
    pub count: usize,
    /// Fraction of records carrying the label.
    pub frequency: f64,
}

/// Exact label memberships, sorted by descending count (ties by name).
pub fn label_counts(dataset: &Dataset) -> Vec<LabelStats> {
    let mut counts: BTreeMap<&str, usize> =
        dataset.vocabulary().iter().map(|l| (l.as_str(), 0)).collect();
    for r in dataset.records() {
        for l in &r.labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
    }
    let n = dataset.len();
    let mut stats: Vec<LabelStats> = counts
        .into_iter()
        .map(|(label, count)| LabelStats {
            label: label.to_string(),
            count,
            frequency: if n == 0 { 0.0 } else { count as f64 / n as f64 },
        })
        .collect();
    stats.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    stats
}

/// The `k` rarest labels, ascending by count, ties broken by name.
pub fn select_least_represented(stats: &[LabelStats], k: usize) -> Result<Vec<String>, CorpusError> {
    if k == 0 {
        return Err(CorpusError::Argument("k must be positive".into()));
    }
    if k > stats.len() {
        return Err(CorpusError::Argument(format!(
            "k = {k} exceeds the vocabulary size {}",
            stats.len()
        )));
    }
    let mut sorted: Vec<&LabelStats> = stats.iter().collect();
    sorted.sort_by(|a, b| a.count.cmp(&b.count).then_with(|| a.label.cmp(&b.label)));
    Ok(sorted.into_iter().take(k).map(|s| s.label.clone()).collect())
}

/// Pearson correlation of binary label-indicator columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LabelCorrelationMatrix<T> {
    pub labels: Vec<String>,
    /// Row-major `labels.len()` square matrix.
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> LabelCorrelationMatrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }
}

/// Correlation between every pair of vocabulary labels over all records.
///
/// Sums are accumulated in integers, so each coefficient involves a single
/// rounding step. Constant columns correlate 0 with everything; the
/// diagonal is always 1.
pub fn label_correlation<T: Scalar>(dataset: &Dataset) -> LabelCorrelationMatrix<T> {
    let labels = dataset.vocabulary().to_vec();
    let l = labels.len();
    let index = dataset.label_index();
    let n = dataset.len() as i128;
    let mut single = vec![0i128; l];
    let mut joint = vec![vec![0i128; l]; l];
    for r in dataset.records() {
        let idx: Vec<usize> = r.labels.iter().map(|x| index[x.as_str()]).collect();
        for &a in &idx {
            single[a] += 1;
            for &b in &idx {
                joint[a][b] += 1;
            }
        }
    }
    let mut values = vec![vec![T::zero(); l]; l];
    for i in 0..l {
        values[i][i] = T::one();
        for j in (i + 1)..l {
            let var_i = n * single[i] - single[i] * single[i];
            let var_j = n * single[j] - single[j] * single[j];
            let r = if var_i == 0 || var_j == 0 {
                T::zero()
            } else {
                let cov = n * joint[i][j] - single[i] * single[j];
                let denom = (T::lit(var_i as f64) * T::lit(var_j as f64)).sqrt();
                let r = T::lit(cov as f64) / denom;
                r.max(-T::one()).min(T::one())
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    LabelCorrelationMatrix { labels, values }
}
