//! Downstream evaluation with a TF-IDF + logistic regression proxy model.

pub mod logreg;
pub mod report;
pub mod tfidf;

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

pub use logreg::{LogisticRegression, TrainOutcome};
pub use report::{f1_report, pct_change, ClassificationReport, Group, ReportFlag, TABLE_COLUMNS};
pub use tfidf::{SparseMatrix, TfidfModel, TfidfSettings};

use crate::corpus::{Dataset, MultiLabelRecord, Split};
use crate::seed::rng_for;
use crate::Scalar;

pub const PROXY_MODEL_NAME: &str = "tfidf-logreg";

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at epoch {epoch} (label index {label})")]
    Divergence { epoch: usize, label: usize },
    #[error("cannot compare reports: {0}")]
    Comparison(String),
    #[error("prediction import failed: {message}: {ids:?}")]
    Import { message: String, ids: Vec<String> },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub min_df: usize,
    pub lowercase: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 5.0,
            l2_lambda: 1e-4,
            epochs: 500,
            min_df: 1,
            lowercase: true,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn tfidf_settings(&self) -> TfidfSettings {
        TfidfSettings {
            min_df: self.min_df,
            lowercase: self.lowercase,
        }
    }
}

/// Binary label matrix with columns in `labels` order.
pub fn label_matrix<'a>(records: impl IntoIterator<Item = &'a MultiLabelRecord>, labels: &[String]) -> Vec<Vec<bool>> {
    records
        .into_iter()
        .map(|r| labels.iter().map(|l| r.has_label(l)).collect())
        .collect()
}

/// A fitted vectorizer and classifier.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    pub tfidf: TfidfModel<T>,
    pub model: LogisticRegression<T>,
    pub labels: Vec<String>,
    pub loss_history: Vec<T>,
}

impl<T: Scalar> Pipeline<T> {
    /// Fits on the train split. Rows are put in id order and shuffled with
    /// the hyperparameter seed before fitting.
    pub fn fit(dataset: &Dataset, hp: &Hyperparams) -> Result<Self, ClassifyError> {
        let mut train: Vec<&MultiLabelRecord> = dataset.split(Split::Train).collect();
        if train.is_empty() {
            return Err(ClassifyError::Config("dataset has no train split".into()));
        }
        // Fix the order first so the result depends only on the record set.
        train.sort_by(|a, b| a.id.cmp(&b.id));
        train.shuffle(&mut rng_for(hp.seed, &["train-order"]));
        let labels = dataset.vocabulary().to_vec();
        let texts: Vec<&str> = train.iter().map(|r| r.text.as_str()).collect();
        let tfidf = TfidfModel::fit(&texts, hp.tfidf_settings())?;
        let x = tfidf.transform(&texts);
        let y = label_matrix(train.iter().copied(), &labels);
        let out = LogisticRegression::train(&x, &y, labels.len(), hp)?;
        Ok(Self {
            tfidf,
            model: out.model,
            labels,
            loss_history: out.loss_history,
        })
    }

    pub fn predict<'a>(&self, records: impl IntoIterator<Item = &'a MultiLabelRecord>) -> Result<Vec<Vec<bool>>, ClassifyError> {
        let texts: Vec<&str> = records.into_iter().map(|r| r.text.as_str()).collect();
        self.model.predict(&self.tfidf.transform(&texts))
    }
}

fn test_records(dataset: &Dataset, which: &str) -> Result<Vec<MultiLabelRecord>, ClassifyError> {
    let test: Vec<MultiLabelRecord> = dataset.split(Split::Test).cloned().collect();
    if test.is_empty() {
        return Err(ClassifyError::Config(format!("{which} dataset has no test split")));
    }
    Ok(test)
}

/// Trains on the original and on the augmented train split with identical
/// settings and scores both on the shared test split. The second report
/// carries percent changes against the first.
pub fn run_eval<T: Scalar>(
    original: &Dataset,
    augmented: &Dataset,
    augmented_labels: &BTreeSet<String>,
    hp: &Hyperparams,
    name: &str,
) -> Result<(ClassificationReport<T>, ClassificationReport<T>), ClassifyError> {
    let test = test_records(original, "original")?;
    if test != test_records(augmented, "augmented")? {
        return Err(ClassifyError::Precondition(
            "original and augmented datasets have different test splits".into(),
        ));
    }
    if original.vocabulary() != augmented.vocabulary() {
        return Err(ClassifyError::Precondition("datasets have different label vocabularies".into()));
    }
    let labels = original.vocabulary().to_vec();
    let gold = label_matrix(&test, &labels);

    let base_model = Pipeline::<T>::fit(original, hp)?;
    let baseline = f1_report("baseline", &base_model.predict(&test)?, &gold, &labels, augmented_labels, None)?;
    let aug_model = Pipeline::<T>::fit(augmented, hp)?;
    let report = f1_report(name, &aug_model.predict(&test)?, &gold, &labels, augmented_labels, Some(&baseline))?;
    info!(
        baseline = %baseline.f1_macro_all,
        augmented = %report.f1_macro_all,
        "evaluation done"
    );
    Ok((baseline, report))
}

#[derive(Deserialize)]
struct PredictionRow {
    id: String,
    labels: Vec<String>,
}

/// Reads `{id, labels}` JSONL predictions and aligns them to the test split
/// of `gold`. Every test id must appear exactly once.
pub fn import_external_predictions(path: &Path, gold: &Dataset) -> Result<Vec<Vec<bool>>, ClassifyError> {
    let io = |source| ClassifyError::Io {
        path: path.display().to_string(),
        source,
    };
    let labels = gold.vocabulary();
    let test: Vec<&MultiLabelRecord> = gold.split(Split::Test).collect();
    let wanted: HashSet<&str> = test.iter().map(|r| r.id.as_str()).collect();
    let mut found: HashMap<String, BTreeSet<String>> = HashMap::new();
    let (mut duplicates, mut unknown, mut bad_labels) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in BufReader::new(File::open(path).map_err(io)?).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let row: PredictionRow = serde_json::from_str(&line).map_err(|e| ClassifyError::Import {
            message: format!("line {}: {e}", i + 1),
            ids: Vec::new(),
        })?;
        if !wanted.contains(row.id.as_str()) {
            unknown.push(row.id);
            continue;
        }
        if let Some(l) = row.labels.iter().find(|l| !labels.contains(l)) {
            bad_labels.push(format!("{} ({l})", row.id));
        }
        match found.entry(row.id) {
            Entry::Occupied(e) => duplicates.push(e.key().clone()),
            Entry::Vacant(e) => {
                e.insert(row.labels.into_iter().collect());
            }
        }
    }
    let fail = |message: &str, mut ids: Vec<String>| {
        ids.sort();
        ids.dedup();
        Err(ClassifyError::Import {
            message: message.into(),
            ids,
        })
    };
    if !unknown.is_empty() {
        return fail("ids not in the test split", unknown);
    }
    if !duplicates.is_empty() {
        return fail("duplicate ids", duplicates);
    }
    if !bad_labels.is_empty() {
        return fail("unknown labels", bad_labels);
    }
    let missing: Vec<String> = test.iter().filter(|r| !found.contains_key(&r.id)).map(|r| r.id.clone()).collect();
    if !missing.is_empty() {
        return fail("missing ids", missing);
    }
    Ok(test
        .iter()
        .map(|r| labels.iter().map(|l| found[&r.id].contains(l)).collect())
        .collect())
}
