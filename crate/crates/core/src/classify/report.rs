//! Per-label F1 and group-wise macro averages with percent change.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::Scalar;

/// Column names of the classification table.
pub const TABLE_COLUMNS: [&str; 8] = [
    "Data aug",
    "FT Model",
    "F1-macro (all Cls)",
    "%Change (all Cls)",
    "F1-macro (aug Cls)",
    "%Change (aug Cls)",
    "F1-macro (othr Cls)",
    "%Change (othr Cls)",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    All,
    Augmented,
    Other,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Augmented => "aug",
            Group::Other => "othr",
        }
    }
}

/// Conditions under which a reported number was defined by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "group", rename_all = "snake_case")]
pub enum ReportFlag {
    /// The group has no labels; its macro is reported as 0.
    EmptyGroup(Group),
    /// The baseline macro is 0; the percent change is reported as 0.
    ZeroBaseline(Group),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport<T> {
    pub name: String,
    pub labels: Vec<String>,
    pub augmented_labels: BTreeSet<String>,
    pub per_label_f1: BTreeMap<String, T>,
    pub f1_macro_all: T,
    pub f1_macro_augmented: T,
    pub f1_macro_other: T,
    pub pct_change_all: T,
    pub pct_change_augmented: T,
    pub pct_change_other: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<ReportFlag>,
}

/// Confusion counts of one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    /// `2TP / (2TP + FP + FN)`, or 0 when nothing was predicted or present.
    pub fn f1<T: Scalar>(&self) -> T {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            T::zero()
        } else {
            T::from_count(2 * self.tp) / T::from_count(denom)
        }
    }
}

pub fn confusion(pred: &[Vec<bool>], gold: &[Vec<bool>], label: usize) -> Confusion {
    let mut c = Confusion::default();
    for (p, g) in pred.iter().zip(gold) {
        match (p[label], g[label]) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    c
}

fn macro_of<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().copied().sum::<T>() / T::from_count(values.len()))
    }
}

/// `100 * (new - base) / base`, or `None` when the baseline is 0.
pub fn pct_change<T: Scalar>(new: T, base: T) -> Option<T> {
    (base != T::zero()).then(|| T::lit(100.0) * (new - base) / base)
}

impl<T: Scalar> ClassificationReport<T> {
    pub fn macro_for(&self, g: Group) -> T {
        match g {
            Group::All => self.f1_macro_all,
            Group::Augmented => self.f1_macro_augmented,
            Group::Other => self.f1_macro_other,
        }
    }

    pub fn pct_change_for(&self, g: Group) -> T {
        match g {
            Group::All => self.pct_change_all,
            Group::Augmented => self.pct_change_augmented,
            Group::Other => self.pct_change_other,
        }
    }

    /// Fills the percent-change fields against `baseline`.
    pub fn compare_to(&mut self, baseline: &ClassificationReport<T>) -> Result<(), ClassifyError> {
        if self.labels != baseline.labels {
            return Err(ClassifyError::Comparison("reports cover different label sets".into()));
        }
        if self.augmented_labels != baseline.augmented_labels {
            return Err(ClassifyError::Comparison("reports use different augmented groups".into()));
        }
        self.flags.retain(|f| !matches!(f, ReportFlag::ZeroBaseline(_)));
        for g in [Group::All, Group::Augmented, Group::Other] {
            let change = match pct_change(self.macro_for(g), baseline.macro_for(g)) {
                Some(c) => c,
                None => {
                    self.flags.push(ReportFlag::ZeroBaseline(g));
                    T::zero()
                }
            };
            match g {
                Group::All => self.pct_change_all = change,
                Group::Augmented => self.pct_change_augmented = change,
                Group::Other => self.pct_change_other = change,
            }
        }
        self.baseline = Some(baseline.name.clone());
        Ok(())
    }
}

/// Builds a report from binary prediction and gold matrices whose columns
/// follow `labels`.
pub fn f1_report<T: Scalar>(
    name: &str,
    predictions: &[Vec<bool>],
    gold: &[Vec<bool>],
    labels: &[String],
    augmented_labels: &BTreeSet<String>,
    baseline: Option<&ClassificationReport<T>>,
) -> Result<ClassificationReport<T>, ClassifyError> {
    if predictions.len() != gold.len() {
        return Err(ClassifyError::Shape(format!(
            "{} prediction rows vs {} gold rows",
            predictions.len(),
            gold.len()
        )));
    }
    if let Some(r) = predictions.iter().chain(gold).find(|r| r.len() != labels.len()) {
        return Err(ClassifyError::Shape(format!("row has {} columns, expected {}", r.len(), labels.len())));
    }
    if let Some(l) = augmented_labels.iter().find(|l| !labels.contains(l)) {
        return Err(ClassifyError::Config(format!("augmented label `{l}` is not in the label set")));
    }
    let mut per_label_f1 = BTreeMap::new();
    let (mut all, mut aug, mut other) = (Vec::new(), Vec::new(), Vec::new());
    for (i, l) in labels.iter().enumerate() {
        let f: T = confusion(predictions, gold, i).f1();
        per_label_f1.insert(l.clone(), f);
        all.push(f);
        if augmented_labels.contains(l) {
            aug.push(f);
        } else {
            other.push(f);
        }
    }
    let mut flags = Vec::new();
    let mut group_macro = |g: Group, values: &[T]| {
        macro_of(values).unwrap_or_else(|| {
            flags.push(ReportFlag::EmptyGroup(g));
            T::zero()
        })
    };
    let f1_macro_all = group_macro(Group::All, &all);
    let f1_macro_augmented = group_macro(Group::Augmented, &aug);
    let f1_macro_other = group_macro(Group::Other, &other);
    let mut report = ClassificationReport {
        name: name.to_string(),
        labels: labels.to_vec(),
        augmented_labels: augmented_labels.clone(),
        per_label_f1,
        f1_macro_all,
        f1_macro_augmented,
        f1_macro_other,
        pct_change_all: T::zero(),
        pct_change_augmented: T::zero(),
        pct_change_other: T::zero(),
        baseline: None,
        flags,
    };
    if let Some(b) = baseline {
        report.compare_to(b)?;
    }
    Ok(report)
}
