//! TF-IDF features with sparse rows.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::quality::tokenize;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfSettings {
    pub min_df: usize,
    pub lowercase: bool,
}

impl Default for TfidfSettings {
    fn default() -> Self {
        Self {
            min_df: 1,
            lowercase: true,
        }
    }
}

/// Row-major sparse matrix. Column indices within a row are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix<T> {
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn from_dense(dense: &[Vec<T>]) -> Self {
        let n_cols = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(j, v)| (j, *v)).collect())
            .collect();
        Self { n_cols, rows }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![T::zero(); self.n_cols];
                for &(j, v) in r {
                    d[j] = v;
                }
                d
            })
            .collect()
    }

}

impl<T: Clone> SparseMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            n_cols: self.n_cols,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel<T> {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<T>,
    pub settings: TfidfSettings,
}

fn terms(text: &str, lowercase: bool) -> Vec<String> {
    if lowercase {
        tokenize(text)
    } else {
        text.split_whitespace()
            .map(|t| t.trim_matches(crate::quality::is_punctuation).to_string())
            .filter(|t| !t.is_empty())
            .collect()
    }
}

impl<T: Scalar> TfidfModel<T> {
    /// Fits vocabulary and smoothed idf, `ln((1+N)/(1+df)) + 1`, keeping
    /// terms with `df >= min_df`. Columns are numbered in term order.
    pub fn fit<S: AsRef<str>>(docs: &[S], settings: TfidfSettings) -> Result<Self, ClassifyError> {
        if docs.iter().all(|d| d.as_ref().trim().is_empty()) {
            return Err(ClassifyError::Config("no non-empty training documents".into()));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for d in docs {
            let unique: BTreeSet<String> = terms(d.as_ref(), settings.lowercase).into_iter().collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let n = T::from_count(docs.len());
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::new();
        for (term, count) in df {
            if count >= settings.min_df.max(1) {
                vocabulary.insert(term, idf.len());
                idf.push(((T::one() + n) / (T::one() + T::from_count(count))).ln() + T::one());
            }
        }
        if vocabulary.is_empty() {
            return Err(ClassifyError::Config(format!(
                "empty vocabulary: no term reaches min_df = {}",
                settings.min_df
            )));
        }
        Ok(Self {
            vocabulary,
            idf,
            settings,
        })
    }

    pub fn dimension(&self) -> usize {
        self.idf.len()
    }

    /// L2-normalized tf-idf row; unseen terms are ignored and a text with no
    /// known term maps to the zero row.
    pub fn transform_one(&self, text: &str) -> Vec<(usize, T)> {
        let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
        for t in terms(text, self.settings.lowercase) {
            if let Some(&j) = self.vocabulary.get(&t) {
                *tf.entry(j).or_insert(0) += 1;
            }
        }
        let mut row: Vec<(usize, T)> = tf.into_iter().map(|(j, c)| (j, T::from_count(c) * self.idf[j])).collect();
        let norm = row.iter().map(|(_, v)| *v * *v).sum::<T>().sqrt();
        if norm > T::zero() {
            row.iter_mut().for_each(|(_, v)| *v = *v / norm);
        }
        row
    }

    pub fn transform<S: AsRef<str>>(&self, texts: &[S]) -> SparseMatrix<T> {
        SparseMatrix {
            n_cols: self.dimension(),
            rows: texts.iter().map(|t| self.transform_one(t.as_ref())).collect(),
        }
    }
}
