//! One-vs-rest logistic regression trained by full-batch gradient descent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseMatrix;
use super::{ClassifyError, Hyperparams};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression<T> {
    /// `L x V`, one row per label.
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
    pub hyperparams: Hyperparams,
}

/// Trained model plus the total loss before the first update and after
/// every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: LogisticRegression<T>,
    pub loss_history: Vec<T>,
}

pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot<T: Scalar>(row: &[(usize, T)], w: &[T]) -> T {
    row.iter().fold(T::zero(), |acc, &(j, v)| acc + v * w[j])
}

fn check_shapes<T: Clone>(x: &SparseMatrix<T>, y: &[Vec<bool>], n_labels: usize) -> Result<(), ClassifyError> {
    if x.n_rows() != y.len() {
        return Err(ClassifyError::Shape(format!("{} feature rows vs {} target rows", x.n_rows(), y.len())));
    }
    if let Some(bad) = y.iter().find(|r| r.len() != n_labels) {
        return Err(ClassifyError::Shape(format!("target row has {} labels, expected {n_labels}", bad.len())));
    }
    if let Some(&(j, _)) = x.rows.iter().flatten().find(|(j, _)| *j >= x.n_cols) {
        return Err(ClassifyError::Shape(format!("column {j} outside {} features", x.n_cols)));
    }
    Ok(())
}

/// Mean binary cross-entropy of one label plus `lambda/2 * |w|^2`.
fn label_loss<T: Scalar>(x: &SparseMatrix<T>, y: &[Vec<bool>], l: usize, w: &[T], b: T, lambda: T) -> T {
    let n = T::from_count(x.n_rows().max(1));
    let data: T = x
        .rows
        .iter()
        .zip(y)
        .map(|(row, t)| {
            let z = dot(row, w) + b;
            if t[l] {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    let reg: T = w.iter().map(|v| *v * *v).sum();
    data / n + lambda * reg / T::lit(2.0)
}

fn label_gradient<T: Scalar>(x: &SparseMatrix<T>, y: &[Vec<bool>], l: usize, w: &[T], b: T, lambda: T) -> (Vec<T>, T) {
    let n = T::from_count(x.n_rows().max(1));
    let mut gw = vec![T::zero(); w.len()];
    let mut gb = T::zero();
    for (row, t) in x.rows.iter().zip(y) {
        let target = if t[l] { T::one() } else { T::zero() };
        let r = sigmoid(dot(row, w) + b) - target;
        for &(j, v) in row {
            gw[j] = gw[j] + r * v;
        }
        gb = gb + r;
    }
    for (g, wv) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * *wv;
    }
    (gw, gb / n)
}

impl<T: Scalar> LogisticRegression<T> {
    pub fn zeros(n_labels: usize, n_features: usize, hyperparams: Hyperparams) -> Self {
        Self {
            weights: vec![vec![T::zero(); n_features]; n_labels],
            bias: vec![T::zero(); n_labels],
            hyperparams,
        }
    }

    pub fn n_labels(&self) -> usize {
        self.bias.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Sum over labels of the per-label regularized loss.
    pub fn loss(&self, x: &SparseMatrix<T>, y: &[Vec<bool>]) -> Result<T, ClassifyError> {
        check_shapes(x, y, self.n_labels())?;
        let lambda = T::lit(self.hyperparams.l2_lambda);
        Ok((0..self.n_labels())
            .map(|l| label_loss(x, y, l, &self.weights[l], self.bias[l], lambda))
            .sum())
    }

    /// Analytic gradient of [`Self::loss`] as `(dW, db)`.
    pub fn gradient(&self, x: &SparseMatrix<T>, y: &[Vec<bool>]) -> Result<(Vec<Vec<T>>, Vec<T>), ClassifyError> {
        check_shapes(x, y, self.n_labels())?;
        let lambda = T::lit(self.hyperparams.l2_lambda);
        Ok((0..self.n_labels())
            .map(|l| label_gradient(x, y, l, &self.weights[l], self.bias[l], lambda))
            .unzip())
    }

    /// Zero-initialized full-batch gradient descent. Labels are independent
    /// and trained in parallel.
    pub fn train(x: &SparseMatrix<T>, y: &[Vec<bool>], n_labels: usize, hp: &Hyperparams) -> Result<TrainOutcome<T>, ClassifyError> {
        if hp.epochs == 0 {
            return Err(ClassifyError::Precondition("epochs must be at least 1".into()));
        }
        if x.n_rows() == 0 {
            return Err(ClassifyError::Precondition("no training rows".into()));
        }
        check_shapes(x, y, n_labels)?;
        let lr = T::lit(hp.learning_rate);
        let lambda = T::lit(hp.l2_lambda);
        let per_label: Vec<Result<(Vec<T>, T, Vec<T>), ClassifyError>> = (0..n_labels)
            .into_par_iter()
            .map(|l| {
                let mut w = vec![T::zero(); x.n_cols];
                let mut b = T::zero();
                let mut history = Vec::with_capacity(hp.epochs + 1);
                history.push(label_loss(x, y, l, &w, b, lambda));
                for epoch in 1..=hp.epochs {
                    let (gw, gb) = label_gradient(x, y, l, &w, b, lambda);
                    for (wv, g) in w.iter_mut().zip(&gw) {
                        *wv = *wv - lr * *g;
                    }
                    b = b - lr * gb;
                    let loss = label_loss(x, y, l, &w, b, lambda);
                    if !loss.is_finite() || !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                        return Err(ClassifyError::Divergence { epoch, label: l });
                    }
                    history.push(loss);
                }
                Ok((w, b, history))
            })
            .collect();
        let mut model = Self::zeros(n_labels, x.n_cols, hp.clone());
        let mut loss_history = vec![T::zero(); hp.epochs + 1];
        for (l, r) in per_label.into_iter().enumerate() {
            let (w, b, h) = r?;
            model.weights[l] = w;
            model.bias[l] = b;
            for (acc, v) in loss_history.iter_mut().zip(h) {
                *acc = *acc + v;
            }
        }
        Ok(TrainOutcome { model, loss_history })
    }

    pub fn predict_proba(&self, x: &SparseMatrix<T>) -> Result<Vec<Vec<T>>, ClassifyError> {
        if x.n_rows() > 0 && x.n_cols != self.n_features() {
            return Err(ClassifyError::Shape(format!(
                "{} features given, model expects {}",
                x.n_cols,
                self.n_features()
            )));
        }
        Ok(x
            .rows
            .iter()
            .map(|row| {
                self.weights
                    .iter()
                    .zip(&self.bias)
                    .map(|(w, b)| sigmoid(dot(row, w) + *b))
                    .collect()
            })
            .collect())
    }

    /// Positive iff the probability is strictly above 0.5.
    pub fn predict(&self, x: &SparseMatrix<T>) -> Result<Vec<Vec<bool>>, ClassifyError> {
        let half = T::lit(0.5);
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| p.into_iter().map(|v| v > half).collect())
            .collect())
    }
}
