//! Lexical-diversity and semantic-fidelity metrics over reference/generated
//! sentence pairs.
//!
//! Lexical metrics work on word tokens from [`tokenize`]. Embedding metrics
//! use whatever vectors (and token granularity) the embedding provider
//! returns. BERTScore here is the raw greedy-matching F1: no idf weighting
//! and no baseline rescaling.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::providers::EmbeddingProvider;
use crate::scalar::Scalar;

/// Guard for zero norms in [`cosine_similarity`].
pub const COSINE_EPSILON: f64 = 1e-8;
/// Denominator used when only the reference entropy is zero.
pub const ENTROPY_EPSILON: f64 = 1e-9;
/// Stride of the pair sampling protocol.
pub const SAMPLE_STRIDE: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric undefined: {0}")]
    Undefined(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub(crate) fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c,
            '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}'
            | '«' | '»' | '¡' | '¿' | '·' | '、' | '。' | '「' | '」' | '『' | '』' | '（' | '）' | '！' | '？' | '，' | '：' | '；')
}

/// Lowercases, splits on Unicode whitespace and trims punctuation from both
/// ends of every token. Tokens that become empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punctuation).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub reference: String,
    pub generated: String,
    pub pair_index: usize,
}

impl SentencePair {
    pub fn new(pair_index: usize, reference: impl Into<String>, generated: impl Into<String>) -> Self {
        Self {
            reference: reference.into(),
            generated: generated.into(),
            pair_index,
        }
    }
}

/// Every fourth pair, starting at position 0.
pub fn sample_pairs(pairs: &[SentencePair]) -> Vec<SentencePair> {
    pairs.iter().step_by(SAMPLE_STRIDE).cloned().collect()
}

/// Empirical word distribution of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TokenDistribution<T> {
    pub tokens: Vec<String>,
    pub probabilities: BTreeMap<String, T>,
}

impl<T: Scalar> TokenDistribution<T> {
    pub fn from_text(text: &str) -> Self {
        Self::from_tokens(tokenize(text))
    }

    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for t in &tokens {
            *counts.entry(t.clone()).or_default() += 1;
        }
        let n = T::from_count(tokens.len());
        let probabilities = counts
            .into_iter()
            .map(|(w, c)| (w, T::from_count(c) / n))
            .collect();
        Self {
            tokens,
            probabilities,
        }
    }

    /// Shannon entropy in bits; 0 for an empty distribution.
    pub fn entropy(&self) -> T {
        let mut h = T::zero();
        for &p in self.probabilities.values() {
            h = h - p * p.log2();
        }
        // -0.0 for the single-type case
        h.abs()
    }
}

fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

/// `1 - |A ∩ B| / |A ∪ B|` over token sets; 0 when both are empty.
pub fn jaccard_dissimilarity<T: Scalar>(a: &str, b: &str) -> T {
    let a = token_set(a);
    let b = token_set(b);
    let union = a.union(&b).count();
    if union == 0 {
        return T::zero();
    }
    let inter = a.intersection(&b).count();
    T::one() - T::from_count(inter) / T::from_count(union)
}

pub fn entropy<T: Scalar>(text: &str) -> T {
    TokenDistribution::<T>::from_text(text).entropy()
}

/// Entropy of the generated sentence relative to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntropyRatio<T> {
    pub value: T,
    /// Set when the reference entropy was zero and the generated one was
    /// not, so the ratio used [`ENTROPY_EPSILON`] as denominator.
    pub guarded: bool,
}

pub fn entropy_ratio<T: Scalar>(pair: &SentencePair) -> EntropyRatio<T> {
    let h_gen = entropy::<T>(&pair.generated);
    let h_ref = entropy::<T>(&pair.reference);
    if h_ref == T::zero() {
        if h_gen == T::zero() {
            EntropyRatio {
                value: T::one(),
                guarded: false,
            }
        } else {
            EntropyRatio {
                value: h_gen / T::lit(ENTROPY_EPSILON),
                guarded: true,
            }
        }
    } else {
        EntropyRatio {
            value: h_gen / h_ref,
            guarded: false,
        }
    }
}

/// Type-token ratio over the concatenation of `texts`.
pub fn ttr<T: Scalar, S: AsRef<str>>(texts: &[S]) -> Result<T, MetricError> {
    let mut types = BTreeSet::new();
    let mut total = 0usize;
    for t in texts {
        for tok in tokenize(t.as_ref()) {
            total += 1;
            types.insert(tok);
        }
    }
    if total == 0 {
        return Err(MetricError::Undefined("type-token ratio of zero tokens".into()));
    }
    Ok(T::from_count(types.len()) / T::from_count(total))
}

pub fn ttr_ratio<T: Scalar, S: AsRef<str>>(generated: &[S], reference: &[S]) -> Result<T, MetricError> {
    Ok(ttr::<T, S>(generated)? / ttr::<T, S>(reference)?)
}

/// `a·b / (max(‖a‖, ε) · max(‖b‖, ε))` with ε = 1e-8.
///
/// When both norms exceed ε the denominator is taken as `sqrt(‖a‖²‖b‖²)`,
/// which makes `cos(v, v)` exactly 1.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::DimensionMismatch(a.len(), b.len()));
    }
    let mut dot = T::zero();
    let mut aa = T::zero();
    let mut bb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        aa = aa + x * x;
        bb = bb + y * y;
    }
    let eps = T::lit(COSINE_EPSILON);
    let (na, nb) = (aa.sqrt(), bb.sqrt());
    let denom = if na >= eps && nb >= eps {
        let joint = (aa * bb).sqrt();
        if joint.is_finite() && joint > T::zero() {
            joint
        } else {
            na * nb
        }
    } else {
        na.max(eps) * nb.max(eps)
    };
    Ok(dot / denom)
}

/// Greedy-matching BERTScore F1 between two token-embedding sequences.
pub fn bertscore_f1<T, S, V>(reference: &[(S, V)], generated: &[(S, V)]) -> Result<T, MetricError>
where
    T: Scalar,
    V: AsRef<[T]>,
{
    if reference.is_empty() || generated.is_empty() {
        return Err(MetricError::Undefined("BERTScore of an empty token list".into()));
    }
    let dim = reference[0].1.as_ref().len();
    for (_, v) in reference.iter().chain(generated) {
        if v.as_ref().len() != dim {
            return Err(MetricError::DimensionMismatch(dim, v.as_ref().len()));
        }
    }
    // sims[i][j] = cos(ref_i, gen_j)
    let sims: Vec<Vec<T>> = reference
        .iter()
        .map(|(_, r)| {
            generated
                .iter()
                .map(|(_, g)| cosine_similarity(r.as_ref(), g.as_ref()))
                .collect::<Result<Vec<T>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let neg_inf = T::neg_infinity();
    let recall = sims
        .iter()
        .map(|row| row.iter().fold(neg_inf, |m, &s| m.max(s)))
        .sum::<T>()
        / T::from_count(reference.len());
    let precision = (0..generated.len())
        .map(|j| sims.iter().fold(neg_inf, |m, row| m.max(row[j])))
        .sum::<T>()
        / T::from_count(generated.len());
    // Negative averages (possible with raw cosines) are floored so F1 stays in [0, 1].
    let precision = precision.max(T::zero()).min(T::one());
    let recall = recall.max(T::zero()).min(T::one());
    let denom = precision + recall;
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::lit(2.0) * precision * recall / denom)
}

/// Metrics for a single scored pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairScore<T> {
    pub pair_index: usize,
    pub word_count_ref: usize,
    pub word_count_gen: usize,
    pub jaccard_dissimilarity: T,
    pub entropy_ratio: T,
    pub entropy_guarded: bool,
    pub cosine_similarity: Option<T>,
    pub bertscore_f1: Option<T>,
}

/// Set-level averages: one row of the lexical-diversity and
/// semantic-fidelity tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SetQualityReport<T> {
    pub method_name: String,
    pub avg_word_ref: T,
    pub avg_word_gen: T,
    /// `avg_word_gen / avg_word_ref`.
    pub word_ratio: Option<T>,
    pub avg_jaccard: T,
    /// Mean of per-pair entropy ratios.
    pub avg_entropy_ratio: T,
    /// Set-level TTR of the generated side over the reference side.
    pub ttr_ratio: Option<T>,
    pub avg_cosine: Option<T>,
    pub avg_bertscore_f1: Option<T>,
    pub n_pairs_scored: usize,
    pub n_entropy_guarded: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub footnotes: Vec<String>,
}

fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> Option<T> {
    let (sum, n) = values.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::from_count(n))
}

struct Embedded<T> {
    sentence: Vec<Vec<T>>,
    tokens: Vec<Vec<(String, Vec<T>)>>,
}

fn embed_side<T: Scalar>(
    client: &dyn EmbeddingProvider,
    texts: &[String],
) -> Result<Embedded<T>, String> {
    let results = client.embed(texts, true).map_err(|e| e.to_string())?;
    if results.len() != texts.len() {
        return Err(format!(
            "embedding provider returned {} results for {} inputs",
            results.len(),
            texts.len()
        ));
    }
    let conv = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let mut sentence = Vec::with_capacity(results.len());
    let mut tokens = Vec::with_capacity(results.len());
    for r in results {
        sentence.push(conv(&r.sentence_vector));
        let toks = r
            .token_vectors
            .ok_or_else(|| "embedding provider returned no token vectors".to_string())?;
        tokens.push(toks.iter().map(|(t, v)| (t.clone(), conv(v))).collect());
    }
    Ok(Embedded { sentence, tokens })
}

/// Scores pairs without sampling. Embedding metrics are attempted only when
/// a client is given; failures are reported through the returned warnings.
pub fn score_pairs<T: Scalar>(
    pairs: &[SentencePair],
    embedder: Option<&dyn EmbeddingProvider>,
) -> (Vec<PairScore<T>>, Vec<String>) {
    let mut warnings = Vec::new();
    let embedded = embedder.and_then(|client| {
        let refs: Vec<String> = pairs.iter().map(|p| p.reference.clone()).collect();
        let gens: Vec<String> = pairs.iter().map(|p| p.generated.clone()).collect();
        match embed_side::<T>(client, &refs).and_then(|r| embed_side::<T>(client, &gens).map(|g| (r, g))) {
            Ok(v) => Some(v),
            Err(e) => {
                tracing::warn!("embedding metrics skipped: {e}");
                warnings.push(format!("embedding metrics unavailable: {e}"));
                None
            }
        }
    });
    let mut scores = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let er = entropy_ratio::<T>(pair);
        let (cos, bs) = match &embedded {
            Some((r, g)) => {
                let cos = cosine_similarity(&r.sentence[i], &g.sentence[i]);
                let bs = bertscore_f1(&r.tokens[i], &g.tokens[i]);
                if let Err(e) = &cos {
                    warnings.push(format!("pair {}: cosine: {e}", pair.pair_index));
                }
                if let Err(e) = &bs {
                    warnings.push(format!("pair {}: bertscore: {e}", pair.pair_index));
                }
                (cos.ok(), bs.ok())
            }
            None => (None, None),
        };
        scores.push(PairScore {
            pair_index: pair.pair_index,
            word_count_ref: tokenize(&pair.reference).len(),
            word_count_gen: tokenize(&pair.generated).len(),
            jaccard_dissimilarity: jaccard_dissimilarity(&pair.reference, &pair.generated),
            entropy_ratio: er.value,
            entropy_guarded: er.guarded,
            cosine_similarity: cos,
            bertscore_f1: bs,
        });
    }
    (scores, warnings)
}

/// Samples every fourth pair, scores it and averages over the set.
pub fn evaluate_set<T: Scalar>(
    method_name: &str,
    pairs: &[SentencePair],
    embedder: Option<&dyn EmbeddingProvider>,
) -> Result<SetQualityReport<T>, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::Undefined("quality of an empty pair set".into()));
    }
    let sampled = sample_pairs(pairs);
    let (scores, mut warnings) = score_pairs::<T>(&sampled, embedder);

    let avg_word_ref = mean(scores.iter().map(|s| T::from_count(s.word_count_ref))).unwrap_or_default();
    let avg_word_gen = mean(scores.iter().map(|s| T::from_count(s.word_count_gen))).unwrap_or_default();
    let word_ratio = (avg_word_ref > T::zero()).then(|| avg_word_gen / avg_word_ref);
    let gens: Vec<&str> = sampled.iter().map(|p| p.generated.as_str()).collect();
    let refs: Vec<&str> = sampled.iter().map(|p| p.reference.as_str()).collect();
    let ttr_ratio = match ttr_ratio::<T, _>(&gens, &refs) {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("TTR ratio: {e}"));
            None
        }
    };
    let all_or_none = |vals: Vec<Option<T>>| -> Option<T> {
        if vals.iter().any(Option::is_none) {
            None
        } else {
            mean(vals.into_iter().flatten())
        }
    };
    Ok(SetQualityReport {
        method_name: method_name.to_string(),
        avg_word_ref,
        avg_word_gen,
        word_ratio,
        avg_jaccard: mean(scores.iter().map(|s| s.jaccard_dissimilarity)).unwrap_or_default(),
        avg_entropy_ratio: mean(scores.iter().map(|s| s.entropy_ratio)).unwrap_or_default(),
        ttr_ratio,
        avg_cosine: all_or_none(scores.iter().map(|s| s.cosine_similarity).collect()),
        avg_bertscore_f1: all_or_none(scores.iter().map(|s| s.bertscore_f1).collect()),
        n_pairs_scored: scores.len(),
        n_entropy_guarded: scores.iter().filter(|s| s.entropy_guarded).count(),
        warnings,
        footnotes: Vec::new(),
    })
}
