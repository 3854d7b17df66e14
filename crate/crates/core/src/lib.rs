//! Text augmentation toolkit for imbalanced multi-label classification.

pub mod augment;
pub mod classify;
pub mod corpus;
pub mod providers;
pub mod quality;
pub mod scalar;
pub mod seed;

pub use scalar::Scalar;

pub type LabelCorrelation = corpus::LabelCorrelationMatrix<f64>;
pub type LabelCorrelation32 = corpus::LabelCorrelationMatrix<f32>;
pub type PairScore64 = quality::PairScore<f64>;
pub type PairScore32 = quality::PairScore<f32>;
pub type SetQualityReport64 = quality::SetQualityReport<f64>;
pub type SetQualityReport32 = quality::SetQualityReport<f32>;
pub type TfidfModel = classify::TfidfModel<f64>;
pub type TfidfModel32 = classify::TfidfModel<f32>;
pub type LogRegModel = classify::LogisticRegression<f64>;
pub type LogRegModel32 = classify::LogisticRegression<f32>;
pub type ClassificationReport64 = classify::ClassificationReport<f64>;
pub type ClassificationReport32 = classify::ClassificationReport<f32>;
