use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use textaug::augment::{read_augmented, SYNTHETIC_SOURCE};
use textaug::quality::{evaluate_set, SentencePair};
use textaug::SetQualityReport64;
use tracing::{info, warn};

use super::augment::AUGMENTED_FILE;
use crate::config::embedding_provider;
use crate::error::{CliError, Result};
use crate::tables::{quality_csv, quality_row};
use crate::{write_file, write_json, Session};

pub const QUALITY_JSON: &str = "quality.json";
pub const QUALITY_CSV: &str = "quality.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityOutput {
    pub plan: String,
    pub pairs: usize,
    pub synthetic_excluded: usize,
    /// Absent when no record had a source to compare against.
    pub report: Option<SetQualityReport64>,
    #[serde(default)]
    pub footnotes: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub fn run(session: &Session, plan: Option<&str>) -> Result<()> {
    if !session.config.quality.enabled {
        warn!("quality evaluation is disabled in the configuration");
        return Ok(());
    }
    let names = session.plan_names(plan)?;
    let dataset = session.config.dataset.load()?;
    let texts: HashMap<&str, &str> = dataset.records().iter().map(|r| (r.id.as_str(), r.text.as_str())).collect();
    let embedder = embedding_provider(&session.config, session.mock_seed()?)?;

    for name in names {
        let dir = session.plan_dir(&name)?;
        let records = read_augmented(&dir.join(AUGMENTED_FILE))?;
        let mut pairs = Vec::new();
        let mut synthetic = 0;
        for r in &records {
            if r.source_id == SYNTHETIC_SOURCE {
                synthetic += 1;
                continue;
            }
            let reference = texts.get(r.source_id.as_str()).ok_or_else(|| {
                CliError::Validation(format!("record {} refers to unknown source {}", r.id, r.source_id))
            })?;
            pairs.push(SentencePair::new(pairs.len(), *reference, r.text.clone()));
        }

        let mut warnings = Vec::new();
        let mut report = if pairs.is_empty() {
            let w = format!("plan `{name}`: no records with a source text; quality report is empty");
            warn!("{w}");
            warnings.push(w);
            None
        } else {
            let mut r = evaluate_set::<f64>(&name, &pairs, embedder.as_deref())
                .map_err(|e| CliError::Validation(format!("plan `{name}`: {e}")))?;
            if embedder.is_none() {
                r.warnings.push("no embedding provider configured; cosine and BERTScore skipped".into());
            }
            Some(r)
        };
        let mut footnotes = Vec::new();
        if synthetic > 0 {
            footnotes.push(format!("{synthetic} synthetic records excluded"));
        }
        if let Some(r) = &mut report {
            r.footnotes.extend(footnotes.iter().cloned());
        }

        let rows: Vec<Vec<String>> = report.iter().map(|r| quality_row(&name, r)).collect();
        write_file(&dir.join(QUALITY_CSV), quality_csv(&rows)?)?;
        let output = QualityOutput {
            plan: name.clone(),
            pairs: pairs.len(),
            synthetic_excluded: synthetic,
            report,
            footnotes,
            warnings,
        };
        write_json(&dir.join(QUALITY_JSON), &output)?;
        info!(plan = %name, pairs = output.pairs, "quality written");
    }
    Ok(())
}
