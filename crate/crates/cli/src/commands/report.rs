use std::path::Path;

use textaug::classify::TABLE_COLUMNS;

use super::quality::{QualityOutput, QUALITY_JSON};
use super::train_eval::{ClassificationOutput, CLASSIFICATION_JSON};
use crate::error::Result;
use crate::tables::{classification_row, markdown_table, quality_row, BASELINE_ROW, QUALITY_COLUMNS};
use crate::{read_json, write_file, Session};

pub const REPORT_FILE: &str = "report.md";

fn read_if_present<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if path.is_file() {
        read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Builds the Markdown summary from whatever per-plan results exist.
pub fn render(session: &Session) -> Result<String> {
    let mut names: Vec<&str> = session.config.plans.iter().map(|p| p.name.as_str()).collect();
    names.sort_unstable();

    let mut quality_rows = Vec::new();
    let mut quality_notes = Vec::new();
    let mut class_rows = Vec::new();
    let mut class_notes = Vec::new();
    let mut baseline_row = None;
    for name in &names {
        let dir = session.plan_dir(name)?;
        match read_if_present::<QualityOutput>(&dir.join(QUALITY_JSON))? {
            Some(q) => {
                match &q.report {
                    Some(r) => quality_rows.push(quality_row(name, r)),
                    None => quality_notes.push(format!("- `{name}`: no eligible pairs")),
                }
                quality_notes.extend(q.footnotes.iter().map(|f| format!("- `{name}`: {f}")));
            }
            None => quality_notes.push(format!("- `{name}`: no quality results")),
        }
        match read_if_present::<ClassificationOutput>(&dir.join(CLASSIFICATION_JSON))? {
            Some(c) => {
                if baseline_row.is_none() {
                    baseline_row = Some(classification_row(BASELINE_ROW, &c.baseline_model, &c.baseline, true));
                }
                class_rows.push(classification_row(name, &c.model, &c.augmented, false));
            }
            None => class_notes.push(format!("- `{name}`: no classification results")),
        }
    }
    if let Some(b) = baseline_row {
        class_rows.insert(0, b);
    }

    let mut md = String::from("# Augmentation report\n\n## Lexical diversity and semantic fidelity\n\n");
    md.push_str(&markdown_table(&QUALITY_COLUMNS, &quality_rows));
    if quality_rows.is_empty() {
        md.push_str("\nno results\n");
    }
    if !quality_notes.is_empty() {
        md.push('\n');
        md.push_str(&quality_notes.join("\n"));
        md.push('\n');
    }
    md.push_str("\n## Classification\n\n");
    md.push_str(&markdown_table(&TABLE_COLUMNS, &class_rows));
    if class_rows.is_empty() {
        md.push_str("\nno results\n");
    }
    if !class_notes.is_empty() {
        md.push('\n');
        md.push_str(&class_notes.join("\n"));
        md.push('\n');
    }
    Ok(md)
}

pub fn run(session: &Session) -> Result<()> {
    let md = render(session)?;
    write_file(&session.out()?.join(REPORT_FILE), md)
}
