//! CSV and Markdown renderings of quality and classification results.

use textaug::classify::{Group, TABLE_COLUMNS};
use textaug::{ClassificationReport64, SetQualityReport64};

use crate::error::{CliError, Result};

/// Columns of the lexical diversity and semantic fidelity table.
pub const QUALITY_COLUMNS: [&str; 9] = [
    "Data aug.",
    "Word Original",
    "Word Generated",
    "Word Ratio",
    "Jaccard Dissimilarity",
    "Entropy",
    "TTR Ratio",
    "Cosine Similarity",
    "Bertscore-F1",
];

pub const BASELINE_ROW: &str = "Baseline";

fn fixed(v: f64, places: usize) -> String {
    let s = format!("{v:.places$}");
    // Tiny negative values would otherwise print as "-0.00".
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn ratio(v: f64) -> String {
    fixed(v, 4)
}

pub fn percent(v: f64) -> String {
    fixed(v, 2)
}

fn opt_ratio(v: Option<f64>) -> String {
    v.map(ratio).unwrap_or_default()
}

pub fn quality_row(name: &str, r: &SetQualityReport64) -> Vec<String> {
    vec![
        name.to_string(),
        fixed(r.avg_word_ref, 0),
        fixed(r.avg_word_gen, 0),
        opt_ratio(r.word_ratio),
        ratio(r.avg_jaccard),
        ratio(r.avg_entropy_ratio),
        opt_ratio(r.ttr_ratio),
        opt_ratio(r.avg_cosine),
        opt_ratio(r.avg_bertscore_f1),
    ]
}

/// Row of the classification table; the baseline row leaves the percent
/// change cells empty.
pub fn classification_row(name: &str, model: &str, r: &ClassificationReport64, is_baseline: bool) -> Vec<String> {
    let mut row = vec![name.to_string(), model.to_string()];
    for g in [Group::All, Group::Augmented, Group::Other] {
        row.push(ratio(r.macro_for(g)));
        row.push(if is_baseline { String::new() } else { percent(r.pct_change_for(g)) });
    }
    row
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("CSV encoding: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("CSV encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV input is UTF-8"))
}

pub fn quality_csv(rows: &[Vec<String>]) -> Result<String> {
    csv_string(&QUALITY_COLUMNS, rows)
}

pub fn classification_csv(rows: &[Vec<String>]) -> Result<String> {
    csv_string(&TABLE_COLUMNS, rows)
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header.iter().map(|h| md_cell(h)).collect()));
    out.push_str(&line(header.iter().map(|_| "---".to_string()).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(|c| md_cell(c)).collect()));
    }
    out
}
