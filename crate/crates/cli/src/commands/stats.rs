use std::io::Write;
use std::path::{Path, PathBuf};

use textaug::corpus::{
    label_correlation, label_counts, load_many, select_least_represented, Dataset, DatasetFormat, LoadOptions, Split,
};
use textaug::LabelCorrelation;

use crate::error::{CliError, Result};
use crate::tables::{csv_string, ratio};
use crate::{write_file, Session, StatsArgs};

pub const COUNTS_FILE: &str = "label_counts.csv";
pub const CORRELATION_FILE: &str = "label_correlation.csv";

fn guess_format(paths: &[PathBuf]) -> DatasetFormat {
    let tsv = paths.iter().all(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")));
    if tsv {
        DatasetFormat::Tsv
    } else {
        DatasetFormat::Jsonl
    }
}

fn load(session: Option<&Session>, args: &StatsArgs) -> Result<(Dataset, Vec<Split>)> {
    if !args.datasets.is_empty() {
        let options = LoadOptions {
            format: args.format.unwrap_or_else(|| guess_format(&args.datasets)),
            label_file: args.labels.clone(),
        };
        return Ok((load_many(&args.datasets, &options)?, args.splits.clone()));
    }
    let session = session.ok_or_else(|| CliError::Config("stats needs --dataset or --config".into()))?;
    let splits = if args.splits.is_empty() {
        session.config.stats_splits.clone()
    } else {
        args.splits.clone()
    };
    Ok((session.config.dataset.load()?, splits))
}

pub fn correlation_csv(m: &LabelCorrelation) -> Result<String> {
    let header: Vec<&str> = m.labels.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = m.values.iter().map(|row| row.iter().map(|&v| ratio(v)).collect()).collect();
    csv_string(&header, &rows)
}

/// Prints label counts (or the `k` rarest labels) and, given an output
/// directory, writes the count and correlation CSVs there.
pub fn run(session: Option<&Session>, cli_out: Option<&Path>, args: &StatsArgs, stdout: &mut dyn Write) -> Result<()> {
    let (dataset, splits) = load(session, args)?;
    let dataset = if splits.is_empty() { dataset } else { dataset.restrict_to(&splits) };
    let counts = label_counts(&dataset);
    let rows: Vec<Vec<String>> = counts
        .iter()
        .map(|s| vec![s.label.clone(), s.count.to_string(), ratio(s.frequency)])
        .collect();
    let counts_csv = csv_string(&["label", "count", "frequency"], &rows)?;

    let printed = match args.k {
        Some(k) => {
            let targets = select_least_represented(&counts, k)?;
            let rows: Vec<Vec<String>> = targets
                .iter()
                .map(|t| {
                    let c = counts.iter().find(|s| &s.label == t).expect("target comes from counts");
                    vec![t.clone(), c.count.to_string()]
                })
                .collect();
            csv_string(&["label", "count"], &rows)?
        }
        None => counts_csv.clone(),
    };
    stdout
        .write_all(printed.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;

    let out = session.and_then(|s| s.out.as_deref()).or(cli_out);
    if let Some(out) = out {
        write_file(&out.join(COUNTS_FILE), &counts_csv)?;
        write_file(&out.join(CORRELATION_FILE), correlation_csv(&label_correlation(&dataset))?)?;
    }
    Ok(())
}
