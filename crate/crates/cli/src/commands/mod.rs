pub mod augment;
pub mod quality;
pub mod report;
pub mod stats;
pub mod train_eval;

use textaug::corpus::Dataset;
use textaug::seed::fingerprint;

/// Hex SHA-256 over the dataset content, recorded in manifests.
pub fn dataset_fingerprint(dataset: &Dataset) -> String {
    let mut s = String::new();
    s.push_str(&dataset.vocabulary().join("\t"));
    s.push('\n');
    for r in dataset.records() {
        let labels: Vec<&str> = r.labels.iter().map(String::as_str).collect();
        s.push_str(&format!("{}\t{}\t{}\t{}\n", r.id, r.split, labels.join(","), r.text));
    }
    fingerprint(&s)
}
