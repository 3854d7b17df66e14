use std::collections::BTreeSet;

use proptest::prelude::*;
use textaug::corpus::{
    label_correlation, label_counts, load_dataset, write_dataset, Dataset, LoadOptions, MultiLabelRecord, Split,
};

const LABELS: &[&str] = &["admiration", "grief", "joy", "pride", "relief"];

fn record(i: usize) -> impl Strategy<Value = MultiLabelRecord> {
    (
        "[a-zA-Z0-9 ,.!?'éü]{1,30}",
        prop::collection::btree_set(prop::sample::select(LABELS), 1..4),
        prop::sample::select(&Split::ALL[..]),
    )
        .prop_filter("text must not be blank", |(t, _, _)| !t.trim().is_empty())
        .prop_map(move |(text, labels, split)| MultiLabelRecord::new(format!("r{i}"), text, labels, split))
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..25)
        .prop_flat_map(|n| (0..n).map(record).collect::<Vec<_>>())
        .prop_map(|records| Dataset::new(records, Some(LABELS.iter().map(|s| s.to_string()).collect())).unwrap())
}

fn essentials(d: &Dataset) -> Vec<(String, String, BTreeSet<String>, Split)> {
    d.records()
        .iter()
        .map(|r| (r.id.clone(), r.text.clone(), r.labels.clone(), r.split))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip_is_lossless(d in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let labels = dir.path().join("labels.txt");
        std::fs::write(&labels, LABELS.join("\n")).unwrap();
        write_dataset(&d, &path, &LoadOptions::jsonl()).unwrap();
        let opts = LoadOptions { label_file: Some(labels), ..LoadOptions::jsonl() };
        prop_assert_eq!(load_dataset(&path, &opts).unwrap(), d);
    }

    #[test]
    fn tsv_round_trip_keeps_records(d in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.tsv");
        let opts = LoadOptions::tsv(dir.path().join("emotions.txt"));
        write_dataset(&d, &path, &opts).unwrap();
        let back = load_dataset(&path, &opts).unwrap();
        prop_assert_eq!(essentials(&back), essentials(&d));
        prop_assert_eq!(back.vocabulary(), d.vocabulary());
    }

    #[test]
    fn counts_and_correlation_invariants(d in dataset()) {
        let counts = label_counts(&d);
        for w in counts.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].label < w[1].label));
        }
        for c in &counts {
            let brute = d.records().iter().filter(|r| r.has_label(&c.label)).count();
            prop_assert_eq!(c.count, brute);
        }
        let m = label_correlation::<f64>(&d);
        for (i, row) in m.values.iter().enumerate() {
            prop_assert_eq!(row[i], 1.0);
            for (j, v) in row.iter().enumerate() {
                prop_assert!((-1.0..=1.0).contains(v));
                prop_assert_eq!(*v, m.values[j][i]);
            }
        }
    }
}
