#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const COMMON: [&str; 5] = ["sports", "cooking", "travel", "music", "weather"];
pub const RARE: [&str; 5] = ["grief", "pride", "relief", "nervousness", "embarrassment"];

fn vocabulary(label: &str) -> &'static [&'static str] {
    match label {
        "sports" => &["match", "goal", "team", "coach", "league", "score", "season"],
        "cooking" => &["recipe", "oven", "garlic", "sauce", "bake", "dinner", "spices"],
        "travel" => &["flight", "hotel", "passport", "beach", "trip", "luggage", "airport"],
        "music" => &["song", "album", "guitar", "concert", "band", "lyrics", "melody"],
        "weather" => &["rain", "storm", "sunny", "forecast", "cold", "wind", "snow"],
        "grief" => &["grief", "funeral", "mourning", "loss", "cry", "sad", "miss"],
        "pride" => &["proud", "achievement", "accomplished", "earned", "finally", "medal", "award"],
        "relief" => &["relieved", "phew", "safe", "over", "calm", "resolved", "breathe"],
        "nervousness" => &["nervous", "anxious", "shaking", "interview", "worried", "sweating", "jitters"],
        "embarrassment" => &["embarrassed", "awkward", "blushing", "cringe", "mortified", "tripped", "oops"],
        _ => unreachable!(),
    }
}

const FILLER: [&str; 16] = [
    "today", "really", "people", "good", "think", "friend", "maybe", "very", "new", "time", "just", "again",
    "honestly", "week", "feel", "thing",
];

fn sentence(rng: &mut ChaCha8Rng, label: &str) -> String {
    let mut words: Vec<&str> = vocabulary(label).choose_multiple(rng, 2).copied().collect();
    let others: Vec<&str> = COMMON.iter().chain(RARE.iter()).copied().filter(|l| *l != label).collect();
    let noise = others.choose(rng).expect("labels");
    words.push(vocabulary(noise).choose(rng).expect("words"));
    for _ in 0..rng.gen_range(3..6) {
        words.push(FILLER.choose(rng).expect("filler"));
    }
    words.shuffle(rng);
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

/// Imbalanced synthetic corpus: five common labels (80 train / 20 test
/// each) and five rare labels (10 train / 20 test each), single-label
/// records, JSONL lines.
pub fn directional_jsonl(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let mut n = 0;
    for (labels, train) in [(&COMMON, 80), (&RARE, 10)] {
        for label in labels.iter() {
            for (split, count) in [("train", train), ("test", 20)] {
                for _ in 0..count {
                    n += 1;
                    let row = json!({
                        "id": format!("s{n:04}"),
                        "text": sentence(&mut rng, label),
                        "labels": [label],
                        "split": split,
                    });
                    lines.push(row.to_string());
                }
            }
        }
    }
    lines.join("\n") + "\n"
}

pub fn label_file() -> String {
    COMMON.iter().chain(RARE.iter()).copied().collect::<Vec<_>>().join("\n") + "\n"
}

/// Writes the synthetic dataset and a configuration with one plan per
/// strategy kind into `dir`; returns the config path.
pub fn write_experiment(dir: &Path, languages: &[&str]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("data.jsonl"), directional_jsonl(11)).unwrap();
    fs::write(dir.join("labels.txt"), label_file()).unwrap();
    let config = json!({
        "seed": 7,
        "dataset": {"paths": ["data.jsonl"], "format": "jsonl", "label_file": "labels.txt"},
        "targets": {"k": 5},
        "providers": {
            "gpt": {"kind": "openai_chat", "endpoint": "http://127.0.0.1:9", "api_key_env": "TEXTAUG_TEST_KEY"},
            "deepl": {"kind": "deepl", "endpoint": "http://127.0.0.1:9", "auth": "deepl_auth_key"}
        },
        "plans": [
            {"name": "bt", "provider": "deepl", "strategy": {"kind": "backtranslation", "languages": languages}},
            {"name": "oversample", "strategy": {"kind": "oversample", "factor": 3}},
            {"name": "paraphrase", "provider": "gpt", "model": "gpt-4",
             "strategy": {"kind": "paraphrase", "prompt_mode": "p2_batch", "n": 3}},
            {"name": "zero_shot", "provider": "gpt", "model": "gpt-4",
             "strategy": {"kind": "generate", "shots": 0, "n": 10, "per_class": 20}}
        ]
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

pub fn textaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textaug"))
        .args(args)
        .env_remove("TEXTAUG_LOG")
        .output()
        .expect("binary runs")
}

pub fn textaug_ok(args: &[&str]) -> String {
    let out = textaug(args);
    assert!(
        out.status.success(),
        "textaug {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Runs every command of the pipeline with the mock provider.
pub fn full_pipeline(config: &Path, out: &Path, seed: u64) {
    let config = config.to_str().unwrap();
    let out = out.to_str().unwrap();
    let seed = seed.to_string();
    let base = ["--config", config, "--mock", "--seed", &seed, "--out", out];
    for cmd in ["stats", "augment", "quality", "train-eval", "report"] {
        let mut args: Vec<&str> = base.to_vec();
        args.push(cmd);
        textaug_ok(&args);
    }
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file under `root` with its bytes, relative paths sorted.
pub fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
