//! Acceptance checks. Run with `cargo test -p textaug-cli --test acceptance`;
//! prints one PASS/FAIL line per criterion and fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textaug::augment::{backtranslate, label_histogram, oversample, paraphrase, BalanceMode, ParaphraseConfig, PromptMode};
use textaug::classify::{pct_change, Hyperparams, LogisticRegression, SparseMatrix, TABLE_COLUMNS};
use textaug::corpus::{Dataset, MultiLabelRecord, Split};
use textaug::providers::languages::DEEPL_LANGUAGES;
use textaug::providers::MockProvider;
use textaug::quality::{
    bertscore_f1, cosine_similarity, entropy, evaluate_set, jaccard_dissimilarity, sample_pairs, ttr, SentencePair,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

// Oracles work on space-separated lowercase words, so tokenization is a
// plain split.
const WORDS: [&str; 8] = ["a", "b", "c", "d", "cat", "dog", "sat", "the"];

fn random_words(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    (0..rng.gen_range(1..9)).map(|_| *WORDS.choose(rng).unwrap()).collect()
}

fn oracle_jaccard(a: &[&str], b: &[&str]) -> f64 {
    let sa: BTreeSet<&str> = a.iter().copied().collect();
    let sb: BTreeSet<&str> = b.iter().copied().collect();
    let inter = WORDS.iter().filter(|w| sa.contains(*w) && sb.contains(*w)).count();
    let union = WORDS.iter().filter(|w| sa.contains(*w) || sb.contains(*w)).count();
    1.0 - inter as f64 / union as f64
}

fn oracle_entropy(words: &[&str]) -> f64 {
    let n = words.len() as f64;
    WORDS
        .iter()
        .map(|w| words.iter().filter(|x| *x == w).count() as f64 / n)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

fn oracle_ttr(words: &[&str]) -> f64 {
    let types = WORDS.iter().filter(|w| words.contains(w)).count();
    types as f64 / words.len() as f64
}

fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn oracle_bertscore(r: &[Vec<f64>], g: &[Vec<f64>]) -> f64 {
    let mut recall = 0.0;
    for x in r {
        let mut best = f64::NEG_INFINITY;
        for y in g {
            best = best.max(oracle_cosine(x, y));
        }
        recall += best;
    }
    recall /= r.len() as f64;
    let mut precision = 0.0;
    for y in g {
        let mut best = f64::NEG_INFINITY;
        for x in r {
            best = best.max(oracle_cosine(x, y));
        }
        precision += best;
    }
    precision /= g.len() as f64;
    let (p, r) = (precision.clamp(0.0, 1.0), recall.clamp(0.0, 1.0));
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = 200;
    for case in 0..cases {
        let a = random_words(&mut rng);
        let b = random_words(&mut rng);
        let (ta, tb) = (a.join(" "), b.join(" "));
        let close = |x: f64, y: f64, tol: f64, what: &str| {
            ensure((x - y).abs() <= tol, || format!("case {case}: {what} {x} vs oracle {y}"))
        };
        close(jaccard_dissimilarity(&ta, &tb), oracle_jaccard(&a, &b), 1e-12, "jaccard")?;
        close(entropy(&ta), oracle_entropy(&a), 1e-12, "entropy")?;
        close(ttr(&[ta.as_str()]).unwrap(), oracle_ttr(&a), 1e-12, "ttr")?;

        let dim = rng.gen_range(2..8);
        let vec = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<f64>>();
        let (u, v) = (vec(&mut rng), vec(&mut rng));
        close(cosine_similarity(&u, &v).unwrap(), oracle_cosine(&u, &v), 1e-9, "cosine")?;
        let r: Vec<Vec<f64>> = (0..rng.gen_range(1..6)).map(|_| vec(&mut rng)).collect();
        let g: Vec<Vec<f64>> = (0..rng.gen_range(1..6)).map(|_| vec(&mut rng)).collect();
        let tagged = |m: &[Vec<f64>]| m.iter().map(|x| ("t".to_string(), x.clone())).collect::<Vec<_>>();
        close(bertscore_f1(&tagged(&r), &tagged(&g)).unwrap(), oracle_bertscore(&r, &g), 1e-9, "bertscore")?;
    }
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!("{cases} random cases in {took:?}"))
}

fn identity_suite() -> Outcome {
    let texts = ["The cat sat on the mat.", "I can't believe it, honestly!", "so proud so proud of you"];
    let pairs: Vec<SentencePair> = texts.iter().enumerate().map(|(i, t)| SentencePair::new(i, *t, *t)).collect();
    let mock = MockProvider::new(1);
    let r = evaluate_set::<f64>("identity", &pairs, Some(&mock)).map_err(|e| e.to_string())?;
    let got = (
        r.avg_jaccard,
        r.avg_entropy_ratio,
        r.word_ratio,
        r.ttr_ratio,
        r.avg_cosine,
        r.avg_bertscore_f1,
    );
    ensure(got == (0.0, 1.0, Some(1.0), Some(1.0), Some(1.0), Some(1.0)), || format!("got {got:?}"))?;
    Ok("jaccard 0, entropy 1, word 1, ttr 1, cosine 1, bertscore 1".into())
}

fn stats_k5(dir: &Path) -> Result<String, String> {
    let train = dir.join("train.tsv");
    let labels = dir.join("emotions.txt");
    ensure(train.is_file(), || format!("{} missing", train.display()))?;
    let out = common::textaug(&[
        "stats",
        "--k",
        "5",
        "--dataset",
        train.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
    ]);
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    Ok(String::from_utf8(out.stdout).unwrap())
}

fn goemotions_stats() -> Outcome {
    let start = Instant::now();
    let (dir, expected, source) = match std::env::var_os("GOEMOTIONS_DIR") {
        Some(d) => (
            std::path::PathBuf::from(d),
            "label,count\ngrief,75\npride,105\nrelief,145\nnervousness,156\nembarrassment,291\n",
            "official files",
        ),
        None => (
            Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/goemotions"),
            "label,count\ngrief,7\npride,10\nrelief,14\nnervousness,15\nembarrassment,29\n",
            "bundled 500-row fixture",
        ),
    };
    let got = stats_k5(&dir)?;
    ensure(got == expected, || format!("stdout was\n{got}"))?;
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("{source}, {took:?}"))
}

fn class_dataset(label: &str, n: usize, extra: &[&str]) -> Dataset {
    let mut labels: Vec<String> = vec![label.to_string()];
    labels.extend(extra.iter().map(|s| s.to_string()));
    let mut records = Vec::new();
    for i in 0..n {
        records.push(MultiLabelRecord::new(
            format!("{label}-{i:03}"),
            format!("I am so sad about loss number {i} and I really miss them"),
            [label],
            Split::Train,
        ));
    }
    for (j, other) in extra.iter().enumerate() {
        records.push(MultiLabelRecord::new(format!("other-{j}"), "A good day at the beach", [*other], Split::Train));
    }
    Dataset::new(records, Some(labels)).unwrap()
}

fn oversampling() -> Outcome {
    let d = class_dataset("grief", 75, &["joy"]);
    let targets = vec!["grief".to_string()];
    let mut got = Vec::new();
    for factor in [3, 5] {
        let out = oversample(&d, &targets, factor).map_err(|e| e.to_string())?;
        got.push(out.records.len());
    }
    ensure(got == [225, 375], || format!("got {got:?}"))?;
    Ok("75 records: factor 3 -> 225, factor 5 -> 375".into())
}

fn nbal_balance() -> Outcome {
    let classes = ["grief", "pride", "relief", "nervousness", "embarrassment"];
    let mut records = Vec::new();
    for (c, class) in classes.iter().enumerate() {
        for i in 0..(6 + c) {
            records.push(MultiLabelRecord::new(
                format!("{class}-{i}"),
                format!("I feel really good and happy about the new job number {i} today"),
                [*class],
                Split::Train,
            ));
        }
    }
    let d = Dataset::new(records, Some(classes.iter().map(|s| s.to_string()).collect())).unwrap();
    let targets: Vec<String> = classes.iter().map(|s| s.to_string()).collect();
    let cfg = ParaphraseConfig {
        prompt_mode: PromptMode::P2Batch,
        n: 3,
        balance: BalanceMode::Nbal,
        target_per_class: Some(10),
    };
    let out = paraphrase(&d, &targets, &cfg, &MockProvider::new(7), "mock", 7).map_err(|e| e.to_string())?;
    let hist = label_histogram(&out.records);
    let counts: Vec<usize> = classes.iter().map(|c| hist.get(*c).copied().unwrap_or(0)).collect();
    ensure(counts == [10; 5], || format!("per-class counts {counts:?}"))?;
    Ok(format!("{counts:?}"))
}

fn backtranslation_volume() -> Outcome {
    let d = Dataset::new(
        vec![
            MultiLabelRecord::new("r1", "I really miss my old friend so much", ["grief"], Split::Train),
            MultiLabelRecord::new("r2", "The funeral was sad and quiet", ["grief"], Split::Train),
        ],
        Some(vec!["grief".into()]),
    )
    .unwrap();
    let langs: Vec<String> = DEEPL_LANGUAGES.iter().map(|s| s.to_string()).collect();
    let out = backtranslate(&d, &["grief".into()], &langs, &MockProvider::new(3), "mock").map_err(|e| e.to_string())?;
    ensure(out.records.len() == 20, || format!("{} records", out.records.len()))?;
    for r in &out.records {
        let lang = r.id.rsplit("~bt-").next().unwrap_or_default();
        let want = vec!["en".to_string(), lang.to_string(), "en".to_string()];
        ensure(r.language_chain == want && langs.iter().any(|l| l == lang), || {
            format!("{}: chain {:?}", r.id, r.language_chain)
        })?;
    }
    Ok("20 records, chains [en, L, en]".into())
}

fn every_fourth() -> Outcome {
    for n in 1..=100usize {
        let pairs: Vec<SentencePair> = (0..n).map(|i| SentencePair::new(i, "a", "b")).collect();
        let s = sample_pairs(&pairs);
        ensure(s.len() == n.div_ceil(4), || format!("n = {n}: {} sampled", s.len()))?;
        ensure(s.iter().enumerate().all(|(k, p)| p.pair_index == 4 * k), || format!("n = {n}: wrong indices"))?;
    }
    Ok("n = 1..=100".into())
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n, v, l) = (8, 6, 3);
        let dense: Vec<Vec<f64>> = (0..n).map(|_| (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let x = SparseMatrix::from_dense(&dense);
        let y: Vec<Vec<bool>> = (0..n).map(|_| (0..l).map(|_| rng.gen_bool(0.4)).collect()).collect();
        let hp = Hyperparams {
            l2_lambda: rng.gen_range(0.0..0.05),
            ..Hyperparams::default()
        };
        let mut m = LogisticRegression::<f64>::zeros(l, v, hp);
        m.weights.iter_mut().flatten().for_each(|w| *w = rng.gen_range(-2.0..2.0));
        m.bias.iter_mut().for_each(|b| *b = rng.gen_range(-1.0..1.0));
        let (gw, gb) = m.gradient(&x, &y).map_err(|e| e.to_string())?;
        let loss = |m: &LogisticRegression<f64>| m.loss(&x, &y).unwrap();
        for li in 0..l {
            for j in 0..=v {
                let (mut p, mut q) = (m.clone(), m.clone());
                let analytic = if j < v {
                    p.weights[li][j] += h;
                    q.weights[li][j] -= h;
                    gw[li][j]
                } else {
                    p.bias[li] += h;
                    q.bias[li] -= h;
                    gb[li]
                };
                let numeric = (loss(&p) - loss(&q)) / (2.0 * h);
                let scale = analytic.abs().max(numeric.abs()).max(1e-8);
                worst = worst.max((analytic - numeric).abs() / scale);
            }
        }
    }
    ensure(worst < 1e-4, || format!("worst relative error {worst:e}"))?;
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!("20 instances, worst relative error {worst:.1e}, {took:?}"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let config = common::write_experiment(tmp.path(), &["pl", "ru", "fi", "ja", "es"]);
    let out = tmp.path().join("out");
    let (c, o) = (config.to_str().unwrap(), out.to_str().unwrap());
    let base = ["--config", c, "--mock", "--seed", "7", "--out", o];
    for cmd in [["augment", "--plan", "bt"], ["train-eval", "--plan", "bt"]] {
        let args: Vec<&str> = base.iter().chain(cmd.iter()).copied().collect();
        common::textaug_ok(&args);
    }
    let report = common::read_json(&out.join("bt/classification.json"));
    let aug = report["augmented"]["pct_change_augmented"].as_f64().unwrap();
    let other = report["augmented"]["pct_change_other"].as_f64().unwrap();
    ensure(aug > 0.0 && other.abs() < 10.0, || format!("pct aug {aug:.2}, pct other {other:.2}"))?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!("pct_change aug {aug:+.2}, other {other:+.2}, {took:?}"))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = common::write_experiment(tmp.path(), &["pl", "ru"]);
    let (a, b) = (tmp.path().join("run-a"), tmp.path().join("run-b"));
    common::full_pipeline(&config, &a, 7);
    common::full_pipeline(&config, &b, 7);
    let (ta, tb) = (common::tree(&a), common::tree(&b));
    ensure(!ta.is_empty(), || "empty output tree".into())?;
    let names = |t: &[(String, Vec<u8>)]| t.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    ensure(names(&ta) == names(&tb), || "different file sets".into())?;
    if let Some((name, _)) = ta.iter().zip(&tb).find(|(x, y)| x.1 != y.1).map(|(x, _)| x) {
        return Err(format!("{name} differs"));
    }
    Ok(format!("{} files byte-identical", ta.len()))
}

fn report_fidelity() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = common::write_experiment(tmp.path(), &["pl"]);
    let out = tmp.path().join("out");
    let (c, o) = (config.to_str().unwrap(), out.to_str().unwrap());
    let base = ["--config", c, "--mock", "--seed", "7", "--out", o];
    for cmd in [["augment", "--plan", "oversample"], ["train-eval", "--plan", "oversample"]] {
        let args: Vec<&str> = base.iter().chain(cmd.iter()).copied().collect();
        common::textaug_ok(&args);
    }
    let csv = fs::read_to_string(out.join("oversample/classification.csv")).unwrap();
    let header = csv.lines().next().unwrap_or_default();
    let want = TABLE_COLUMNS.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    ensure(header == want, || format!("header {header}"))?;
    let pct = pct_change(0.44f64, 0.40).unwrap();
    let rendered = textaug_cli::tables::percent(pct);
    ensure(rendered == "10.00", || format!("0.40 -> 0.44 rendered {rendered}"))?;
    Ok("classification header verbatim; 0.40 -> 0.44 gives 10.00".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("metric oracle suite", metric_oracles),
        ("identity suite", identity_suite),
        ("GoEmotions stats --k 5", goemotions_stats),
        ("oversampling arithmetic", oversampling),
        ("nbal balance", nbal_balance),
        ("backtranslation volume", backtranslation_volume),
        ("every-fourth sampling", every_fourth),
        ("gradient check", gradient_check),
        ("end-to-end directional", end_to_end),
        ("determinism", determinism),
        ("report fidelity", report_fidelity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
