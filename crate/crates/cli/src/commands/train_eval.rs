use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use textaug::augment::{merge_into_training_set, read_augmented};
use textaug::classify::{f1_report, import_external_predictions, label_matrix, run_eval, PROXY_MODEL_NAME};
use textaug::corpus::{Dataset, Split};
use textaug::ClassificationReport64;
use tracing::info;

use super::augment::AUGMENTED_FILE;
use crate::error::Result;
use crate::tables::{classification_csv, classification_row, BASELINE_ROW};
use crate::{write_file, write_json, Session, TrainEvalArgs};

pub const CLASSIFICATION_JSON: &str = "classification.json";
pub const CLASSIFICATION_CSV: &str = "classification.csv";
pub const EXTERNAL_MODEL_NAME: &str = "external";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOutput {
    pub plan: String,
    pub model: String,
    pub baseline_model: String,
    pub baseline: ClassificationReport64,
    pub augmented: ClassificationReport64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub fn run(session: &Session, args: &TrainEvalArgs) -> Result<()> {
    let seed = session.seed()?;
    let config = &session.config;
    let dataset = config.dataset.load()?;
    let mut hp = config.classifier.clone();
    hp.seed = seed;

    for name in session.plan_names(args.plan.plan.as_deref())? {
        let dir = session.plan_dir(&name)?;
        let plan_cfg = config.plan(&name)?;
        let targets: BTreeSet<String> = config.targets_for(plan_cfg, &dataset)?.into_iter().collect();

        let output = if let Some(pred_path) = &args.predictions {
            external(&name, &dataset, &targets, &hp, pred_path, args.baseline_predictions.as_deref())?
        } else {
            let records = read_augmented(&dir.join(AUGMENTED_FILE))?;
            let merged = merge_into_training_set(&dataset, &records, seed)?;
            let (baseline, augmented) = run_eval::<f64>(&dataset, &merged.dataset, &targets, &hp, &name)?;
            ClassificationOutput {
                plan: name.clone(),
                model: PROXY_MODEL_NAME.into(),
                baseline_model: PROXY_MODEL_NAME.into(),
                baseline,
                augmented,
                warnings: merged.warnings,
            }
        };

        let rows = vec![
            classification_row(BASELINE_ROW, &output.baseline_model, &output.baseline, true),
            classification_row(&name, &output.model, &output.augmented, false),
        ];
        write_file(&dir.join(CLASSIFICATION_CSV), classification_csv(&rows)?)?;
        write_json(&dir.join(CLASSIFICATION_JSON), &output)?;
        info!(
            plan = %name,
            pct_aug = output.augmented.pct_change_augmented,
            pct_other = output.augmented.pct_change_other,
            "classification written"
        );
    }
    Ok(())
}

fn external(
    name: &str,
    dataset: &Dataset,
    targets: &BTreeSet<String>,
    hp: &textaug::classify::Hyperparams,
    predictions: &std::path::Path,
    baseline_predictions: Option<&std::path::Path>,
) -> Result<ClassificationOutput> {
    let labels = dataset.vocabulary().to_vec();
    let gold = label_matrix(dataset.split(Split::Test), &labels);
    let (baseline, baseline_model) = match baseline_predictions {
        Some(p) => {
            let pred = import_external_predictions(p, dataset)?;
            (f1_report("baseline", &pred, &gold, &labels, targets, None)?, EXTERNAL_MODEL_NAME)
        }
        None => {
            let model = textaug::classify::Pipeline::<f64>::fit(dataset, hp)?;
            let test: Vec<_> = dataset.split(Split::Test).collect();
            let pred = model.predict(test.iter().copied())?;
            (f1_report("baseline", &pred, &gold, &labels, targets, None)?, PROXY_MODEL_NAME)
        }
    };
    let pred = import_external_predictions(predictions, dataset)?;
    let augmented = f1_report(name, &pred, &gold, &labels, targets, Some(&baseline))?;
    Ok(ClassificationOutput {
        plan: name.to_string(),
        model: EXTERNAL_MODEL_NAME.into(),
        baseline_model: baseline_model.into(),
        baseline,
        augmented,
        warnings: Vec::new(),
    })
}
