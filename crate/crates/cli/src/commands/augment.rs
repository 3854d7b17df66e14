use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use textaug::augment::{
    label_histogram, method_counts, run_plan, write_augmented, AugmentError, AugmentationPlan, Backends,
};
use tracing::{info, warn};

use super::dataset_fingerprint;
use crate::config::{plan_providers, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::{read_json, write_json, Session};

pub const AUGMENTED_FILE: &str = "augmented.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARTIAL_DIR: &str = "partial";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub per_label: BTreeMap<String, usize>,
    pub per_method: BTreeMap<String, usize>,
}

/// Everything needed to repeat one plan run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub plan: String,
    pub seed: u64,
    pub mock: bool,
    pub targets: Vec<String>,
    pub dataset_fingerprint: String,
    pub provider_endpoint: String,
    pub model: String,
    pub counts: Counts,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// The configuration reduced to this plan, with the seed filled in and
    /// no output directory.
    pub config: ExperimentConfig,
}

pub fn run(session: &Session, plan: Option<&str>) -> Result<()> {
    for name in session.plan_names(plan)? {
        run_one(session, &name)?;
    }
    Ok(())
}

/// Re-executes the run described by a manifest. Output goes next to the
/// manifest's plan directory unless `--out` is given.
pub fn rerun(manifest_path: &Path, seed: Option<u64>, mock: bool, out: Option<PathBuf>) -> Result<()> {
    let manifest: Manifest = read_json(manifest_path)?;
    if seed.is_some_and(|s| s != manifest.seed) {
        return Err(CliError::Config(format!(
            "--seed conflicts with the manifest seed {}",
            manifest.seed
        )));
    }
    let out = match out {
        Some(o) => o,
        None => manifest_path
            .parent()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .ok_or_else(|| CliError::Config("cannot derive an output directory from the manifest path".into()))?,
    };
    let session = Session::new(manifest.config, Some(manifest.seed), mock || manifest.mock, Some(out))?;
    run_one(&session, &manifest.plan)
}

fn run_one(session: &Session, name: &str) -> Result<()> {
    let seed = session.seed()?;
    let config = &session.config;
    let plan_cfg = config.plan(name)?;
    let dataset = config.dataset.load()?;
    let targets = config.targets_for(plan_cfg, &dataset)?;
    let providers = plan_providers(config, plan_cfg, session.mock_seed()?)?;
    let dir = session.plan_dir(name)?;
    info!(plan = name, targets = ?targets, "augmenting");

    let plan = AugmentationPlan {
        target_labels: targets.clone(),
        strategy: plan_cfg.strategy.clone(),
    };
    let backends = Backends {
        chat: providers.chat.as_deref(),
        translation: providers.translation.as_deref(),
        model: plan_cfg.model_name(),
    };
    let result = match run_plan(&dataset, &plan, backends, seed) {
        Ok(r) => r,
        Err(AugmentError::Provider { partial, source }) => {
            let path = dir.join(PARTIAL_DIR).join(AUGMENTED_FILE);
            crate::ensure_parent(&path)?;
            write_augmented(&path, &partial)?;
            warn!(plan = name, kept = partial.len(), "provider failed; partial results written");
            return Err(CliError::Provider(format!(
                "plan `{name}`: {source} ({} partial record(s) in {})",
                partial.len(),
                Path::new(name).join(PARTIAL_DIR).join(AUGMENTED_FILE).display()
            )));
        }
        Err(e) => return Err(e.into()),
    };

    let path = dir.join(AUGMENTED_FILE);
    crate::ensure_parent(&path)?;
    write_augmented(&path, &result.records)?;

    let mut reduced = config.clone();
    reduced.seed = Some(seed);
    reduced.output_dir = None;
    reduced.plans.retain(|p| p.name == name);
    if let Some(p) = &plan_cfg.provider {
        reduced.providers.retain(|k, _| k == p);
    } else {
        reduced.providers.clear();
    }
    reduced.quality.embedding_provider = None;
    let manifest = Manifest {
        plan: name.to_string(),
        seed,
        mock: session.mock,
        targets,
        dataset_fingerprint: dataset_fingerprint(&dataset),
        provider_endpoint: providers.endpoint,
        model: plan_cfg.model_name().to_string(),
        counts: Counts {
            total: result.records.len(),
            per_label: label_histogram(&result.records),
            per_method: method_counts(&result.records),
        },
        warnings: result.warnings,
        config: reduced,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    info!(plan = name, records = manifest.counts.total, "augmentation written");
    Ok(())
}
