//! Experiment configuration file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use textaug::augment::Strategy;
use textaug::classify::Hyperparams;
use textaug::corpus::{
    label_counts, load_many, select_least_represented, Dataset, DatasetFormat, LoadOptions, Split,
};
use textaug::providers::http::{HttpConfig, HttpTransport, ReplayTransport, Transport};
use textaug::providers::{
    ChatProvider, DeeplClient, EmbeddingProvider, HttpEmbeddingClient, MockProvider, OpenAiChatClient,
    TranslationProvider,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSelection>,
    /// Splits counted by `stats` and by `k`-based target selection.
    #[serde(default = "default_stats_splits")]
    pub stats_splits: Vec<Split>,
    #[serde(default)]
    pub providers: BTreeMap<String, ProviderConfig>,
    #[serde(default)]
    pub plans: Vec<PlanConfig>,
    #[serde(default)]
    pub quality: QualityConfig,
    #[serde(default)]
    pub classifier: Hyperparams,
}

fn default_stats_splits() -> Vec<Split> {
    vec![Split::Train]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub paths: Vec<PathBuf>,
    #[serde(default = "default_format")]
    pub format: DatasetFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_file: Option<PathBuf>,
}

fn default_format() -> DatasetFormat {
    DatasetFormat::Jsonl
}

impl DatasetConfig {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            format: self.format,
            label_file: self.label_file.clone(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        if self.paths.is_empty() {
            return Err(CliError::Config("dataset.paths is empty".into()));
        }
        Ok(load_many(&self.paths, &self.load_options())?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSelection {
    /// The `k` least represented labels.
    K(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    OpenaiChat,
    Deepl,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(flatten)]
    pub http: HttpConfig,
    /// Serve responses from a recording directory instead of the network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_dir: Option<PathBuf>,
    /// Embedding model name sent with embedding requests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub strategy: Strategy,
    /// Overrides the experiment-wide target selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSelection>,
}

impl PlanConfig {
    pub fn model_name(&self) -> &str {
        match (&self.model, &self.strategy) {
            (Some(m), _) => m,
            (None, Strategy::Oversample { .. }) => "none",
            (None, _) => "default",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_provider: Option<String>,
}

fn yes() -> bool {
    true
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            embedding_provider: None,
        }
    }
}

fn absolutize(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn plan_name_ok(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        let base = base.canonicalize().unwrap_or(base);
        config.resolve_paths(&base);
        Ok(config)
    }

    /// Makes every relative path relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in &mut self.dataset.paths {
            absolutize(base, p);
        }
        if let Some(p) = &mut self.dataset.label_file {
            absolutize(base, p);
        }
        if let Some(p) = &mut self.output_dir {
            absolutize(base, p);
        }
        for prov in self.providers.values_mut() {
            if let Some(p) = &mut prov.replay_dir {
                absolutize(base, p);
            }
            if let Some(p) = &mut prov.http.record_dir {
                absolutize(base, p);
            }
        }
    }

    /// Structural checks that need neither data nor network.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for plan in &self.plans {
            if !plan_name_ok(&plan.name) {
                return Err(CliError::Config(format!(
                    "plan name `{}` must use only letters, digits, `-`, `_` and `.`",
                    plan.name
                )));
            }
            if !names.insert(&plan.name) {
                return Err(CliError::Config(format!("plan `{}` defined twice", plan.name)));
            }
            plan.strategy
                .validate()
                .map_err(|e| CliError::Config(format!("plan `{}`: {e}", plan.name)))?;
            let needs_provider = plan.strategy.needs_chat() || plan.strategy.needs_translation();
            match (&plan.provider, needs_provider) {
                (None, true) => {
                    return Err(CliError::Config(format!("plan `{}` needs a provider", plan.name)));
                }
                (Some(p), _) => {
                    let prov = self.providers.get(p).ok_or_else(|| {
                        CliError::Config(format!("plan `{}` references unknown provider `{p}`", plan.name))
                    })?;
                    let ok = match prov.kind {
                        ProviderKind::OpenaiChat => needs_provider,
                        ProviderKind::Deepl => plan.strategy.needs_translation(),
                        ProviderKind::Embedding => false,
                    };
                    if !ok {
                        return Err(CliError::Config(format!(
                            "provider `{p}` cannot serve plan `{}`",
                            plan.name
                        )));
                    }
                }
                (None, false) => {}
            }
        }
        if let Some(p) = &self.quality.embedding_provider {
            match self.providers.get(p) {
                Some(prov) if prov.kind == ProviderKind::Embedding => {}
                Some(_) => return Err(CliError::Config(format!("provider `{p}` is not an embedding provider"))),
                None => return Err(CliError::Config(format!("unknown embedding provider `{p}`"))),
            }
        }
        if self.stats_splits.is_empty() {
            return Err(CliError::Config("stats_splits is empty".into()));
        }
        Ok(())
    }

    pub fn plan(&self, name: &str) -> Result<&PlanConfig> {
        self.plans
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| CliError::Config(format!("no plan named `{name}`")))
    }

    /// Resolves the target labels of a plan against the dataset.
    pub fn targets_for(&self, plan: &PlanConfig, dataset: &Dataset) -> Result<Vec<String>> {
        let selection = plan
            .targets
            .as_ref()
            .or(self.targets.as_ref())
            .ok_or_else(|| CliError::Config(format!("plan `{}` has no target selection", plan.name)))?;
        resolve_targets(selection, dataset, &self.stats_splits)
    }
}

pub fn resolve_targets(selection: &TargetSelection, dataset: &Dataset, splits: &[Split]) -> Result<Vec<String>> {
    match selection {
        TargetSelection::K(k) => {
            let counts = label_counts(&dataset.restrict_to(splits));
            Ok(select_least_represented(&counts, *k)?)
        }
        TargetSelection::Labels(labels) => {
            if labels.is_empty() {
                return Err(CliError::Config("target label list is empty".into()));
            }
            if let Some(l) = labels.iter().find(|l| !dataset.vocabulary().contains(l)) {
                return Err(CliError::Config(format!("target label `{l}` is not in the dataset")));
            }
            Ok(labels.clone())
        }
    }
}

fn transport(prov: &ProviderConfig) -> Result<Arc<dyn Transport>> {
    Ok(match &prov.replay_dir {
        Some(dir) => Arc::new(ReplayTransport::open(dir)?),
        None => Arc::new(HttpTransport::new(prov.http.clone())?),
    })
}

/// Providers for one plan plus a description for the manifest.
pub struct PlanProviders {
    pub chat: Option<Box<dyn ChatProvider>>,
    pub translation: Option<Box<dyn TranslationProvider>>,
    pub endpoint: String,
}

pub fn plan_providers(config: &ExperimentConfig, plan: &PlanConfig, mock: Option<u64>) -> Result<PlanProviders> {
    if let Some(seed) = mock {
        let m = MockProvider::new(seed);
        let endpoint = ChatProvider::endpoint(&m);
        return Ok(PlanProviders {
            chat: Some(Box::new(m.clone())),
            translation: Some(Box::new(m)),
            endpoint,
        });
    }
    let Some(name) = &plan.provider else {
        return Ok(PlanProviders {
            chat: None,
            translation: None,
            endpoint: "none".into(),
        });
    };
    let prov = &config.providers[name];
    let t = transport(prov)?;
    let endpoint = t.endpoint();
    Ok(match prov.kind {
        ProviderKind::OpenaiChat => {
            let client = OpenAiChatClient::new(t, plan.model_name());
            PlanProviders {
                chat: Some(Box::new(client.clone())),
                translation: Some(Box::new(client)),
                endpoint,
            }
        }
        ProviderKind::Deepl => PlanProviders {
            chat: None,
            translation: Some(Box::new(DeeplClient::new(t))),
            endpoint,
        },
        ProviderKind::Embedding => return Err(CliError::Config(format!("provider `{name}` is not a chat or translation provider"))),
    })
}

pub fn embedding_provider(config: &ExperimentConfig, mock: Option<u64>) -> Result<Option<Box<dyn EmbeddingProvider>>> {
    if let Some(seed) = mock {
        return Ok(Some(Box::new(MockProvider::new(seed))));
    }
    let Some(name) = &config.quality.embedding_provider else {
        return Ok(None);
    };
    let prov = &config.providers[name];
    let model = prov.model.clone().unwrap_or_else(|| "default".into());
    Ok(Some(Box::new(HttpEmbeddingClient::new(transport(prov)?, model))))
}
