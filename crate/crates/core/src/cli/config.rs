use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::{CliError, Flags};
use crate::corpus::{load_stopwords, TokenizerConfig, DEFAULT_STOPWORDS};
use crate::factor::{FitConfig, SnmfConfig};
use crate::metrics::StabilityConfig;
use crate::pipeline::{KRange, PipelineConfig};
use crate::synthetic::SyntheticConfig;

/// Flat run configuration. Every key may come from the TOML file given with
/// `--config`; command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub stopwords_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,

    pub k_min: usize,
    pub k_max: usize,
    /// Topic range of the dynamic layer; defaults to `k_min..=k_max`.
    pub dynamic_k_min: Option<usize>,
    pub dynamic_k_max: Option<usize>,

    pub max_iters: usize,
    pub rel_tolerance: f64,
    pub abs_threshold: f64,
    pub epsilon_guard: f64,
    pub refine_max_iters: usize,
    pub refine_rel_tolerance: f64,

    /// Elastic-net regularization of the window models; off unless `alpha`
    /// or `beta` is positive.
    pub alpha: f64,
    pub beta: f64,
    pub l1_ratio: f64,

    pub coherence_top_n: usize,
    pub report_top_n: usize,

    pub lowercase: bool,
    pub min_token_length: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    pub max_df_fraction: f64,

    pub l_values: Vec<f64>,
    pub stability_alpha: f64,
    pub stability_beta: f64,
    /// Dynamic topic count for the stability experiment; defaults to the
    /// fitted model's K.
    pub stability_k: Option<usize>,
    pub stability_seeds: usize,

    pub synthetic: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fit = FitConfig::default();
        let tok = TokenizerConfig::default();
        let range = KRange::default();
        Self {
            input_path: None,
            stopwords_path: None,
            embeddings_path: None,
            output_dir: PathBuf::from("out"),
            seed: 0,
            k_min: range.min,
            k_max: range.max,
            dynamic_k_min: None,
            dynamic_k_max: None,
            max_iters: fit.max_iters,
            rel_tolerance: fit.rel_tolerance,
            abs_threshold: fit.abs_threshold,
            epsilon_guard: fit.epsilon_guard,
            refine_max_iters: 500,
            refine_rel_tolerance: 1e-8,
            alpha: 0.0,
            beta: 0.0,
            l1_ratio: 0.0,
            coherence_top_n: 10,
            report_top_n: 20,
            lowercase: tok.lowercase,
            min_token_length: tok.min_token_length,
            ngram_max: tok.ngram_max,
            min_df: tok.min_df,
            max_df_fraction: tok.max_df_fraction,
            l_values: vec![0.0, 0.4, 0.6, 0.9],
            stability_alpha: 1e-5,
            stability_beta: 0.0,
            stability_k: None,
            stability_seeds: 10,
            synthetic: SyntheticConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads the optional config file and applies flag overrides.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let mut config = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::input(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str(&text)
                    .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = flags.seed {
            config.seed = seed;
        }
        if let Some(k) = flags.k_min {
            config.k_min = k;
        }
        if let Some(k) = flags.k_max {
            config.k_max = k;
        }
        if let Some(l) = &flags.l {
            config.l_values = l.clone();
        }
        if let Some(dir) = &flags.output {
            config.output_dir = dir.clone();
        }
        config.synthetic.seed = config.seed;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.k_range()?;
        self.dynamic_k_range()?;
        self.fit_config().validate().map_err(CliError::from)?;
        self.refine_config().validate().map_err(CliError::from)?;
        if let Some(reg) = self.window_reg() {
            reg.validate().map_err(CliError::from)?;
        }
        if self.coherence_top_n < 2 || self.report_top_n == 0 {
            return Err(CliError::config(
                "coherence_top_n must be >= 2 and report_top_n >= 1",
            ));
        }
        if let Some(l) = self.l_values.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(CliError::config(format!("l value {l} outside [0, 1]")));
        }
        if self.stability_seeds == 0 {
            return Err(CliError::config("stability_seeds must be >= 1"));
        }
        self.synthetic.validate().map_err(CliError::from)?;
        Ok(())
    }

    pub fn k_range(&self) -> Result<KRange, CliError> {
        KRange::new(self.k_min, self.k_max).map_err(CliError::from)
    }

    pub fn dynamic_k_range(&self) -> Result<KRange, CliError> {
        KRange::new(
            self.dynamic_k_min.unwrap_or(self.k_min),
            self.dynamic_k_max.unwrap_or(self.k_max),
        )
        .map_err(CliError::from)
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            max_iters: self.max_iters,
            rel_tolerance: self.rel_tolerance,
            abs_threshold: self.abs_threshold,
            epsilon_guard: self.epsilon_guard,
            ..FitConfig::default()
        }
    }

    pub fn refine_config(&self) -> FitConfig {
        FitConfig {
            max_iters: self.refine_max_iters,
            rel_tolerance: self.refine_rel_tolerance,
            ..self.fit_config()
        }
    }

    pub fn window_reg(&self) -> Option<SnmfConfig> {
        (self.alpha > 0.0 || self.beta > 0.0).then_some(SnmfConfig {
            alpha: self.alpha,
            beta: self.beta,
            l1_ratio: self.l1_ratio,
        })
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            fit: self.fit_config(),
            refine: self.refine_config(),
            coherence_top_n: self.coherence_top_n,
            report_top_n: self.report_top_n,
            window_reg: self.window_reg(),
        }
    }

    pub fn tokenizer_config(&self) -> Result<TokenizerConfig, CliError> {
        let stopwords = match &self.stopwords_path {
            Some(path) => load_stopwords(path, self.lowercase).map_err(CliError::from)?,
            None => DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        };
        let config = TokenizerConfig {
            lowercase: self.lowercase,
            min_token_length: self.min_token_length,
            stopwords,
            ngram_max: self.ngram_max,
            min_df: self.min_df,
            max_df_fraction: self.max_df_fraction,
        };
        config.validate().map_err(CliError::from)?;
        Ok(config)
    }

    pub fn stability_config(&self, k: usize) -> Result<StabilityConfig, CliError> {
        let config = StabilityConfig {
            l_values: self.l_values.clone(),
            alpha: self.stability_alpha,
            beta: self.stability_beta,
            k,
            window_k_range: self.k_range()?,
            seeds: (0..self.stability_seeds as u64)
                .map(|i| self.seed.wrapping_add(i))
                .collect(),
            ..StabilityConfig::default()
        };
        config.validate().map_err(CliError::from)?;
        Ok(config)
    }

    pub fn output(&self, relative: impl AsRef<Path>) -> PathBuf {
        self.output_dir.join(relative)
    }
}
