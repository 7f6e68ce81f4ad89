//! Pipeline configuration: a JSON file whose fields can each be overridden
//! by a command-line flag of the same name.
//!
//! Relative paths in the file are resolved against the file's directory;
//! relative paths given as flags are resolved against the working directory.

use std::path::{Path, PathBuf};

use clap::Args;
use medvocab_core::adapt::default_quota_grid;
use medvocab_core::{Strategy, Weighting};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SIZE_GRID: [usize; 4] = [1000, 2000, 5000, 10000];
pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
}

/// The file as written; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tokenizer_path: Option<PathBuf>,
    #[serde(default)]
    pub dataset_paths: DatasetPaths,
    pub lexicon_path: Option<PathBuf>,
    pub general_wordlist_path: Option<PathBuf>,
    pub pac_corpus_path: Option<PathBuf>,
    pub strategy: Option<Strategy>,
    pub quota_grid: Option<Vec<usize>>,
    pub size_grid: Option<Vec<usize>>,
    pub tolerance: Option<f64>,
    pub marker: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub weighting: Option<Weighting>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.tokenizer_path);
        fix(&mut self.dataset_paths.train);
        fix(&mut self.dataset_paths.test);
        fix(&mut self.lexicon_path);
        fix(&mut self.general_wordlist_path);
        fix(&mut self.pac_corpus_path);
        fix(&mut self.output_dir);
    }
}

fn parse_dataset_path(s: &str) -> Result<(String, PathBuf), String> {
    let (split, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected train=PATH or test=PATH, got {s:?}"))?;
    match split {
        "train" | "test" => Ok((split.to_owned(), PathBuf::from(path))),
        other => Err(format!("unknown dataset split {other:?}, expected train or test")),
    }
}

/// Flags mirroring the configuration fields. Both `--field_name` and
/// `--field-name` spellings are accepted.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Pipeline configuration file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long = "tokenizer-path", alias = "tokenizer_path", global = true)]
    pub tokenizer_path: Option<PathBuf>,

    /// `train=PATH` or `test=PATH`; repeatable.
    #[arg(long = "dataset-paths", alias = "dataset_paths", value_parser = parse_dataset_path, global = true)]
    pub dataset_paths: Vec<(String, PathBuf)>,

    #[arg(long = "lexicon-path", alias = "lexicon_path", global = true)]
    pub lexicon_path: Option<PathBuf>,

    #[arg(long = "general-wordlist-path", alias = "general_wordlist_path", global = true)]
    pub general_wordlist_path: Option<PathBuf>,

    #[arg(long = "pac-corpus-path", alias = "pac_corpus_path", global = true)]
    pub pac_corpus_path: Option<PathBuf>,

    #[arg(long, global = true)]
    pub strategy: Option<Strategy>,

    /// Comma-separated quotas.
    #[arg(long = "quota-grid", alias = "quota_grid", value_delimiter = ',', global = true)]
    pub quota_grid: Option<Vec<usize>>,

    /// Comma-separated candidate vocabulary sizes.
    #[arg(long = "size-grid", alias = "size_grid", value_delimiter = ',', global = true)]
    pub size_grid: Option<Vec<usize>>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,

    #[arg(long, global = true)]
    pub marker: Option<String>,

    #[arg(long = "output-dir", alias = "output_dir", global = true)]
    pub output_dir: Option<PathBuf>,

    /// occurrence or unique.
    #[arg(long, global = true)]
    pub weighting: Option<Weighting>,
}

/// Configuration after merging file, flags and defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub tokenizer_path: Option<PathBuf>,
    pub dataset_paths: DatasetPaths,
    pub lexicon_path: Option<PathBuf>,
    pub general_wordlist_path: Option<PathBuf>,
    pub pac_corpus_path: Option<PathBuf>,
    pub strategy: Strategy,
    pub quota_grid: Vec<usize>,
    pub size_grid: Vec<usize>,
    pub tolerance: f64,
    pub marker: Option<String>,
    pub output_dir: PathBuf,
    pub weighting: Weighting,
}

/// Inputs a subcommand cannot run without.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Need {
    Tokenizer,
    TrainSet,
    TestSet,
    Lexicon,
    GeneralWordlist,
    PacCorpus,
}

impl PipelineConfig {
    pub fn resolve(o: &Overrides) -> CliResult<Self> {
        let file = match &o.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut dataset_paths = file.dataset_paths;
        for (split, path) in &o.dataset_paths {
            match split.as_str() {
                "train" => dataset_paths.train = Some(path.clone()),
                _ => dataset_paths.test = Some(path.clone()),
            }
        }
        Ok(PipelineConfig {
            tokenizer_path: o.tokenizer_path.clone().or(file.tokenizer_path),
            dataset_paths,
            lexicon_path: o.lexicon_path.clone().or(file.lexicon_path),
            general_wordlist_path: o.general_wordlist_path.clone().or(file.general_wordlist_path),
            pac_corpus_path: o.pac_corpus_path.clone().or(file.pac_corpus_path),
            strategy: o.strategy.or(file.strategy).unwrap_or(Strategy::Scaffix),
            quota_grid: o
                .quota_grid
                .clone()
                .or(file.quota_grid)
                .unwrap_or_else(default_quota_grid),
            size_grid: o
                .size_grid
                .clone()
                .or(file.size_grid)
                .unwrap_or_else(|| DEFAULT_SIZE_GRID.to_vec()),
            tolerance: o.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
            marker: o.marker.clone().or(file.marker),
            output_dir: o
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            weighting: o.weighting.or(file.weighting).unwrap_or_default(),
        })
    }

    /// Checks everything at once and reports every problem found.
    pub fn validate(&self, needs: &[Need]) -> CliResult<()> {
        let mut problems = Vec::new();
        let paths: [(&str, &Option<PathBuf>, Need); 6] = [
            ("tokenizer_path", &self.tokenizer_path, Need::Tokenizer),
            ("dataset_paths.train", &self.dataset_paths.train, Need::TrainSet),
            ("dataset_paths.test", &self.dataset_paths.test, Need::TestSet),
            ("lexicon_path", &self.lexicon_path, Need::Lexicon),
            ("general_wordlist_path", &self.general_wordlist_path, Need::GeneralWordlist),
            ("pac_corpus_path", &self.pac_corpus_path, Need::PacCorpus),
        ];
        for (name, path, need) in paths {
            match path {
                Some(p) if !p.is_file() => {
                    problems.push(format!("{name}: {} does not exist", p.display()))
                }
                None if needs.contains(&need) => problems.push(format!("{name} is required")),
                _ => {}
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            problems.push(format!("tolerance must be >= 0, got {}", self.tolerance));
        }
        for (name, grid) in [("quota_grid", &self.quota_grid), ("size_grid", &self.size_grid)] {
            if grid.is_empty() {
                problems.push(format!("{name} is empty"));
            } else if grid.contains(&0) {
                problems.push(format!("{name} contains 0"));
            }
        }
        if self.size_grid.windows(2).any(|w| w[0] >= w[1]) {
            problems.push(format!("size_grid must be strictly ascending: {:?}", self.size_grid));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems))
        }
    }

    pub fn required<'a>(&self, name: &str, path: &'a Option<PathBuf>) -> CliResult<&'a Path> {
        path.as_deref()
            .ok_or_else(|| CliError::config(format!("{name} is required")))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
