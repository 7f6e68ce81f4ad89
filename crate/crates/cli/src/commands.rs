//! Subcommand implementations. Each writes its artifacts under the
//! configured output directory unless an explicit path is given.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use medvocab_core::adapt::{
    build_candidate_vocab, extract_candidate_words, medvoc_llm_clean, medvoc_search, scaffix_select,
    scaffolding_stats, GridEntry, SearchConfig, ScaffoldStats, SourceTag,
};
use medvocab_core::bpe::BpeTrainer;
use medvocab_core::dataset::{load_jsonl, load_wordlist};
use medvocab_core::metrics::{corpus_report, CorpusReport, DatasetStatsRow};
use medvocab_core::rouge::{rouge_l_with, RougeVariant};
use medvocab_core::slicer::{
    percentile_slice, score_records, subset_profile, threshold_slice, EvalSlice, Setting,
    SubsetProfile,
};
use medvocab_core::text::{normalize_words, pretokenize};
use medvocab_core::{
    apply_added_vocab, extend_matrix, AdaptBpe, AddedVocabulary, DatasetRecord, DomainLexicon,
    EmbeddingMatrix, Segmenter, Strategy, Tokenizer, WordCounts,
};
use serde::{Deserialize, Serialize};

use crate::config::{Need, PipelineConfig};
use crate::error::{CliError, CliResult};

pub const ADDED_VOCAB_FILE: &str = "added_vocab.json";
pub const SEARCH_AUDIT_FILE: &str = "search_audit.json";
pub const EXTENDED_TOKENIZER_FILE: &str = "tokenizer_extended.json";
pub const SLICES_DIR: &str = "slices";

/// Artifact envelope carrying the config hash.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config_hash: &'a str,
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub hash: String,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig) -> Self {
        let hash = cfg.hash();
        Ctx { cfg, hash }
    }

    fn out_path(&self, explicit: Option<PathBuf>, default: &str) -> PathBuf {
        explicit.unwrap_or_else(|| self.cfg.output_dir.join(default))
    }

    fn report<T: Serialize>(&self, path: &Path, command: &'static str, body: T) -> CliResult<()> {
        let report = Report {
            config_hash: &self.hash,
            command,
            body,
        };
        write_json(path, &report)
    }

    fn tokenizer_at(&self, path: &Path) -> CliResult<Tokenizer> {
        let t = Tokenizer::load(path)?;
        if let Some(marker) = &self.cfg.marker {
            if marker != t.marker() {
                return Err(CliError::config(format!(
                    "marker {marker:?} does not match the tokenizer's {:?} ({})",
                    t.marker(),
                    path.display()
                )));
            }
        }
        Ok(t)
    }

    fn tokenizer(&self) -> CliResult<Tokenizer> {
        let path = self.cfg.required("tokenizer_path", &self.cfg.tokenizer_path)?;
        self.tokenizer_at(path)
    }

    fn lexicon(&self) -> CliResult<DomainLexicon> {
        let path = self.cfg.required("lexicon_path", &self.cfg.lexicon_path)?;
        Ok(DomainLexicon::load(path)?)
    }

    fn records(&self, split: Split) -> CliResult<Vec<DatasetRecord>> {
        let (name, path) = match split {
            Split::Train => ("dataset_paths.train", &self.cfg.dataset_paths.train),
            Split::Test => ("dataset_paths.test", &self.cfg.dataset_paths.test),
        };
        Ok(load_jsonl(self.cfg.required(name, path)?)?)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_text(path, &text)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AnalyzeBody<'a> {
    split: Split,
    segmenter: &'static str,
    table: DatasetStatsRow,
    details: &'a CorpusReport,
}

pub fn analyze(ctx: &Ctx, split: Split, adaptbpe: bool, out: Option<PathBuf>) -> CliResult<()> {
    let need = match split {
        Split::Train => Need::TrainSet,
        Split::Test => Need::TestSet,
    };
    ctx.cfg.validate(&[Need::Tokenizer, Need::Lexicon, need])?;
    let t = ctx.tokenizer()?;
    let lexicon = ctx.lexicon()?;
    let records = ctx.records(split)?;
    let report = if adaptbpe {
        corpus_report(&AdaptBpe::new(&t), &records, &lexicon, ctx.cfg.weighting)?
    } else {
        corpus_report(&t, &records, &lexicon, ctx.cfg.weighting)?
    };
    let name = format!(
        "analyze_{}{}.json",
        if split == Split::Train { "train" } else { "test" },
        if adaptbpe { "_adaptbpe" } else { "" }
    );
    let body = AnalyzeBody {
        split,
        segmenter: if adaptbpe { "adaptbpe" } else { "bpe" },
        table: report.to_row(),
        details: &report,
    };
    ctx.report(&ctx.out_path(out, &name), "analyze", body)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct Cleaning {
    pub before: usize,
    pub after: usize,
    pub removed: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SearchAudit {
    pub strategy: Strategy,
    pub candidate_words: usize,
    /// Index into `grid`.
    pub chosen_index: usize,
    pub chosen: SearchConfig,
    pub utility: f64,
    pub min_utility: f64,
    pub tolerance: f64,
    pub grid: Vec<GridEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cleaning: Option<Cleaning>,
    pub added_tokens: usize,
    pub scaffold_tokens: usize,
}

fn text_counts<'a>(texts: impl IntoIterator<Item = &'a str>) -> WordCounts {
    let mut words = WordCounts::new();
    for t in texts {
        words.add_text(t);
    }
    words
}

/// Runs the configured strategy end to end and returns the chosen
/// vocabulary with its search audit.
pub fn select_vocabulary(
    cfg: &PipelineConfig,
    t: &Tokenizer,
    train: &[DatasetRecord],
    lexicon: &DomainLexicon,
    pac_corpus: Option<&str>,
) -> CliResult<(AddedVocabulary, SearchAudit)> {
    let train_words = text_counts(train.iter().flat_map(|r| [r.source.as_str(), r.summary.as_str()]));
    let tgt_words = extract_candidate_words(t, &train_words, lexicon)?;
    log::info!("{} candidate domain words in the training set", tgt_words.len());
    let (result, cleaning) = match cfg.strategy {
        Strategy::Scaffix => (
            scaffix_select(&tgt_words, &cfg.quota_grid, t, &tgt_words, cfg.tolerance)?,
            None,
        ),
        Strategy::Medvoc | Strategy::MedvocLlm => {
            let pac_text = pac_corpus.ok_or_else(|| CliError::config("pac_corpus_path is required"))?;
            let pac_words = extract_candidate_words(t, &WordCounts::from_text(pac_text), lexicon)?;
            let pac = build_candidate_vocab(&pac_words, &cfg.size_grid, t.marker(), SourceTag::Pac)?;
            let tgt = build_candidate_vocab(&tgt_words, &cfg.size_grid, t.marker(), SourceTag::Tgt)?;
            let mut result = medvoc_search(t, &pac, &tgt, &tgt_words, cfg.tolerance)?;
            let mut cleaning = None;
            if cfg.strategy == Strategy::MedvocLlm {
                let targets: Vec<String> = result.added.targets().map(str::to_owned).collect();
                let summaries: Vec<&str> = train.iter().map(|r| r.summary.as_str()).collect();
                let cleaned = medvoc_llm_clean(&targets, t.marker(), &summaries)?;
                let kept: HashSet<&str> = cleaned.iter().map(String::as_str).collect();
                cleaning = Some(Cleaning {
                    before: targets.len(),
                    after: cleaned.len(),
                    removed: targets.iter().filter(|x| !kept.contains(x.as_str())).cloned().collect(),
                });
                result.added = AddedVocabulary::synthesize(t, &cleaned, Strategy::MedvocLlm);
            }
            (result, cleaning)
        }
    };
    let audit = SearchAudit {
        strategy: cfg.strategy,
        candidate_words: tgt_words.len(),
        chosen_index: result.chosen,
        chosen: result.chosen_entry().config,
        utility: result.utility,
        min_utility: result.min_utility,
        tolerance: result.tolerance,
        cleaning,
        added_tokens: result.added.tokens.len(),
        scaffold_tokens: result.added.scaffold_tokens.len(),
        grid: result.grid,
    };
    Ok((result.added, audit))
}

pub fn build_vocab(ctx: &Ctx, out: Option<PathBuf>, audit_out: Option<PathBuf>) -> CliResult<()> {
    let mut needs = vec![Need::Tokenizer, Need::TrainSet, Need::Lexicon];
    if ctx.cfg.strategy.uses_merges() {
        needs.push(Need::PacCorpus);
    }
    ctx.cfg.validate(&needs)?;
    let t = ctx.tokenizer()?;
    let lexicon = ctx.lexicon()?;
    let train = ctx.records(Split::Train)?;
    let pac = match &ctx.cfg.pac_corpus_path {
        Some(p) if ctx.cfg.strategy.uses_merges() => Some(read_text(p)?),
        _ => None,
    };
    let (added, audit) = select_vocabulary(&ctx.cfg, &t, &train, &lexicon, pac.as_deref())?;
    added.validate(&t)?;
    let path = ctx.out_path(out, ADDED_VOCAB_FILE);
    write_text(&path, &added.to_json_string())?;
    ctx.report(&ctx.out_path(audit_out, SEARCH_AUDIT_FILE), "build-vocab", audit)
}

// ---------------------------------------------------------------------------

pub fn extend(ctx: &Ctx, added: Option<PathBuf>, out: Option<PathBuf>) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer])?;
    let t = ctx.tokenizer()?;
    let added = AddedVocabulary::load(ctx.out_path(added, ADDED_VOCAB_FILE))?;
    let extended = apply_added_vocab(&t, &added)?;
    if !extended.tokens().starts_with(t.tokens()) {
        return Err(medvocab_core::Error::Invariant("extension reassigned base ids".into()).into());
    }
    let path = ctx.out_path(out, EXTENDED_TOKENIZER_FILE);
    write_text(&path, &extended.to_json_string())
}

// ---------------------------------------------------------------------------

/// One output line per pretokenized input word, tokens separated by spaces.
pub fn tokenize(ctx: &Ctx, adaptbpe: bool, input: impl BufRead, mut output: impl Write) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer])?;
    let t = ctx.tokenizer()?;
    let adapt = AdaptBpe::new(&t);
    let seg: &dyn Segmenter = if adaptbpe { &adapt } else { &t };
    let stdout_err = |e| CliError::io("<stdout>", e);
    for line in input.lines() {
        let line = line.map_err(|e| CliError::io("<stdin>", e))?;
        for word in pretokenize(&line) {
            writeln!(output, "{}", seg.segment(word).tokens.join(" ")).map_err(stdout_err)?;
        }
    }
    output.flush().map_err(stdout_err)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScaffoldBody {
    targets: usize,
    merge_synthesis: ScaffoldStats,
    scaffix: ScaffoldStats,
}

/// Targets come from a word file (first tab-separated column, marker
/// prepended) or, by
/// default, from the targets of the current added vocabulary.
pub fn scaffold_stats(ctx: &Ctx, targets: Option<PathBuf>, out: Option<PathBuf>) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer])?;
    let t = ctx.tokenizer()?;
    let list: Vec<String> = match targets {
        Some(path) => read_text(&path)?
            .lines()
            .filter_map(|l| l.split('\t').next())
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(|w| format!("{}{w}", t.marker()))
            .collect(),
        None => {
            let added = AddedVocabulary::load(ctx.out_path(None, ADDED_VOCAB_FILE))?;
            added.targets().map(str::to_owned).collect()
        }
    };
    if list.is_empty() {
        return Err(CliError::Data("target list is empty".into()));
    }
    let merge_synthesis = scaffolding_stats(&t, &list);
    let scaffix_vocab = AddedVocabulary::scaffix(list.iter().map(|w| t.strip_marker(w).to_owned()));
    let scaffix = ScaffoldStats {
        targets: scaffix_vocab.tokens.len(),
        scaffold_count: scaffix_vocab.scaffold_tokens.len(),
        overhead_fraction: scaffix_vocab.scaffold_tokens.len() as f64
            / (scaffix_vocab.tokens.len().max(1)) as f64,
    };
    let body = ScaffoldBody {
        targets: merge_synthesis.targets,
        merge_synthesis,
        scaffix,
    };
    ctx.report(&ctx.out_path(out, "scaffold_stats.json"), "scaffold-stats", body)
}

// ---------------------------------------------------------------------------

pub fn parse_threshold(s: &str) -> Result<(Setting, f64), String> {
    let (setting, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected SETTING=VALUE, got {s:?}"))?;
    let setting: Setting = setting.parse().map_err(|e: medvocab_core::Error| e.to_string())?;
    let value: f64 = value.parse().map_err(|e| format!("bad threshold {value:?}: {e}"))?;
    Ok((setting, value))
}

#[derive(Serialize)]
struct SliceFile<'a> {
    config_hash: &'a str,
    #[serde(flatten)]
    slice: &'a EvalSlice,
}

pub fn slice(ctx: &Ctx, thresholds: &[(Setting, f64)], out_dir: Option<PathBuf>) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer, Need::Lexicon, Need::TestSet])?;
    let t = ctx.tokenizer()?;
    let lexicon = ctx.lexicon()?;
    let records = ctx.records(Split::Test)?;
    let scored = score_records(&t, &records, &lexicon)?;
    if !scored.skipped.is_empty() {
        log::warn!(
            "{} records with empty summaries excluded before ranking",
            scored.skipped.len()
        );
    }
    let dir = out_dir.unwrap_or_else(|| ctx.cfg.output_dir.join(SLICES_DIR));
    let fixed: HashMap<Setting, f64> = thresholds.iter().copied().collect();
    for setting in Setting::RANKED {
        let s = match fixed.get(&setting) {
            Some(&th) => threshold_slice(&scored.scores, setting, th)?,
            None => percentile_slice(&scored.scores, setting)?,
        };
        let file = SliceFile {
            config_hash: &ctx.hash,
            slice: &s,
        };
        write_json(&dir.join(format!("{setting}.json")), &file)?;
    }
    Ok(())
}

fn load_slice(path: &Path) -> CliResult<EvalSlice> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Data(format!("{}: not a slice file: {e}", path.display())))
}

pub fn profile(ctx: &Ctx, slice_path: &Path, out: Option<PathBuf>) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer, Need::Lexicon, Need::TestSet])?;
    let t = ctx.tokenizer()?;
    let lexicon = ctx.lexicon()?;
    let records = ctx.records(Split::Test)?;
    let s = load_slice(slice_path)?;
    let p: SubsetProfile = subset_profile(&records, &s.ids, &t, &lexicon)?;
    #[derive(Serialize)]
    struct Body {
        setting: Setting,
        profile: SubsetProfile,
    }
    let name = format!("profile_{}.json", s.setting);
    ctx.report(&ctx.out_path(out, &name), "profile", Body { setting: s.setting, profile: p })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct Prediction {
    id: String,
    hypothesis: String,
}

#[derive(Debug, Serialize)]
pub struct SettingScore {
    pub setting: Setting,
    pub size: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn load_predictions(path: &Path) -> CliResult<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if out.insert(p.id.clone(), p.hypothesis).is_some() {
            return Err(CliError::Data(format!("duplicate prediction for {:?}", p.id)));
        }
    }
    Ok(out)
}

pub fn rouge(
    ctx: &Ctx,
    predictions: &Path,
    slices: Option<PathBuf>,
    variant: RougeVariant,
    out: Option<PathBuf>,
) -> CliResult<()> {
    ctx.cfg.validate(&[Need::TestSet])?;
    let records = ctx.records(Split::Test)?;
    let preds = load_predictions(predictions)?;
    let by_id: HashMap<&str, &DatasetRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    if let Some(id) = preds.keys().filter(|id| !by_id.contains_key(id.as_str())).min() {
        return Err(CliError::Data(format!("prediction for unknown record {id:?}")));
    }
    let mut full: Vec<String> = records
        .iter()
        .filter(|r| !normalize_words(&r.summary).is_empty())
        .map(|r| r.id.clone())
        .collect();
    full.sort();
    let mut groups = vec![(Setting::TestFull, full)];
    let dir = slices.unwrap_or_else(|| ctx.cfg.output_dir.join(SLICES_DIR));
    for setting in Setting::RANKED {
        let path = dir.join(format!("{setting}.json"));
        if path.is_file() {
            groups.push((setting, load_slice(&path)?.ids));
        } else {
            log::warn!("no slice file {}; scoring the full set only", path.display());
        }
    }
    let mut scores = Vec::with_capacity(groups.len());
    for (setting, ids) in groups {
        let mut sum = (0.0, 0.0, 0.0);
        for id in &ids {
            let r = by_id
                .get(id.as_str())
                .ok_or_else(|| CliError::Data(format!("slice {setting} names unknown record {id:?}")))?;
            let hyp = preds
                .get(id)
                .ok_or_else(|| CliError::Data(format!("no prediction for record {id:?}")))?;
            let s = rouge_l_with(&r.summary, hyp, variant)?;
            sum = (sum.0 + s.precision, sum.1 + s.recall, sum.2 + s.f1);
        }
        let n = ids.len().max(1) as f64;
        scores.push(SettingScore {
            setting,
            size: ids.len(),
            precision: sum.0 / n,
            recall: sum.1 / n,
            f1: sum.2 / n,
        });
    }
    #[derive(Serialize)]
    struct Body {
        variant: RougeVariant,
        settings: Vec<SettingScore>,
    }
    ctx.report(&ctx.out_path(out, "rouge.json"), "rouge", Body { variant, settings: scores })
}

// ---------------------------------------------------------------------------

pub fn init_embed(ctx: &Ctx, matrix: &Path, extended: Option<PathBuf>, out: Option<PathBuf>) -> CliResult<()> {
    ctx.cfg.validate(&[Need::Tokenizer])?;
    let base = ctx.tokenizer()?;
    let extended = ctx.tokenizer_at(&ctx.out_path(extended, EXTENDED_TOKENIZER_FILE))?;
    let m = EmbeddingMatrix::load(matrix)?;
    let grown = extend_matrix(&m, &base, &extended)?;
    let path = ctx.out_path(out, "embeddings_extended.txt");
    write_text(&path, &grown.to_text())
}

// ---------------------------------------------------------------------------

pub fn train(ctx: &Ctx, corpus: &Path, vocab_size: usize, out: &Path) -> CliResult<()> {
    let words = WordCounts::from_text(&read_text(corpus)?);
    let marker = ctx.cfg.marker.as_deref().unwrap_or("▁");
    let mut trainer = BpeTrainer::new(&words, marker)?;
    if vocab_size < trainer.alphabet_len() {
        return Err(CliError::config(format!(
            "vocab size {vocab_size} is below the alphabet of {} symbols",
            trainer.alphabet_len()
        )));
    }
    while trainer.vocab_size() < vocab_size {
        if trainer.step().is_none() {
            log::warn!("corpus exhausted at {} tokens", trainer.vocab_size());
            break;
        }
    }
    write_text(out, &trainer.into_tokenizer()?.to_json_string())
}

pub fn lexicon(ctx: &Ctx, corpus: &Path, out: &Path) -> CliResult<()> {
    ctx.cfg.validate(&[Need::GeneralWordlist])?;
    let general_path = ctx.cfg.required("general_wordlist_path", &ctx.cfg.general_wordlist_path)?;
    let general = load_wordlist(general_path)?;
    let domain = WordCounts::from_text(&read_text(corpus)?);
    let lex = DomainLexicon::from_corpus_difference(&domain, &general);
    if lex.is_empty() {
        return Err(CliError::Data("no domain words left after removing general words".into()));
    }
    write_text(out, &lex.to_text())
}
