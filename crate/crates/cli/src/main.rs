mod commands;
mod config;
mod error;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use medvocab_core::rouge::RougeVariant;
use medvocab_core::slicer::Setting;

use commands::{Ctx, Split};
use config::{Overrides, PipelineConfig};
use error::CliResult;

/// Domain vocabulary adaptation and fine-grained evaluation for BPE
/// tokenizers.
#[derive(Debug, Parser)]
#[command(name = "medvocab", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset statistics: fragmentation, OOV concentration, novelty.
    Analyze {
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        /// Segment with AdaptBPE over the tokenizer's added tokens.
        #[arg(long)]
        adaptbpe: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select domain tokens with the configured strategy.
    BuildVocab {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Extend the tokenizer with an added vocabulary.
    Extend {
        #[arg(long)]
        added: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tokenize stdin; one output line per word.
    Tokenize {
        #[arg(long)]
        adaptbpe: bool,
    },
    /// Scaffolding overhead of merge synthesis versus ScafFix.
    ScaffoldStats {
        /// Word list, one per line. Defaults to the added vocabulary's targets.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the five top-decile evaluation slices of the test set.
    Slice {
        /// Replace the percentile cut of one setting, e.g. Novel_RS=0.6.
        #[arg(long = "absolute-threshold", value_parser = commands::parse_threshold)]
        absolute_threshold: Vec<(Setting, f64)>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Characteristics of the records in a slice file.
    Profile {
        #[arg(long)]
        slice: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean Rouge-L of predictions per slice.
    Rouge {
        /// JSON lines of {"id", "hypothesis"}.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        slices: Option<PathBuf>,
        #[arg(long, value_parser = parse_variant, default_value = "sentence")]
        variant: RougeVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append embedding rows for added tokens.
    InitEmbed {
        #[arg(long)]
        matrix: PathBuf,
        /// Extended tokenizer; defaults to the one `extend` writes.
        #[arg(long)]
        extended: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a BPE tokenizer on a text corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vocab_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive a domain lexicon: corpus words absent from the general word list.
    Lexicon {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_variant(s: &str) -> Result<RougeVariant, String> {
    match s {
        "sentence" => Ok(RougeVariant::Sentence),
        "summary-union" => Ok(RougeVariant::SummaryUnion),
        _ => Err(format!("unknown variant {s:?}, expected sentence or summary-union")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Ctx::new(PipelineConfig::resolve(&cli.overrides)?);
    match cli.command {
        Command::Analyze { split, adaptbpe, out } => commands::analyze(&ctx, split, adaptbpe, out),
        Command::BuildVocab { out, audit } => commands::build_vocab(&ctx, out, audit),
        Command::Extend { added, out } => commands::extend(&ctx, added, out),
        Command::Tokenize { adaptbpe } => {
            commands::tokenize(&ctx, adaptbpe, io::stdin().lock(), io::BufWriter::new(io::stdout().lock()))
        }
        Command::ScaffoldStats { targets, out } => commands::scaffold_stats(&ctx, targets, out),
        Command::Slice {
            absolute_threshold,
            out_dir,
        } => commands::slice(&ctx, &absolute_threshold, out_dir),
        Command::Profile { slice, out } => commands::profile(&ctx, &slice, out),
        Command::Rouge {
            predictions,
            slices,
            variant,
            out,
        } => commands::rouge(&ctx, &predictions, slices, variant, out),
        Command::InitEmbed { matrix, extended, out } => commands::init_embed(&ctx, &matrix, extended, out),
        Command::Train {
            corpus,
            vocab_size,
            out,
        } => commands::train(&ctx, &corpus, vocab_size, &out),
        Command::Lexicon { corpus, out } => commands::lexicon(&ctx, &corpus, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
