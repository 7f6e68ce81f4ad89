//! Domain vocabulary adaptation for BPE tokenizers.
//!
//! The crate covers the whole pipeline: measuring how badly a tokenizer
//! fragments domain words, choosing domain tokens to add, injecting them
//! (merge synthesis or longest-match tokenization), slicing evaluation sets
//! by OOV concentration and novelty, Rouge-L scoring, and initializing
//! embedding rows for the new tokens.

pub mod adapt;
pub mod adaptbpe;
pub mod bpe;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod metrics;
pub mod rouge;
pub mod slicer;
pub mod text;
pub mod words;

pub use adapt::{
    apply_added_vocab, build_candidate_vocab, extract_candidate_words, medvoc_llm_clean,
    medvoc_search, scaffix_select, scaffolding_stats, synthesize_merges, AddedVocabulary,
    CandidateVocab, ScaffoldStats, SearchResult, SourceTag, Strategy, Synthesis,
};
pub use adaptbpe::{AdaptBpe, MatchIndex};
pub use bpe::{train_bpe, BpeTrainer, Segmenter, TokenizationResult, Tokenizer};
pub use dataset::{DatasetRecord, DomainLexicon, Field};
pub use embed::{extend_matrix, EmbeddingMatrix};
pub use error::{Error, Result};
pub use metrics::{corpus_report, fragment_score, novelty_fraction, CorpusReport, Weighting};
pub use rouge::{lcs_len, rouge_l_f, RougeScore, RougeVariant};
pub use slicer::{percentile_slice, score_records, subset_profile, EvalSlice, RecordScore, Setting};
pub use words::WordCounts;
