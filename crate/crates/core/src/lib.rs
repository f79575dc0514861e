//! Text-difficulty criteria, difficulty-stratified corpus splits, and the
//! Human Learning Matching (HLM) index.
//!
//! The crate is organised by stage:
//!
//! * [`textstat`]: sentence/word/syllable counting and the Flesch score.
//! * [`surprisal`]: per-token surprisal from a Kneser-Ney n-gram model or an
//!   imported file.
//! * [`uid`]: super-linear and variance UID scores over surprisals.
//! * [`splitkit`]: per-document difficulty scores and easy/medium/hard splits.
//! * [`hlm`]: performance cubes, the logical score, and the HLM sub-indices.
//! * [`experiment`]: curriculum schedules, convergence ratios, transfer scores.
//! * [`svg`]: heatmap and learning-curve rendering.

pub mod error;
pub mod experiment;
pub mod formats;
pub mod hlm;
pub mod splitkit;
pub mod surprisal;
pub mod svg;
pub mod textstat;
pub mod uid;

pub use error::{Error, Result};
pub use experiment::{
    convergence_ratio, make_schedule, transfer_scores, Schedule, ScheduleOrder, TrainingLog, TransferMatrix,
};
pub use hlm::{
    cell_value, hlm_report, index, logical_score, Axis, HlmConfig, HlmReport, PerformanceCube, PerformanceTriplet,
};
pub use splitkit::{score_corpus, tertile_split, Criterion, DifficultyScore, DifficultySplit, Level, ScoringContext};
pub use surprisal::{token_surprisals, train_lm, LogBase, NgramModel, SurprisalSequence};
pub use textstat::{count_syllables, flesch_score, segment_sentences, Document, FleschConfig, TextStats};
pub use uid::{uid_superlinear, uid_variance, UidSlConfig, UidVarConfig};
