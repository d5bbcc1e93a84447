//! Feature families: one-hot basic characters, chi²-selected character
//! n-gram counts, and padded character-index sequences.

mod basic;
mod chars;
mod chi2;
mod matrix;
mod ngram;

pub use basic::{extract_basic, BasicFeatures, OneHotEncoder, SLOT_NAMES};
pub use chars::{CharIndexer, PaddedSequence};
pub use chi2::{chi2_scores, select_top_k, Chi2Selector, DEFAULT_K};
pub use matrix::FeatureMatrix;
pub use ngram::{extract_ngrams, NgramVocabulary, MAX_N, MIN_N};
