//! Name → gender classification from character-level features.
//!
//! The crate covers the whole pipeline: corpus ingestion and a synthetic
//! generator ([`corpus`]), feature extraction ([`features`]), Naive Bayes and
//! logistic regression with grid search ([`linear_models`]), gradient boosted
//! trees ([`boosted_trees`]), a char-LSTM ([`char_lstm`]), metrics and
//! explanations ([`eval_explain`]), and the persisted model artifact and
//! command-line front end ([`cli`]).

pub mod boosted_trees;
pub mod char_lstm;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval_explain;
pub mod features;
pub mod linear_models;
pub mod pipeline;
pub mod seed;

pub use error::{Error, Result};
