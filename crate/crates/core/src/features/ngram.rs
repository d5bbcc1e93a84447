use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 5;

fn check_n(n: usize) -> Result<()> {
    if (MIN_N..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidN(n))
    }
}

/// All contiguous length-`n` substrings, spaces included, in order of occurrence.
pub fn extract_ngrams(name: &str, n: usize) -> Result<Vec<String>> {
    check_n(n)?;
    let chars: Vec<char> = name.chars().collect();
    if chars.len() < n {
        return Ok(Vec::new());
    }
    Ok(chars.windows(n).map(|w| w.iter().collect()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramVocabulary {
    n: usize,
    columns: BTreeMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl NgramVocabulary {
    pub fn fit(corpus: &[&str], n: usize) -> Result<Self> {
        check_n(n)?;
        if corpus.is_empty() {
            return Err(Error::EmptyInput("n-gram vocabulary needs at least one name"));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for name in corpus {
            let mut grams = extract_ngrams(name, n)?;
            grams.sort_unstable();
            grams.dedup();
            for g in grams {
                *df.entry(g).or_default() += 1;
            }
        }
        let doc_freq = df.values().copied().collect();
        let columns = df.into_keys().enumerate().map(|(i, g)| (g, i)).collect();
        Ok(Self {
            n,
            columns,
            doc_freq,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, gram: &str) -> Option<usize> {
        self.columns.get(gram).copied()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    /// Grams in column order.
    pub fn grams(&self) -> Vec<String> {
        self.columns.keys().cloned().collect()
    }

    /// Count vector; grams outside the vocabulary are ignored.
    pub fn vectorize(&self, name: &str) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        // n was validated at fit time
        for g in extract_ngrams(name, self.n).unwrap_or_default() {
            if let Some(&j) = self.columns.get(&g) {
                row[j] += 1.0;
            }
        }
        row
    }

    pub fn vectorize_many(&self, names: &[&str]) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(names.len(), self.grams());
        for (i, name) in names.iter().enumerate() {
            let row = self.vectorize(name);
            m.row_mut(i).copy_from_slice(&row);
        }
        m
    }

    /// One `gram<TAB>column` line per entry, in column order.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for (g, j) in &self.columns {
            let _ = writeln!(out, "{g}\t{j}");
        }
        out
    }
}
