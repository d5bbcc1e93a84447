//! First/last characters of the first and last name tokens, one-hot encoded.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

pub const SLOT_NAMES: [&str; 4] = [
    "first_of_first",
    "last_of_first",
    "first_of_last",
    "last_of_last",
];

/// Four character slots; `None` marks an absent last name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasicFeatures {
    pub slots: [Option<char>; 4],
}

impl BasicFeatures {
    pub fn first_char_of_first_name(&self) -> Option<char> {
        self.slots[0]
    }
    pub fn last_char_of_first_name(&self) -> Option<char> {
        self.slots[1]
    }
    pub fn first_char_of_last_name(&self) -> Option<char> {
        self.slots[2]
    }
    pub fn last_char_of_last_name(&self) -> Option<char> {
        self.slots[3]
    }
}

pub fn extract_basic(name: &str) -> BasicFeatures {
    let tokens: Vec<&str> = name.split(' ').filter(|t| !t.is_empty()).collect();
    let ends = |t: &str| (t.chars().next(), t.chars().last());
    let (ff, lf) = tokens.first().map_or((None, None), |t| ends(t));
    let (fl, ll) = if tokens.len() > 1 {
        ends(tokens[tokens.len() - 1])
    } else {
        (None, None)
    };
    BasicFeatures {
        slots: [ff, lf, fl, ll],
    }
}

/// Per-slot category lists, each sorted with `None` (absent) first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    categories: [Vec<Option<char>>; 4],
}

impl OneHotEncoder {
    pub fn fit(values: &[BasicFeatures]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("one-hot fit needs at least one sample"));
        }
        let categories = std::array::from_fn(|slot| {
            let mut cats: Vec<Option<char>> = values.iter().map(|v| v.slots[slot]).collect();
            cats.sort_unstable();
            cats.dedup();
            cats
        });
        Ok(Self { categories })
    }

    pub fn width(&self) -> usize {
        self.categories.iter().map(Vec::len).sum()
    }

    pub fn categories(&self, slot: usize) -> &[Option<char>] {
        &self.categories[slot]
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for (slot, cats) in self.categories.iter().enumerate() {
            for c in cats {
                let value = c.map_or_else(|| "<absent>".to_string(), String::from);
                names.push(format!("{}={}", SLOT_NAMES[slot], value));
            }
        }
        names
    }

    /// Unseen values leave their slot's block all zero.
    pub fn transform(&self, value: &BasicFeatures) -> Vec<f64> {
        let mut row = vec![0.0; self.width()];
        let mut offset = 0;
        for (slot, cats) in self.categories.iter().enumerate() {
            if let Ok(pos) = cats.binary_search(&value.slots[slot]) {
                row[offset + pos] = 1.0;
            }
            offset += cats.len();
        }
        row
    }

    pub fn transform_names(&self, names: &[&str]) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(names.len(), self.column_names());
        for (i, name) in names.iter().enumerate() {
            let row = self.transform(&extract_basic(name));
            m.row_mut(i).copy_from_slice(&row);
        }
        m
    }
}
