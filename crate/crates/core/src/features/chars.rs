use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Character → index map. Index 0 is padding, known characters are `1..=V`
/// in sorted order, and `V + 1` is the optional unknown bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharIndexer {
    chars: Vec<char>,
    max_len: usize,
    unknown_bucket: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddedSequence {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

impl PaddedSequence {
    pub fn pad_count(&self) -> usize {
        self.indices.len() - self.true_length
    }

    pub fn tokens(&self) -> &[usize] {
        &self.indices[self.pad_count()..]
    }
}

impl CharIndexer {
    /// Fit on training names. `max_len` defaults to the longest name seen.
    pub fn fit(names: &[&str], max_len: Option<usize>, unknown_bucket: bool) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyInput("character index needs at least one name"));
        }
        let mut chars: Vec<char> = names.iter().flat_map(|n| n.chars()).collect();
        chars.sort_unstable();
        chars.dedup();
        let longest = names.iter().map(|n| n.chars().count()).max().unwrap_or(0);
        let max_len = max_len.unwrap_or(longest);
        if max_len == 0 {
            return Err(Error::InvalidArgument("max_len must be positive".into()));
        }
        Ok(Self {
            chars,
            max_len,
            unknown_bucket,
        })
    }

    pub fn from_parts(chars: Vec<char>, max_len: usize, unknown_bucket: bool) -> Self {
        Self {
            chars,
            max_len,
            unknown_bucket,
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn vocab_size(&self) -> usize {
        self.chars.len()
    }

    /// Rows needed in an embedding table: pad + known chars (+ unknown bucket).
    pub fn embedding_rows(&self) -> usize {
        self.chars.len() + 1 + usize::from(self.unknown_bucket)
    }

    pub fn index_of(&self, ch: char) -> Result<usize> {
        match self.chars.binary_search(&ch) {
            Ok(i) => Ok(i + 1),
            Err(_) if self.unknown_bucket => Ok(self.chars.len() + 1),
            Err(_) => Err(Error::UnknownCharacter { ch }),
        }
    }

    /// Index the name and left-pad with zeros to `max_len`.
    pub fn index_and_pad(&self, name: &str) -> Result<PaddedSequence> {
        let len = name.chars().count();
        if len > self.max_len {
            return Err(Error::TooLong {
                name: name.to_string(),
                len,
                max_len: self.max_len,
            });
        }
        let mut indices = vec![0; self.max_len - len];
        for ch in name.chars() {
            indices.push(self.index_of(ch)?);
        }
        Ok(PaddedSequence {
            indices,
            true_length: len,
        })
    }

    /// Inverse of `index_and_pad` for known characters; the unknown bucket decodes to `?`.
    pub fn decode(&self, seq: &PaddedSequence) -> String {
        seq.tokens()
            .iter()
            .map(|&i| self.chars.get(i - 1).copied().unwrap_or('?'))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_and_pad_example() {
        let idx = CharIndexer::fit(&["ali"], Some(5), false).unwrap();
        let seq = idx.index_and_pad("ali").unwrap();
        assert_eq!(seq.indices, vec![0, 0, 1, 3, 2]);
        assert_eq!(seq.true_length, 3);
        assert_eq!(idx.embedding_rows(), 4);
    }

    #[test]
    fn errors() {
        let idx = CharIndexer::fit(&["ali"], Some(4), false).unwrap();
        assert!(matches!(
            idx.index_and_pad("alial"),
            Err(Error::TooLong { len: 5, .. })
        ));
        assert!(matches!(
            idx.index_and_pad("bob"),
            Err(Error::UnknownCharacter { ch: 'b' })
        ));
        let open = CharIndexer::fit(&["ali"], Some(4), true).unwrap();
        assert_eq!(open.index_and_pad("bal").unwrap().indices, vec![0, 4, 1, 3]);
        assert_eq!(open.embedding_rows(), 5);
    }

    #[test]
    fn default_max_len_is_longest() {
        let idx = CharIndexer::fit(&["ab", "abc de"], None, false).unwrap();
        assert_eq!(idx.max_len(), 6);
    }

    proptest! {
        #[test]
        fn round_trip(names in proptest::collection::vec("[a-z]{1,8}( [a-z]{1,8})?", 1..6)) {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let idx = CharIndexer::fit(&refs, None, false).unwrap();
            for n in &refs {
                let seq = idx.index_and_pad(n).unwrap();
                prop_assert_eq!(seq.indices.len(), idx.max_len());
                let pads = seq.pad_count();
                prop_assert!(seq.indices[..pads].iter().all(|&i| i == 0));
                prop_assert!(seq.indices[pads..].iter().all(|&i| i >= 1 && i <= idx.vocab_size()));
                prop_assert_eq!(&idx.decode(&seq), n);
            }
        }
    }
}
