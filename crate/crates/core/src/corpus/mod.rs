//! Labeled name data: normalization, CSV ingestion, train/test splitting and
//! the synthetic corpus generator.

pub mod synthetic;

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seed;

pub use synthetic::{generate_synthetic, GeneratorConfig, SyntheticGenerator};

/// Male fraction of the reference dataset (4580 of 6881 names).
pub const DEFAULT_MALE_FRACTION: f64 = 0.6656;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn is_male(self) -> bool {
        self == Gender::Male
    }

    /// 1.0 for male (the positive class), 0.0 for female.
    pub fn target(self) -> f64 {
        if self.is_male() {
            1.0
        } else {
            0.0
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "m",
            Gender::Female => "f",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
        })
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m" | "male" => Ok(Gender::Male),
            "f" | "female" => Ok(Gender::Female),
            _ => Err(Error::UnknownGenderLabel {
                value: s.to_string(),
            }),
        }
    }
}

/// Lowercase, strip everything outside `[a-z ]`, collapse whitespace runs and trim.
///
/// Apostrophes, periods and hyphens are dropped without leaving a gap, so
/// `Abdul-Rahman` becomes `abdulrahman`.
pub fn normalize_name(raw: &str) -> Result<String> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for ch in raw.chars().flat_map(char::to_lowercase) {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else if ch.is_ascii_lowercase() {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyAfterNormalization { line: None });
    }
    Ok(out)
}

/// First space-delimited token of a normalized name.
pub fn first_name(normalized: &str) -> &str {
    normalized.split(' ').next().unwrap_or(normalized)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameRecord {
    pub raw_name: String,
    pub normalized: String,
    pub gender: Gender,
}

impl NameRecord {
    pub fn new(raw_name: &str, gender: Gender) -> Result<Self> {
        Ok(Self {
            raw_name: raw_name.to_string(),
            normalized: normalize_name(raw_name)?,
            gender,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    File,
    Synthetic { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<NameRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    pub fn new(records: Vec<NameRecord>, provenance: Provenance) -> Self {
        Self {
            records,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn male_count(&self) -> usize {
        self.records.iter().filter(|r| r.gender.is_male()).count()
    }

    pub fn labels(&self) -> Vec<Gender> {
        self.records.iter().map(|r| r.gender).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.normalized.as_str()).collect()
    }

    /// SHA-256 over the normalized rows, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.records {
            hasher.update(r.normalized.as_bytes());
            hasher.update(b",");
            hasher.update(r.gender.code().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            if row.len() != 2 {
                return Err(Error::MalformedRow { line });
            }
            let gender: Gender = row[1].parse()?;
            let normalized = normalize_name(&row[0]).map_err(|_| Error::EmptyAfterNormalization {
                line: Some(line),
            })?;
            records.push(NameRecord {
                raw_name: row[0].to_string(),
                normalized,
                gender,
            });
        }
        Ok(Corpus::new(records, Provenance::File))
    }

    /// Writes `name,gender` rows using the normalized name.
    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for r in &self.records {
            wtr.write_record([r.normalized.as_str(), r.gender.code()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(std::io::BufWriter::new(file))
    }

    /// Same corpus with every name replaced by its first token.
    pub fn first_names(&self) -> Corpus {
        let records = self
            .records
            .iter()
            .map(|r| NameRecord {
                raw_name: r.raw_name.clone(),
                normalized: first_name(&r.normalized).to_string(),
                gender: r.gender,
            })
            .collect();
        Corpus::new(records, self.provenance)
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_reader(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 0,
            stratified: true,
        }
    }
}

fn holdout_count(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction).round().clamp(1.0, (n - 1) as f64) as usize
}

/// Partition into `(train, test)`. Both halves keep the input order.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidFraction(spec.test_fraction));
    }
    let mut rng = seed::rng(spec.seed);
    let mut in_test = vec![false; corpus.len()];
    if spec.stratified {
        for gender in [Gender::Male, Gender::Female] {
            let mut idx: Vec<usize> = (0..corpus.len())
                .filter(|&i| corpus.records[i].gender == gender)
                .collect();
            if idx.len() < 2 {
                return Err(Error::TooFewSamples(format!(
                    "stratified split needs at least 2 {gender} records, found {}",
                    idx.len()
                )));
            }
            idx.shuffle(&mut rng);
            for &i in &idx[..holdout_count(idx.len(), spec.test_fraction)] {
                in_test[i] = true;
            }
        }
    } else {
        if corpus.len() < 2 {
            return Err(Error::TooFewSamples(format!(
                "split needs at least 2 records, found {}",
                corpus.len()
            )));
        }
        let mut idx: Vec<usize> = (0..corpus.len()).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..holdout_count(idx.len(), spec.test_fraction)] {
            in_test[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, &t) in corpus.records.iter().zip(&in_test) {
        if t {
            test.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    Ok((
        Corpus::new(train, corpus.provenance),
        Corpus::new(test, corpus.provenance),
    ))
}
