//! Synthetic Indonesian-style name corpus.
//!
//! Names are built from syllable inventories. Gender is carried by cue tokens
//! (given names, `-wan`/`-wati` style derivations, terminal `putra`/`putri`)
//! placed anywhere in the name, mixed with gender-neutral family tokens and
//! unisex tokens such as `dwi`, `tri` and `rizki` that occur in both classes.

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Corpus, Gender, NameRecord, Provenance};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

pub const MAX_FULL_LEN: usize = 56;
pub const MAX_FIRST_LEN: usize = 17;

const SYLLABLES: &[&str] = &[
    "ba", "bu", "da", "di", "ga", "gu", "ha", "ja", "ju", "ka", "ku", "la", "lu", "ma", "mu", "na",
    "nu", "pa", "pu", "ra", "ru", "sa", "su", "ta", "tu", "wa", "ya", "har", "sur", "sen", "kur",
    "nia", "lia", "hid", "set",
];

const MALE_GIVEN: &[&str] = &[
    "muhammad", "ahmad", "agus", "bambang", "joko", "eko", "hendra", "yusuf", "rahmat", "fajar",
    "budi", "arif", "dimas", "bayu", "teguh", "wahyu", "rudi", "andika", "gilang", "reza",
];
const MALE_SUFFIXES: &[&str] = &["wan", "to", "no", "man", "din"];

const FEMALE_GIVEN: &[&str] = &[
    "siti", "dewi", "sri", "ayu", "rina", "fitri", "indah", "lestari", "wulan", "ratna", "nia",
    "maya", "intan", "anisa", "novita", "sinta", "mega", "kartika", "nurul", "aulia",
];
const FEMALE_SUFFIXES: &[&str] = &["wati", "ni", "ti", "yanti", "sari"];

const UNISEX: &[&str] = &["dwi", "tri", "rizki", "eka", "nur", "ade"];
const NEUTRAL_ENDINGS: &[&str] = &["ng", "k", "s", "r", "l", "h", "t", "g"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub male_fraction: f64,
    /// Probability that a non-cue token is a unisex token rather than a family token.
    pub unisex_rate: f64,
    /// Probability that a name ends with `putra`/`putri`.
    pub terminal_rate: f64,
    /// Probability of a second gender cue token.
    pub second_cue_rate: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            male_fraction: super::DEFAULT_MALE_FRACTION,
            unisex_rate: 0.3,
            terminal_rate: 0.15,
            second_cue_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    config: GeneratorConfig,
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFraction(f))
    }
}

impl SyntheticGenerator {
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        check_fraction(config.male_fraction)?;
        for p in [config.unisex_rate, config.terminal_rate, config.second_cue_rate] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "generator probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    fn stem(rng: &mut Rng, syllables: usize) -> String {
        (0..syllables)
            .map(|_| *SYLLABLES.choose(rng).unwrap())
            .collect()
    }

    fn cue_token(gender: Gender, rng: &mut Rng) -> String {
        let (given, suffixes) = match gender {
            Gender::Male => (MALE_GIVEN, MALE_SUFFIXES),
            Gender::Female => (FEMALE_GIVEN, FEMALE_SUFFIXES),
        };
        if rng.random_bool(0.5) {
            given.choose(rng).unwrap().to_string()
        } else {
            let syl = rng.random_range(1..=2);
            Self::stem(rng, syl) + suffixes.choose(rng).unwrap()
        }
    }

    fn filler_token(&self, rng: &mut Rng) -> String {
        if rng.random_bool(self.config.unisex_rate) {
            UNISEX.choose(rng).unwrap().to_string()
        } else {
            let syl = rng.random_range(1..=3);
            Self::stem(rng, syl) + NEUTRAL_ENDINGS.choose(rng).unwrap()
        }
    }

    fn terminal(gender: Gender) -> &'static str {
        match gender {
            Gender::Male => "putra",
            Gender::Female => "putri",
        }
    }

    fn assemble(&self, gender: Gender, rng: &mut Rng, force_terminal: bool) -> String {
        let n_tokens = match rng.random_range(0..100) {
            0..45 => 2,
            45..85 => 3,
            _ => 4,
        };
        let mut tokens: Vec<Option<String>> = vec![None; n_tokens];
        if force_terminal || rng.random_bool(self.config.terminal_rate) {
            tokens[n_tokens - 1] = Some(Self::terminal(gender).to_string());
        } else {
            let pos = rng.random_range(0..n_tokens);
            tokens[pos] = Some(Self::cue_token(gender, rng));
        }
        if rng.random_bool(self.config.second_cue_rate) {
            let pos = rng.random_range(0..n_tokens);
            if tokens[pos].is_none() {
                tokens[pos] = Some(Self::cue_token(gender, rng));
            }
        }
        let tokens: Vec<String> = tokens
            .into_iter()
            .map(|t| t.unwrap_or_else(|| self.filler_token(rng)))
            .collect();
        tokens.join(" ")
    }

    fn within_limits(name: &str) -> bool {
        name.len() <= MAX_FULL_LEN && super::first_name(name).len() <= MAX_FIRST_LEN
    }

    /// One name of the given gender. Draws until the length limits hold.
    pub fn name(&self, gender: Gender, rng: &mut Rng) -> String {
        loop {
            let name = self.assemble(gender, rng, false);
            if Self::within_limits(&name) {
                return name;
            }
        }
    }

    /// A name ending in `putra` (male) or `putri` (female) whose other tokens
    /// are gender-neutral fillers.
    pub fn terminal_name(&self, gender: Gender, rng: &mut Rng) -> String {
        loop {
            let n_fill = rng.random_range(1..=2);
            let mut tokens: Vec<String> = (0..n_fill).map(|_| self.filler_token(rng)).collect();
            tokens.push(Self::terminal(gender).to_string());
            let name = tokens.join(" ");
            if Self::within_limits(&name) {
                return name;
            }
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Corpus> {
        if n == 0 {
            return Err(Error::InvalidArgument("corpus size must be at least 1".into()));
        }
        let mut rng = seed::rng(seed);
        let records = (0..n)
            .map(|_| {
                let gender = if rng.random_bool(self.config.male_fraction) {
                    Gender::Male
                } else {
                    Gender::Female
                };
                let name = self.name(gender, &mut rng);
                NameRecord {
                    raw_name: name.clone(),
                    normalized: name,
                    gender,
                }
            })
            .collect();
        Ok(Corpus::new(records, Provenance::Synthetic { seed }))
    }
}

/// Synthetic corpus with the default cue mix.
pub fn generate_synthetic(n: usize, male_fraction: f64, seed: u64) -> Result<Corpus> {
    let generator = SyntheticGenerator::new(GeneratorConfig {
        male_fraction,
        ..GeneratorConfig::default()
    })?;
    generator.generate(n, seed)
}
