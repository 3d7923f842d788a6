//! Seeded synthetic corpora with a motif planted in the positive class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Label, TokenMode};
use crate::error::Result;

/// The twenty amino-acid letters.
pub const PROTEIN_ALPHABET: &str = "ACDEFGHIKLMNPQRSTVWY";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedMotif {
    pub motif: String,
    pub alphabet: String,
    pub length: usize,
    pub positives: usize,
    pub negatives: usize,
}

impl Default for PlantedMotif {
    fn default() -> Self {
        PlantedMotif {
            motif: "GYC".into(),
            alphabet: PROTEIN_ALPHABET.into(),
            length: 40,
            positives: 50,
            negatives: 50,
        }
    }
}

impl PlantedMotif {
    /// Positives carry the motif at a uniform position; negatives are redrawn
    /// until they do not contain it. Positives come first.
    pub fn generate(&self, seed: u64) -> Vec<(Label, String)> {
        assert!(
            self.motif.len() <= self.length,
            "motif longer than sequences"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphabet: Vec<char> = self.alphabet.chars().collect();
        let random_seq = |rng: &mut ChaCha8Rng| -> String {
            (0..self.length)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect()
        };
        let mut out = Vec::with_capacity(self.positives + self.negatives);
        for _ in 0..self.positives {
            let mut s = random_seq(&mut rng);
            let at = rng.random_range(0..=self.length - self.motif.len());
            s.replace_range(at..at + self.motif.len(), &self.motif);
            out.push((Label::Positive, s));
        }
        for _ in 0..self.negatives {
            let s = loop {
                let s = random_seq(&mut rng);
                if !s.contains(&self.motif) {
                    break s;
                }
            };
            out.push((Label::Negative, s));
        }
        out
    }

    pub fn corpus(&self, seed: u64) -> Result<Corpus> {
        Corpus::from_texts(self.generate(seed), TokenMode::Char)
    }

    /// Rendered in the labeled training file format.
    pub fn to_file_text(&self, seed: u64) -> String {
        self.generate(seed)
            .into_iter()
            .map(|(l, s)| format!("{l}\t{s}\n"))
            .collect()
    }
}
