//! Trained classifiers: a list of weighted patterns.
//!
//! File format (UTF-8, LF):
//!
//! ```text
//! #loss<TAB>logistic
//! #tokenization<TAB>char
//! #maxgap<TAB>1
//! 0.1551<TAB>SG*C
//! -0.0732<TAB>AL
//! ```
//!
//! Patterns are written with tokens concatenated (char mode) or joined by a
//! space (word mode); `*` is a wildcard. Weights are written with enough
//! digits to round-trip exactly.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{tokenize, Label, TokenId, TokenMode, Vocabulary, WILDCARD_SYMBOL};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::pattern::{Elem, Pattern};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub pattern: Pattern,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
    /// Logistic link of the score; only for logistic models.
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    /// Descending weight.
    entries: Vec<ModelEntry>,
    /// Symbols used by the patterns. Ids index into this, not the training corpus.
    vocab: Vocabulary,
    loss: LossKind,
    mode: TokenMode,
    maxgap: usize,
}

impl Model {
    pub fn empty(loss: LossKind, mode: TokenMode, maxgap: usize) -> Self {
        Model {
            entries: Vec::new(),
            vocab: Vocabulary::default(),
            loss,
            mode,
            maxgap,
        }
    }

    /// Build from patterns expressed in `vocab`'s ids.
    pub fn from_weights<'p, I>(
        weights: I,
        vocab: &Vocabulary,
        loss: LossKind,
        mode: TokenMode,
        maxgap: usize,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (&'p Pattern, f64)>,
    {
        let symbolic = weights
            .into_iter()
            .map(|(p, w)| {
                let elems = p
                    .elems()
                    .iter()
                    .map(|e| match e {
                        Elem::Token(t) => Some(vocab.symbol(*t).to_owned()),
                        Elem::Wildcard => None,
                    })
                    .collect();
                (elems, w)
            })
            .collect();
        Self::from_symbolic(symbolic, loss, mode, maxgap, None)
    }

    /// `entries` hold one `Option<String>` per element, `None` for a wildcard.
    fn from_symbolic(
        entries: Vec<(Vec<Option<String>>, f64)>,
        loss: LossKind,
        mode: TokenMode,
        maxgap: usize,
        lines: Option<&[usize]>,
    ) -> Result<Self> {
        let err = |i: usize, message: String| match lines {
            Some(l) => Error::ModelFormat {
                line: l[i],
                message,
            },
            None => Error::InvalidConfig(message),
        };
        let vocab = Vocabulary::from_symbols(
            entries
                .iter()
                .flat_map(|(elems, _)| elems.iter().flatten().cloned()),
        );
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(entries.len());
        for (i, (elems, weight)) in entries.into_iter().enumerate() {
            if !weight.is_finite() || weight == 0.0 {
                return Err(err(
                    i,
                    format!("weight must be finite and nonzero, got {weight}"),
                ));
            }
            let pattern = Pattern::new(
                elems
                    .iter()
                    .map(|e| match e {
                        Some(s) => Elem::Token(vocab.encode(s)),
                        None => Elem::Wildcard,
                    })
                    .collect(),
            );
            if !pattern.is_valid(maxgap) {
                return Err(err(
                    i,
                    format!(
                        "pattern {:?} must start and end with a token and have gaps of at most {maxgap}",
                        pattern.render(&vocab, mode)
                    ),
                ));
            }
            if !seen.insert(pattern.clone()) {
                return Err(err(
                    i,
                    format!("duplicate pattern {:?}", pattern.render(&vocab, mode)),
                ));
            }
            out.push(ModelEntry { pattern, weight });
        }
        out.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.pattern.tie_order(&b.pattern))
        });
        Ok(Model {
            entries: out,
            vocab,
            loss,
            mode,
            maxgap,
        })
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    pub fn maxgap(&self) -> usize {
        self.maxgap
    }

    pub fn render_pattern(&self, pattern: &Pattern) -> String {
        pattern.render(&self.vocab, self.mode)
    }

    /// Map symbols to this model's ids; unseen symbols become [`TokenId::UNKNOWN`].
    pub fn encode_symbols<S: AsRef<str>>(&self, symbols: &[S]) -> Vec<TokenId> {
        symbols
            .iter()
            .map(|s| self.vocab.encode(s.as_ref()))
            .collect()
    }

    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        Ok(self.encode_symbols(&tokenize(text, self.mode)?))
    }

    /// Sum of the weights of matching patterns, each counted once.
    pub fn score_tokens(&self, tokens: &[TokenId]) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.pattern.matches(tokens))
            .fold(0.0, |acc, e| acc + e.weight)
    }

    pub fn score(&self, text: &str) -> Result<f64> {
        Ok(self.score_tokens(&self.encode(text)?))
    }

    pub fn predict_score(&self, score: f64) -> Prediction {
        let label = if score > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        };
        let probability = match self.loss {
            LossKind::Logistic => Some(logistic(score)),
            LossKind::SquaredHinge => None,
        };
        Prediction {
            label,
            score,
            probability,
        }
    }

    pub fn predict(&self, text: &str) -> Result<Prediction> {
        Ok(self.predict_score(self.score(text)?))
    }

    /// Scores for many tokenized sequences, in input order.
    pub fn score_batch(&self, batch: &[Vec<TokenId>]) -> Vec<f64> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            batch.par_iter().map(|t| self.score_tokens(t)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            batch.iter().map(|t| self.score_tokens(t)).collect()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#loss\t{}", self.loss);
        let _ = writeln!(out, "#tokenization\t{}", self.mode);
        let _ = writeln!(out, "#maxgap\t{}", self.maxgap);
        for e in &self.entries {
            let _ = writeln!(out, "{:?}\t{}", e.weight, self.render_pattern(&e.pattern));
        }
        out
    }

    /// Parse the model file format. Missing headers default to logistic,
    /// char tokens and the longest gap found in the patterns.
    pub fn parse(content: &str) -> Result<Self> {
        let mut loss = LossKind::Logistic;
        let mut mode = TokenMode::Char;
        let mut maxgap = None;
        let mut entries: Vec<(Vec<Option<String>>, f64)> = Vec::new();
        let mut lines = Vec::new();

        for (idx, raw) in content.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::ModelFormat { line, message };
            let (head, tail) = raw
                .split_once('\t')
                .ok_or_else(|| bad("expected two tab-separated fields".into()))?;

            if let Some(key) = head.strip_prefix('#') {
                if !entries.is_empty() {
                    return Err(bad(format!("header #{key} after pattern lines")));
                }
                let value = tail.trim();
                match key {
                    "loss" => loss = value.parse().map_err(|e: Error| bad(e.to_string()))?,
                    "tokenization" => {
                        mode = value.parse().map_err(|e: Error| bad(e.to_string()))?
                    }
                    "maxgap" => {
                        maxgap = Some(
                            value
                                .parse::<usize>()
                                .map_err(|e| bad(format!("maxgap {value:?}: {e}")))?,
                        )
                    }
                    other => return Err(bad(format!("unknown header key {other:?}"))),
                }
                continue;
            }

            let weight: f64 = head
                .trim()
                .parse()
                .map_err(|e| bad(format!("weight {head:?}: {e}")))?;
            let symbols = tokenize(tail, mode).map_err(|_| bad("empty pattern".into()))?;
            let elems = symbols
                .into_iter()
                .map(|s| (s != WILDCARD_SYMBOL).then_some(s))
                .collect();
            entries.push((elems, weight));
            lines.push(line);
        }

        let maxgap = maxgap.unwrap_or_else(|| {
            entries
                .iter()
                .map(|(elems, _)| {
                    elems
                        .split(|e| e.is_some())
                        .map(<[_]>::len)
                        .max()
                        .unwrap_or(0)
                })
                .max()
                .unwrap_or(0)
        });
        Self::from_symbolic(entries, loss, mode, maxgap, Some(&lines))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content)
    }
}

pub fn logistic(score: f64) -> f64 {
    if score >= 0.0 {
        1.0 / (1.0 + (-score).exp())
    } else {
        let e = score.exp();
        e / (1.0 + e)
    }
}
