//! Random small corpora and a brute-force feature oracle.
//!
//! The oracle enumerates every admissible pattern window by window, finds its
//! documents with `Pattern::matches`, and never touches the search module's
//! projection, bounds or pruning.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqlearn::search::{ActiveFeature, ActiveSet};
use seqlearn::{Corpus, ElasticNet, Elem, Label, LossKind, Pattern, TokenMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// N <= 30, alphabet <= 4, record length <= 12, both classes present.
pub fn random_corpus(rng: &mut ChaCha8Rng) -> Corpus {
    let n = rng.random_range(2..=30);
    let sigma = rng.random_range(2..=4);
    let alphabet: Vec<char> = "ABCD".chars().take(sigma).collect();
    let mut rows: Vec<(Label, String)> = (0..n)
        .map(|_| {
            let len = rng.random_range(1..=12);
            let s: String = (0..len)
                .map(|_| alphabet[rng.random_range(0..sigma)])
                .collect();
            let label = if rng.random_bool(0.5) {
                Label::Positive
            } else {
                Label::Negative
            };
            (label, s)
        })
        .collect();
    rows[0].0 = Label::Positive;
    rows[1].0 = Label::Negative;
    Corpus::from_texts(rows, TokenMode::Char).unwrap()
}

/// Every pattern that occurs in the corpus, up to `maxpat` elements, starting
/// and ending with a token, with wildcard runs of at most `maxgap`.
pub fn enumerate_patterns(corpus: &Corpus, maxgap: usize, maxpat: usize) -> BTreeSet<Pattern> {
    let mut out = BTreeSet::new();
    for r in corpus.records() {
        let t = &r.tokens;
        for start in 0..t.len() {
            for len in 1..=maxpat.min(t.len() - start) {
                let window = &t[start..start + len];
                let inner = len.saturating_sub(2);
                for mask in 0u32..(1 << inner) {
                    let elems: Vec<Elem> = window
                        .iter()
                        .enumerate()
                        .map(|(k, &tok)| {
                            if k > 0 && k + 1 < len && mask & (1 << (k - 1)) != 0 {
                                Elem::Wildcard
                            } else {
                                Elem::Token(tok)
                            }
                        })
                        .collect();
                    let p = Pattern::new(elems);
                    if p.longest_gap() <= maxgap {
                        out.insert(p);
                    }
                }
            }
        }
    }
    out
}

pub fn docs_of(corpus: &Corpus, pattern: &Pattern) -> Vec<u32> {
    corpus
        .records()
        .iter()
        .filter(|r| pattern.matches(&r.tokens))
        .map(|r| r.id as u32)
        .collect()
}

/// Penalized gradient with the documents summed in ascending id order.
pub fn gradient(
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    margins: &[f64],
    docs: &[u32],
    beta: f64,
) -> f64 {
    let mut raw = 0.0;
    for &d in docs {
        raw += corpus.label_sign(d as usize) * kind.derivative(margins[d as usize]);
    }
    penalty.slope(beta, raw)
}

#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub pattern: Pattern,
    pub docs: Vec<u32>,
}

pub struct Oracle {
    pub entries: Vec<OracleEntry>,
}

impl Oracle {
    pub fn new(corpus: &Corpus, maxgap: usize, maxpat: usize, minsup: usize) -> Self {
        let entries = enumerate_patterns(corpus, maxgap, maxpat)
            .into_iter()
            .map(|pattern| {
                let docs = docs_of(corpus, &pattern);
                OracleEntry { pattern, docs }
            })
            .filter(|e| e.docs.len() >= minsup)
            .collect();
        Oracle { entries }
    }

    /// Best (pattern, signed gradient) over patterns of length >= `minpat`,
    /// using the active weight where present. Ties: shorter, then smaller elements.
    pub fn best(
        &self,
        corpus: &Corpus,
        kind: LossKind,
        penalty: ElasticNet,
        margins: &[f64],
        active: &ActiveSet,
        minpat: usize,
    ) -> Option<(Pattern, f64)> {
        let mut best: Option<(Pattern, f64)> = None;
        let candidates = self
            .entries
            .iter()
            .filter(|e| e.pattern.len() >= minpat)
            .map(|e| {
                let beta = active.get(&e.pattern).map_or(0.0, |f| f.weight);
                (
                    &e.pattern,
                    gradient(corpus, kind, penalty, margins, &e.docs, beta),
                )
            })
            .chain(active.iter().map(|(p, f)| {
                (
                    p,
                    gradient(corpus, kind, penalty, margins, &f.docs, f.weight),
                )
            }));
        for (p, g) in candidates {
            if g == 0.0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bp, bg)) => match g.abs().partial_cmp(&bg.abs()).unwrap() {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => p.tie_order(bp).is_lt(),
                },
            };
            if better {
                best = Some((p.clone(), g));
            }
        }
        best
    }

    /// Brute-forced patterns that strictly extend `prefix`.
    pub fn descendants<'a>(
        &'a self,
        prefix: &'a Pattern,
    ) -> impl Iterator<Item = &'a OracleEntry> + 'a {
        self.entries.iter().filter(move |e| {
            e.pattern.len() > prefix.len() && e.pattern.elems().starts_with(prefix.elems())
        })
    }
}

/// Margins `y_i * score_i` for the given weights, by direct matching.
pub fn margins_for(corpus: &Corpus, active: &ActiveSet) -> Vec<f64> {
    corpus
        .records()
        .iter()
        .map(|r| {
            let s: f64 = active
                .iter()
                .filter(|(p, _)| p.matches(&r.tokens))
                .map(|(_, f)| f.weight)
                .sum();
            r.label.sign() * s
        })
        .collect()
}

/// A few random patterns from the oracle with random nonzero weights.
pub fn random_active(rng: &mut ChaCha8Rng, oracle: &Oracle, max_features: usize) -> ActiveSet {
    let mut active = BTreeMap::new();
    if oracle.entries.is_empty() {
        return active;
    }
    let k = rng.random_range(0..=max_features);
    for _ in 0..k {
        let e = &oracle.entries[rng.random_range(0..oracle.entries.len())];
        let magnitude = rng.random_range(0.1..2.0);
        let weight = if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        };
        active.insert(
            e.pattern.clone(),
            ActiveFeature {
                weight,
                docs: e.docs.clone(),
            },
        );
    }
    active
}

/// Objective recomputed from scratch: match every active pattern, sum losses, add penalty.
pub fn objective_from_scratch(
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    active: &ActiveSet,
) -> f64 {
    let margins = margins_for(corpus, active);
    let loss: f64 = margins.iter().map(|&m| kind.value(m)).sum();
    let reg: f64 = active
        .values()
        .map(|f| {
            penalty.alpha() * f.weight.abs() + (1.0 - penalty.alpha()) * 0.5 * f.weight * f.weight
        })
        .sum();
    loss + penalty.c() * reg
}

pub const KINDS: [LossKind; 2] = [LossKind::Logistic, LossKind::SquaredHinge];

pub fn penalties() -> Vec<ElasticNet> {
    let mut out = Vec::new();
    for c in [0.0, 1.0] {
        for alpha in [0.0, 0.5, 1.0] {
            out.push(ElasticNet::new(c, alpha).unwrap());
        }
    }
    out
}
