use std::cmp::Ordering;
use std::fmt;

use crate::corpus::{TokenId, TokenMode, Vocabulary, WILDCARD_SYMBOL};

/// Pattern element. Tokens order by id, and every token sorts before the wildcard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    Token(TokenId),
    Wildcard,
}

impl Elem {
    pub fn is_wildcard(self) -> bool {
        matches!(self, Elem::Wildcard)
    }

    #[inline]
    pub fn accepts(self, token: TokenId) -> bool {
        match self {
            Elem::Token(t) => t == token,
            Elem::Wildcard => true,
        }
    }
}

/// A contiguous subsequence of tokens in which a wildcard matches any single token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pattern {
    elems: Vec<Elem>,
}

impl Pattern {
    pub fn new(elems: Vec<Elem>) -> Self {
        Pattern { elems }
    }

    pub fn from_tokens(tokens: &[TokenId]) -> Self {
        Pattern::new(tokens.iter().map(|&t| Elem::Token(t)).collect())
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn extended(&self, elem: Elem) -> Pattern {
        let mut elems = Vec::with_capacity(self.elems.len() + 1);
        elems.extend_from_slice(&self.elems);
        elems.push(elem);
        Pattern { elems }
    }

    pub fn trailing_wildcards(&self) -> usize {
        self.elems
            .iter()
            .rev()
            .take_while(|e| e.is_wildcard())
            .count()
    }

    pub fn longest_gap(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for e in &self.elems {
            if e.is_wildcard() {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        best
    }

    /// Non-empty, starts and ends with a token, no wildcard run longer than `maxgap`.
    pub fn is_valid(&self, maxgap: usize) -> bool {
        match (self.elems.first(), self.elems.last()) {
            (Some(Elem::Token(_)), Some(Elem::Token(_))) => self.longest_gap() <= maxgap,
            _ => false,
        }
    }

    /// True iff some window of `tokens` matches every element.
    pub fn matches(&self, tokens: &[TokenId]) -> bool {
        let k = self.elems.len();
        if k == 0 || k > tokens.len() {
            return false;
        }
        tokens
            .windows(k)
            .any(|w| self.elems.iter().zip(w).all(|(e, &t)| e.accepts(t)))
    }

    /// Deterministic preference among equal-gradient candidates: shorter first,
    /// then elementwise with the wildcard after every token.
    pub fn tie_order(&self, other: &Pattern) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.elems.cmp(&other.elems))
    }

    pub fn render(&self, vocab: &Vocabulary, mode: TokenMode) -> String {
        self.elems
            .iter()
            .map(|e| match e {
                Elem::Token(t) => vocab.symbol(*t),
                Elem::Wildcard => WILDCARD_SYMBOL,
            })
            .collect::<Vec<_>>()
            .join(mode.separator())
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary, mode: TokenMode) -> PatternDisplay<'a> {
        PatternDisplay {
            pattern: self,
            vocab,
            mode,
        }
    }
}

pub struct PatternDisplay<'a> {
    pattern: &'a Pattern,
    vocab: &'a Vocabulary,
    mode: TokenMode,
}

impl fmt::Display for PatternDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern.render(self.vocab, self.mode))
    }
}
