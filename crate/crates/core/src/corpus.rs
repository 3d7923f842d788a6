//! Labeled sequence data, tokenization and the unigram inverted index.
//!
//! Tokens are interned into a [`Vocabulary`] whose ids follow the
//! lexicographic order of the symbols, so comparing ids compares symbols.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Textual rendering of the wildcard pattern element. Never a valid token.
pub const WILDCARD_SYMBOL: &str = "*";

/// Interned token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

impl TokenId {
    /// Stand-in for symbols a model has never seen. Only a wildcard matches it.
    pub const UNKNOWN: TokenId = TokenId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TokenMode {
    #[default]
    Char,
    Word,
}

impl TokenMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenMode::Char => "char",
            TokenMode::Word => "word",
        }
    }

    /// Separator used when rendering a pattern or token list back to text.
    pub fn separator(self) -> &'static str {
        match self {
            TokenMode::Char => "",
            TokenMode::Word => " ",
        }
    }
}

impl fmt::Display for TokenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" | "c" => Ok(TokenMode::Char),
            "word" | "w" => Ok(TokenMode::Word),
            other => Err(Error::InvalidConfig(format!(
                "unknown token type {other:?} (expected char or word)"
            ))),
        }
    }
}

/// Split `text` into tokens. Whitespace never produces a token.
pub fn tokenize(text: &str, mode: TokenMode) -> Result<Vec<String>> {
    let tokens: Vec<String> = match mode {
        TokenMode::Char => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
        TokenMode::Word => text.split_whitespace().map(String::from).collect(),
    };
    if tokens.is_empty() {
        return Err(Error::MalformedRecord("empty sequence".into()));
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Label::Positive),
            "-1" => Ok(Label::Negative),
            other => Err(Error::MalformedRecord(format!(
                "label {other:?} is not one of +1, 1, -1"
            ))),
        }
    }
}

/// Sorted symbol table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    symbols: Vec<String>,
    lookup: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        symbols.sort_unstable();
        symbols.dedup();
        let lookup = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), TokenId(i as u32)))
            .collect();
        Vocabulary { symbols, lookup }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn id(&self, symbol: &str) -> Option<TokenId> {
        self.lookup.get(symbol).copied()
    }

    /// Map a symbol to its id, or [`TokenId::UNKNOWN`].
    pub fn encode(&self, symbol: &str) -> TokenId {
        self.id(symbol).unwrap_or(TokenId::UNKNOWN)
    }

    pub fn symbol(&self, id: TokenId) -> &str {
        self.symbols
            .get(id.index())
            .map(String::as_str)
            .unwrap_or("?")
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.symbols.len() as u32).map(TokenId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    pub id: usize,
    pub label: Label,
    pub tokens: Vec<TokenId>,
}

/// One occurrence: document id and token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting {
    pub doc: u32,
    pub pos: u32,
}

/// A line of a labeled input file before tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledLine<'a> {
    pub line: usize,
    pub label: Label,
    pub text: &'a str,
}

/// Parse `<label><TAB><sequence>` lines. Blank lines are skipped; CRLF is accepted.
pub fn parse_labeled_lines(content: &str) -> Result<Vec<LabeledLine<'_>>> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let (label, text) = raw.split_once('\t').ok_or_else(|| Error::Load {
            line,
            message: "expected <label><TAB><sequence>".into(),
        })?;
        let label = label.parse::<Label>().map_err(|e| Error::Load {
            line,
            message: e.to_string(),
        })?;
        out.push(LabeledLine { line, label, text });
    }
    Ok(out)
}

/// Immutable training corpus with its unigram inverted index.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<SequenceRecord>,
    vocab: Vocabulary,
    mode: TokenMode,
    /// Posting list per token id, sorted by (doc, pos).
    index: Vec<Vec<Posting>>,
    n_pos: usize,
    n_neg: usize,
}

impl Corpus {
    /// Build a corpus from already tokenized records. Both classes must be present.
    pub fn from_tokens<I, T, S>(records: I, mode: TokenMode) -> Result<Self>
    where
        I: IntoIterator<Item = (Label, T)>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let raw: Vec<(Label, Vec<String>)> = records
            .into_iter()
            .map(|(label, toks)| {
                (
                    label,
                    toks.into_iter().map(|t| t.as_ref().to_owned()).collect(),
                )
            })
            .collect();
        for (i, (_, toks)) in raw.iter().enumerate() {
            if toks.is_empty() {
                return Err(Error::MalformedRecord(format!("record {i} is empty")));
            }
            if let Some(bad) = toks.iter().find(|t| t.is_empty() || *t == WILDCARD_SYMBOL) {
                return Err(Error::MalformedRecord(format!(
                    "record {i} contains reserved or empty token {bad:?}"
                )));
            }
        }
        let vocab = Vocabulary::from_symbols(raw.iter().flat_map(|(_, t)| t.iter().cloned()));
        let records: Vec<SequenceRecord> = raw
            .into_iter()
            .enumerate()
            .map(|(id, (label, toks))| SequenceRecord {
                id,
                label,
                tokens: toks.iter().map(|t| vocab.encode(t)).collect(),
            })
            .collect();
        Self::assemble(records, vocab, mode)
    }

    /// Tokenize and build from `(label, text)` pairs.
    pub fn from_texts<I, S>(records: I, mode: TokenMode) -> Result<Self>
    where
        I: IntoIterator<Item = (Label, S)>,
        S: AsRef<str>,
    {
        let tokenized = records
            .into_iter()
            .map(|(label, text)| Ok((label, tokenize(text.as_ref(), mode)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_tokens(tokenized, mode)
    }

    /// Parse the contents of a labeled training file.
    pub fn parse(content: &str, mode: TokenMode) -> Result<Self> {
        let lines = parse_labeled_lines(content)?;
        let mut records = Vec::with_capacity(lines.len());
        for l in lines {
            let tokens = tokenize(l.text, mode).map_err(|e| Error::Load {
                line: l.line,
                message: e.to_string(),
            })?;
            if tokens.iter().any(|t| t == WILDCARD_SYMBOL) {
                return Err(Error::Load {
                    line: l.line,
                    message: format!("sequence contains the reserved wildcard {WILDCARD_SYMBOL:?}"),
                });
            }
            records.push((l.label, tokens));
        }
        Self::from_tokens(records, mode)
    }

    pub fn load(path: impl AsRef<Path>, mode: TokenMode) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, mode)
    }

    /// Sub-corpus of the given record ids, re-indexed from 0 in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let records = ids.iter().map(|&i| {
            let r = &self.records[i];
            (r.label, r.tokens.iter().map(|&t| self.vocab.symbol(t)))
        });
        Self::from_tokens(records, self.mode)
    }

    fn assemble(records: Vec<SequenceRecord>, vocab: Vocabulary, mode: TokenMode) -> Result<Self> {
        let n_pos = records.iter().filter(|r| r.label.is_positive()).count();
        let n_neg = records.len() - n_pos;
        if n_pos == 0 {
            return Err(Error::MissingClass("positive"));
        }
        if n_neg == 0 {
            return Err(Error::MissingClass("negative"));
        }
        let mut index = vec![Vec::new(); vocab.len()];
        for r in &records {
            for (pos, tok) in r.tokens.iter().enumerate() {
                index[tok.index()].push(Posting {
                    doc: r.id as u32,
                    pos: pos as u32,
                });
            }
        }
        Ok(Corpus {
            records,
            vocab,
            mode,
            index,
            n_pos,
            n_neg,
        })
    }

    pub fn records(&self) -> &[SequenceRecord] {
        &self.records
    }

    pub fn record(&self, id: usize) -> &SequenceRecord {
        &self.records[id]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    pub fn postings(&self, token: TokenId) -> &[Posting] {
        self.index
            .get(token.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        (self.n_pos, self.n_neg)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn label_sign(&self, doc: usize) -> f64 {
        self.records[doc].label.sign()
    }

    pub fn max_len(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.tokens.len())
            .max()
            .unwrap_or(0)
    }

    /// Symbols of a record, in order.
    pub fn symbols(&self, doc: usize) -> Vec<&str> {
        self.records[doc]
            .tokens
            .iter()
            .map(|&t| self.vocab.symbol(t))
            .collect()
    }

    /// Text of a record in this corpus' tokenization.
    pub fn text(&self, doc: usize) -> String {
        self.symbols(doc).join(self.mode.separator())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(corpus: &Corpus, sym: &str) -> Vec<(u32, u32)> {
        corpus
            .postings(corpus.vocab().id(sym).unwrap())
            .iter()
            .map(|p| (p.doc, p.pos))
            .collect()
    }

    #[test]
    fn tokenize_modes() {
        assert_eq!(tokenize("GYC", TokenMode::Char).unwrap(), ["G", "Y", "C"]);
        assert_eq!(
            tokenize("the cat", TokenMode::Word).unwrap(),
            ["the", "cat"]
        );
        assert_eq!(tokenize("A GT", TokenMode::Char).unwrap(), ["A", "G", "T"]);
        assert_eq!(tokenize("  x\ty ", TokenMode::Word).unwrap(), ["x", "y"]);
        assert!(matches!(
            tokenize("  \t", TokenMode::Char),
            Err(Error::MalformedRecord(_))
        ));
    }

    #[test]
    fn parse_small_file() {
        let c = Corpus::parse("+1\tAB\n-1\tAC\n", TokenMode::Char).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.vocab().symbols(), ["A", "B", "C"]);
        assert_eq!(ids(&c, "A"), [(0, 0), (1, 0)]);
        assert_eq!(ids(&c, "B"), [(0, 1)]);
        assert_eq!(ids(&c, "C"), [(1, 1)]);
        assert_eq!(c.class_counts(), (1, 1));
    }

    #[test]
    fn crlf_blank_lines_and_label_forms() {
        let c = Corpus::parse("1\tAB\r\n\r\n-1\tAC\r\n+1\tA\n", TokenMode::Char).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.class_counts(), (2, 1));
    }

    #[test]
    fn bad_label_names_line() {
        let err = Corpus::parse("0\tAB\n", TokenMode::Char).unwrap_err();
        assert!(matches!(err, Error::Load { line: 1, .. }), "{err}");
        let err = Corpus::parse("+1\tAB\n\n2\tAB\n", TokenMode::Char).unwrap_err();
        assert!(matches!(err, Error::Load { line: 3, .. }), "{err}");
    }

    #[test]
    fn empty_sequence_and_wildcard_rejected() {
        let err = Corpus::parse("+1\tAB\n-1\t  \n", TokenMode::Char).unwrap_err();
        assert!(matches!(err, Error::Load { line: 2, .. }), "{err}");
        let err = Corpus::parse("+1\tA*B\n-1\tAB\n", TokenMode::Char).unwrap_err();
        assert!(matches!(err, Error::Load { line: 1, .. }), "{err}");
    }

    #[test]
    fn missing_class() {
        assert!(matches!(
            Corpus::parse("+1\tAB\n+1\tAC\n", TokenMode::Char),
            Err(Error::MissingClass("negative"))
        ));
        assert!(matches!(
            Corpus::parse("-1\tAB\n", TokenMode::Char),
            Err(Error::MissingClass("positive"))
        ));
    }

    #[test]
    fn class_counts_large() {
        let mut s = String::new();
        for _ in 0..16 {
            s.push_str("+1\tSGAC\n");
        }
        for _ in 0..1067 {
            s.push_str("-1\tAAAA\n");
        }
        let c = Corpus::parse(&s, TokenMode::Char).unwrap();
        assert_eq!(c.class_counts(), (16, 1067));
    }

    #[test]
    fn word_mode_index() {
        let c = Corpus::parse("+1\tthe cat sat\n-1\tthe dog\n", TokenMode::Word).unwrap();
        assert_eq!(c.vocab().symbols(), ["cat", "dog", "sat", "the"]);
        assert_eq!(ids(&c, "the"), [(0, 0), (1, 0)]);
        assert_eq!(c.text(0), "the cat sat");
    }

    #[test]
    fn subset_reindexes() {
        let c = Corpus::parse("+1\tAB\n-1\tAC\n+1\tBD\n-1\tCC\n", TokenMode::Char).unwrap();
        let s = c.subset(&[2, 3]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.vocab().symbols(), ["B", "C", "D"]);
        assert_eq!(s.text(0), "BD");
        assert_eq!(ids(&s, "C"), [(1, 0), (1, 1)]);
    }
}
