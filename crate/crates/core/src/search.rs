//! Best-feature search over the prefix-expansion tree of wildcard subsequences.
//!
//! Each node carries the projected occurrence list of its pattern. The class-wise
//! sums of loss derivatives over the documents containing a prefix bound the
//! gradient magnitude of every extension of that prefix (document sets only
//! shrink under extension), so a subtree whose bound cannot beat the best
//! gradient seen so far is discarded without being materialized.

use std::collections::BTreeMap;
use std::ops::AddAssign;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::corpus::{Corpus, Posting, TokenId};
use crate::error::{Error, Result};
use crate::loss::{ElasticNet, LossKind};
use crate::pattern::{Elem, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Traversal {
    Bfs,
    #[default]
    Dfs,
}

impl FromStr for Traversal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" | "b" | "0" => Ok(Traversal::Bfs),
            "dfs" | "d" | "1" => Ok(Traversal::Dfs),
            other => Err(Error::InvalidConfig(format!(
                "unknown traversal {other:?} (expected bfs or dfs)"
            ))),
        }
    }
}

/// Whether sibling subtrees may be searched on the rayon pool.
///
/// `Parallel` runs sequentially when the crate is built without the
/// `parallel` feature. `Sequential` is the determinism baseline: search
/// statistics are only reproducible run to run in that mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Longest allowed run of consecutive wildcards.
    pub maxgap: usize,
    /// Shortest pattern eligible as a feature. Shorter prefixes are still expanded.
    pub minpat: usize,
    /// Longest pattern, wildcards included. `None` means bounded only by the data.
    pub maxpat: Option<usize>,
    /// Minimum number of distinct documents containing a pattern.
    pub minsup: usize,
    pub traversal: Traversal,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            maxgap: 0,
            minpat: 1,
            maxpat: None,
            minsup: 1,
            traversal: Traversal::Dfs,
            execution: Execution::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.minpat < 1 {
            return Err(Error::InvalidConfig("minpat must be >= 1".into()));
        }
        if self.minsup < 1 {
            return Err(Error::InvalidConfig("minsup must be >= 1".into()));
        }
        if let Some(maxpat) = self.maxpat {
            if maxpat < self.minpat {
                return Err(Error::InvalidConfig(format!(
                    "maxpat ({maxpat}) must be >= minpat ({})",
                    self.minpat
                )));
            }
        }
        Ok(())
    }

    pub fn effective_maxpat(&self, corpus: &Corpus) -> usize {
        let longest = corpus.max_len();
        self.maxpat.map_or(longest, |m| m.min(longest))
    }
}

/// A pattern together with where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pattern: Pattern,
    /// (doc, end position) of every match, sorted.
    occ: Vec<Posting>,
    /// Distinct documents, ascending.
    docs: Vec<u32>,
    support_pos: usize,
    support_neg: usize,
}

impl SearchNode {
    pub fn new(pattern: Pattern, occ: Vec<Posting>, corpus: &Corpus) -> Self {
        let mut docs: Vec<u32> = occ.iter().map(|p| p.doc).collect();
        docs.dedup();
        let support_pos = docs
            .iter()
            .filter(|&&d| corpus.record(d as usize).label.is_positive())
            .count();
        let support_neg = docs.len() - support_pos;
        SearchNode {
            pattern,
            occ,
            docs,
            support_pos,
            support_neg,
        }
    }

    pub fn unigram(corpus: &Corpus, token: TokenId) -> Self {
        SearchNode::new(
            Pattern::new(vec![Elem::Token(token)]),
            corpus.postings(token).to_vec(),
            corpus,
        )
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn occurrences(&self) -> &[Posting] {
        &self.occ
    }

    pub fn docs(&self) -> &[u32] {
        &self.docs
    }

    pub fn support(&self) -> usize {
        self.docs.len()
    }

    pub fn support_pos(&self) -> usize {
        self.support_pos
    }

    pub fn support_neg(&self) -> usize {
        self.support_neg
    }

    /// Wildcard-terminated nodes only exist to reach longer patterns.
    pub fn is_feature(&self) -> bool {
        matches!(self.pattern.elems().last(), Some(Elem::Token(_)))
    }
}

/// Unigram nodes meeting `minsup`, in token order.
pub fn roots(corpus: &Corpus, cfg: &SearchConfig) -> Vec<SearchNode> {
    corpus
        .vocab()
        .ids()
        .map(|t| SearchNode::unigram(corpus, t))
        .filter(|n| n.support() >= cfg.minsup)
        .collect()
}

/// Children of `node`: one per distinct following token, then the wildcard
/// child when the trailing gap can still grow and a token can still follow it.
pub fn expand(node: &SearchNode, corpus: &Corpus, cfg: &SearchConfig) -> Vec<SearchNode> {
    let len = node.pattern.len();
    let maxpat = cfg.effective_maxpat(corpus);
    if len >= maxpat {
        return Vec::new();
    }
    let with_wildcard = node.pattern.trailing_wildcards() < cfg.maxgap && len + 2 <= maxpat;

    let mut buckets: BTreeMap<TokenId, Vec<Posting>> = BTreeMap::new();
    let mut wild = Vec::new();
    for p in &node.occ {
        let tokens = &corpus.record(p.doc as usize).tokens;
        let next = p.pos as usize + 1;
        if let Some(&tok) = tokens.get(next) {
            let posting = Posting {
                doc: p.doc,
                pos: next as u32,
            };
            buckets.entry(tok).or_default().push(posting);
            if with_wildcard {
                wild.push(posting);
            }
        }
    }

    let mut children: Vec<SearchNode> = buckets
        .into_iter()
        .map(|(tok, occ)| SearchNode::new(node.pattern.extended(Elem::Token(tok)), occ, corpus))
        .filter(|c| c.support() >= cfg.minsup)
        .collect();
    if !wild.is_empty() {
        let child = SearchNode::new(node.pattern.extended(Elem::Wildcard), wild, corpus);
        if child.support() >= cfg.minsup {
            children.push(child);
        }
    }
    children
}

/// Loss derivatives at the current margins, shared by every node of one search.
#[derive(Debug, Clone)]
pub struct GradientContext<'a> {
    corpus: &'a Corpus,
    penalty: ElasticNet,
    dloss: Vec<f64>,
}

impl<'a> GradientContext<'a> {
    pub fn new(corpus: &'a Corpus, kind: LossKind, penalty: ElasticNet, margins: &[f64]) -> Self {
        assert_eq!(margins.len(), corpus.len(), "one margin per document");
        GradientContext {
            corpus,
            penalty,
            dloss: margins.iter().map(|&m| kind.derivative(m)).collect(),
        }
    }

    /// Sum of `y_i * loss'(m_i)` over `docs`, in the given order.
    pub fn raw_gradient(&self, docs: &[u32]) -> f64 {
        docs.iter().fold(0.0, |acc, &d| {
            acc + self.corpus.label_sign(d as usize) * self.dloss[d as usize]
        })
    }

    /// Penalized partial derivative of a feature present in exactly `docs`.
    pub fn gradient(&self, docs: &[u32], beta: f64) -> f64 {
        self.penalty.slope(beta, self.raw_gradient(docs))
    }

    /// Upper bound on `|gradient|` at zero weight for every pattern whose
    /// documents are a subset of `docs`.
    pub fn bound(&self, docs: &[u32]) -> f64 {
        let (mut pos, mut neg) = (0.0, 0.0);
        for &d in docs {
            let s = self.dloss[d as usize];
            if self.corpus.record(d as usize).label.is_positive() {
                pos += s;
            } else {
                neg -= s;
            }
        }
        self.penalty
            .slope(0.0, pos)
            .abs()
            .max(self.penalty.slope(0.0, neg).abs())
    }
}

pub fn node_gradient(
    node: &SearchNode,
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    margins: &[f64],
    beta: f64,
) -> f64 {
    GradientContext::new(corpus, kind, penalty, margins).gradient(&node.docs, beta)
}

pub fn node_bound(
    node: &SearchNode,
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    margins: &[f64],
) -> f64 {
    GradientContext::new(corpus, kind, penalty, margins).bound(&node.docs)
}

/// A feature currently carrying nonzero weight, with the documents it occurs in.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveFeature {
    pub weight: f64,
    pub docs: Vec<u32>,
}

pub type ActiveSet = BTreeMap<Pattern, ActiveFeature>;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pattern: Pattern,
    /// Signed penalized gradient.
    pub gradient: f64,
    pub docs: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub bound_checks: u64,
    pub prunes: u64,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, rhs: Self) {
        self.nodes_visited += rhs.nodes_visited;
        self.bound_checks += rhs.bound_checks;
        self.prunes += rhs.prunes;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// `None` when every admissible gradient is exactly zero.
    pub best: Option<Candidate>,
    pub stats: SearchStats,
}

/// Pattern maximizing the absolute penalized gradient, among all expandable
/// patterns at zero weight and all active features at their current weight.
pub fn find_best_feature(
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    margins: &[f64],
    active: &ActiveSet,
    cfg: &SearchConfig,
) -> SearchOutcome {
    Searcher::new(corpus, kind, penalty, margins, active, cfg).run(None)
}

/// Sequential search that reports every bound check as `(node, bound)`.
pub fn find_best_feature_observed(
    corpus: &Corpus,
    kind: LossKind,
    penalty: ElasticNet,
    margins: &[f64],
    active: &ActiveSet,
    cfg: &SearchConfig,
    observer: &mut dyn FnMut(&SearchNode, f64),
) -> SearchOutcome {
    let cfg = SearchConfig {
        execution: Execution::Sequential,
        ..*cfg
    };
    Searcher::new(corpus, kind, penalty, margins, active, &cfg).run(Some(observer))
}

#[derive(Debug, Clone, Default)]
struct Best {
    found: Option<Candidate>,
    magnitude: f64,
}

impl Best {
    fn offer(&mut self, pattern: &Pattern, gradient: f64, docs: &[u32]) -> bool {
        let magnitude = gradient.abs();
        if magnitude == 0.0 || magnitude < self.magnitude {
            return false;
        }
        let wins = match &self.found {
            None => true,
            Some(cur) => magnitude > self.magnitude || pattern.tie_order(&cur.pattern).is_lt(),
        };
        if wins {
            self.found = Some(Candidate {
                pattern: pattern.clone(),
                gradient,
                docs: docs.to_vec(),
            });
            self.magnitude = magnitude;
        }
        wins
    }

    fn merge(mut self, other: Best) -> Best {
        if let Some(c) = other.found {
            self.offer(&c.pattern, c.gradient, &c.docs);
        }
        self
    }

    fn pattern_len(&self) -> Option<usize> {
        self.found.as_ref().map(|c| c.pattern.len())
    }
}

/// Best magnitude published across workers. Non-negative f64 bit patterns
/// order like the values, so `fetch_max` on the bits is a float max.
struct SharedBound(AtomicU64);

impl SharedBound {
    fn new() -> Self {
        SharedBound(AtomicU64::new(0f64.to_bits()))
    }

    fn raise(&self, v: f64) {
        self.0.fetch_max(v.to_bits(), AtomicOrdering::Relaxed);
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(AtomicOrdering::Relaxed))
    }
}

type Observer<'o> = Option<&'o mut dyn FnMut(&SearchNode, f64)>;

struct Searcher<'a> {
    corpus: &'a Corpus,
    ctx: GradientContext<'a>,
    active: &'a ActiveSet,
    cfg: &'a SearchConfig,
    maxpat: usize,
    shared: SharedBound,
}

impl<'a> Searcher<'a> {
    fn new(
        corpus: &'a Corpus,
        kind: LossKind,
        penalty: ElasticNet,
        margins: &[f64],
        active: &'a ActiveSet,
        cfg: &'a SearchConfig,
    ) -> Self {
        Searcher {
            corpus,
            ctx: GradientContext::new(corpus, kind, penalty, margins),
            active,
            cfg,
            maxpat: cfg.effective_maxpat(corpus),
            shared: SharedBound::new(),
        }
    }

    fn run(&self, mut observer: Observer<'_>) -> SearchOutcome {
        let mut best = Best::default();
        for (pattern, feature) in self.active {
            let g = self.ctx.gradient(&feature.docs, feature.weight);
            best.offer(pattern, g, &feature.docs);
        }

        let roots = roots(self.corpus, self.cfg);
        let mut stats = SearchStats {
            nodes_visited: roots.len() as u64,
            ..SearchStats::default()
        };
        for node in &roots {
            self.evaluate(node, &mut best);
        }
        self.shared.raise(best.magnitude);

        let parallel = self.cfg.execution == Execution::Parallel && observer.is_none();
        let (best, more) = match (self.cfg.traversal, parallel) {
            (Traversal::Dfs, false) => {
                let mut s = SearchStats::default();
                for root in roots {
                    self.dfs(root, &mut best, &mut s, &mut observer);
                }
                (best, s)
            }
            (Traversal::Bfs, false) => {
                let mut s = SearchStats::default();
                self.bfs(roots, &mut best, &mut s, &mut observer);
                (best, s)
            }
            (Traversal::Dfs, true) => self.dfs_parallel(roots, best),
            (Traversal::Bfs, true) => self.bfs_parallel(roots, best),
        };
        stats += more;
        SearchOutcome {
            best: best.found,
            stats,
        }
    }

    fn evaluate(&self, node: &SearchNode, best: &mut Best) {
        if !node.is_feature()
            || node.pattern.len() < self.cfg.minpat
            || self.active.contains_key(&node.pattern)
        {
            return;
        }
        let g = self.ctx.gradient(&node.docs, 0.0);
        if best.offer(&node.pattern, g, &node.docs) {
            self.shared.raise(best.magnitude);
        }
    }

    /// No extension can beat the incumbent. Equal-magnitude extensions only
    /// survive while they could still win the tie-break on length.
    fn should_prune(&self, bound: f64, node_len: usize, best: &Best) -> bool {
        if bound < best.magnitude || bound < self.shared.get() {
            return true;
        }
        bound == best.magnitude && best.pattern_len().is_none_or(|l| l <= node_len)
    }

    /// Bound-check `node` and, unless pruned, return its evaluated children.
    fn step(
        &self,
        node: &SearchNode,
        best: &mut Best,
        stats: &mut SearchStats,
        observer: &mut Observer<'_>,
    ) -> Vec<SearchNode> {
        if node.pattern.len() >= self.maxpat {
            return Vec::new();
        }
        let bound = self.ctx.bound(&node.docs);
        stats.bound_checks += 1;
        if let Some(obs) = observer.as_mut() {
            obs(node, bound);
        }
        if self.should_prune(bound, node.pattern.len(), best) {
            stats.prunes += 1;
            return Vec::new();
        }
        let children = expand(node, self.corpus, self.cfg);
        stats.nodes_visited += children.len() as u64;
        for child in &children {
            self.evaluate(child, best);
        }
        children
    }

    fn dfs(
        &self,
        root: SearchNode,
        best: &mut Best,
        stats: &mut SearchStats,
        observer: &mut Observer<'_>,
    ) {
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            let children = self.step(&node, best, stats, observer);
            stack.extend(children.into_iter().rev());
        }
    }

    fn bfs(
        &self,
        mut frontier: Vec<SearchNode>,
        best: &mut Best,
        stats: &mut SearchStats,
        observer: &mut Observer<'_>,
    ) {
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for node in &frontier {
                next.extend(self.step(node, best, stats, observer));
            }
            frontier = next;
        }
    }

    #[cfg(feature = "parallel")]
    fn dfs_parallel(&self, roots: Vec<SearchNode>, best: Best) -> (Best, SearchStats) {
        use rayon::prelude::*;

        roots
            .into_par_iter()
            .map(|root| {
                let mut local = best.clone();
                let mut stats = SearchStats::default();
                self.dfs(root, &mut local, &mut stats, &mut None);
                (local, stats)
            })
            .reduce(
                || (best.clone(), SearchStats::default()),
                |(a, mut sa), (b, sb)| {
                    sa += sb;
                    (a.merge(b), sa)
                },
            )
    }

    #[cfg(feature = "parallel")]
    fn bfs_parallel(&self, mut frontier: Vec<SearchNode>, mut best: Best) -> (Best, SearchStats) {
        use rayon::prelude::*;

        let mut stats = SearchStats::default();
        while !frontier.is_empty() {
            let level: Vec<(Best, SearchStats, Vec<SearchNode>)> = frontier
                .par_iter()
                .fold(
                    || (best.clone(), SearchStats::default(), Vec::new()),
                    |(mut b, mut s, mut next), node| {
                        next.extend(self.step(node, &mut b, &mut s, &mut None));
                        (b, s, next)
                    },
                )
                .collect();
            frontier = Vec::new();
            for (b, s, next) in level {
                best = best.merge(b);
                stats += s;
                frontier.extend(next);
            }
        }
        (best, stats)
    }

    #[cfg(not(feature = "parallel"))]
    fn dfs_parallel(&self, roots: Vec<SearchNode>, mut best: Best) -> (Best, SearchStats) {
        let mut stats = SearchStats::default();
        for root in roots {
            self.dfs(root, &mut best, &mut stats, &mut None);
        }
        (best, stats)
    }

    #[cfg(not(feature = "parallel"))]
    fn bfs_parallel(&self, roots: Vec<SearchNode>, mut best: Best) -> (Best, SearchStats) {
        let mut stats = SearchStats::default();
        self.bfs(roots, &mut best, &mut stats, &mut None);
        (best, stats)
    }
}
