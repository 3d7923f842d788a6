//! Gauss-Southwell coordinate descent over the subsequence feature space.
//!
//! Every iteration asks the search for the feature with the steepest
//! penalized gradient, picks a step along it by doubling/bisection line
//! search, and updates that single weight and the margins of the documents
//! containing the feature.

use log::{debug, info};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::loss::{total_objective, ElasticNet, LossKind};
use crate::model::Model;
use crate::pattern::Pattern;
use crate::search::{find_best_feature, ActiveFeature, ActiveSet, SearchConfig, SearchStats};

pub const INITIAL_STEP: f64 = 0.01;
pub const MAX_DOUBLINGS: usize = 30;
pub const MAX_HALVINGS: usize = 30;
/// Bisection stops once the bracket is narrower than this fraction of the step.
pub const STEP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig {
    pub loss: LossKind,
    pub penalty: ElasticNet,
    pub search: SearchConfig,
    /// Stop once the mean absolute margin change of an iteration drops below this.
    pub convergence_threshold: f64,
    pub max_iterations: usize,
    pub verbosity: u8,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            loss: LossKind::Logistic,
            penalty: ElasticNet::default(),
            search: SearchConfig::default(),
            convergence_threshold: 0.005,
            max_iterations: 5000,
            verbosity: 1,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if !(self.convergence_threshold > 0.0 && self.convergence_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "convergence threshold must be > 0, got {}",
                self.convergence_threshold
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerState {
    pub weights: ActiveSet,
    /// `y_i * score_i` per document.
    pub margins: Vec<f64>,
    pub iteration: usize,
    pub objective: f64,
    loss: LossKind,
    penalty: ElasticNet,
}

impl TrainerState {
    /// All-zero weights.
    pub fn new(corpus: &Corpus, loss: LossKind, penalty: ElasticNet) -> Self {
        let margins = vec![0.0; corpus.len()];
        let objective = total_objective(loss, &penalty, &margins, std::iter::empty());
        TrainerState {
            weights: ActiveSet::new(),
            margins,
            iteration: 0,
            objective,
            loss,
            penalty,
        }
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn penalty(&self) -> ElasticNet {
        self.penalty
    }

    pub fn weight(&self, pattern: &Pattern) -> f64 {
        self.weights.get(pattern).map_or(0.0, |f| f.weight)
    }

    fn full_objective(&self) -> f64 {
        total_objective(
            self.loss,
            &self.penalty,
            &self.margins,
            self.weights.values().map(|f| f.weight),
        )
    }

    /// Weight change for a step of length `step` against `gradient`. Under an
    /// l1 share, a change that would flip the sign of a nonzero weight stops at 0.
    pub fn step_delta(&self, pattern: &Pattern, step: f64, gradient: f64) -> f64 {
        let beta = self.weight(pattern);
        let delta = -step * gradient;
        let l1 = self.penalty.c() > 0.0 && self.penalty.alpha() > 0.0;
        if l1 && beta != 0.0 && (beta + delta) * beta < 0.0 {
            -beta
        } else {
            delta
        }
    }

    /// Objective change from moving `pattern`'s weight by `delta`, touching only `docs`.
    pub fn objective_change(
        &self,
        corpus: &Corpus,
        pattern: &Pattern,
        delta: f64,
        docs: &[u32],
    ) -> f64 {
        let beta = self.weight(pattern);
        let loss: f64 = docs
            .iter()
            .map(|&d| {
                let m = self.margins[d as usize];
                let y = corpus.label_sign(d as usize);
                self.loss.value(m + y * delta) - self.loss.value(m)
            })
            .sum();
        loss + self.penalty.coordinate_penalty(beta + delta) - self.penalty.coordinate_penalty(beta)
    }

    /// Step length along `-gradient`: doubled from [`INITIAL_STEP`] while the
    /// objective keeps decreasing, then bisected between the last improving and
    /// first non-improving step. Returns 0 if no improving step is found.
    pub fn line_search(
        &self,
        corpus: &Corpus,
        pattern: &Pattern,
        gradient: f64,
        docs: &[u32],
    ) -> f64 {
        debug_assert!(gradient != 0.0, "line search along a zero gradient");
        let f = |step: f64| {
            let delta = self.step_delta(pattern, step, gradient);
            self.objective_change(corpus, pattern, delta, docs)
        };

        let mut lo = INITIAL_STEP;
        let mut f_lo = f(lo);
        let mut hi;
        if f_lo < 0.0 {
            hi = None;
            for _ in 0..MAX_DOUBLINGS {
                let next = 2.0 * lo;
                let f_next = f(next);
                if f_next < f_lo {
                    lo = next;
                    f_lo = f_next;
                } else {
                    hi = Some(next);
                    break;
                }
            }
        } else {
            hi = None;
            for _ in 0..MAX_HALVINGS {
                let smaller = lo / 2.0;
                let f_smaller = f(smaller);
                if f_smaller < 0.0 {
                    hi = Some(lo);
                    lo = smaller;
                    f_lo = f_smaller;
                    break;
                }
                lo = smaller;
            }
            if hi.is_none() {
                return 0.0;
            }
        }

        let Some(mut hi) = hi else {
            // doubling cap reached while still improving
            return lo;
        };
        while hi - lo > STEP_TOLERANCE * lo {
            let mid = 0.5 * (lo + hi);
            let f_mid = f(mid);
            if f_mid < f_lo {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Add `delta` to `pattern`'s weight and shift the margins of `docs`.
    pub fn apply_update(&mut self, corpus: &Corpus, pattern: &Pattern, delta: f64, docs: &[u32]) {
        self.iteration += 1;
        if delta == 0.0 {
            return;
        }
        let entry = self
            .weights
            .entry(pattern.clone())
            .or_insert_with(|| ActiveFeature {
                weight: 0.0,
                docs: docs.to_vec(),
            });
        entry.weight += delta;
        if entry.weight == 0.0 {
            self.weights.remove(pattern);
        }
        for &d in docs {
            self.margins[d as usize] += corpus.label_sign(d as usize) * delta;
        }
        self.objective = self.full_objective();
    }

    /// Margins recomputed by matching every weighted pattern against every record.
    pub fn recompute_margins(&self, corpus: &Corpus) -> Vec<f64> {
        corpus
            .records()
            .iter()
            .map(|r| {
                let score: f64 = self
                    .weights
                    .iter()
                    .filter(|(p, _)| p.matches(&r.tokens))
                    .map(|(_, f)| f.weight)
                    .sum();
                r.label.sign() * score
            })
            .collect()
    }
}

/// Mean absolute margin change below `threshold`.
pub fn converged(previous: &[f64], current: &[f64], threshold: f64) -> bool {
    assert_eq!(previous.len(), current.len());
    if current.is_empty() {
        return true;
    }
    let total: f64 = previous
        .iter()
        .zip(current)
        .map(|(a, b)| (a - b).abs())
        .sum();
    total / (current.len() as f64) < threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// No admissible feature has a nonzero penalized gradient.
    ZeroGradient,
    /// Line search found no step that lowers the objective.
    NoImprovement,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pattern: Pattern,
    pub gradient: f64,
    pub step: f64,
    pub delta: f64,
    pub objective: f64,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub state: TrainerState,
    pub history: Vec<IterationRecord>,
    pub initial_objective: f64,
    pub stop: StopReason,
    /// Statistics of the last search performed.
    pub last_search: SearchStats,
}

impl TrainOutcome {
    /// Objective before training followed by the objective after each iteration.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.history.iter().map(|r| r.objective))
            .collect()
    }
}

pub fn train(corpus: &Corpus, cfg: &TrainerConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut state = TrainerState::new(corpus, cfg.loss, cfg.penalty);
    let initial_objective = state.objective;
    let mut history = Vec::new();
    let mut last_search = SearchStats::default();

    let stop = loop {
        if state.iteration >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }
        let outcome = find_best_feature(
            corpus,
            cfg.loss,
            cfg.penalty,
            &state.margins,
            &state.weights,
            &cfg.search,
        );
        last_search = outcome.stats;
        let Some(best) = outcome.best else {
            break StopReason::ZeroGradient;
        };
        let step = state.line_search(corpus, &best.pattern, best.gradient, &best.docs);
        if step == 0.0 {
            break StopReason::NoImprovement;
        }
        let delta = state.step_delta(&best.pattern, step, best.gradient);

        let previous_margins = state.margins.clone();
        let previous_objective = state.objective;
        let previous_weight = state.weights.get(&best.pattern).cloned();
        state.apply_update(corpus, &best.pattern, delta, &best.docs);
        if state.objective >= previous_objective {
            // the decrease is below the resolution of the full objective
            state.margins = previous_margins;
            state.objective = previous_objective;
            state.iteration -= 1;
            match previous_weight {
                Some(f) => state.weights.insert(best.pattern.clone(), f),
                None => state.weights.remove(&best.pattern),
            };
            break StopReason::NoImprovement;
        }

        if cfg.verbosity >= 1 {
            info!(
                "iter {:>5}  {}  grad {:+.6}  step {:.6}  objective {:.6}  bound checks {}  prunes {}",
                state.iteration,
                best.pattern.render(corpus.vocab(), corpus.mode()),
                best.gradient,
                step,
                state.objective,
                outcome.stats.bound_checks,
                outcome.stats.prunes,
            );
        }
        if cfg.verbosity >= 2 {
            debug!(
                "visited {} nodes, {} active features",
                outcome.stats.nodes_visited,
                state.weights.len()
            );
        }
        history.push(IterationRecord {
            iteration: state.iteration,
            pattern: best.pattern,
            gradient: best.gradient,
            step,
            delta,
            objective: state.objective,
            stats: outcome.stats,
        });

        if converged(&previous_margins, &state.margins, cfg.convergence_threshold) {
            break StopReason::Converged;
        }
    };

    if cfg.verbosity >= 1 {
        info!(
            "stopped after {} iterations ({:?}); {} features, objective {:.6}",
            state.iteration,
            stop,
            state.weights.len(),
            state.objective
        );
    }

    let model = Model::from_weights(
        state.weights.iter().map(|(p, f)| (p, f.weight)),
        corpus.vocab(),
        cfg.loss,
        corpus.mode(),
        cfg.search.maxgap,
    )?;
    Ok(TrainOutcome {
        model,
        state,
        history,
        initial_objective,
        stop,
        last_search,
    })
}
