//! k-fold cross-validation of the trainer.

use crate::corpus::{Corpus, Label};
use crate::error::Result;
use crate::eval::{kfold_split, EvalReport, Fold};
use crate::trainer::{train, TrainerConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub features: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMetrics {
    pub auc: f64,
    pub auc50: f64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean: MeanMetrics,
}

/// Train on each training split and score its held-out split.
pub fn evaluate_fold(
    corpus: &Corpus,
    fold: &Fold,
    cfg: &TrainerConfig,
) -> Result<(usize, EvalReport)> {
    let train_set = corpus.subset(&fold.train)?;
    let model = train(&train_set, cfg)?.model;
    let scored: Vec<(f64, Label)> = fold
        .test
        .iter()
        .map(|&i| {
            let tokens = model.encode_symbols(&corpus.symbols(i));
            (model.score_tokens(&tokens), corpus.record(i).label)
        })
        .collect();
    Ok((model.len(), EvalReport::from_scores(&scored)?))
}

/// Stratified k-fold cross-validation. Folds run concurrently when the
/// `parallel` feature is on; results are reported in fold order either way.
pub fn cross_validate(
    corpus: &Corpus,
    cfg: &TrainerConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let folds = kfold_split(&corpus.labels(), k, seed)?;
    let run = |(i, fold): (usize, &Fold)| {
        evaluate_fold(corpus, fold, cfg).map(|(features, report)| FoldResult {
            fold: i,
            features,
            report,
        })
    };

    #[cfg(feature = "parallel")]
    let results: Result<Vec<FoldResult>> = {
        use rayon::prelude::*;
        folds.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<FoldResult>> = folds.iter().enumerate().map(run).collect();

    let folds = results?;
    let n = folds.len() as f64;
    let mean = MeanMetrics {
        auc: folds.iter().map(|f| f.report.auc).sum::<f64>() / n,
        auc50: folds.iter().map(|f| f.report.auc50).sum::<f64>() / n,
        ber: folds.iter().map(|f| f.report.ber).sum::<f64>() / n,
    };
    Ok(CvReport { folds, mean })
}
