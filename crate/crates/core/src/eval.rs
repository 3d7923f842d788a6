//! Ranking and thresholded metrics, and stratified k-fold splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Negatives considered by [`auc50`].
pub const AUC50_NEGATIVES: usize = 50;

fn class_sizes(items: &[(f64, Label)]) -> Result<(usize, usize)> {
    if let Some((s, _)) = items.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::MetricUndefined(format!("non-finite score {s}")));
    }
    let pos = items.iter().filter(|(_, l)| l.is_positive()).count();
    let neg = items.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::MetricUndefined(format!(
            "ranking metrics need both classes ({pos} positive, {neg} negative)"
        )));
    }
    Ok((pos, neg))
}

/// Tie blocks in descending score order as (negatives, positives).
fn tie_blocks(items: &[(f64, Label)]) -> Vec<(usize, usize)> {
    let mut sorted: Vec<&(f64, Label)> = items.iter().collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut last = None;
    for (score, label) in sorted {
        // 0.0 and -0.0 tie
        if last != Some(*score) || blocks.is_empty() {
            blocks.push((0, 0));
            last = Some(*score);
        }
        let b = blocks.last_mut().unwrap();
        if label.is_positive() {
            b.1 += 1;
        } else {
            b.0 += 1;
        }
    }
    blocks
}

/// ROC area up to `cap` negatives, normalized to [0, 1]. A tie block is a
/// straight segment; a block straddling the cap is cut along that segment.
fn truncated_roc_area(items: &[(f64, Label)], cap: usize) -> Result<f64> {
    let (pos, neg) = class_sizes(items)?;
    let cap = cap.min(neg);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    for (n_b, p_b) in tie_blocks(items) {
        if fp + n_b <= cap {
            area += n_b as f64 * (tp as f64 + 0.5 * p_b as f64);
        } else {
            let x = (cap - fp) as f64;
            area += x * tp as f64 + p_b as f64 * x * x / (2.0 * n_b as f64);
            break;
        }
        tp += p_b;
        fp += n_b;
        if fp >= cap {
            break;
        }
    }
    Ok(area / (pos as f64 * cap as f64))
}

/// Area under the ROC curve (Mann-Whitney, ties count one half).
pub fn auc(items: &[(f64, Label)]) -> Result<f64> {
    truncated_roc_area(items, usize::MAX)
}

/// ROC area over the top-ranked 50 negatives, normalized so a perfect
/// truncated ranking scores 1.
pub fn auc50(items: &[(f64, Label)]) -> Result<f64> {
    truncated_roc_area(items, AUC50_NEGATIVES)
}

pub fn auc_n(items: &[(f64, Label)], negatives: usize) -> Result<f64> {
    if negatives == 0 {
        return Err(Error::MetricUndefined(
            "truncation at zero negatives".into(),
        ));
    }
    truncated_roc_area(items, negatives)
}

/// ROC vertices (false positive rate, true positive rate), one per tie block.
pub fn roc_points(items: &[(f64, Label)]) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = class_sizes(items)?;
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (n_b, p_b) in tie_blocks(items) {
        tp += p_b;
        fp += n_b;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    /// Predictions taken as positive iff score > 0.
    pub fn from_scores(items: &[(f64, Label)]) -> Self {
        let mut c = ConfusionCounts::default();
        for &(score, label) in items {
            match (score > 0.0, label.is_positive()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Balanced error rate: mean of the per-class error rates.
pub fn ber(c: &ConfusionCounts) -> Result<f64> {
    let pos = c.tp + c.fn_;
    let neg = c.fp + c.tn;
    if pos == 0 || neg == 0 {
        return Err(Error::MetricUndefined(format!(
            "balanced error needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    Ok(0.5 * (c.fn_ as f64 / pos as f64 + c.fp as f64 / neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub auc: f64,
    pub auc50: f64,
    pub ber: f64,
    pub confusion: ConfusionCounts,
}

impl EvalReport {
    pub fn from_scores(items: &[(f64, Label)]) -> Result<Self> {
        let confusion = ConfusionCounts::from_scores(items);
        Ok(EvalReport {
            auc: auc(items)?,
            auc50: auc50(items)?,
            ber: ber(&confusion)?,
            confusion,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold partition: each class is shuffled with `seed` and dealt
/// round-robin, so every fold holds `floor` or `ceil` of its share per class.
pub fn kfold_split(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Split(format!("k must be >= 2, got {k}")));
    }
    let mut pos: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i].is_positive())
        .collect();
    let mut neg: Vec<usize> = (0..labels.len())
        .filter(|&i| !labels[i].is_positive())
        .collect();
    for (name, class) in [("positive", &pos), ("negative", &neg)] {
        if class.len() < k {
            return Err(Error::Split(format!(
                "{} {name} records, fewer than k = {k}",
                class.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut fold_of = vec![0usize; labels.len()];
    for (j, &i) in pos.iter().enumerate() {
        fold_of[i] = j % k;
    }
    // continue the deal where the positives stopped to even out fold sizes
    let offset = pos.len() % k;
    for (j, &i) in neg.iter().enumerate() {
        fold_of[i] = (j + offset) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}
