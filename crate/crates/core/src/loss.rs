//! Margin losses and the elastic-net penalty.
//!
//! A loss is a function of the margin `m = y * score` only, non-increasing in
//! `m`, with `loss'(m) <= 0`. Other margin losses (exponential, Gaussian) fit
//! the same contract and would be added as new [`LossKind`] variants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LossKind {
    /// Binomial log-likelihood, `log(1 + e^{-m})`.
    #[default]
    Logistic,
    /// `max(1 - m, 0)^2`, the L2-SVM loss.
    SquaredHinge,
}

impl LossKind {
    pub fn value(self, m: f64) -> f64 {
        match self {
            LossKind::Logistic => {
                if m <= 0.0 {
                    -m + m.exp().ln_1p()
                } else {
                    (-m).exp().ln_1p()
                }
            }
            LossKind::SquaredHinge => {
                let slack = (1.0 - m).max(0.0);
                slack * slack
            }
        }
    }

    /// d loss / d m. Never positive.
    pub fn derivative(self, m: f64) -> f64 {
        match self {
            LossKind::Logistic => {
                // -1 / (1 + e^m), written to stay finite for large |m|.
                if m >= 0.0 {
                    let e = (-m).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + m.exp())
                }
            }
            LossKind::SquaredHinge => {
                if m < 1.0 {
                    2.0 * (m - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::SquaredHinge => "squared_hinge",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "lr" | "logreg" | "0" => Ok(LossKind::Logistic),
            "squared_hinge" | "squared-hinge" | "svm" | "l2svm" | "2" => Ok(LossKind::SquaredHinge),
            other => Err(Error::InvalidConfig(format!(
                "unknown objective {other:?} (expected logistic or svm)"
            ))),
        }
    }
}

/// `C * (alpha * |b|_1 + (1 - alpha) * 0.5 * |b|_2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticNet {
    c: f64,
    alpha: f64,
}

impl Default for ElasticNet {
    fn default() -> Self {
        ElasticNet { c: 1.0, alpha: 0.5 }
    }
}

impl ElasticNet {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidConfig(format!("C must be >= 0, got {c}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(ElasticNet { c, alpha })
    }

    pub fn none() -> Self {
        ElasticNet { c: 0.0, alpha: 0.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Unscaled regularizer (without the C factor).
    pub fn regularizer<I>(&self, weights: I) -> f64
    where
        I: IntoIterator<Item = f64>,
    {
        let (l1, l2) = weights
            .into_iter()
            .fold((0.0, 0.0), |(l1, l2), b| (l1 + b.abs(), l2 + b * b));
        self.alpha * l1 + (1.0 - self.alpha) * 0.5 * l2
    }

    /// Penalty contributed by a single coordinate, including C.
    pub fn coordinate_penalty(&self, beta: f64) -> f64 {
        self.c * (self.alpha * beta.abs() + (1.0 - self.alpha) * 0.5 * beta * beta)
    }

    /// Penalized partial derivative for coordinate `beta` given the loss part
    /// `raw`. At `beta == 0` the one-sided derivative of smaller magnitude is
    /// used, which is the soft-threshold of `raw` by `C * alpha`.
    pub fn slope(&self, beta: f64, raw: f64) -> f64 {
        if self.c == 0.0 {
            return raw;
        }
        if beta != 0.0 {
            raw + self.c * (self.alpha * beta.signum() + (1.0 - self.alpha) * beta)
        } else {
            let shrunk = (raw.abs() - self.c * self.alpha).max(0.0);
            if shrunk == 0.0 {
                0.0
            } else {
                raw.signum() * shrunk
            }
        }
    }
}

/// Total objective: summed loss over margins plus `C * R(weights)`.
pub fn total_objective<W>(kind: LossKind, penalty: &ElasticNet, margins: &[f64], weights: W) -> f64
where
    W: IntoIterator<Item = f64>,
{
    let loss: f64 = margins.iter().map(|&m| kind.value(m)).sum();
    loss + penalty.c() * penalty.regularizer(weights)
}
