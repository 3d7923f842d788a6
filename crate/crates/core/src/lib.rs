//! Discriminative sequence classification in the space of all subsequences.
//!
//! A linear model over binary "contains pattern" features, where a pattern is
//! any contiguous run of tokens with optional single-token wildcards, is
//! trained by coordinate descent. Each iteration picks the pattern with the
//! steepest penalized gradient through a branch-and-bound search over prefix
//! expansions, so the feature space is never materialized.
//!
//! ```
//! use seqlearn::{Corpus, Label, TokenMode, TrainerConfig, train};
//!
//! let corpus = Corpus::from_texts(
//!     [(Label::Positive, "AGYCA"), (Label::Positive, "GYCTT"),
//!      (Label::Negative, "ATTCA"), (Label::Negative, "CCATG")],
//!     TokenMode::Char,
//! ).unwrap();
//! let cfg = TrainerConfig { verbosity: 0, ..TrainerConfig::default() };
//! let model = train(&corpus, &cfg).unwrap().model;
//! assert!(model.score("TTGYCTT").unwrap() > model.score("TTTTTTT").unwrap());
//! ```

pub mod corpus;
pub mod cv;
pub mod error;
pub mod eval;
pub mod loss;
pub mod model;
pub mod pattern;
pub mod search;
pub mod synth;
pub mod trainer;

pub use corpus::{tokenize, Corpus, Label, Posting, TokenId, TokenMode, Vocabulary};
pub use error::{Error, Result};
pub use eval::{auc, auc50, ber, kfold_split, ConfusionCounts, EvalReport};
pub use loss::{ElasticNet, LossKind};
pub use model::{Model, Prediction};
pub use pattern::{Elem, Pattern};
pub use search::{
    find_best_feature, Execution, SearchConfig, SearchOutcome, SearchStats, Traversal,
};
pub use trainer::{train, TrainOutcome, TrainerConfig};
