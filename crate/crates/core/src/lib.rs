//! Adaptive logit-space activation functions.
//!
//! Every quantity flowing through a network built with this crate is a logit,
//! the log-odds of a Bernoulli probability. An n-ary activation channel owns a
//! belief table of `2^n` conditional consequent logits and marginalizes its `n`
//! antecedents one at a time, replacing each log-sum-exp with a max. The
//! resulting functions are piecewise linear, saturate onto table entries, and
//! pass full-magnitude gradients to whichever inputs they depend on.
//!
//! Module map:
//!
//! * [`logit`]: scalar logit arithmetic, the max approximation, the unary activation.
//! * [`table`]: belief tables, the sign basis that links them to sparse parameters,
//!   irrelevant-antecedent detection, and the catalog of binary operations.
//! * [`nary`]: the n-ary activation, its backward pass, and the exact
//!   probability-space oracle.
//! * [`network`]: layers, loss, ADAM with adaptive L1, training.
//! * [`logicgen`]: random truth-function ground truths and dataset synthesis.
//! * [`verify`]: the built-in verification checks used by the CLI.

pub mod error;
pub mod logicgen;
pub mod logit;
pub mod nary;
pub mod network;
pub mod rng;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use logicgen::{Dataset, GroundTruth, Split};
pub use logit::{LogitValue, UnaryRow};
pub use nary::{AilKind, NaryState};
pub use network::{
    Activation, LayerSpec, NetworkParams, NetworkSpec, TrainConfig, TrainReport, L1Mode,
};
pub use table::{BasisMatrix, BeliefTable, ParamTable};

/// Logit magnitude used to encode hard true/false data (probabilities 0.999 and 0.001).
pub const DATA_LOGIT: f64 = 6.91;

/// External logits are clamped to this magnitude before probability-space evaluation.
pub const LOGIT_CLAMP: f64 = 30.0;

/// Largest arity supported by the n-ary activation.
pub const MAX_ARITY: usize = 8;
