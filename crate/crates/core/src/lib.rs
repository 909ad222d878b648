//! Finite, exact experiments on private learning, representation dimension
//! and one-way communication.
//!
//! Everything is small enough to enumerate, so probabilities are exact
//! rationals wherever a closed form exists and Monte-Carlo estimates always
//! carry Clopper-Pearson intervals. Random choices go through
//! [`stats::rng_stream`], so a seed fixes every run.
//!
//! Layout, bottom-up:
//!
//! - [`concepts`]: built-in classes (points, thresholds, lines over `Z_p^2`,
//!   boxes, halfspaces) as bit tables, VC dimension, disagreement.
//! - [`mistaketree`]: Littlestone dimension with witness trees, the inductive
//!   halfspace tree and the augmented-index embedding.
//! - [`commsim`]: one-way protocols with exact error evaluation, the optimal
//!   distributional protocol by subset search, amplification and Newman.
//! - [`repdim`]: deterministic and probabilistic representations, their
//!   conversions to and from protocols, covers and packings.
//! - [`infomath`]: entropies, divergences and the min-entropy tail.
//! - [`dplearn`]: exponential mechanism, the private line learner, the
//!   known-distribution and label-private learners, PAC evaluation.
//! - [`dpaudit`]: exact and statistical privacy audits.
//! - [`cli`]: the `dpcc` command line.
//!
//! Runnable examples live in `examples/`: `concept_dimensions`,
//! `mistake_trees`, `halfspace_tree`, `one_way_protocols`,
//! `representation_roundtrip`, `covers_and_packings`, `information_theory`,
//! `line_learner`, `label_private` and `privacy_audit`.

pub mod bits;
pub mod cli;
pub mod commsim;
pub mod concepts;
pub mod distribution;
pub mod dpaudit;
pub mod dplearn;
pub mod error;
pub mod infomath;
pub mod lp;
pub mod mistaketree;
pub mod rational;
pub mod repdim;
pub mod stats;
