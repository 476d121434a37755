//! Optimal K-pivot quicksort and a verification toolkit for its sorting
//! constants.
//!
//! The sorter partitions around K pivots using classification trees and the
//! comparison-minimizing adaptive strategy. Around it sit exact-arithmetic
//! constants (gamma_K, alpha_K, the Psi_n recursion, the K=3 expansion),
//! Monte Carlo estimators over pivot spacings, a sampler for the limit
//! distribution Z_K, empirical distance measures, and an experiment harness
//! with a brute-force permutation oracle.

pub mod error;
pub mod exact;
pub mod harness;
pub mod limitdist;
pub mod output;
pub mod rng;
pub mod sorter;
pub mod spacings;
pub mod trees;

pub use error::{Error, Result};
pub use sorter::{Sorter, SortStats, Strategy};
pub use trees::{enumerate_trees, ClassificationTree, TreeSet};
