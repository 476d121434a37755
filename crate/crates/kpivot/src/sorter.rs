//! The K-pivot quicksort engine with pluggable partition strategies and exact
//! comparison accounting.

use rayon::prelude::*;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rng::shard_rng;
use crate::spacings::Spacings;
use crate::trees::{Child, ClassificationTree, TreeSet};
use rand::Rng;

/// Keys the sorter accepts. `as_unit` exposes the key as a real in [0,1]
/// when that makes sense; the oracle strategy and the oracle cost accounting
/// need it to compute true pivot spacings.
pub trait SortKey: Copy + PartialOrd + Send + Sync {
    fn as_unit(&self) -> Option<f64>;
}

impl SortKey for f64 {
    fn as_unit(&self) -> Option<f64> {
        (0.0..=1.0).contains(self).then_some(*self)
    }
}

impl SortKey for u64 {
    fn as_unit(&self) -> Option<f64> {
        None
    }
}

/// How the partition pass assigns classification trees to elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Re-select the cost-minimizing tree per element from the running
    /// classification counts (the optimal algorithm).
    Adaptive,
    /// Always the tree with this canonical index.
    FixedTree(usize),
    /// Use the true pivot spacings to fix t_opt for the whole pass; requires
    /// keys in [0,1].
    Oracle,
}

/// Comparison counts from one sort run, broken down by phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    pub total_comparisons: u64,
    pub partition_comparisons: u64,
    pub pivot_sort_comparisons: u64,
    pub base_case_comparisons: u64,
    /// sum_i I_i * h_opt(i) over all partition calls, where h_opt comes from
    /// the true spacings of each call's pivots. Only available when the keys
    /// embed into [0,1].
    pub oracle_classification_cost: Option<u64>,
}

/// Result of a single partition pass.
#[derive(Debug, Clone)]
pub struct Partitioned<T> {
    pub pivots: Vec<T>,
    pub sublists: Vec<Vec<T>>,
    pub classification_comparisons: u64,
    pub pivot_sort_comparisons: u64,
    pub oracle_cost: Option<u64>,
}

/// The sorting engine for a fixed pivot count.
#[derive(Debug, Clone)]
pub struct Sorter {
    k: usize,
    ts: TreeSet,
}

/// Counted insertion sort. Errors on equal keys.
fn insertion_sort<T: SortKey>(a: &mut [T], comps: &mut u64) -> Result<()> {
    for i in 1..a.len() {
        let mut j = i;
        while j > 0 {
            *comps += 1;
            if a[j - 1] > a[j] {
                a.swap(j - 1, j);
                j -= 1;
            } else if a[j - 1] < a[j] {
                break;
            } else {
                return Err(Error::DuplicateKey);
            }
        }
    }
    Ok(())
}

/// Descend `tree` comparing `key` against the sorted pivots; returns the leaf
/// index and counts one comparison per internal node visited.
fn classify<T: SortKey>(
    tree: &ClassificationTree,
    pivots: &[T],
    key: T,
    comps: &mut u64,
) -> Result<usize> {
    let mut child = Child::Node(0);
    loop {
        match child {
            Child::Leaf(i) => return Ok(i),
            Child::Node(idx) => {
                let node = tree.node(idx);
                let p = pivots[node.pivot - 1];
                *comps += 1;
                child = if key < p {
                    node.left
                } else if key > p {
                    node.right
                } else {
                    return Err(Error::DuplicateKey);
                };
            }
        }
    }
}

enum WorkItem<T> {
    Sort(Vec<T>),
    Emit(T),
}

impl Sorter {
    pub fn new(k: usize) -> Result<Self> {
        Ok(Sorter {
            k,
            ts: crate::trees::enumerate_trees(k)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tree_set(&self) -> &TreeSet {
        &self.ts
    }

    fn validate_strategy(&self, strategy: Strategy) -> Result<()> {
        if let Strategy::FixedTree(idx) = strategy {
            if idx >= self.ts.len() {
                return Err(Error::TreeIndexOutOfRange(idx, self.k, self.ts.len()));
            }
        }
        Ok(())
    }

    /// One partition pass: sort the first k elements as pivots, classify the
    /// rest in input order into S_0..S_K (relative order preserved).
    pub fn partition<T: SortKey>(&self, keys: &[T], strategy: Strategy) -> Result<Partitioned<T>> {
        self.validate_strategy(strategy)?;
        if keys.len() <= self.k {
            return Err(Error::PartitionTooSmall(keys.len(), self.k));
        }
        let k = self.k;
        let mut pivot_sort_comparisons = 0u64;
        let mut pivots = keys[..k].to_vec();
        insertion_sort(&mut pivots, &mut pivot_sort_comparisons)?;

        // True spacings of the pivots, when the key type supports it.
        let pivot_units: Option<Vec<f64>> = pivots.iter().map(|p| p.as_unit()).collect();
        let true_spacings = match &pivot_units {
            Some(u) => Spacings::from_sorted_pivots(u).ok(),
            None => None,
        };

        let fixed_tree: Option<&ClassificationTree> = match strategy {
            Strategy::Adaptive => None,
            Strategy::FixedTree(idx) => Some(self.ts.tree(idx).expect("validated")),
            Strategy::Oracle => {
                let sp = true_spacings.as_ref().ok_or(Error::OracleNeedsUnitKeys)?;
                Some(self.ts.optimal_cost_unchecked(sp.coords()).0)
            }
        };

        let mut sublists: Vec<Vec<T>> = vec![Vec::new(); k + 1];
        let mut counts = vec![0u64; k + 1];
        let mut classification_comparisons = 0u64;
        for &key in &keys[k..] {
            let tree = match fixed_tree {
                Some(t) => t,
                None => self.ts.choose_tree(&counts)?,
            };
            let leaf = classify(tree, &pivots, key, &mut classification_comparisons)?;
            counts[leaf] += 1;
            sublists[leaf].push(key);
        }

        let oracle_cost = true_spacings.as_ref().map(|sp| {
            let h_opt = self.ts.optimal_cost_unchecked(sp.coords()).0.depths();
            counts
                .iter()
                .zip(h_opt)
                .map(|(&c, &h)| c * u64::from(h))
                .sum()
        });

        Ok(Partitioned {
            pivots,
            sublists,
            classification_comparisons,
            pivot_sort_comparisons,
            oracle_cost,
        })
    }

    /// Sort `keys` and account for every key comparison exactly once.
    /// Iterative (explicit work stack), so deep recursions are safe.
    pub fn sort<T: SortKey>(&self, keys: &[T], strategy: Strategy) -> Result<(Vec<T>, SortStats)> {
        self.validate_strategy(strategy)?;
        let mut stats = SortStats {
            // Stays Some only while every partition call could compute it.
            oracle_classification_cost: Some(0),
            ..SortStats::default()
        };
        let mut out = Vec::with_capacity(keys.len());
        let mut stack: Vec<WorkItem<T>> = vec![WorkItem::Sort(keys.to_vec())];
        while let Some(item) = stack.pop() {
            match item {
                WorkItem::Emit(v) => out.push(v),
                WorkItem::Sort(mut seg) => {
                    if seg.len() <= self.k {
                        insertion_sort(&mut seg, &mut stats.base_case_comparisons)?;
                        out.extend(seg);
                        continue;
                    }
                    let part = self.partition(&seg, strategy)?;
                    stats.partition_comparisons += part.classification_comparisons;
                    stats.pivot_sort_comparisons += part.pivot_sort_comparisons;
                    stats.oracle_classification_cost = match (
                        stats.oracle_classification_cost,
                        part.oracle_cost,
                    ) {
                        (Some(a), Some(b)) => Some(a + b),
                        _ => None,
                    };
                    // Push in reverse so sublists pop left to right with the
                    // pivots interleaved: S_0 p_1 S_1 ... p_K S_K.
                    let Partitioned {
                        pivots, sublists, ..
                    } = part;
                    let mut pivot_iter = pivots.into_iter().rev();
                    let mut sub_iter = sublists.into_iter().rev();
                    stack.push(WorkItem::Sort(sub_iter.next().expect("k+1 sublists")));
                    for (p, s) in pivot_iter.by_ref().zip(sub_iter.by_ref()) {
                        stack.push(WorkItem::Emit(p));
                        stack.push(WorkItem::Sort(s));
                    }
                }
            }
        }
        stats.total_comparisons = stats.partition_comparisons
            + stats.pivot_sort_comparisons
            + stats.base_case_comparisons;
        Ok((out, stats))
    }
}

/// `n` pairwise-distinct uniform(0,1) keys; collisions at f64 resolution are
/// redrawn.
pub fn uniform_distinct_keys<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut seen: HashSet<u64> = HashSet::with_capacity(n);
    let mut keys = Vec::with_capacity(n);
    while keys.len() < n {
        let x: f64 = rng.gen();
        if x > 0.0 && x < 1.0 && seen.insert(x.to_bits()) {
            keys.push(x);
        }
    }
    keys
}

/// R independent runs: per run, derive a seed, draw n uniform keys, sort,
/// record stats. Runs are parallel; the output order is fixed by run index.
pub fn run_experiment(
    k: usize,
    n: usize,
    runs: u64,
    strategy: Strategy,
    seed: u64,
) -> Result<Vec<SortStats>> {
    let sorter = Sorter::new(k)?;
    sorter.validate_strategy(strategy)?;
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = shard_rng(seed, run);
            let keys = uniform_distinct_keys(n, &mut rng);
            let (_, stats) = sorter.sort(&keys, strategy)?;
            Ok(stats)
        })
        .collect()
}
