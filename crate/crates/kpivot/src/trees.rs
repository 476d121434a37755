//! Classification trees: the partition strategies of K-pivot quicksort.
//!
//! A classification tree is a full binary tree whose K internal nodes are the
//! pivots (in search-tree order) and whose K+1 leaves are the sublists
//! S_0..S_K. The depth of leaf S_i is the number of key comparisons needed to
//! classify an element into S_i.

use std::fmt;

use crate::error::{Error, Result};

/// Hard ceiling on the pivot count for full enumeration (Catalan(12) = 208012).
pub const MAX_K: usize = 12;

/// A child slot in the flattened tree representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    /// Index into the node table.
    Node(usize),
    /// Leaf S_i.
    Leaf(usize),
}

/// Internal node: pivot label (1-based, search-tree order) plus children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub pivot: usize,
    pub left: Child,
    pub right: Child,
}

/// One partition strategy for K pivots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationTree {
    k: usize,
    canonical_index: usize,
    /// nodes[0] is the root.
    nodes: Vec<TreeNode>,
    /// depths[i] is the depth of leaf S_i, root children at depth 1.
    depths: Vec<u32>,
}

impl ClassificationTree {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn canonical_index(&self) -> usize {
        self.canonical_index
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    /// Leaf depth vector h, length k+1.
    pub fn depths(&self) -> &[u32] {
        &self.depths
    }

    /// l_t(x) = sum_i x_i * h(i).
    pub fn cost(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k + 1,
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.depths)
            .map(|(xi, &h)| xi * f64::from(h))
            .sum())
    }

    /// Integer variant of [`cost`](Self::cost) used by the adaptive strategy.
    pub fn cost_counts(&self, x: &[u64]) -> Result<u64> {
        if x.len() != self.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k + 1,
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.depths)
            .map(|(xi, &h)| xi * u64::from(h))
            .sum())
    }
}

impl fmt::Display for ClassificationTree {
    /// Nested-parentheses debug form, e.g. `((S0)p1((S1)p2((S2)p3(S3))))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(t: &ClassificationTree, c: Child, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match c {
                Child::Leaf(i) => write!(f, "(S{i})"),
                Child::Node(n) => node(t, n, f),
            }
        }
        fn node(t: &ClassificationTree, idx: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let n = &t.nodes[idx];
            write!(f, "(")?;
            child(t, n.left, f)?;
            write!(f, "p{}", n.pivot)?;
            child(t, n.right, f)?;
            write!(f, ")")
        }
        node(self, 0, f)
    }
}

/// All classification trees for a fixed K, in canonical order.
#[derive(Debug, Clone)]
pub struct TreeSet {
    k: usize,
    trees: Vec<ClassificationTree>,
}

/// Tree shape used during enumeration, before labeling.
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

/// All shapes with `k` internal nodes, left-subtree size ascending, each side
/// recursively in the same order.
fn shapes(k: usize) -> Vec<Shape> {
    if k == 0 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left_size in 0..k {
        let right_size = k - 1 - left_size;
        for l in shapes(left_size) {
            for r in shapes(right_size) {
                out.push(Shape::Node(Box::new(clone_shape(&l)), Box::new(clone_shape(&r))));
            }
        }
    }
    out
}

fn clone_shape(s: &Shape) -> Shape {
    match s {
        Shape::Leaf => Shape::Leaf,
        Shape::Node(l, r) => Shape::Node(Box::new(clone_shape(l)), Box::new(clone_shape(r))),
    }
}

/// Label a shape: pivots 1..=k in in-order, leaves S_0..S_k left to right.
fn label(shape: &Shape, k: usize, canonical_index: usize) -> ClassificationTree {
    let mut nodes = Vec::with_capacity(k);
    let mut depths = vec![0u32; k + 1];
    let mut next_pivot = 1usize;
    let mut next_leaf = 0usize;

    fn build(
        s: &Shape,
        depth: u32,
        nodes: &mut Vec<TreeNode>,
        depths: &mut [u32],
        next_pivot: &mut usize,
        next_leaf: &mut usize,
    ) -> Child {
        match s {
            Shape::Leaf => {
                let i = *next_leaf;
                *next_leaf += 1;
                depths[i] = depth;
                Child::Leaf(i)
            }
            Shape::Node(l, r) => {
                let idx = nodes.len();
                nodes.push(TreeNode {
                    pivot: 0,
                    left: Child::Leaf(usize::MAX),
                    right: Child::Leaf(usize::MAX),
                });
                let left = build(l, depth + 1, nodes, depths, next_pivot, next_leaf);
                let pivot = *next_pivot;
                *next_pivot += 1;
                let right = build(r, depth + 1, nodes, depths, next_pivot, next_leaf);
                nodes[idx] = TreeNode { pivot, left, right };
                Child::Node(idx)
            }
        }
    }

    build(shape, 0, &mut nodes, &mut depths, &mut next_pivot, &mut next_leaf);
    ClassificationTree {
        k,
        canonical_index,
        nodes,
        depths,
    }
}

/// Enumerate all classification trees for `k` pivots in canonical order.
pub fn enumerate_trees(k: usize) -> Result<TreeSet> {
    if k < 1 || k > MAX_K {
        return Err(Error::KOutOfRange(k, 1, MAX_K));
    }
    let trees = shapes(k)
        .iter()
        .enumerate()
        .map(|(i, s)| label(s, k, i))
        .collect();
    Ok(TreeSet { k, trees })
}

impl TreeSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn trees(&self) -> &[ClassificationTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn tree(&self, idx: usize) -> Option<&ClassificationTree> {
        self.trees.get(idx)
    }

    /// The tree minimizing l_t(counts + 1); ties go to the smallest canonical
    /// index.
    pub fn choose_tree(&self, counts: &[u64]) -> Result<&ClassificationTree> {
        if counts.len() != self.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k + 1,
                got: counts.len(),
            });
        }
        let mut best = &self.trees[0];
        let mut best_cost = u64::MAX;
        let mut bumped = [0u64; MAX_K + 1];
        for (b, &c) in bumped.iter_mut().zip(counts) {
            *b = c + 1;
        }
        let bumped = &bumped[..counts.len()];
        for t in &self.trees {
            let cost: u64 = bumped
                .iter()
                .zip(t.depths())
                .map(|(x, &h)| x * u64::from(h))
                .sum();
            if cost < best_cost {
                best_cost = cost;
                best = t;
            }
        }
        Ok(best)
    }

    /// Minimize l_t over all trees at a point on the simplex; returns the
    /// minimizing tree (smallest index on ties) and l_opt(x).
    pub fn optimal_cost(&self, x: &[f64]) -> Result<(&ClassificationTree, f64)> {
        if x.len() != self.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k + 1,
                got: x.len(),
            });
        }
        if x.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::NotOnSimplex("negative or non-finite coordinate".into()));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotOnSimplex(format!("coordinates sum to {sum}")));
        }
        Ok(self.optimal_cost_unchecked(x))
    }

    /// Same as [`optimal_cost`](Self::optimal_cost) without the simplex check;
    /// inner loop of the Monte Carlo estimators.
    pub fn optimal_cost_unchecked(&self, x: &[f64]) -> (&ClassificationTree, f64) {
        let mut best = &self.trees[0];
        let mut best_cost = f64::INFINITY;
        for t in &self.trees {
            let cost: f64 = x
                .iter()
                .zip(t.depths())
                .map(|(xi, &h)| xi * f64::from(h))
                .sum();
            if cost < best_cost {
                best_cost = cost;
                best = t;
            }
        }
        (best, best_cost)
    }

    /// Asymptotic-cone membership: is `t` cost-minimal at `x`?
    pub fn in_cone(&self, t: &ClassificationTree, x: &[f64]) -> Result<bool> {
        let c = t.cost(x)?;
        for other in &self.trees {
            if c > other.cost(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALAN: [usize; 8] = [1, 2, 5, 14, 42, 132, 429, 1430];

    #[test]
    fn census_matches_catalan() {
        for (k, &expected) in CATALAN.iter().enumerate() {
            let ts = enumerate_trees(k + 1).unwrap();
            assert_eq!(ts.len(), expected, "k={}", k + 1);
        }
    }

    #[test]
    fn k_bounds_rejected() {
        assert!(enumerate_trees(0).is_err());
        assert!(enumerate_trees(13).is_err());
    }

    #[test]
    fn k1_single_tree() {
        let ts = enumerate_trees(1).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts.tree(0).unwrap().depths(), &[1, 1]);
    }

    /// Pins the K=3 canonical order (left-subtree size ascending); the unit
    /// tests rely on this fixed t_1..t_5 ordering, the library does not.
    #[test]
    fn k3_depth_vectors() {
        let ts = enumerate_trees(3).unwrap();
        let depths: Vec<&[u32]> = ts.trees().iter().map(|t| t.depths()).collect();
        assert_eq!(
            depths,
            vec![
                &[1, 2, 3, 3][..],
                &[1, 3, 3, 2][..],
                &[2, 2, 2, 2][..],
                &[2, 3, 3, 1][..],
                &[3, 3, 2, 1][..],
            ]
        );
    }

    #[test]
    fn kraft_equality_holds() {
        for k in 1..=8 {
            for t in enumerate_trees(k).unwrap().trees() {
                let s: f64 = t.depths().iter().map(|&h| 0.5f64.powi(h as i32)).sum();
                assert!((s - 1.0).abs() < 1e-12, "k={k} idx={}", t.canonical_index());
            }
        }
    }

    #[test]
    fn cost_examples() {
        let ts = enumerate_trees(3).unwrap();
        let t3 = ts.tree(2).unwrap();
        assert_eq!(t3.cost(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 8.0);
        let t1 = ts.tree(0).unwrap();
        assert_eq!(t1.cost(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((t1.cost(&[0.4, 0.3, 0.2, 0.1]).unwrap() - 1.9).abs() < 1e-12);
        assert!(t1.cost(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn choose_tree_tie_goes_to_smallest_index() {
        let ts = enumerate_trees(2).unwrap();
        // Both K=2 trees cost 5 on (1,1,1).
        let t = ts.choose_tree(&[0, 0, 0]).unwrap();
        assert_eq!(t.canonical_index(), 0);
    }

    #[test]
    fn choose_tree_k3_skewed_counts() {
        let ts = enumerate_trees(3).unwrap();
        // Costs on (10,1,1,1): 18, 18, 26, 27, 36 -> index 0 wins the tie.
        let t = ts.choose_tree(&[9, 0, 0, 0]).unwrap();
        assert_eq!(t.canonical_index(), 0);
    }

    #[test]
    fn choose_tree_k1_unique() {
        let ts = enumerate_trees(1).unwrap();
        assert_eq!(ts.choose_tree(&[5, 17]).unwrap().canonical_index(), 0);
    }

    #[test]
    fn optimal_cost_examples() {
        let ts = enumerate_trees(3).unwrap();
        let (t, c) = ts.optimal_cost(&[0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_eq!(t.canonical_index(), 2);
        assert!((c - 2.0).abs() < 1e-12);

        let (t, c) = ts.optimal_cost(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(t.canonical_index(), 0);
        assert!((c - 1.9).abs() < 1e-12);

        let ts1 = enumerate_trees(1).unwrap();
        let (_, c) = ts1.optimal_cost(&[0.7, 0.3]).unwrap();
        assert_eq!(c, 1.0);

        assert!(ts.optimal_cost(&[0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(ts.optimal_cost(&[-0.1, 0.5, 0.3, 0.3]).is_err());
    }

    #[test]
    fn cone_examples() {
        let ts = enumerate_trees(3).unwrap();
        let x = [0.4, 0.3, 0.2, 0.1];
        assert!(ts.in_cone(ts.tree(0).unwrap(), &x).unwrap());
        assert!(!ts.in_cone(ts.tree(4).unwrap(), &x).unwrap());
        // Zero vector lies in every cone.
        for t in ts.trees() {
            assert!(ts.in_cone(t, &[0.0; 4]).unwrap());
        }
    }

    #[test]
    fn display_nested_parentheses() {
        let ts = enumerate_trees(3).unwrap();
        assert_eq!(
            ts.tree(0).unwrap().to_string(),
            "((S0)p1((S1)p2((S2)p3(S3))))"
        );
        assert_eq!(
            ts.tree(2).unwrap().to_string(),
            "(((S0)p1(S1))p2((S2)p3(S3)))"
        );
    }

    #[test]
    fn inorder_pivot_labels_are_sorted() {
        for k in 1..=6 {
            for t in enumerate_trees(k).unwrap().trees() {
                // In-order traversal must visit pivots 1..=k ascending and
                // leaves S_0..S_k left to right.
                let mut pivots = Vec::new();
                let mut leaves = Vec::new();
                fn walk(
                    t: &ClassificationTree,
                    c: Child,
                    pivots: &mut Vec<usize>,
                    leaves: &mut Vec<usize>,
                ) {
                    match c {
                        Child::Leaf(i) => leaves.push(i),
                        Child::Node(n) => {
                            let node = t.node(n);
                            walk(t, node.left, pivots, leaves);
                            pivots.push(node.pivot);
                            walk(t, node.right, pivots, leaves);
                        }
                    }
                }
                walk(t, Child::Node(0), &mut pivots, &mut leaves);
                assert_eq!(pivots, (1..=k).collect::<Vec<_>>());
                assert_eq!(leaves, (0..=k).collect::<Vec<_>>());
            }
        }
    }
}
