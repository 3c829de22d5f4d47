//! Hierarchical-clustering quality toolkit: pairwise similarity matrices,
//! leaf hierarchies, the Moseley-Wang revenue objective, and a brute-force
//! optimal-hierarchy oracle for small instances.
//!
//! Revenue of a hierarchy T over n items under weights W is
//! Σ_{i<j} w_ij · (n − |leaves(lca(i, j))|): similar pairs should meet low
//! in the tree, where their lowest common ancestor covers few leaves.

pub mod otd;

use crate::embed::{cosine_similarity, Embedding};
use crate::error::{Error, Result};

/// Symmetric nonnegative pairwise weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    w: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(w: Vec<Vec<f64>>) -> Result<Self> {
        let n = w.len();
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "w[{i}][{j}] = {value} is not a nonnegative real"
                    )));
                }
                if i == j && value != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "diagonal w[{i}][{i}] must be 0, got {value}"
                    )));
                }
                if w[j][i] != value {
                    return Err(Error::InvalidArgument(format!(
                        "w[{i}][{j}] = {value} but w[{j}][{i}] = {}",
                        w[j][i]
                    )));
                }
            }
        }
        Ok(SimilarityMatrix { n, w })
    }

    /// Weights from vectors: w_ij = max(0, cosine(e_i, e_j)).
    pub fn from_embeddings(embeddings: &[Embedding]) -> Result<Self> {
        let n = embeddings.len();
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let value = cosine_similarity(&embeddings[i], &embeddings[j])?.max(0.0);
                w[i][j] = value;
                w[j][i] = value;
            }
        }
        SimilarityMatrix::new(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i][j]
    }
}

/// A rooted hierarchy over leaf indices; internal nodes have ≥ 2 children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hierarchy {
    Leaf(usize),
    Internal(Vec<Hierarchy>),
}

impl Hierarchy {
    /// Binary merge of two subtrees.
    pub fn pair(a: Hierarchy, b: Hierarchy) -> Hierarchy {
        Hierarchy::Internal(vec![a, b])
    }

    /// Leaf indices in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Hierarchy::Leaf(i) => out.push(*i),
            Hierarchy::Internal(children) => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Hierarchy::Leaf(_) => 1,
            Hierarchy::Internal(children) => children.iter().map(Hierarchy::n_leaves).sum(),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            Hierarchy::Leaf(_) => 1,
            Hierarchy::Internal(children) => {
                1 + children.iter().map(Hierarchy::node_count).sum::<usize>()
            }
        }
    }

    /// Checks that leaves are exactly {0..n−1}, each once, and every
    /// internal node has at least two children.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.check_arity()?;
        let mut seen = vec![false; n];
        for leaf in self.leaves() {
            if leaf >= n {
                return Err(Error::InvalidArgument(format!(
                    "leaf {leaf} out of range for n = {n}"
                )));
            }
            if seen[leaf] {
                return Err(Error::InvalidArgument(format!("leaf {leaf} appears twice")));
            }
            seen[leaf] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("leaf {missing} is missing")));
        }
        Ok(())
    }

    fn check_arity(&self) -> Result<()> {
        if let Hierarchy::Internal(children) = self {
            if children.len() < 2 {
                return Err(Error::InvalidArgument(
                    "internal node with fewer than 2 children".into(),
                ));
            }
            for child in children {
                child.check_arity()?;
            }
        }
        Ok(())
    }
}

/// Moseley-Wang revenue of `tree` under `w`.
pub fn moseley_wang_revenue(tree: &Hierarchy, w: &SimilarityMatrix) -> Result<f64> {
    tree.validate(w.n())?;
    let mut total = 0.0;
    accumulate_revenue(tree, w, &mut total);
    Ok(total)
}

/// Returns the subtree's leaves while adding every pair whose lca is in
/// the subtree. Pairs split across distinct children meet exactly here.
fn accumulate_revenue(tree: &Hierarchy, w: &SimilarityMatrix, total: &mut f64) -> Vec<usize> {
    match tree {
        Hierarchy::Leaf(i) => vec![*i],
        Hierarchy::Internal(children) => {
            let per_child: Vec<Vec<usize>> = children
                .iter()
                .map(|child| accumulate_revenue(child, w, total))
                .collect();
            let size: usize = per_child.iter().map(Vec::len).sum();
            let coefficient = (w.n() - size) as f64;
            for (a, left) in per_child.iter().enumerate() {
                for right in &per_child[a + 1..] {
                    for &i in left {
                        for &j in right {
                            *total += w.get(i, j) * coefficient;
                        }
                    }
                }
            }
            per_child.into_iter().flatten().collect()
        }
    }
}

/// Replaces the `position`-th node in preorder with a parent over that
/// node and a fresh leaf.
fn graft_at_preorder(tree: &Hierarchy, position: usize, new_leaf: usize) -> Hierarchy {
    fn rec(tree: &Hierarchy, position: &mut usize, new_leaf: usize) -> Option<Hierarchy> {
        if *position == 0 {
            return Some(Hierarchy::pair(tree.clone(), Hierarchy::Leaf(new_leaf)));
        }
        *position -= 1;
        if let Hierarchy::Internal(children) = tree {
            for (index, child) in children.iter().enumerate() {
                if let Some(replaced) = rec(child, position, new_leaf) {
                    let mut grafted = children.clone();
                    grafted[index] = replaced;
                    return Some(Hierarchy::Internal(grafted));
                }
            }
        }
        None
    }
    let mut position = position;
    rec(tree, &mut position, new_leaf).expect("position within node count")
}

/// Visits every rooted binary hierarchy over leaves 0..n−1 exactly once,
/// in a fixed canonical order. There are (2n−3)!! of them.
///
/// Enumeration grows trees one leaf at a time: leaf m is grafted at every
/// preorder position of every tree over 0..m−1.
pub fn for_each_binary_hierarchy<F: FnMut(&Hierarchy)>(n: usize, f: &mut F) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    fn rec(current: Hierarchy, next_leaf: usize, n: usize, f: &mut impl FnMut(&Hierarchy)) {
        if next_leaf == n {
            f(&current);
            return;
        }
        for position in 0..current.node_count() {
            rec(
                graft_at_preorder(&current, position, next_leaf),
                next_leaf + 1,
                n,
                f,
            );
        }
    }
    rec(Hierarchy::Leaf(0), 1, n, f);
    Ok(())
}

/// How many leaves the brute-force oracle will enumerate for.
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Exhaustive argmax of revenue over all binary hierarchies. Ties keep the
/// first tree in enumeration order.
pub fn brute_force_optimal(w: &SimilarityMatrix) -> Result<(Hierarchy, f64)> {
    let n = w.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty similarity matrix".into()));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge(format!(
            "brute-force enumeration supports n ≤ {BRUTE_FORCE_MAX_N}, got {n}; \
             (2n−3)!! trees would be required"
        )));
    }
    if n == 1 {
        return Ok((Hierarchy::Leaf(0), 0.0));
    }
    let mut best: Option<(Hierarchy, f64)> = None;
    for_each_binary_hierarchy(n, &mut |tree| {
        let revenue =
            moseley_wang_revenue(tree, w).expect("enumerated trees cover 0..n-1 exactly");
        let better = match &best {
            None => true,
            Some((_, incumbent)) => revenue > *incumbent,
        };
        if better {
            best = Some((tree.clone(), revenue));
        }
    })?;
    Ok(best.expect("enumeration yields at least one tree"))
}
