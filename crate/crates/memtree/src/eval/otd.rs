//! Online top-down clustering reference, the β-well-separation check, and
//! the revenue-bound harness comparing the reference, the memory tree in
//! mean-embedding mode, and the brute-force optimum.
//!
//! The reference rule at subtree S for a new item x: if the mean
//! similarity between S's leaves and x is at most the mean pairwise
//! similarity within S, x becomes S's sibling; otherwise descend into the
//! child most similar to x. Under β-well-separation this achieves at least
//! β/3 of the optimal Moseley-Wang revenue.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embed::{Embedding, FixtureEmbedder};
use crate::error::{Error, Result};
use crate::eval::{brute_force_optimal, moseley_wang_revenue, Hierarchy, SimilarityMatrix};
use crate::insert::{insert, AggregationBackend, ThresholdPolicy};
use crate::tree::{MemoryTree, NodeId};

/// Mean pairwise weight within `leaves`; `None` below two leaves.
pub fn mean_within(w: &SimilarityMatrix, leaves: &[usize]) -> Option<f64> {
    if leaves.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in leaves.iter().enumerate() {
        for &j in &leaves[a + 1..] {
            sum += w.get(i, j);
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

/// Mean weight between `leaves` and the single item `x`.
pub fn mean_cross(w: &SimilarityMatrix, leaves: &[usize], x: usize) -> f64 {
    leaves.iter().map(|&i| w.get(i, x)).sum::<f64>() / leaves.len() as f64
}

fn check_new_item(tree: &Hierarchy, x: usize, w: &SimilarityMatrix) -> Result<()> {
    if x >= w.n() {
        return Err(Error::InvalidArgument(format!(
            "item {x} out of range for n = {}",
            w.n()
        )));
    }
    if tree.leaves().contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "item {x} is already a leaf of the hierarchy"
        )));
    }
    Ok(())
}

/// One step of the online top-down reference: inserts `x` into `tree`.
pub fn otd_insert(tree: &Hierarchy, x: usize, w: &SimilarityMatrix) -> Result<Hierarchy> {
    check_new_item(tree, x, w)?;
    Ok(otd_descend(tree, x, w))
}

fn otd_descend(tree: &Hierarchy, x: usize, w: &SimilarityMatrix) -> Hierarchy {
    let leaves = tree.leaves();
    // A single leaf always pairs with the newcomer.
    let Some(intra) = mean_within(w, &leaves) else {
        return Hierarchy::pair(tree.clone(), Hierarchy::Leaf(x));
    };
    if mean_cross(w, &leaves, x) <= intra {
        return Hierarchy::pair(tree.clone(), Hierarchy::Leaf(x));
    }
    match tree {
        Hierarchy::Leaf(_) => unreachable!("single leaf has no intra mean"),
        Hierarchy::Internal(children) => {
            // Descend into the most x-similar child; first child wins ties.
            let mut best = 0;
            let mut best_cross = f64::NEG_INFINITY;
            for (index, child) in children.iter().enumerate() {
                let cross = mean_cross(w, &child.leaves(), x);
                if cross > best_cross {
                    best_cross = cross;
                    best = index;
                }
            }
            let mut grafted = children.clone();
            grafted[best] = otd_descend(&grafted[best], x, w);
            Hierarchy::Internal(grafted)
        }
    }
}

/// Folds [`otd_insert`] over `stream`, starting from its first item.
pub fn build_otd(stream: &[usize], w: &SimilarityMatrix) -> Result<Hierarchy> {
    let (&first, rest) = stream
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty stream".into()))?;
    if first >= w.n() {
        return Err(Error::InvalidArgument(format!(
            "item {first} out of range for n = {}",
            w.n()
        )));
    }
    let mut tree = Hierarchy::Leaf(first);
    for &x in rest {
        tree = otd_insert(&tree, x, w)?;
    }
    Ok(tree)
}

/// One failure of the β-well-separation condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationViolation {
    /// Leaves of the subtree S where the new item was more attractive
    /// than S's own cohesion.
    pub subtree: Vec<usize>,
    /// Leaves of the child A that x likes no more than some sibling.
    pub child: Vec<usize>,
    /// w̄(A): mean pairwise weight within A.
    pub child_cohesion: f64,
    /// w̄(A, x): mean weight between A's leaves and x.
    pub child_attraction: f64,
}

/// Checks β-well-separation of `tree` against the incoming item `x`.
///
/// For every subtree S with w̄(S, x) > w̄(S) and every pair of distinct
/// children A, B with w̄(A, x) ≤ w̄(B, x), the condition requires
/// w̄(A) ≥ β·w̄(A, x). Single-leaf children are vacuous (no pairs within).
pub fn check_beta_separation(
    tree: &Hierarchy,
    w: &SimilarityMatrix,
    x: usize,
    beta: f64,
) -> Result<Vec<SeparationViolation>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be in (0, 1], got {beta}"
        )));
    }
    check_new_item(tree, x, w)?;
    let mut violations = Vec::new();
    separation_walk(tree, w, x, beta, &mut violations);
    Ok(violations)
}

fn separation_walk(
    tree: &Hierarchy,
    w: &SimilarityMatrix,
    x: usize,
    beta: f64,
    violations: &mut Vec<SeparationViolation>,
) {
    let Hierarchy::Internal(children) = tree else {
        return;
    };
    let leaves = tree.leaves();
    let premise = mean_within(w, &leaves)
        .is_some_and(|intra| mean_cross(w, &leaves, x) > intra);
    if premise {
        let child_leaves: Vec<Vec<usize>> = children.iter().map(Hierarchy::leaves).collect();
        let crosses: Vec<f64> = child_leaves
            .iter()
            .map(|leaves| mean_cross(w, leaves, x))
            .collect();
        for (a, a_leaves) in child_leaves.iter().enumerate() {
            let Some(cohesion) = mean_within(w, a_leaves) else {
                continue;
            };
            let dominated = crosses
                .iter()
                .enumerate()
                .any(|(b, &cross_b)| b != a && crosses[a] <= cross_b);
            if dominated && cohesion < beta * crosses[a] {
                violations.push(SeparationViolation {
                    subtree: leaves.clone(),
                    child: a_leaves.clone(),
                    child_cohesion: cohesion,
                    child_attraction: crosses[a],
                });
            }
        }
    }
    for child in children {
        separation_walk(child, w, x, beta, violations);
    }
}

/// The separation level implied by a threshold growth rate: β = e^{−λ}.
pub fn beta_from_lambda(lambda: f64) -> f64 {
    (-lambda).exp()
}

/// Content label for item `i` when tree insertion drives the harness.
pub fn item_label(i: usize) -> String {
    format!("item-{i}")
}

fn parse_item_label(content: &str) -> Option<usize> {
    content.strip_prefix("item-")?.parse().ok()
}

/// Reads a memory tree as a leaf hierarchy: tree leaves map to item
/// indices via `leaf_index`, single-child nodes (including the structural
/// root) collapse away.
pub fn tree_as_hierarchy(
    tree: &MemoryTree,
    leaf_index: &dyn Fn(&str) -> Option<usize>,
) -> Result<Hierarchy> {
    fn convert(
        tree: &MemoryTree,
        id: NodeId,
        leaf_index: &dyn Fn(&str) -> Option<usize>,
    ) -> Result<Hierarchy> {
        let node = tree.node(id)?;
        match node.children() {
            [] => {
                let content = node.content().ok_or_else(|| {
                    Error::InvalidState("tree has no content to build a hierarchy from".into())
                })?;
                let index = leaf_index(content).ok_or_else(|| {
                    Error::InvalidArgument(format!("leaf content {content:?} maps to no item"))
                })?;
                Ok(Hierarchy::Leaf(index))
            }
            [only] => convert(tree, *only, leaf_index),
            many => Ok(Hierarchy::Internal(
                many.iter()
                    .map(|&child| convert(tree, child, leaf_index))
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }
    convert(tree, tree.root(), leaf_index)
}

/// A seeded clustered instance: noisy unit vectors around well-separated
/// centers, plus a shuffled insertion order.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub embeddings: Vec<Embedding>,
    /// Insertion order over item indices.
    pub stream: Vec<usize>,
    /// Planted cluster of each item.
    pub assignment: Vec<usize>,
    pub n_clusters: usize,
}

/// Embedding dimension used by planted instances.
pub const PLANTED_DIMENSION: usize = 8;
const PLANTED_NOISE: f64 = 0.1;

/// Generates a planted instance of `n` items, deterministic in `seed`.
pub fn generate_planted_instance(n: usize, seed: u64) -> Result<PlantedInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "planted instance needs at least 2 items, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_clusters = (n / 2).clamp(2, 3);
    let n_clusters = rng.random_range(2..=max_clusters);
    let mut embeddings = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let cluster = i % n_clusters;
        let mut v = vec![0.0; PLANTED_DIMENSION];
        v[cluster] = 1.0;
        for value in &mut v {
            *value += PLANTED_NOISE * rng.random_range(-1.0..1.0);
        }
        embeddings.push(Embedding::new(v)?.normalized()?);
        assignment.push(cluster);
    }
    let mut stream: Vec<usize> = (0..n).collect();
    stream.shuffle(&mut rng);
    Ok(PlantedInstance {
        embeddings,
        stream,
        assignment,
        n_clusters,
    })
}

/// Revenue-bound harness outcome for one stream.
#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub n: usize,
    pub otd_revenue: f64,
    pub memtree_revenue: f64,
    pub optimal_revenue: f64,
    /// β the reference run was checked against.
    pub beta: f64,
    /// β = e^{−λ} the tree run was checked against.
    pub memtree_beta: f64,
    pub otd_separation_ok: bool,
    pub memtree_separation_ok: bool,
    /// Whether Rev ≥ (β/3)·Rev(T*); only meaningful (Some) when every
    /// insertion passed the separation check.
    pub otd_bound_holds: Option<bool>,
    pub memtree_bound_holds: Option<bool>,
}

/// Runs the reference algorithm and the memory tree (mean-embedding mode)
/// over the same stream, checking each insertion against β-well-separation
/// and both final revenues against the β/3 bound.
///
/// Weights are w_ij = max(0, cosine) over `embeddings`; the optimum comes
/// from brute-force enumeration, so the item count is capped accordingly.
pub fn theorem1_harness(
    embeddings: &[Embedding],
    stream: &[usize],
    beta: f64,
    policy: &ThresholdPolicy,
) -> Result<HarnessReport> {
    let n = embeddings.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 items".into()));
    }
    let mut seen = vec![false; n];
    for &x in stream {
        if x >= n || seen[x] {
            return Err(Error::InvalidArgument(
                "stream must be a permutation of 0..n".into(),
            ));
        }
        seen[x] = true;
    }
    if stream.len() != n {
        return Err(Error::InvalidArgument(
            "stream must be a permutation of 0..n".into(),
        ));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be in (0, 1], got {beta}"
        )));
    }
    policy.validate()?;

    let w = SimilarityMatrix::from_embeddings(embeddings)?;
    let (_, optimal_revenue) = brute_force_optimal(&w)?;

    // Reference run: check separation against the pre-insertion hierarchy.
    let mut reference = Hierarchy::Leaf(stream[0]);
    let mut otd_separation_ok = true;
    for &x in &stream[1..] {
        if !check_beta_separation(&reference, &w, x, beta)?.is_empty() {
            otd_separation_ok = false;
        }
        reference = otd_insert(&reference, x, &w)?;
    }
    let otd_revenue = moseley_wang_revenue(&reference, &w)?;

    // Tree run in mean-embedding mode over the same stream.
    let memtree_beta = beta_from_lambda(policy.lambda);
    let dimension = embeddings[0].dimension();
    let mut fixtures = FixtureEmbedder::new(dimension);
    for (i, embedding) in embeddings.iter().enumerate() {
        fixtures.pin(item_label(i), embedding.clone())?;
    }
    let mut tree = MemoryTree::new(dimension)?;
    let mut memtree_separation_ok = true;
    for (position, &x) in stream.iter().enumerate() {
        if position > 0 {
            let hierarchy = tree_as_hierarchy(&tree, &parse_item_label)?;
            if !check_beta_separation(&hierarchy, &w, x, memtree_beta)?.is_empty() {
                memtree_separation_ok = false;
            }
        }
        insert(
            &mut tree,
            &item_label(x),
            &fixtures,
            &AggregationBackend::MeanEmbedding,
            policy,
        )?;
    }
    let memtree_revenue =
        moseley_wang_revenue(&tree_as_hierarchy(&tree, &parse_item_label)?, &w)?;

    let bound = beta / 3.0 * optimal_revenue;
    let memtree_bound = memtree_beta / 3.0 * optimal_revenue;
    Ok(HarnessReport {
        n,
        otd_revenue,
        memtree_revenue,
        optimal_revenue,
        beta,
        memtree_beta,
        otd_separation_ok,
        memtree_separation_ok,
        otd_bound_holds: otd_separation_ok.then_some(otd_revenue >= bound),
        memtree_bound_holds: memtree_separation_ok.then_some(memtree_revenue >= memtree_bound),
    })
}
