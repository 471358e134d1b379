//! The exchange complex of a tree: a small graph whose independent loops
//! count the essentially different ways two points can swap on the tree.
//!
//! The complex has two nodes (the two orderings of a pair parked on the root
//! edge) and one connecting arc per *(essential vertex, ordered pair of
//! distinct upward edges)*: an arc records "swap at this vertex, first point
//! stashed on the first upward edge, second on the second". A vertex of
//! degree `eta >= 3` therefore contributes `(eta - 1)(eta - 2)` arcs, always
//! an even number, and swapping the two stash edges is a free involution of
//! the arc set. The number of independent loops — the first Betti number of
//! the two-point configuration space of the tree — is the arc count minus
//! one, and it does not depend on which leaf plays the root.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::tree::{Tree, TreeError};

#[derive(Debug, Error)]
pub enum QGammaError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("vertex {0} is the chosen root and has no downward edge")]
    VertexIsRoot(usize),
    #[error("the tree has no essential vertex, so the exchange complex has no arcs")]
    NoEssentialVertex,
}

/// Splits the edges at `v_id` into the one pointing toward `root_id` and the
/// rest, for the tree re-rooted at `root_id`. Returns `(downward edge index,
/// upward edge indices in ascending index order)`.
pub fn ascending_descending(
    tree: &Tree,
    root_id: usize,
    v_id: usize,
) -> Result<(usize, Vec<usize>), QGammaError> {
    if v_id == root_id {
        return Err(QGammaError::VertexIsRoot(v_id));
    }
    // BFS parent map from the requested root (which need not be the tree's)
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::from([root_id]);
    tree.neighbors(root_id)?; // validates the root id
    parent.insert(root_id, root_id);
    while let Some(u) = queue.pop_front() {
        for w in tree.neighbors(u)? {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(u);
                queue.push_back(w);
            }
        }
    }
    let p = *parent.get(&v_id).ok_or(TreeError::UnknownVertex(v_id))?;
    let down = tree.edge_index_between(v_id, p)?;
    let mut up: Vec<usize> = tree
        .incident_edges(v_id)?
        .into_iter()
        .filter(|&e| e != down)
        .collect();
    up.sort_unstable();
    Ok((down, up))
}

/// One arc of the exchange complex: a swap at `vertex` using the ordered
/// pair of upward edges `(up_first, up_second)` as stash space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QEdge {
    pub vertex: usize,
    pub up_first: usize,
    pub up_second: usize,
}

/// The exchange complex: two nodes joined by the arcs listed in [`edges`],
/// plus the stash-swapping involution on arcs.
///
/// [`edges`]: QGammaComplex::edges
#[derive(Clone, Debug, Serialize)]
pub struct QGammaComplex {
    edges: Vec<QEdge>,
    /// `involution[i]` is the index of `edges[i]` with its stash pair swapped.
    involution: Vec<usize>,
}

impl QGammaComplex {
    pub fn edges(&self) -> &[QEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn involution(&self) -> &[usize] {
        &self.involution
    }

    /// Number of independent loops: arc count minus one (the two nodes are
    /// joined by every arc). Errors when there are no arcs at all.
    pub fn betti1(&self) -> Result<usize, QGammaError> {
        if self.edges.is_empty() {
            return Err(QGammaError::NoEssentialVertex);
        }
        Ok(self.edges.len() - 1)
    }
}

/// Build the exchange complex of `tree`, rooted at the tree's own root.
pub fn build_qgamma(tree: &Tree) -> Result<QGammaComplex, QGammaError> {
    build_qgamma_rooted(tree, tree.root_id())
}

/// Build the exchange complex with an explicit root choice. The arc count is
/// the same for every root; only the stash-edge labels differ.
pub fn build_qgamma_rooted(tree: &Tree, root_id: usize) -> Result<QGammaComplex, QGammaError> {
    let mut edges = Vec::new();
    for v in tree.essential_vertex_ids() {
        if v == root_id {
            // an essential vertex cannot be univalent, but a caller may
            // re-root at an interior vertex; its edges are all upward
            let mut up = tree.incident_edges(v)?;
            up.sort_unstable();
            push_pairs(&mut edges, v, &up);
            continue;
        }
        let (_, up) = ascending_descending(tree, root_id, v)?;
        push_pairs(&mut edges, v, &up);
    }
    let index: HashMap<(usize, usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.vertex, e.up_first, e.up_second), i))
        .collect();
    let involution = edges
        .iter()
        .map(|e| index[&(e.vertex, e.up_second, e.up_first)])
        .collect();
    Ok(QGammaComplex { edges, involution })
}

fn push_pairs(edges: &mut Vec<QEdge>, vertex: usize, up: &[usize]) {
    for &a in up {
        for &b in up {
            if a != b {
                edges.push(QEdge {
                    vertex,
                    up_first: a,
                    up_second: b,
                });
            }
        }
    }
}

/// Number of independent loops in the two-point configuration space of the
/// tree. Errors when the tree is a path (no essential vertex).
pub fn betti1_two_particle(tree: &Tree) -> Result<usize, QGammaError> {
    build_qgamma(tree)?.betti1()
}
