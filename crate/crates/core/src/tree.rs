//! Motion planner for labelled point tuples on a metric tree.
//!
//! The tree is rooted at a univalent vertex, and the unique edge at the root
//! (the *root edge*) serves as a staging corridor: every plan first walks the
//! start configuration down into parking slots in the lower part of the root
//! edge, reorders the parked points through the first branching vertex, and
//! then runs the goal configuration's descent backwards.
//!
//! Descent order comes from the tree's root-path partial order: points with
//! nobody below them descend first, batch by batch, so nobody is ever
//! overtaken. Reordering uses the first two upward branches at the first
//! essential vertex (degree >= 3) as a pair of stacks, shuttling blockers
//! between them. The input pair's label counts how many points of each side
//! sit exactly on essential vertices; the planning rule is continuous on each
//! label class.
//!
//! All motion is piecewise linear in edge coordinates at uniform speed per
//! phase, with one point moving at a time (plus simultaneous order-preserving
//! slides along the root edge).

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::RegionIndex;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(usize),
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("{edges} edges cannot form a tree on {vertices} vertices")]
    NotATree { vertices: usize, edges: usize },
    #[error("the graph is not connected")]
    Disconnected,
    #[error("root {0} must have degree 1, found degree {1}")]
    RootNotUnivalent(usize, usize),
    #[error("edge lengths must be positive and finite")]
    BadLength,
    #[error("length list has {got} entries for {expected} edges")]
    LengthCountMismatch { got: usize, expected: usize },
    #[error("no edge between vertices {0} and {1}")]
    UnknownEdge(usize, usize),
    #[error("edge index {0} out of range")]
    EdgeIndexOutOfRange(usize),
    #[error("edge coordinate {0} outside the open interval (0, 1)")]
    CoordinateOutOfRange(f64),
    #[error("configuration points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("empty tree configuration")]
    EmptyConfiguration,
    #[error("configurations have different point counts: {0} vs {1}")]
    PointCountMismatch(usize, usize),
    #[error("the tree has no essential vertex (degree >= 3), so labels cannot be reordered")]
    NoEssentialVertex,
    #[error("point {0} is not parked in the interior of the root edge")]
    NotParked(usize),
    #[error("trajectory parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("tree trajectory junction {0}: adjacent parts disagree")]
    JunctionMismatch(usize),
    #[error("cannot concatenate an empty list of parts")]
    NothingToConcatenate,
}

/// A position on the tree: a vertex (by its external id), or an interior
/// point of an edge (by the edge's index in the construction order), with
/// `s in (0, 1)` measured from the edge endpoint closer to the root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreePoint {
    Vertex(usize),
    Edge { edge: usize, s: f64 },
}

/// Wire form of a [`TreePoint`]: `{"type":"vertex","id":3}` or
/// `{"type":"edge","edge":[u,v],"s":0.42}` (`s` from the endpoint closer to
/// the root, regardless of pair order).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreePointWire {
    Vertex { id: usize },
    Edge { edge: [usize; 2], s: f64 },
}

/// An ordered tuple of pairwise-distinct positions on a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeConfiguration(pub Vec<TreePoint>);

impl TreeConfiguration {
    pub fn points(&self) -> &[TreePoint] {
        &self.0
    }

    pub fn n_points(&self) -> usize {
        self.0.len()
    }
}

/// Wire form of a tree: vertex ids, edges as id pairs, a root id, and
/// optional per-edge lengths (default 1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeWire {
    pub vertices: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    pub root: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

/// A finite metric tree rooted at a univalent vertex.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TreeWire", into = "TreeWire")]
pub struct Tree {
    ids: Vec<usize>,
    index_of: HashMap<usize, usize>,
    /// Edge endpoints as internal indices, in construction order.
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    /// Per vertex: `(neighbor index, edge index)` pairs.
    adjacency: Vec<Vec<(usize, usize)>>,
    root: usize,
    /// Per vertex: `(parent index, edge index)`; `None` at the root.
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    /// Metric distance from the root.
    depth_len: Vec<f64>,
}

impl From<Tree> for TreeWire {
    fn from(t: Tree) -> TreeWire {
        TreeWire {
            vertices: t.ids.clone(),
            edges: t
                .edges
                .iter()
                .map(|&(u, v)| [t.ids[u], t.ids[v]])
                .collect(),
            root: t.ids[t.root],
            lengths: Some(t.lengths.clone()),
        }
    }
}

impl TryFrom<TreeWire> for Tree {
    type Error = TreeError;

    fn try_from(w: TreeWire) -> Result<Tree, TreeError> {
        Tree::new(
            w.vertices,
            w.edges.iter().map(|&[u, v]| (u, v)).collect(),
            w.root,
            w.lengths,
        )
    }
}

/// Internal normalized position: vertex index, or (edge index, root-side s).
#[derive(Clone, Copy, Debug, PartialEq)]
enum Pos {
    V(usize),
    E(usize, f64),
}

impl Tree {
    /// Build and validate a tree. `lengths` defaults to 1 per edge.
    pub fn new(
        vertices: Vec<usize>,
        edges: Vec<(usize, usize)>,
        root: usize,
        lengths: Option<Vec<f64>>,
    ) -> Result<Self, TreeError> {
        let mut index_of = HashMap::new();
        for (i, &id) in vertices.iter().enumerate() {
            if index_of.insert(id, i).is_some() {
                return Err(TreeError::DuplicateVertex(id));
            }
        }
        if edges.len() + 1 != vertices.len() {
            return Err(TreeError::NotATree {
                vertices: vertices.len(),
                edges: edges.len(),
            });
        }
        let lengths = match lengths {
            Some(ls) => {
                if ls.len() != edges.len() {
                    return Err(TreeError::LengthCountMismatch {
                        got: ls.len(),
                        expected: edges.len(),
                    });
                }
                if !ls.iter().all(|&l| l.is_finite() && l > 0.0) {
                    return Err(TreeError::BadLength);
                }
                ls
            }
            None => vec![1.0; edges.len()],
        };
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut internal_edges = Vec::with_capacity(edges.len());
        for (e, &(u, v)) in edges.iter().enumerate() {
            let ui = *index_of.get(&u).ok_or(TreeError::UnknownVertex(u))?;
            let vi = *index_of.get(&v).ok_or(TreeError::UnknownVertex(v))?;
            if ui == vi {
                return Err(TreeError::SelfLoop(u));
            }
            if adjacency[ui].iter().any(|&(w, _)| w == vi) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            adjacency[ui].push((vi, e));
            adjacency[vi].push((ui, e));
            internal_edges.push((ui, vi));
        }
        let root_idx = *index_of.get(&root).ok_or(TreeError::UnknownVertex(root))?;
        if adjacency[root_idx].len() != 1 {
            return Err(TreeError::RootNotUnivalent(root, adjacency[root_idx].len()));
        }
        // BFS from the root: connectivity plus parent/depth tables.
        let mut parent = vec![None; vertices.len()];
        let mut depth = vec![0usize; vertices.len()];
        let mut depth_len = vec![0.0f64; vertices.len()];
        let mut seen = vec![false; vertices.len()];
        let mut queue = std::collections::VecDeque::from([root_idx]);
        seen[root_idx] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    depth[v] = depth[u] + 1;
                    depth_len[v] = depth_len[u] + lengths[e];
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(TreeError::Disconnected);
        }
        Ok(Tree {
            ids: vertices,
            index_of,
            edges: internal_edges,
            lengths,
            adjacency,
            root: root_idx,
            parent,
            depth,
            depth_len,
        })
    }

    /// The claw: one degree-3 vertex (id 1) with three leaves, rooted at 0.
    pub fn example_y() -> Tree {
        Tree::new(vec![0, 1, 2, 3], vec![(0, 1), (1, 2), (1, 3)], 0, None).unwrap()
    }

    /// Two degree-3 vertices (ids 2 and 3) joined by a bar, rooted at leaf 0.
    pub fn example_h() -> Tree {
        Tree::new(
            vec![0, 1, 2, 3, 4, 5],
            vec![(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)],
            0,
            None,
        )
        .unwrap()
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn root_id(&self) -> usize {
        self.ids[self.root]
    }

    /// Endpoints of edge `e` as external ids, in construction order.
    pub fn edge_endpoints(&self, e: usize) -> Result<(usize, usize), TreeError> {
        let &(u, v) = self
            .edges
            .get(e)
            .ok_or(TreeError::EdgeIndexOutOfRange(e))?;
        Ok((self.ids[u], self.ids[v]))
    }

    pub fn edge_length(&self, e: usize) -> Result<f64, TreeError> {
        self.lengths
            .get(e)
            .copied()
            .ok_or(TreeError::EdgeIndexOutOfRange(e))
    }

    pub fn degree_of(&self, id: usize) -> Result<usize, TreeError> {
        Ok(self.adjacency[self.index(id)?].len())
    }

    fn index(&self, id: usize) -> Result<usize, TreeError> {
        self.index_of
            .get(&id)
            .copied()
            .ok_or(TreeError::UnknownVertex(id))
    }

    /// Neighbor ids of a vertex, in edge-construction order.
    pub fn neighbors(&self, id: usize) -> Result<Vec<usize>, TreeError> {
        Ok(self.adjacency[self.index(id)?]
            .iter()
            .map(|&(v, _)| self.ids[v])
            .collect())
    }

    /// Indices of the edges incident to a vertex, in construction order.
    pub fn incident_edges(&self, id: usize) -> Result<Vec<usize>, TreeError> {
        Ok(self.adjacency[self.index(id)?]
            .iter()
            .map(|&(_, e)| e)
            .collect())
    }

    /// Index of the edge joining two adjacent vertices.
    pub fn edge_index_between(&self, u: usize, v: usize) -> Result<usize, TreeError> {
        let ui = self.index(u)?;
        let vi = self.index(v)?;
        self.adjacency[ui]
            .iter()
            .find(|&&(w, _)| w == vi)
            .map(|&(_, e)| e)
            .ok_or(TreeError::UnknownEdge(u, v))
    }

    /// Ids of essential vertices (degree >= 3), in input order.
    pub fn essential_vertex_ids(&self) -> Vec<usize> {
        self.ids
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.adjacency[i].len() >= 3)
            .map(|(_, &id)| id)
            .collect()
    }

    /// Number of essential vertices.
    pub fn m(&self) -> usize {
        self.adjacency.iter().filter(|a| a.len() >= 3).count()
    }

    /// Index of the unique edge at the root.
    fn root_edge(&self) -> usize {
        self.adjacency[self.root][0].1
    }

    /// Root-side endpoint index of edge `e`.
    fn parent_end(&self, e: usize) -> usize {
        let (u, v) = self.edges[e];
        if matches!(self.parent[v], Some((p, _)) if p == u) {
            u
        } else {
            v
        }
    }

    /// Leaf-side endpoint index of edge `e`.
    fn child_end(&self, e: usize) -> usize {
        let (u, v) = self.edges[e];
        if self.parent_end(e) == u {
            v
        } else {
            u
        }
    }

    fn pos(&self, p: &TreePoint) -> Result<Pos, TreeError> {
        match *p {
            TreePoint::Vertex(id) => Ok(Pos::V(self.index(id)?)),
            TreePoint::Edge { edge, s } => {
                if edge >= self.edges.len() {
                    return Err(TreeError::EdgeIndexOutOfRange(edge));
                }
                if !(s.is_finite() && 0.0 < s && s < 1.0) {
                    return Err(TreeError::CoordinateOutOfRange(s));
                }
                Ok(Pos::E(edge, s))
            }
        }
    }

    fn point_of(&self, pos: Pos) -> TreePoint {
        match pos {
            Pos::V(i) => TreePoint::Vertex(self.ids[i]),
            Pos::E(e, s) => TreePoint::Edge { edge: e, s },
        }
    }

    /// Point at a vertex by id.
    pub fn vertex_point(&self, id: usize) -> Result<TreePoint, TreeError> {
        self.index(id)?;
        Ok(TreePoint::Vertex(id))
    }

    /// Interior point of the edge between `u` and `v`, `s` measured from the
    /// endpoint closer to the root (pair order does not matter).
    pub fn edge_point(&self, u: usize, v: usize, s: f64) -> Result<TreePoint, TreeError> {
        let p = TreePoint::Edge {
            edge: self.edge_index_between(u, v)?,
            s,
        };
        self.pos(&p)?;
        Ok(p)
    }

    pub fn point_from_wire(&self, w: &TreePointWire) -> Result<TreePoint, TreeError> {
        match *w {
            TreePointWire::Vertex { id } => self.vertex_point(id),
            TreePointWire::Edge { edge: [u, v], s } => self.edge_point(u, v, s),
        }
    }

    /// Wire form with the edge pair in root-side-first order.
    pub fn point_to_wire(&self, p: &TreePoint) -> Result<TreePointWire, TreeError> {
        Ok(match self.pos(p)? {
            Pos::V(i) => TreePointWire::Vertex { id: self.ids[i] },
            Pos::E(e, s) => TreePointWire::Edge {
                edge: [self.ids[self.parent_end(e)], self.ids[self.child_end(e)]],
                s,
            },
        })
    }

    pub fn config_from_wire(&self, ws: &[TreePointWire]) -> Result<TreeConfiguration, TreeError> {
        let c = TreeConfiguration(
            ws.iter()
                .map(|w| self.point_from_wire(w))
                .collect::<Result<_, _>>()?,
        );
        self.validate_config(&c)?;
        Ok(c)
    }

    pub fn config_to_wire(&self, c: &TreeConfiguration) -> Result<Vec<TreePointWire>, TreeError> {
        c.0.iter().map(|p| self.point_to_wire(p)).collect()
    }

    /// Valid points, pairwise distinct.
    pub fn validate_config(&self, c: &TreeConfiguration) -> Result<(), TreeError> {
        if c.0.is_empty() {
            return Err(TreeError::EmptyConfiguration);
        }
        for p in &c.0 {
            self.pos(p)?;
        }
        for i in 0..c.0.len() {
            for j in (i + 1)..c.0.len() {
                if c.0[i] == c.0[j] {
                    return Err(TreeError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(())
    }

    /// Whether `u` is `v` or an ancestor of `v`.
    fn is_ancestor_or_self(&self, u: usize, v: usize) -> bool {
        let mut w = v;
        loop {
            if w == u {
                return true;
            }
            match self.parent[w] {
                Some((p, _)) => w = p,
                None => return false,
            }
        }
    }

    /// Root-path partial order: whether `y` lies on the (inclusive) path from
    /// `x` down to the root.
    pub fn partial_leq(&self, x: &TreePoint, y: &TreePoint) -> Result<bool, TreeError> {
        let (px, py) = (self.pos(x)?, self.pos(y)?);
        Ok(match (px, py) {
            (Pos::V(vx), Pos::V(vy)) => self.is_ancestor_or_self(vy, vx),
            (Pos::V(vx), Pos::E(ey, _)) => self.is_ancestor_or_self(self.child_end(ey), vx),
            (Pos::E(ex, _), Pos::V(vy)) => self.is_ancestor_or_self(vy, self.parent_end(ex)),
            (Pos::E(ex, sx), Pos::E(ey, sy)) => {
                if ex == ey {
                    sy <= sx
                } else {
                    self.is_ancestor_or_self(self.child_end(ey), self.parent_end(ex))
                }
            }
        })
    }

    /// Indices of the points with nothing below them: no other point of the
    /// configuration lies on their root path. Ascending index order.
    pub fn minimal_points(&self, c: &TreeConfiguration) -> Result<Vec<usize>, TreeError> {
        self.validate_config(c)?;
        let mut out = Vec::new();
        'outer: for i in 0..c.0.len() {
            for j in 0..c.0.len() {
                if i != j && self.partial_leq(&c.0[i], &c.0[j])? {
                    continue 'outer;
                }
            }
            out.push(i);
        }
        Ok(out)
    }

    fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        let (mut a, mut b) = (u, v);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("deeper vertex has a parent").0;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper vertex has a parent").0;
        }
        while a != b {
            a = self.parent[a].expect("non-root").0;
            b = self.parent[b].expect("non-root").0;
        }
        self.depth_len[u] + self.depth_len[v] - 2.0 * self.depth_len[a]
    }

    /// Candidate exits from a position: `(vertex, offset along the partial
    /// edge to reach it)`.
    fn exits(&self, p: Pos) -> Vec<(usize, f64)> {
        match p {
            Pos::V(v) => vec![(v, 0.0)],
            Pos::E(e, s) => vec![
                (self.parent_end(e), s * self.lengths[e]),
                (self.child_end(e), (1.0 - s) * self.lengths[e]),
            ],
        }
    }

    fn dist_pos(&self, x: Pos, y: Pos) -> f64 {
        if let (Pos::E(ex, sx), Pos::E(ey, sy)) = (x, y) {
            if ex == ey {
                return (sx - sy).abs() * self.lengths[ex];
            }
        }
        let mut best = f64::INFINITY;
        for &(vx, ox) in &self.exits(x) {
            for &(vy, oy) in &self.exits(y) {
                best = best.min(ox + self.vertex_distance(vx, vy) + oy);
            }
        }
        best
    }

    /// Metric distance between two positions on the tree.
    pub fn distance(&self, x: &TreePoint, y: &TreePoint) -> Result<f64, TreeError> {
        Ok(self.dist_pos(self.pos(x)?, self.pos(y)?))
    }

    /// Smallest pairwise distance within a configuration (infinite for a
    /// single point). Accepts transient mid-flight configurations.
    pub fn min_separation(&self, c: &TreeConfiguration) -> Result<f64, TreeError> {
        let mut best = f64::INFINITY;
        for i in 0..c.0.len() {
            for j in (i + 1)..c.0.len() {
                best = best.min(self.distance(&c.0[i], &c.0[j])?);
            }
        }
        Ok(best)
    }

    /// Largest distance between any two points drawn from both configurations.
    pub fn pair_diameter(
        &self,
        a: &TreeConfiguration,
        b: &TreeConfiguration,
    ) -> Result<f64, TreeError> {
        let mut best = 0.0f64;
        let all: Vec<&TreePoint> = a.0.iter().chain(b.0.iter()).collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                best = best.max(self.distance(all[i], all[j])?);
            }
        }
        Ok(best)
    }

    /// Vertex index path from `u` to `v` (inclusive) through their meet.
    fn vertex_path(&self, u: usize, v: usize) -> Vec<usize> {
        let (mut a, mut b) = (u, v);
        let mut up = vec![a];
        let mut down = vec![b];
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("deeper vertex has a parent").0;
            up.push(a);
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper vertex has a parent").0;
            down.push(b);
        }
        while a != b {
            a = self.parent[a].expect("non-root").0;
            b = self.parent[b].expect("non-root").0;
            up.push(a);
            down.push(b);
        }
        down.pop(); // meet appears once
        up.extend(down.into_iter().rev());
        up
    }

    fn edge_between(&self, u: usize, v: usize) -> usize {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
            .expect("adjacent vertices")
    }

    /// Uniform-speed route between two positions along the unique simple path.
    fn route(&self, from: Pos, to: Pos) -> Route {
        let (start, end) = (self.point_of(from), self.point_of(to));
        let mut legs: Vec<Leg> = Vec::new();
        let mut push_leg = |e: usize, s_from: f64, s_to: f64, tree: &Tree| {
            if s_from != s_to {
                legs.push(Leg {
                    edge: e,
                    s_from,
                    s_to,
                    len: (s_to - s_from).abs() * tree.lengths[e],
                    parent_id: tree.ids[tree.parent_end(e)],
                    child_id: tree.ids[tree.child_end(e)],
                });
            }
        };
        if let (Pos::E(ex, sx), Pos::E(ey, sy)) = (from, to) {
            if ex == ey {
                push_leg(ex, sx, sy, self);
                return Route::new(start, end, legs);
            }
        }
        // pick the exit/entry endpoints that realize the simple path
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for &(vx, ox) in &self.exits(from) {
            for &(vy, oy) in &self.exits(to) {
                let d = ox + self.vertex_distance(vx, vy) + oy;
                if d < best.0 {
                    best = (d, vx, vy);
                }
            }
        }
        let (_, vx, vy) = best;
        if let Pos::E(ex, sx) = from {
            let s_exit = if self.parent_end(ex) == vx { 0.0 } else { 1.0 };
            push_leg(ex, sx, s_exit, self);
        }
        let path = self.vertex_path(vx, vy);
        for w in path.windows(2) {
            let e = self.edge_between(w[0], w[1]);
            let (s_from, s_to) = if self.parent_end(e) == w[0] {
                (0.0, 1.0)
            } else {
                (1.0, 0.0)
            };
            push_leg(e, s_from, s_to, self);
        }
        if let Pos::E(ey, sy) = to {
            let s_entry = if self.parent_end(ey) == vy { 0.0 } else { 1.0 };
            push_leg(ey, s_entry, sy, self);
        }
        Route::new(start, end, legs)
    }

    /// Move all points down into parking slots in the lower part of the root
    /// edge, batch by batch in the root-path order (ties broken by label
    /// index). Returns the motion, the parked configuration, and the parking
    /// order: `order[k]` is the label parked in the `k`-th slot from the
    /// bottom.
    pub fn descend_all(
        &self,
        c: &TreeConfiguration,
    ) -> Result<(TreeTrajectory, TreeConfiguration, Vec<usize>), TreeError> {
        self.validate_config(c)?;
        if self.m() == 0 {
            return Err(TreeError::NoEssentialVertex);
        }
        let e0 = self.root_edge();
        let n = c.0.len();
        // slot scale: half the lowest occupied coordinate in the lower half
        // of the root edge (capped at 1/4), so every slot sits strictly below
        // every pre-existing occupant and descents never overtake anyone
        let mut low = 0.5f64;
        for p in &c.0 {
            if let Pos::E(e, s) = self.pos(p)? {
                if e == e0 && s <= 0.5 {
                    low = low.min(s);
                }
            }
        }
        let delta = 0.5 * low;
        let slot = |k: usize| Pos::E(e0, delta * k as f64 / (n + 1) as f64);

        let mut positions: Vec<Pos> = c.0.iter().map(|p| self.pos(p)).collect::<Result<_, _>>()?;
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut order = Vec::with_capacity(n);
        let mut pieces = Vec::with_capacity(n);
        while !remaining.is_empty() {
            // minimal members of the remaining set, in index order
            let batch: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    remaining.iter().all(|&j| {
                        i == j
                            || !self
                                .partial_leq(&self.point_of(positions[i]), &self.point_of(positions[j]))
                                .expect("validated points")
                    })
                })
                .collect();
            debug_assert!(!batch.is_empty(), "partial order always has minima");
            for i in batch {
                let start = self.snapshot(&positions);
                let target = slot(order.len() + 1);
                let route = self.route(positions[i], target);
                positions[i] = target;
                let end = self.snapshot(&positions);
                pieces.push(TreePiece {
                    start,
                    end,
                    kind: TreePieceKind::MoveOne { mover: i, route },
                });
                order.push(i);
                remaining.retain(|&j| j != i);
            }
        }
        let parked = self.snapshot(&positions);
        Ok((TreeTrajectory::from_pieces(pieces)?, parked, order))
    }

    fn snapshot(&self, positions: &[Pos]) -> TreeConfiguration {
        TreeConfiguration(positions.iter().map(|&p| self.point_of(p)).collect())
    }

    /// Reorder points parked in the root edge interior so that label ranks
    /// change from `p`'s order to `goal`'s order, then match `goal` exactly.
    ///
    /// Both inputs must have every point strictly inside the root edge. The
    /// move sequence: an order-preserving slide onto a canonical slot ladder,
    /// a stack dance through the first essential vertex (points pop up the
    /// corridor onto the first upward branch, shuttle between the first two
    /// branches to surface in goal order, and re-park bottom-up), and a final
    /// order-preserving slide onto `goal`. Identity relabelings skip the
    /// dance entirely; on a tree with no essential vertex they are the only
    /// relabelings this can realize, and others report an error.
    pub fn root_edge_shuffle(
        &self,
        p: &TreeConfiguration,
        goal: &TreeConfiguration,
    ) -> Result<TreeTrajectory, TreeError> {
        self.validate_config(p)?;
        self.validate_config(goal)?;
        if p.0.len() != goal.0.len() {
            return Err(TreeError::PointCountMismatch(p.0.len(), goal.0.len()));
        }
        let e0 = self.root_edge();
        let n = p.0.len();
        let coord = |cfg: &TreeConfiguration, i: usize| -> Result<f64, TreeError> {
            match self.pos(&cfg.0[i])? {
                Pos::E(e, s) if e == e0 => Ok(s),
                _ => Err(TreeError::NotParked(i)),
            }
        };
        let rank_order = |cfg: &TreeConfiguration| -> Result<Vec<usize>, TreeError> {
            let mut idx: Vec<usize> = (0..n).collect();
            let coords: Vec<f64> = (0..n).map(|i| coord(cfg, i)).collect::<Result<_, _>>()?;
            idx.sort_by(|&a, &b| coords[a].partial_cmp(&coords[b]).unwrap());
            Ok(idx)
        };
        let pi_a = rank_order(p)?;
        let pi_b = rank_order(goal)?;

        if pi_a != pi_b && self.m() == 0 {
            return Err(TreeError::NoEssentialVertex);
        }

        // canonical ladder: rank r (0-based, bottom first) parks at slot r+1
        let ladder = |k: usize| Pos::E(e0, k as f64 / (n + 1) as f64);
        let mut canonical_a = vec![Pos::V(0); n];
        for (r, &i) in pi_a.iter().enumerate() {
            canonical_a[i] = ladder(r + 1);
        }
        let start_cfg = p.clone();
        let canon_a_cfg = self.snapshot(&canonical_a);
        let mut pieces = vec![TreePiece {
            start: start_cfg,
            end: canon_a_cfg.clone(),
            kind: TreePieceKind::Slide,
        }];

        let mut positions = canonical_a;
        if pi_a != pi_b {
            // first essential vertex up the corridor from the root edge
            let mut v_star = self.child_end(e0);
            while self.adjacency[v_star].len() == 2 {
                let up = self.adjacency[v_star]
                    .iter()
                    .find(|&&(w, _)| {
                        matches!(self.parent[v_star], Some((parent, _)) if w != parent)
                    })
                    .expect("degree-2 vertex has an upward edge");
                v_star = up.0;
            }
            debug_assert!(self.adjacency[v_star].len() >= 3);
            let down_edge = self.parent[v_star].expect("not the root").1;
            let mut branches = self.adjacency[v_star]
                .iter()
                .map(|&(_, e)| e)
                .filter(|&e| e != down_edge)
                .collect::<Vec<_>>();
            branches.sort_unstable();
            let (b1, b2) = (branches[0], branches[1]);
            // branch stacks grow toward the joint: the q-th entry from the
            // bottom of the stack sits at depth (n - q)/(n + 1) into the branch
            let branch_slot = |branch: usize, q: usize| Pos::E(branch, (n - q) as f64 / (n + 1) as f64);

            // plan the dance as (label, destination) pairs before moving
            let mut stack_e: Vec<usize> = pi_a.clone();
            let mut stack_1: Vec<usize> = Vec::new();
            let mut stack_2: Vec<usize> = Vec::new();
            let mut parked = 0usize;
            let mut moves: Vec<(usize, Pos)> = Vec::new();
            while let Some(l) = stack_e.pop() {
                moves.push((l, branch_slot(b1, stack_1.len())));
                stack_1.push(l);
            }
            for &want in &pi_b {
                loop {
                    if stack_1.last() == Some(&want) || stack_2.last() == Some(&want) {
                        let from = if stack_1.last() == Some(&want) {
                            &mut stack_1
                        } else {
                            &mut stack_2
                        };
                        let l = from.pop().unwrap();
                        parked += 1;
                        moves.push((l, ladder(parked)));
                        break;
                    }
                    // surface `want` by shuttling blockers to the other branch
                    if stack_1.contains(&want) {
                        let l = stack_1.pop().unwrap();
                        moves.push((l, branch_slot(b2, stack_2.len())));
                        stack_2.push(l);
                    } else {
                        let l = stack_2.pop().unwrap();
                        moves.push((l, branch_slot(b1, stack_1.len())));
                        stack_1.push(l);
                    }
                }
            }
            for (label, to) in moves {
                let start = self.snapshot(&positions);
                let route = self.route(positions[label], to);
                positions[label] = to;
                let end = self.snapshot(&positions);
                pieces.push(TreePiece {
                    start,
                    end,
                    kind: TreePieceKind::MoveOne {
                        mover: label,
                        route,
                    },
                });
            }
        } else {
            // identity relabeling: positions stay on the canonical ladder
        }
        let pre_slide = self.snapshot(&positions);
        pieces.push(TreePiece {
            start: pre_slide,
            end: goal.clone(),
            kind: TreePieceKind::Slide,
        });
        TreeTrajectory::from_pieces(pieces)
    }

    /// Pair label: how many points of each side sit exactly on an essential
    /// vertex, summed. Ranges over `{0, ..., 2 m}`.
    pub fn region_index(
        &self,
        a: &TreeConfiguration,
        b: &TreeConfiguration,
    ) -> Result<RegionIndex, TreeError> {
        let count = |c: &TreeConfiguration| -> Result<usize, TreeError> {
            let mut k = 0;
            for p in &c.0 {
                if let TreePoint::Vertex(id) = p {
                    if self.degree_of(*id)? >= 3 {
                        k += 1;
                    }
                }
            }
            Ok(k)
        };
        Ok(RegionIndex(count(a)? + count(b)?))
    }

    pub fn region_range(&self) -> std::ops::RangeInclusive<usize> {
        0..=2 * self.m()
    }

    /// Full planning rule: descend both sides into parking slots, shuffle
    /// along the root edge, and run the goal-side descent backwards.
    pub fn plan(
        &self,
        a: &TreeConfiguration,
        b: &TreeConfiguration,
    ) -> Result<(TreeTrajectory, RegionIndex), TreeError> {
        if a.0.len() != b.0.len() {
            return Err(TreeError::PointCountMismatch(a.0.len(), b.0.len()));
        }
        let region = self.region_index(a, b)?;
        let (down_a, parked_a, _) = self.descend_all(a)?;
        let (down_b, parked_b, _) = self.descend_all(b)?;
        let shuffle = self.root_edge_shuffle(&parked_a, &parked_b)?;
        let traj = TreeTrajectory::concatenate(&[down_a, shuffle, down_b.reverse()])?;
        Ok((traj, region))
    }
}

/// One leg of a route: a sub-segment of one edge, `s` in root-side units.
#[derive(Clone, Copy, Debug)]
struct Leg {
    edge: usize,
    s_from: f64,
    s_to: f64,
    len: f64,
    parent_id: usize,
    child_id: usize,
}

/// A uniform-speed path along the tree between two positions.
#[derive(Clone, Debug)]
struct Route {
    start: TreePoint,
    end: TreePoint,
    legs: Vec<Leg>,
    total_len: f64,
}

impl Route {
    fn new(start: TreePoint, end: TreePoint, legs: Vec<Leg>) -> Route {
        let total_len = legs.iter().map(|l| l.len).sum();
        Route {
            start,
            end,
            legs,
            total_len,
        }
    }

    fn reversed(&self) -> Route {
        Route {
            start: self.end,
            end: self.start,
            legs: self
                .legs
                .iter()
                .rev()
                .map(|l| Leg {
                    s_from: l.s_to,
                    s_to: l.s_from,
                    ..*l
                })
                .collect(),
            total_len: self.total_len,
        }
    }

    fn at(&self, u: f64) -> TreePoint {
        if u <= 0.0 || self.total_len == 0.0 {
            return self.start;
        }
        if u >= 1.0 {
            return self.end;
        }
        let mut remaining = u * self.total_len;
        for leg in &self.legs {
            if remaining <= leg.len {
                let s = leg.s_from + (leg.s_to - leg.s_from) * (remaining / leg.len);
                return if s <= 0.0 {
                    TreePoint::Vertex(leg.parent_id)
                } else if s >= 1.0 {
                    TreePoint::Vertex(leg.child_id)
                } else {
                    TreePoint::Edge { edge: leg.edge, s }
                };
            }
            remaining -= leg.len;
        }
        self.end
    }
}

#[derive(Clone, Debug)]
enum TreePieceKind {
    /// Every point linearly interpolates its coordinate on its own edge.
    Slide,
    /// One point follows a route at uniform speed; the rest stand still.
    MoveOne { mover: usize, route: Route },
}

/// One closed-form phase of a tree trajectory over local `s in [0, 1]`.
#[derive(Clone, Debug)]
pub struct TreePiece {
    start: TreeConfiguration,
    end: TreeConfiguration,
    kind: TreePieceKind,
}

impl TreePiece {
    pub fn start(&self) -> &TreeConfiguration {
        &self.start
    }

    pub fn end(&self) -> &TreeConfiguration {
        &self.end
    }

    fn at(&self, s: f64) -> TreeConfiguration {
        if s <= 0.0 {
            return self.start.clone();
        }
        if s >= 1.0 {
            return self.end.clone();
        }
        match &self.kind {
            TreePieceKind::Slide => TreeConfiguration(
                self.start
                    .0
                    .iter()
                    .zip(&self.end.0)
                    .map(|(a, b)| match (a, b) {
                        (
                            TreePoint::Edge { edge: ea, s: sa },
                            TreePoint::Edge { edge: eb, s: sb },
                        ) if ea == eb => TreePoint::Edge {
                            edge: *ea,
                            s: sa + (sb - sa) * s,
                        },
                        _ => {
                            debug_assert_eq!(a, b, "slide pieces move points along their own edge");
                            *a
                        }
                    })
                    .collect(),
            ),
            TreePieceKind::MoveOne { mover, route } => {
                let mut points = self.start.0.clone();
                points[*mover] = route.at(s);
                TreeConfiguration(points)
            }
        }
    }

    fn reversed(&self) -> TreePiece {
        TreePiece {
            start: self.end.clone(),
            end: self.start.clone(),
            kind: match &self.kind {
                TreePieceKind::Slide => TreePieceKind::Slide,
                TreePieceKind::MoveOne { mover, route } => TreePieceKind::MoveOne {
                    mover: *mover,
                    route: route.reversed(),
                },
            },
        }
    }

    /// Index of the single moving point, when only one moves.
    pub fn mover(&self) -> Option<usize> {
        match &self.kind {
            TreePieceKind::Slide => None,
            TreePieceKind::MoveOne { mover, .. } => Some(*mover),
        }
    }
}

/// A continuous path of tree configurations over `t in [0, 1]`, stored as
/// closed-form phases. Mirrors [`crate::Trajectory`] for trees.
#[derive(Clone, Debug)]
pub struct TreeTrajectory {
    pieces: Vec<TreePiece>,
    breaks: Vec<f64>,
}

impl TreeTrajectory {
    fn from_pieces(pieces: Vec<TreePiece>) -> Result<TreeTrajectory, TreeError> {
        if pieces.is_empty() {
            return Err(TreeError::NothingToConcatenate);
        }
        for (i, pair) in pieces.windows(2).enumerate() {
            if pair[0].end != pair[1].start {
                return Err(TreeError::JunctionMismatch(i));
            }
        }
        let k = pieces.len();
        let breaks = (0..=k).map(|i| i as f64 / k as f64).collect();
        Ok(TreeTrajectory { pieces, breaks })
    }

    /// Join parts end-to-start, each part getting an equal share of time.
    /// Junctions must match exactly (planner phases share endpoint values).
    pub fn concatenate(parts: &[TreeTrajectory]) -> Result<TreeTrajectory, TreeError> {
        if parts.is_empty() {
            return Err(TreeError::NothingToConcatenate);
        }
        for (i, pair) in parts.windows(2).enumerate() {
            if pair[0].end() != pair[1].start() {
                return Err(TreeError::JunctionMismatch(i));
            }
        }
        let k = parts.len() as f64;
        let mut pieces = Vec::new();
        let mut breaks = vec![0.0];
        for (j, part) in parts.iter().enumerate() {
            pieces.extend(part.pieces.iter().cloned());
            breaks.extend(part.breaks[1..].iter().map(|b| (j as f64 + b) / k));
        }
        *breaks.last_mut().expect("nonempty") = 1.0;
        Ok(TreeTrajectory { pieces, breaks })
    }

    pub fn start(&self) -> &TreeConfiguration {
        &self.pieces.first().expect("nonempty").start
    }

    pub fn end(&self) -> &TreeConfiguration {
        &self.pieces.last().expect("nonempty").end
    }

    pub fn evaluate(&self, t: f64) -> Result<TreeConfiguration, TreeError> {
        if t.is_nan() || !(0.0..=1.0).contains(&t) {
            return Err(TreeError::ParameterOutOfRange(t));
        }
        let i = self
            .breaks
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let (t0, t1) = (self.breaks[i], self.breaks[i + 1]);
        Ok(self.pieces[i].at((t - t0) / (t1 - t0)))
    }

    pub fn reverse(&self) -> TreeTrajectory {
        TreeTrajectory {
            pieces: self.pieces.iter().rev().map(TreePiece::reversed).collect(),
            breaks: self.breaks.iter().rev().map(|b| 1.0 - b).collect(),
        }
    }

    pub fn pieces(&self) -> &[TreePiece] {
        &self.pieces
    }
}

/// Random tree by uniform attachment: ids `0..size`, vertex 0 a univalent
/// root, each later vertex attached to a uniformly random earlier non-root
/// vertex. Unit edge lengths.
pub fn random_tree<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Tree {
    let size = size.max(2);
    let mut edges = vec![(0usize, 1usize)];
    for v in 2..size {
        edges.push((rng.gen_range(1..v), v));
    }
    Tree::new((0..size).collect(), edges, 0, None).expect("attachment tree is valid")
}
