//! Rooted trees with physical sites on the vertices.
//!
//! A canonical [`TreeGraph`] uses labels `1..=n` with the root at `n` and
//! labels that never increase with graph distance from the root, so every
//! child carries a smaller label than its parent. Edge `i` is the edge
//! between vertex `i` and its parent; there are `n - 1` edges, `1..n`.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("vertex {vertex} is outside 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {vertex} has local dimension 0")]
    ZeroDimension { vertex: usize },
    #[error("edge ({a}, {b}) appears more than once")]
    DuplicateEdge { a: usize, b: usize },
    #[error("edges close a cycle through vertices {vertices:?}")]
    CycleDetected { vertices: Vec<usize> },
    #[error("graph is disconnected: vertex {unreachable} cannot be reached from vertex {from}")]
    Disconnected { from: usize, unreachable: usize },
    #[error("edge {edge} is outside 1..{n}")]
    EdgeOutOfRange { edge: usize, n: usize },
}

/// Maps original vertex labels to canonical ones: `old_to_new[k]` is the
/// canonical label of original vertex `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    pub old_to_new: Vec<usize>,
}

impl Relabeling {
    pub fn identity(n: usize) -> Self {
        Self { old_to_new: (1..=n).collect() }
    }

    pub fn new_label(&self, old: usize) -> usize {
        self.old_to_new[old - 1]
    }

    /// `new_to_old[k]` is the original label of canonical vertex `k + 1`.
    pub fn new_to_old(&self) -> Vec<usize> {
        let mut inv = vec![0; self.old_to_new.len()];
        for (old0, &new) in self.old_to_new.iter().enumerate() {
            inv[new - 1] = old0 + 1;
        }
        inv
    }

    pub fn is_identity(&self) -> bool {
        self.old_to_new.iter().enumerate().all(|(k, &v)| v == k + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeGraph {
    dims: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl TreeGraph {
    /// Builds a canonical tree from an undirected edge list over labels `1..=n`.
    ///
    /// Without `root_hint` the root is a graph center (minimal eccentricity,
    /// lowest label on ties).
    pub fn from_edge_list(
        edges: &[(usize, usize)],
        dims: &[usize],
        root_hint: Option<usize>,
    ) -> Result<(TreeGraph, Relabeling), TreeError> {
        let n = dims.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if let Some(v) = dims.iter().position(|&d| d == 0) {
            return Err(TreeError::ZeroDimension { vertex: v + 1 });
        }
        let adj = adjacency(n, edges)?;
        if let Some(r) = root_hint {
            if r == 0 || r > n {
                return Err(TreeError::VertexOutOfRange { vertex: r, n });
            }
        }
        let root = match root_hint {
            Some(r) => r,
            None => center(&adj),
        };

        let dist = bfs_distances(&adj, root);
        let mut order: Vec<usize> = (1..=n).collect();
        // farthest first, original label order within a distance shell
        order.sort_by(|&a, &b| dist[b - 1].cmp(&dist[a - 1]).then(a.cmp(&b)));
        let mut old_to_new = vec![0; n];
        for (k, &old) in order.iter().enumerate() {
            old_to_new[old - 1] = k + 1;
        }

        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut new_dims = vec![0; n];
        for old in 1..=n {
            let new = old_to_new[old - 1];
            new_dims[new - 1] = dims[old - 1];
            for &nb in &adj[old - 1] {
                if dist[nb - 1] + 1 == dist[old - 1] {
                    parent[new - 1] = Some(old_to_new[nb - 1]);
                } else {
                    children[new - 1].push(old_to_new[nb - 1]);
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let tree = TreeGraph { dims: new_dims, parent, children };
        Ok((tree, Relabeling { old_to_new }))
    }

    /// Re-runs canonicalization keeping the current root.
    pub fn canonicalize(&self) -> (TreeGraph, Relabeling) {
        let edges: Vec<(usize, usize)> = self.edges().map(|i| (i, self.parent(i))).collect();
        Self::from_edge_list(&edges, &self.dims, Some(self.root()))
            .expect("a valid tree re-canonicalizes")
    }

    /// Linear chain `1 - 2 - ... - n` rooted at `n` (the MPS layout).
    pub fn chain(dims: &[usize]) -> Result<TreeGraph, TreeError> {
        let n = dims.len();
        let edges: Vec<(usize, usize)> = (1..n).map(|k| (k, k + 1)).collect();
        Ok(Self::from_edge_list(&edges, dims, Some(n.max(1)))?.0)
    }

    /// Fragment of a Bethe lattice with coordination `z`, filled shell by
    /// shell in breadth-first order until `n` vertices exist. Rooted at the
    /// central vertex.
    pub fn cayley(n: usize, z: usize, d: usize) -> Result<TreeGraph, TreeError> {
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([1usize]);
        let mut next = 2;
        while next <= n {
            let v = queue.pop_front().expect("queue holds the current shell");
            let branching = if v == 1 { z } else { z.saturating_sub(1) };
            for _ in 0..branching {
                if next > n {
                    break;
                }
                edges.push((v, next));
                queue.push_back(next);
                next += 1;
            }
            if branching == 0 {
                break;
            }
        }
        Ok(Self::from_edge_list(&edges, &vec![d; n], Some(1))?.0)
    }

    /// Random recursive tree: vertex `k` attaches to a uniformly chosen
    /// earlier vertex. The root is left to the center rule.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<TreeGraph, TreeError> {
        let edges: Vec<(usize, usize)> =
            (2..=dims.len()).map(|k| (rng.random_range(1..k), k)).collect();
        Ok(Self::from_edge_list(&edges, dims, None)?.0)
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn root(&self) -> usize {
        self.n()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, v: usize) -> usize {
        self.dims[v - 1]
    }

    /// Edge ids `1..n`.
    pub fn edges(&self) -> std::ops::Range<usize> {
        1..self.n()
    }

    pub fn parent(&self, i: usize) -> usize {
        self.parent[i - 1].expect("root has no parent")
    }

    pub fn parent_of(&self, v: usize) -> Option<usize> {
        self.parent[v - 1]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v - 1]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v - 1].is_empty()
    }

    fn check_edge(&self, i: usize) -> Result<(), TreeError> {
        if i == 0 || i >= self.n() {
            return Err(TreeError::EdgeOutOfRange { edge: i, n: self.n() });
        }
        Ok(())
    }

    /// Vertex `i` and all of its descendants, ascending.
    pub fn branch(&self, i: usize) -> Result<Vec<usize>, TreeError> {
        self.check_edge(i)?;
        Ok(self.subtree(i))
    }

    /// Complement of [`branch`](Self::branch), ascending.
    pub fn remainder(&self, i: usize) -> Result<Vec<usize>, TreeError> {
        let b = self.branch(i)?;
        Ok((1..=self.n()).filter(|v| b.binary_search(v).is_err()).collect())
    }

    pub(crate) fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u - 1]);
        }
        out.sort_unstable();
        out
    }

    /// Smaller of the branch and remainder Hilbert-space dimensions for edge `i`.
    pub fn available_dim(&self, i: usize) -> Result<usize, TreeError> {
        let b = self.branch(i)?;
        let left: usize = b.iter().map(|&v| self.dim(v)).product();
        let total: usize = self.dims.iter().product();
        Ok(left.min(total / left))
    }

    /// True when every non-leaf vertex has exactly one child.
    pub fn is_linear(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    /// Graph distance of `v` from the root.
    pub fn depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut u = v;
        while let Some(p) = self.parent[u - 1] {
            u = p;
            d += 1;
        }
        d
    }

    /// Undirected edges `(child, parent)` in canonical labels.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges().map(|i| (i, self.parent(i))).collect()
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>, TreeError> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut uf = UnionFind::new(n);
    let mut seen = std::collections::HashSet::new();
    for &(a, b) in edges {
        for v in [a, b] {
            if v == 0 || v > n {
                return Err(TreeError::VertexOutOfRange { vertex: v, n });
            }
        }
        if a == b {
            return Err(TreeError::CycleDetected { vertices: vec![a] });
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(TreeError::DuplicateEdge { a, b });
        }
        if !uf.union(a - 1, b - 1) {
            let mut vertices = path(&adj, a, b);
            vertices.sort_unstable();
            return Err(TreeError::CycleDetected { vertices });
        }
        adj[a - 1].push(b);
        adj[b - 1].push(a);
    }
    let r = uf.find(0);
    if let Some(v) = (1..n).find(|&v| uf.find(v) != r) {
        return Err(TreeError::Disconnected { from: 1, unreachable: v + 1 });
    }
    Ok(adj)
}

fn bfs_distances(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root - 1] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &w in &adj[u - 1] {
            if dist[w - 1] == usize::MAX {
                dist[w - 1] = dist[u - 1] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

fn center(adj: &[Vec<usize>]) -> usize {
    (1..=adj.len())
        .min_by_key(|&v| (bfs_distances(adj, v).into_iter().max().unwrap_or(0), v))
        .expect("non-empty tree")
}

/// Vertices on the forest path from `a` to `b`.
fn path(adj: &[Vec<usize>], a: usize, b: usize) -> Vec<usize> {
    let mut prev = vec![0usize; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[a - 1] = true;
    let mut q = VecDeque::from([a]);
    while let Some(u) = q.pop_front() {
        if u == b {
            break;
        }
        for &w in &adj[u - 1] {
            if !seen[w - 1] {
                seen[w - 1] = true;
                prev[w - 1] = u;
                q.push_back(w);
            }
        }
    }
    let mut out = vec![b];
    let mut u = b;
    while u != a {
        u = prev[u - 1];
        out.push(u);
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
