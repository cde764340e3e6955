//! Aggregated sparsity pattern graph and the structural queries on it.
//!
//! Vertices are `0..n` internally. Edges are stored as `(i, j)` with `i < j`
//! in lexicographic order, which fixes every iteration order downstream.

use std::collections::VecDeque;

use serde::Serialize;

use crate::qcqp::QcqpInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl SparsityGraph {
    /// Builds a graph from an arbitrary edge list. Self-loops are dropped,
    /// orientation and duplicates are normalized.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut e: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(i, j)| i != j)
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        e.sort_unstable();
        e.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &e {
            assert!(j < n, "edge ({i}, {j}) out of range for n = {n}");
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        SparsityGraph {
            n,
            edges: e,
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn union(&self, other: &SparsityGraph) -> SparsityGraph {
        assert_eq!(self.n, other.n);
        SparsityGraph::from_edges(self.n, self.edges.iter().chain(other.edges()).copied())
    }
}

/// Aggregated sparsity pattern: `(i, j)` is an edge iff `|Q^p_ij| > zero_tol`
/// for some `p`.
pub fn build_graph(inst: &QcqpInstance, zero_tol: f64) -> SparsityGraph {
    let n = inst.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if inst.matrices().any(|q| q.get(i, j).abs() > zero_tol) {
                edges.push((i, j));
            }
        }
    }
    SparsityGraph::from_edges(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Negative,
    Mixed,
    Positive,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Mixed => 0,
            Sign::Positive => 1,
        }
    }
}

/// Edge signs aligned with `graph.edges()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSigns {
    edges: Vec<(usize, usize)>,
    signs: Vec<Sign>,
}

impl EdgeSigns {
    pub fn get(&self, i: usize, j: usize) -> Option<Sign> {
        self.edges
            .binary_search(&(i.min(j), i.max(j)))
            .ok()
            .map(|k| self.signs[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Sign)> + '_ {
        self.edges.iter().copied().zip(self.signs.iter().copied())
    }

    pub fn all_definite(&self) -> bool {
        self.signs.iter().all(|&s| s != Sign::Mixed)
    }

    pub fn count(&self, s: Sign) -> usize {
        self.signs.iter().filter(|&&x| x == s).count()
    }

    pub fn first_mixed(&self) -> Option<(usize, usize)> {
        self.iter().find(|(_, s)| *s == Sign::Mixed).map(|(e, _)| e)
    }
}

/// `+1` if every `Q^p_ij >= 0`, `-1` if every `Q^p_ij <= 0`, `0` otherwise.
/// Entries with magnitude at most `zero_tol` count as zero.
pub fn edge_signs(inst: &QcqpInstance, graph: &SparsityGraph, zero_tol: f64) -> EdgeSigns {
    let signs = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            let mut pos = false;
            let mut neg = false;
            for q in inst.matrices() {
                let v = q.get(i, j);
                if v > zero_tol {
                    pos = true;
                } else if v < -zero_tol {
                    neg = true;
                }
            }
            match (pos, neg) {
                (true, true) => Sign::Mixed,
                (false, true) => Sign::Negative,
                _ => Sign::Positive,
            }
        })
        .collect();
    EdgeSigns {
        edges: graph.edges().to_vec(),
        signs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitionResult {
    pub bipartite: bool,
    /// `(L, R)`, each sorted; empty when not bipartite.
    pub parts: (Vec<usize>, Vec<usize>),
    /// Odd cycle as a vertex sequence (closing edge implied); empty when bipartite.
    pub witness: Vec<usize>,
}

struct Bfs {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    component: Vec<usize>,
    /// Edges not used by the spanning forest, in discovery order.
    non_tree: Vec<(usize, usize)>,
    roots: Vec<usize>,
}

fn bfs_forest(g: &SparsityGraph) -> Bfs {
    let n = g.n();
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut component = vec![usize::MAX; n];
    let mut roots = Vec::new();
    let mut tree = vec![false; g.edge_count()];
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        let cid = roots.len();
        roots.push(root);
        component[root] = cid;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = cid;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    let k = g.edges.binary_search(&(u.min(v), u.max(v))).unwrap();
                    tree[k] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let non_tree = g
        .edges()
        .iter()
        .zip(&tree)
        .filter(|(_, &t)| !t)
        .map(|(&e, _)| e)
        .collect();
    Bfs {
        parent,
        depth,
        component,
        non_tree,
        roots,
    }
}

/// Tree path `u -> lca -> v` as a vertex sequence.
fn tree_cycle(bfs: &Bfs, u: usize, v: usize) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while bfs.depth[a] > bfs.depth[b] {
        a = bfs.parent[a].unwrap();
        left.push(a);
    }
    while bfs.depth[b] > bfs.depth[a] {
        b = bfs.parent[b].unwrap();
        right.push(b);
    }
    while a != b {
        a = bfs.parent[a].unwrap();
        b = bfs.parent[b].unwrap();
        left.push(a);
        right.push(b);
    }
    right.pop();
    left.extend(right.into_iter().rev());
    left
}

/// BFS 2-coloring. Component roots (smallest vertices) go to `L`.
pub fn bipartition(g: &SparsityGraph) -> BipartitionResult {
    let bfs = bfs_forest(g);
    let color: Vec<usize> = bfs.depth.iter().map(|d| d % 2).collect();
    if let Some(&(u, v)) = bfs.non_tree.iter().find(|&&(u, v)| color[u] == color[v]) {
        return BipartitionResult {
            bipartite: false,
            parts: (Vec::new(), Vec::new()),
            witness: tree_cycle(&bfs, u, v),
        };
    }
    let left = (0..g.n()).filter(|&v| color[v] == 0).collect();
    let right = (0..g.n()).filter(|&v| color[v] == 1).collect();
    BipartitionResult {
        bipartite: true,
        parts: (left, right),
        witness: Vec::new(),
    }
}

/// Components ordered by smallest vertex, each sorted ascending.
pub fn connected_components(g: &SparsityGraph) -> Vec<Vec<usize>> {
    let bfs = bfs_forest(g);
    let mut comps = vec![Vec::new(); bfs.roots.len()];
    for v in 0..g.n() {
        comps[bfs.component[v]].push(v);
    }
    comps
}

pub fn is_connected(g: &SparsityGraph) -> bool {
    g.n() <= 1 || connected_components(g).len() == 1
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleBasis {
    /// Fundamental cycles as vertex sequences; the closing edge is implied.
    pub cycles: Vec<Vec<usize>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// Edges of a closed vertex sequence, normalized to `i < j`.
pub fn cycle_edges(cycle: &[usize]) -> Vec<(usize, usize)> {
    (0..cycle.len())
        .map(|k| {
            let a = cycle[k];
            let b = cycle[(k + 1) % cycle.len()];
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Fundamental cycles of the BFS spanning forest, one per non-tree edge.
pub fn cycle_basis(g: &SparsityGraph) -> CycleBasis {
    let bfs = bfs_forest(g);
    CycleBasis {
        cycles: bfs
            .non_tree
            .iter()
            .map(|&(u, v)| tree_cycle(&bfs, u, v))
            .collect(),
    }
}

pub fn is_forest(g: &SparsityGraph) -> bool {
    let comps = connected_components(g).len();
    g.edge_count() + comps == g.n()
}

/// Negative graph Laplacian: `-deg(i)` on the diagonal, `+1` on edges.
pub fn negative_laplacian(g: &SparsityGraph) -> crate::matrix::SymMatrix {
    let mut p = crate::matrix::SymMatrix::zeros(g.n());
    for &(i, j) in g.edges() {
        p.set(i, j, 1.0);
        p.add_to(i, i, -1.0);
        p.add_to(j, j, -1.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> SparsityGraph {
        SparsityGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    }

    #[test]
    fn four_cycle_parts() {
        let b = bipartition(&cycle4());
        assert!(b.bipartite);
        assert_eq!(b.parts, (vec![0, 2], vec![1, 3]));
    }

    #[test]
    fn triangle_has_odd_witness() {
        let g = SparsityGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        let b = bipartition(&g);
        assert!(!b.bipartite);
        assert_eq!(b.witness.len(), 3);
        for (i, j) in cycle_edges(&b.witness) {
            assert!(g.has_edge(i, j));
        }
    }

    #[test]
    fn empty_graph_all_left() {
        let g = SparsityGraph::from_edges(3, []);
        let b = bipartition(&g);
        assert!(b.bipartite);
        assert_eq!(b.parts, (vec![0, 1, 2], vec![]));
        assert!(is_forest(&g));
        assert_eq!(connected_components(&g), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn components_ordered_by_smallest_vertex() {
        let g = SparsityGraph::from_edges(4, [(2, 3), (0, 1)]);
        assert_eq!(connected_components(&g), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(connected_components(&cycle4()), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn cycle_basis_sizes() {
        let c = cycle_basis(&cycle4());
        assert_eq!(c.len(), 1);
        assert_eq!(c.cycles[0].len(), 4);
        let forest = SparsityGraph::from_edges(4, [(0, 1), (1, 2)]);
        assert!(cycle_basis(&forest).is_empty());
        let k4 = SparsityGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let basis = cycle_basis(&k4);
        assert_eq!(basis.len(), 3);
        for cyc in &basis.cycles {
            for (i, j) in cycle_edges(cyc) {
                assert!(k4.has_edge(i, j));
            }
            let mut sorted = cyc.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), cyc.len(), "cycle must be simple");
        }
    }

    #[test]
    fn forest_checks() {
        assert!(is_forest(&SparsityGraph::from_edges(2, [(0, 1)])));
        assert!(!is_forest(&cycle4()));
    }

    #[test]
    fn laplacian_of_cycle() {
        let p = negative_laplacian(&cycle4());
        for i in 0..4 {
            assert_eq!(p.get(i, i), -2.0);
        }
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(0, 2), 0.0);
        assert!(p.max_eigenvalue() <= 1e-12);
    }
}
