//! Support graphs of stochastic matrices and the reachability structure
//! the decision procedure builds on.
//!
//! `G(P)` has an edge `i -> j` exactly when `p_ij` is strictly positive
//! (entries at or below the zero tolerance were already clamped at
//! validation).  The support of `e_i^T P(1)***P(t)` equals the iterated
//! image `N_t(...N_1({i}))`, which is why set images over these graphs
//! decide everything the matrices' zero patterns can express.

use crate::clustering::Clustering;
use crate::matrix::StochasticMatrix;
use crate::vertex_set::VertexSet;

/// Directed graph on `{0, .., n-1}` with bitmask adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    adj: Vec<VertexSet>,
}

/// Strongly connected components contracted to a DAG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensation {
    /// One vertex set per component, in reverse topological order: every
    /// DAG edge points from a later-listed component to an earlier one.
    pub components: Vec<VertexSet>,
    /// Deduplicated edges between distinct components.
    pub dag_edges: Vec<(usize, usize)>,
    /// Components without outgoing DAG edges.  At least one always exists.
    pub sinks: Vec<usize>,
}

impl DirectedGraph {
    pub fn new(n: usize, adj: Vec<VertexSet>) -> Self {
        assert_eq!(adj.len(), n);
        assert!(n <= VertexSet::MAX);
        DirectedGraph { n, adj }
    }

    /// Support graph of a stochastic matrix.
    pub fn from_matrix(p: &StochasticMatrix) -> Self {
        let n = p.n();
        let adj = (0..n).map(|i| p.row_support(i)).collect();
        DirectedGraph { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adj(&self, v: usize) -> VertexSet {
        self.adj[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    /// One-step image: union of out-neighborhoods over `s`.  Monotone in
    /// `s`; the image of the empty set is empty.
    pub fn image(&self, s: VertexSet) -> VertexSet {
        let mut out = VertexSet::empty();
        for v in s.iter() {
            out = out.union(self.adj[v]);
        }
        out
    }

    /// Vertices reachable from `v`, including `v` itself.  Breadth-first
    /// over bitmask frontiers.
    pub fn reachable(&self, v: usize) -> VertexSet {
        let mut seen = VertexSet::singleton(v);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let next = self.image(frontier).difference(seen);
            seen = seen.union(next);
            frontier = next;
        }
        seen
    }

    /// Tarjan's algorithm; components come out in reverse topological
    /// order.  Vertices are visited in index order, so the output is
    /// deterministic.
    pub fn scc_condensation(&self) -> Condensation {
        let n = self.n;
        let mut state = TarjanState {
            graph: self,
            index: vec![usize::MAX; n],
            lowlink: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next_index: 0,
            components: Vec::new(),
        };
        for v in 0..n {
            if state.index[v] == usize::MAX {
                state.visit(v);
            }
        }
        let components = state.components;
        let mut component_of = vec![0usize; n];
        for (c, comp) in components.iter().enumerate() {
            for v in comp.iter() {
                component_of[v] = c;
            }
        }
        let mut dag_edges = Vec::new();
        for i in 0..n {
            for j in self.adj[i].iter() {
                let (a, b) = (component_of[i], component_of[j]);
                if a != b {
                    dag_edges.push((a, b));
                }
            }
        }
        dag_edges.sort_unstable();
        dag_edges.dedup();
        let mut has_out = vec![false; components.len()];
        for &(a, _) in &dag_edges {
            has_out[a] = true;
        }
        let sinks = (0..components.len()).filter(|&c| !has_out[c]).collect();
        Condensation {
            components,
            dag_edges,
            sinks,
        }
    }

    /// Whether every cluster has a common reachable vertex: for each
    /// cluster `C_k` some vertex (possibly outside `C_k`) reachable from
    /// all of `C_k`.  Returns the smallest such root per cluster.
    pub fn cluster_spanning_trees(&self, c: &Clustering) -> (bool, Option<Vec<usize>>) {
        let mut roots = Vec::with_capacity(c.k());
        for k in 0..c.k() {
            let mut common = VertexSet::full(self.n);
            for &v in c.members(k) {
                common = common.intersection(self.reachable(v));
            }
            match common.min() {
                Some(root) => roots.push(root),
                None => return (false, None),
            }
        }
        (true, Some(roots))
    }

    /// DOT rendering of the graph, one line per edge, vertices in index
    /// order.  `name` is escaped into the graph header.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph {} {{\n", dot_quote(name)));
        for v in 0..self.n {
            out.push_str(&format!("  {v};\n"));
        }
        for v in 0..self.n {
            for w in self.adj[v].iter() {
                out.push_str(&format!("  {v} -> {w};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

impl Condensation {
    /// DOT rendering of the component DAG; component labels list members.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph {} {{\n", dot_quote(name)));
        for (c, comp) in self.components.iter().enumerate() {
            let label = comp
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("  c{c} [label={}];\n", dot_quote(&label)));
        }
        for &(a, b) in &self.dag_edges {
            out.push_str(&format!("  c{a} -> c{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_quote(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

struct TarjanState<'a> {
    graph: &'a DirectedGraph,
    index: Vec<usize>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: usize,
    components: Vec<VertexSet>,
}

impl TarjanState<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = self.next_index;
        self.lowlink[v] = self.next_index;
        self.next_index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for w in self.graph.adj(v).iter() {
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.lowlink[v] = self.lowlink[v].min(self.lowlink[w]);
            } else if self.on_stack[w] {
                self.lowlink[v] = self.lowlink[v].min(self.index[w]);
            }
        }
        if self.lowlink[v] == self.index[v] {
            let mut comp = VertexSet::empty();
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                comp.insert(w);
                if w == v {
                    break;
                }
            }
            self.components.push(comp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Tolerances;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
        let mut adj = vec![VertexSet::empty(); n];
        for &(a, b) in edges {
            adj[a].insert(b);
        }
        DirectedGraph::new(n, adj)
    }

    #[test]
    fn support_graph_reflects_positive_entries() {
        let p = StochasticMatrix::from_rows(
            "p",
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![1e-13, 0.5, 0.5]],
            Tolerances::default(),
        )
        .unwrap();
        let g = DirectedGraph::from_matrix(&p);
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        // The 1e-13 entry was clamped: no edge 2 -> 0.
        assert!(!g.has_edge(2, 0));
        assert_eq!(g.image(VertexSet::singleton(2)).to_vec(), vec![1, 2]);
    }

    #[test]
    fn image_is_monotone_and_empty_on_empty() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(g.image(VertexSet::empty()).is_empty());
        let small: VertexSet = [0].into_iter().collect();
        let big: VertexSet = [0, 2].into_iter().collect();
        assert!(g.image(small).is_subset(g.image(big)));
    }

    #[test]
    fn reachability_includes_start() {
        let g = graph(4, &[(0, 1), (1, 2)]);
        assert_eq!(g.reachable(0).to_vec(), vec![0, 1, 2]);
        assert_eq!(g.reachable(3).to_vec(), vec![3]);
    }

    #[test]
    fn condensation_of_two_cycles_with_bridge() {
        // {0,1} -> {2,3}: one source component, one sink component.
        let g = graph(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]);
        let cond = g.scc_condensation();
        assert_eq!(cond.components.len(), 2);
        let sink = cond.sinks.as_slice();
        assert_eq!(sink.len(), 1);
        assert_eq!(cond.components[sink[0]].to_vec(), vec![2, 3]);
        assert_eq!(cond.dag_edges.len(), 1);
        // Reverse topological order: the sink is emitted first.
        assert_eq!(cond.dag_edges[0].1, sink[0]);
    }

    #[test]
    fn condensation_of_disconnected_vertices() {
        let g = graph(3, &[(0, 0), (1, 1), (2, 2)]);
        let cond = g.scc_condensation();
        assert_eq!(cond.components.len(), 3);
        assert_eq!(cond.dag_edges, vec![]);
        assert_eq!(cond.sinks, vec![0, 1, 2]);
    }

    #[test]
    fn spanning_trees_with_root_outside_cluster() {
        // Cluster {0,1} shares no internal edges; both reach 2.
        let g = graph(3, &[(0, 0), (0, 2), (1, 1), (1, 2), (2, 2)]);
        let c = Clustering::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let (ok, roots) = g.cluster_spanning_trees(&c);
        assert!(ok);
        assert_eq!(roots.unwrap(), vec![2, 2]);
    }

    #[test]
    fn spanning_trees_absent_for_split_cluster() {
        let g = graph(2, &[(0, 0), (1, 1)]);
        let c = Clustering::single(2);
        let (ok, roots) = g.cluster_spanning_trees(&c);
        assert!(!ok);
        assert!(roots.is_none());
    }

    #[test]
    fn smallest_root_is_reported() {
        // Everyone reaches everyone: smallest root is 0.
        let g = graph(2, &[(0, 1), (1, 0)]);
        let (ok, roots) = g.cluster_spanning_trees(&Clustering::single(2));
        assert!(ok);
        assert_eq!(roots.unwrap(), vec![0]);
    }

    #[test]
    fn dot_output_is_escaped_and_stable() {
        let g = graph(2, &[(0, 1)]);
        let dot = g.to_dot("a \"b\"");
        assert!(dot.starts_with("digraph \"a \\\"b\\\"\" {"));
        assert!(dot.contains("  0 -> 1;\n"));
        let cond = g.scc_condensation();
        let cdot = cond.to_dot("c");
        assert!(cdot.contains("label="));
    }
}
