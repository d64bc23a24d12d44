//! Simple undirected graphs over dense vertex ids `0..n`.

use std::fmt;
use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

/// An unordered vertex pair, stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(Vertex, Vertex);

impl Edge {
    pub fn new(u: Vertex, v: Vertex) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    #[inline]
    pub fn u(self) -> Vertex {
        self.0
    }

    #[inline]
    pub fn v(self) -> Vertex {
        self.1
    }

    #[inline]
    pub fn touches(self, x: Vertex) -> bool {
        self.0 == x || self.1 == x
    }

    /// The endpoint opposite to `x`. `x` must be an endpoint.
    #[inline]
    pub fn other(self, x: Vertex) -> Vertex {
        debug_assert!(self.touches(x));
        if self.0 == x {
            self.1
        } else {
            self.0
        }
    }
}

impl From<(Vertex, Vertex)> for Edge {
    fn from((u, v): (Vertex, Vertex)) -> Self {
        Edge::new(u, v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}")]
    DuplicateEdge(Edge),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("edge {0} does not cross the bipartition")]
    NotBipartite(Edge),
    #[error("bipartition covers {got} vertices, graph has {n}")]
    BipartitionSize { got: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header declares {expected} edges, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Side assignment for a bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    is_left: Vec<bool>,
}

impl Bipartition {
    pub fn from_flags(is_left: Vec<bool>) -> Self {
        Bipartition { is_left }
    }

    /// Vertices `0..left` on the left, `left..n` on the right.
    pub fn prefix(left: usize, n: usize) -> Self {
        Bipartition {
            is_left: (0..n).map(|v| v < left).collect(),
        }
    }

    #[inline]
    pub fn is_left(&self, v: Vertex) -> bool {
        self.is_left[v]
    }

    pub fn left_count(&self) -> usize {
        self.is_left.iter().filter(|&&l| l).count()
    }

    pub fn right_count(&self) -> usize {
        self.is_left.len() - self.left_count()
    }

    pub fn left(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.is_left.len()).filter(|&v| self.is_left[v])
    }

    pub fn right(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.is_left.len()).filter(|&v| !self.is_left[v])
    }

    /// `Some(L)` when the left side is exactly `0..L`.
    pub fn prefix_len(&self) -> Option<usize> {
        let left = self.left_count();
        self.is_left[..left].iter().all(|&l| l).then_some(left)
    }
}

/// A simple undirected graph. Edge order is the construction order; adjacency
/// lists are sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<Vertex>>,
    sides: Option<Bipartition>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges and out-of-range endpoints.
    pub fn new<I, E>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for e in edges {
            let e: Edge = e.into();
            for x in [e.u(), e.v()] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if e.u() == e.v() {
                return Err(GraphError::SelfLoop(e.u()));
            }
            adj[e.u()].push(e.v());
            adj[e.v()].push(e.u());
            list.push(e);
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(Edge::new(v, w[0])));
            }
        }
        Ok(Graph {
            n,
            edges: list,
            adj,
            sides: None,
        })
    }

    /// Bipartite graph with left side `0..left` and right side `left..left+right`.
    pub fn bipartite<I, E>(left: usize, right: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        Graph::new(left + right, edges)?.with_bipartition(Bipartition::prefix(left, left + right))
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            sides: None,
        }
    }

    /// Union of several edge collections on `n` vertices; repeated edges are kept once,
    /// in order of first appearance.
    pub fn union<'a, I>(n: usize, parts: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = &'a [Edge]>,
    {
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for part in parts {
            for &e in part {
                if seen.insert(e) {
                    edges.push(e);
                }
            }
        }
        Graph::new(n, edges)
    }

    /// Attaches a bipartition, checking that every edge crosses it.
    pub fn with_bipartition(mut self, sides: Bipartition) -> Result<Self, GraphError> {
        if sides.is_left.len() != self.n {
            return Err(GraphError::BipartitionSize {
                got: sides.is_left.len(),
                n: self.n,
            });
        }
        if let Some(&e) = self.edges.iter().find(|e| sides.is_left(e.u()) == sides.is_left(e.v())) {
            return Err(GraphError::NotBipartite(e));
        }
        self.sides = Some(sides);
        Ok(self)
    }

    /// Copies this graph's bipartition (if any) onto `sub`, which must be on the same vertex set.
    pub fn tag_like(&self, sub: Graph) -> Result<Graph, GraphError> {
        match &self.sides {
            Some(s) => sub.with_bipartition(s.clone()),
            None => Ok(sub),
        }
    }

    /// Subgraph on the same vertex set containing `edges` (which must be edges of `self`
    /// or at least cross the same bipartition).
    pub fn edge_subgraph(&self, edges: &[Edge]) -> Result<Graph, GraphError> {
        self.tag_like(Graph::union(self.n, [edges])?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_degree(&self, e: Edge) -> usize {
        self.degree(e.u()) + self.degree(e.v())
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn bipartition(&self) -> Option<&Bipartition> {
        self.sides.as_ref()
    }

    /// Two-colouring by BFS, lowest uncoloured vertex on the left. `None` if an odd cycle exists.
    pub fn two_coloring(&self) -> Option<Bipartition> {
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        let mut queue = std::collections::VecDeque::new();
        for root in 0..self.n {
            if color[root].is_some() {
                continue;
            }
            color[root] = Some(true);
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                let c = color[v].unwrap();
                for &w in &self.adj[v] {
                    match color[w] {
                        None => {
                            color[w] = Some(!c);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == c => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(Bipartition::from_flags(color.into_iter().map(|c| c.unwrap()).collect()))
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    /// Isolated vertices are skipped.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for root in 0..self.n {
            if seen[root] || self.adj[root].is_empty() {
                continue;
            }
            let mut comp = vec![root];
            seen[root] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Serialises to the edge-list format: header `n m [bipartite L]`, then one `u v` per line.
    /// The bipartite tag is written only when the left side is a vertex prefix.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}", self.n, self.m());
        if let Some(l) = self.sides.as_ref().and_then(Bipartition::prefix_len) {
            s.push_str(&format!(" bipartite {l}"));
        }
        s.push('\n');
        for e in &self.edges {
            s.push_str(&format!("{} {}\n", e.u(), e.v()));
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let parse_num = |line: usize, tok: Option<&str>, what: &str| -> Result<usize, GraphError> {
            tok.ok_or_else(|| GraphError::Parse {
                line,
                msg: format!("missing {what}"),
            })?
            .parse()
            .map_err(|_| GraphError::Parse {
                line,
                msg: format!("bad {what}"),
            })
        };
        let mut toks = header.split_whitespace();
        let n = parse_num(hline, toks.next(), "vertex count")?;
        let m = parse_num(hline, toks.next(), "edge count")?;
        let left = match toks.next() {
            None => None,
            Some("bipartite") => Some(parse_num(hline, toks.next(), "left side size")?),
            Some(other) => {
                return Err(GraphError::Parse {
                    line: hline,
                    msg: format!("unexpected token `{other}`"),
                })
            }
        };
        if left.is_some_and(|l| l > n) {
            return Err(GraphError::Parse {
                line: hline,
                msg: "left side larger than n".into(),
            });
        }
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let mut t = l.split_whitespace();
            let u = parse_num(line, t.next(), "endpoint")?;
            let v = parse_num(line, t.next(), "endpoint")?;
            if t.next().is_some() {
                return Err(GraphError::Parse {
                    line,
                    msg: "trailing tokens".into(),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::EdgeCountMismatch {
                expected: m,
                found: edges.len(),
            });
        }
        let g = Graph::new(n, edges)?;
        match left {
            Some(l) => g.with_bipartition(Bipartition::prefix(l, n)),
            None => Ok(g),
        }
    }

    pub fn read_edge_list(path: impl AsRef<FsPath>) -> Result<Graph, GraphError> {
        Graph::parse_edge_list(&fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<FsPath>) -> Result<(), GraphError> {
        fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(GraphError::SelfLoop(1))));
        assert!(matches!(
            Graph::new(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(e)) if e == Edge::new(0, 1)
        ));
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(GraphError::VertexOutOfRange { vertex: 2, n: 2 })
        ));
    }

    #[test]
    fn adjacency_matches_edges() {
        let g = Graph::new(4, [(2, 0), (0, 1), (3, 0)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.degree(3), 1);
        assert!(g.has_edge(3, 0));
        assert!(!g.has_edge(1, 2));
        assert_eq!(g.edge_degree(Edge::new(0, 1)), 4);
        assert_eq!(g.edges()[0], Edge::new(0, 2));
    }

    #[test]
    fn bipartite_tag_is_checked() {
        assert!(Graph::bipartite(2, 2, [(0, 2), (1, 3)]).is_ok());
        assert!(matches!(
            Graph::bipartite(2, 2, [(0, 1)]),
            Err(GraphError::NotBipartite(_))
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::bipartite(2, 3, [(0, 2), (1, 4), (0, 3)]).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("5 3 bipartite 2\n"));
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_rejects_bad_input() {
        assert!(matches!(
            Graph::parse_edge_list("3 2\n0 1\n1 0\n"),
            Err(GraphError::DuplicateEdge(_))
        ));
        assert!(matches!(
            Graph::parse_edge_list("3 1\n2 2\n"),
            Err(GraphError::SelfLoop(2))
        ));
        assert!(matches!(
            Graph::parse_edge_list("3 2\n0 1\n"),
            Err(GraphError::EdgeCountMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            Graph::parse_edge_list("3 1 bipartite 1\n1 2\n"),
            Err(GraphError::NotBipartite(_))
        ));
        assert!(Graph::parse_edge_list("").is_err());
    }

    #[test]
    fn two_coloring_detects_odd_cycles() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(tri.two_coloring().is_none());
        let sq = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let c = sq.two_coloring().unwrap();
        assert!(sq.with_bipartition(c).is_ok());
    }

    #[test]
    fn union_dedups() {
        let a = [Edge::new(0, 1), Edge::new(1, 2)];
        let b = [Edge::new(2, 1), Edge::new(2, 3)];
        let g = Graph::union(4, [&a[..], &b[..]]).unwrap();
        assert_eq!(g.m(), 3);
    }
}
