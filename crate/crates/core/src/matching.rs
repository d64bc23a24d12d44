//! Matchings, alternating paths and the `M ⊕ P` / `M Δ M'` operations.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Edge, Graph, Vertex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("vertex {0} is already matched")]
    Conflict(Vertex),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("not an augmenting path: {0}")]
    NotAugmenting(&'static str),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("a path needs at least two vertices")]
    TooShort,
    #[error("vertex {0} repeats")]
    RepeatedVertex(Vertex),
    #[error("{0} is not in the edge universe")]
    MissingEdge(Edge),
}

/// A set of vertex-disjoint edges with constant-time partner lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<Option<Vertex>>,
    size: usize,
}

impl Matching {
    pub fn new(n: usize) -> Self {
        Matching {
            mate: vec![None; n],
            size: 0,
        }
    }

    pub fn from_edges<I, E>(n: usize, edges: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut m = Matching::new(n);
        for e in edges {
            m.insert(e.into())?;
        }
        Ok(m)
    }

    /// Builds a matching from a partner array. Panics if the array is not an involution.
    pub(crate) fn from_mates(mate: Vec<Option<Vertex>>) -> Self {
        let mut size = 0;
        for (v, &w) in mate.iter().enumerate() {
            if let Some(w) = w {
                assert_eq!(mate[w], Some(v), "partner map is not an involution");
                if v < w {
                    size += 1;
                }
            }
        }
        Matching { mate, size }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.mate.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        self.mate[v]
    }

    #[inline]
    pub fn is_matched(&self, v: Vertex) -> bool {
        self.mate[v].is_some()
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        self.mate[e.u()] == Some(e.v())
    }

    pub fn insert(&mut self, e: Edge) -> Result<(), MatchingError> {
        let n = self.n();
        for x in [e.u(), e.v()] {
            if x >= n {
                return Err(MatchingError::VertexOutOfRange { vertex: x, n });
            }
            if self.mate[x].is_some() {
                return Err(MatchingError::Conflict(x));
            }
        }
        if e.u() == e.v() {
            return Err(MatchingError::Conflict(e.u()));
        }
        self.mate[e.u()] = Some(e.v());
        self.mate[e.v()] = Some(e.u());
        self.size += 1;
        Ok(())
    }

    /// Removes `e` if present; returns whether it was.
    pub fn remove(&mut self, e: Edge) -> bool {
        if !self.contains(e) {
            return false;
        }
        self.mate[e.u()] = None;
        self.mate[e.v()] = None;
        self.size -= 1;
        true
    }

    /// Matched edges, ascending by smaller endpoint.
    pub fn edges(&self) -> Vec<Edge> {
        self.mate
            .iter()
            .enumerate()
            .filter_map(|(v, &w)| w.filter(|&w| v < w).map(|w| Edge::new(v, w)))
            .collect()
    }

    pub fn matched_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n()).filter(|&v| self.mate[v].is_some())
    }

    /// True if every matched edge is an edge of `g`.
    pub fn is_subset_of(&self, g: &Graph) -> bool {
        self.n() <= g.n() && self.edges().iter().all(|e| g.has_edge(e.u(), e.v()))
    }

    /// Flips the edges of an augmenting path in place.
    pub fn augment(&mut self, p: &Path) -> Result<(), MatchingError> {
        let vs = p.vertices();
        if vs.iter().any(|&v| v >= self.n()) {
            return Err(MatchingError::NotAugmenting("vertex out of range"));
        }
        if p.len().is_multiple_of(2) {
            return Err(MatchingError::NotAugmenting("even length"));
        }
        let (first, last) = (vs[0], vs[vs.len() - 1]);
        if self.is_matched(first) || self.is_matched(last) {
            return Err(MatchingError::NotAugmenting("matched endpoint"));
        }
        for (i, e) in p.edges().enumerate() {
            if self.contains(e) != (i % 2 == 1) {
                return Err(MatchingError::NotAugmenting("edges do not alternate"));
            }
        }
        let before = self.size;
        for e in p.edges().skip(1).step_by(2) {
            self.remove(e);
        }
        for e in p.edges().step_by(2) {
            self.mate[e.u()] = Some(e.v());
            self.mate[e.v()] = Some(e.u());
        }
        self.size = before + 1;
        Ok(())
    }
}

/// An ordered edge collection with deterministic iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeSet(BTreeSet<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        EdgeSet(BTreeSet::new())
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        self.0.insert(e)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().copied()
    }

    /// Largest endpoint plus one.
    pub fn vertex_bound(&self) -> usize {
        self.0.iter().map(|e| e.v() + 1).max().unwrap_or(0)
    }
}

impl<E: Into<Edge>> FromIterator<E> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = E>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().map(Into::into).collect())
    }
}

/// A simple path given by its vertex sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<Vertex>,
}

impl Path {
    /// Validates distinctness and that consecutive vertices are joined by edges of `universe`.
    pub fn new(vertices: Vec<Vertex>, universe: &EdgeSet) -> Result<Self, PathError> {
        let p = Path::unchecked(vertices)?;
        if let Some(e) = p.edges().find(|&e| !universe.contains(e)) {
            return Err(PathError::MissingEdge(e));
        }
        Ok(p)
    }

    /// Validates distinctness only; adjacency is the caller's responsibility.
    pub(crate) fn unchecked(vertices: Vec<Vertex>) -> Result<Self, PathError> {
        if vertices.len() < 2 {
            return Err(PathError::TooShort);
        }
        let mut seen = BTreeSet::new();
        if let Some(&v) = vertices.iter().find(|&&v| !seen.insert(v)) {
            return Err(PathError::RepeatedVertex(v));
        }
        Ok(Path { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::new(w[0], w[1]))
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.vertices[0], self.vertices[self.vertices.len() - 1])
    }

    /// Whether this path augments `m`: odd length, free endpoints, alternating edges.
    pub fn is_augmenting_for(&self, m: &Matching) -> bool {
        m.clone().augment(self).is_ok()
    }
}

/// `M ⊕ P`: returns a new matching one larger than `m`.
pub fn apply_augmenting_path(m: &Matching, p: &Path) -> Result<Matching, MatchingError> {
    let mut out = m.clone();
    out.augment(p)?;
    Ok(out)
}

/// Graph on the common vertex set whose edges lie in exactly one of the two matchings.
pub fn symmetric_difference(m1: &Matching, m2: &Matching) -> Graph {
    assert_eq!(m1.n(), m2.n(), "matchings over different vertex sets");
    let mut edges: Vec<Edge> = m1.edges().into_iter().filter(|&e| !m2.contains(e)).collect();
    edges.extend(m2.edges().into_iter().filter(|&e| !m1.contains(e)));
    edges.sort_unstable();
    Graph::new(m1.n(), edges).expect("union of two matchings minus overlap is simple")
}
