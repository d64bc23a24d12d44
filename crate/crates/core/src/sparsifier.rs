//! Two-phase bounded edge-degree sparsifier (Bernstein's algorithm).
//!
//! Phase I keeps a subgraph `H` of the stream prefix in which every edge has
//! `deg_H(u) + deg_H(v) ≤ β₊`. An arriving edge is inserted when its edge-degree is
//! below `β₋`; afterwards, while some `H`-edge exceeds `β₊`, the smallest such edge
//! (lexicographically) is evicted. Phase II freezes `H` and keeps every edge whose
//! `H`-edge-degree is below `β₋` in `U`. The output is a maximum matching of `H ∪ U`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, Vertex};
use crate::matching::Matching;
use crate::oracle::max_matching;
use crate::stream::{EdgeStream, PhaseSplit, StreamError};

/// Default Phase II.A probability.
pub const DEFAULT_GAMMA: f64 = 2.0 / 3.0;
/// Default degree cap on the unmatched side of `T`.
pub const DEFAULT_B: usize = 500;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("{name} = {value} is outside its allowed range")]
    OutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Error)]
pub enum SparsifierError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("U grew past its safety cap of {cap} edges")]
    SafetyCapExceeded { cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Algorithm parameters.
///
/// `derive_params` gives `λ = ε/128`, `β₊ = 64·λ⁻²·ln(1/λ)` and `β₋ = (1−λ)·β₊`.
/// Those values are huge for small ε, so [`AlgoParams::with_betas`] sets the two
/// thresholds directly; `lambda` then becomes the smallest value with
/// `β₋ ≥ (1−λ)·β₊` (and never less than `ε/128`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub eps: f64,
    pub lambda: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub gamma: f64,
    pub b: usize,
    pub beta_override: bool,
    /// Maximum |U| before a run is aborted; `None` means `n·⌈log₂ n⌉·32`.
    pub u_cap: Option<usize>,
}

pub fn derive_params(eps: f64) -> Result<AlgoParams, ParamError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ParamError::OutOfRange {
            name: "eps",
            value: eps,
        });
    }
    let lambda = eps / 128.0;
    let beta_plus = 64.0 * lambda.powi(-2) * (1.0 / lambda).ln();
    Ok(AlgoParams {
        eps,
        lambda,
        beta_plus,
        beta_minus: (1.0 - lambda) * beta_plus,
        gamma: DEFAULT_GAMMA,
        b: DEFAULT_B,
        beta_override: false,
        u_cap: None,
    })
}

impl AlgoParams {
    pub fn with_betas(mut self, beta_plus: f64, beta_minus: f64) -> Result<Self, ParamError> {
        if !(beta_plus > 0.0 && beta_plus.is_finite()) {
            return Err(ParamError::OutOfRange {
                name: "beta_plus",
                value: beta_plus,
            });
        }
        if !(beta_minus > 0.0 && beta_minus <= beta_plus) {
            return Err(ParamError::OutOfRange {
                name: "beta_minus",
                value: beta_minus,
            });
        }
        let lambda = (1.0 - beta_minus / beta_plus).max(self.eps / 128.0);
        if lambda >= 0.5 {
            return Err(ParamError::OutOfRange {
                name: "beta_minus",
                value: beta_minus,
            });
        }
        self.beta_plus = beta_plus;
        self.beta_minus = beta_minus;
        self.lambda = lambda;
        self.beta_override = true;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self, ParamError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(ParamError::OutOfRange {
                name: "gamma",
                value: gamma,
            });
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_b(mut self, b: usize) -> Result<Self, ParamError> {
        if b < 2 {
            return Err(ParamError::OutOfRange {
                name: "b",
                value: b as f64,
            });
        }
        self.b = b;
        Ok(self)
    }

    pub fn with_u_cap(mut self, cap: usize) -> Self {
        self.u_cap = Some(cap);
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let check = |ok: bool, name: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(ParamError::OutOfRange { name, value })
            }
        };
        check(self.eps > 0.0 && self.eps < 0.5, "eps", self.eps)?;
        check(self.lambda > 0.0 && self.lambda < 0.5, "lambda", self.lambda)?;
        check(self.beta_minus <= self.beta_plus, "beta_minus", self.beta_minus)?;
        check(
            self.beta_minus >= (1.0 - self.lambda) * self.beta_plus * (1.0 - 1e-12),
            "beta_minus",
            self.beta_minus,
        )?;
        check(self.gamma > 0.0 && self.gamma < 1.0, "gamma", self.gamma)?;
        check(self.b >= 2, "b", self.b as f64)
    }

    pub fn u_cap_for(&self, n: usize) -> usize {
        self.u_cap.unwrap_or_else(|| default_u_cap(n))
    }
}

pub fn default_u_cap(n: usize) -> usize {
    let log = if n <= 1 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    };
    n.max(1) * log * 32
}

/// Incremental Phase I state.
#[derive(Clone, Debug)]
pub struct PhaseOneBuilder {
    beta_plus: f64,
    beta_minus: f64,
    degree: Vec<usize>,
    incident: Vec<BTreeSet<Vertex>>,
    evictions: usize,
}

impl PhaseOneBuilder {
    pub fn new(n: usize, params: &AlgoParams) -> Self {
        PhaseOneBuilder {
            beta_plus: params.beta_plus,
            beta_minus: params.beta_minus,
            degree: vec![0; n],
            incident: vec![BTreeSet::new(); n],
            evictions: 0,
        }
    }

    /// Offers one arriving edge; returns whether it was inserted.
    pub fn offer(&mut self, e: Edge) -> bool {
        let (u, v) = (e.u(), e.v());
        if ((self.degree[u] + self.degree[v]) as f64) >= self.beta_minus || self.incident[u].contains(&v) {
            return false;
        }
        self.add(u, v);
        // Only edges at u or v can have become overfull.
        while let Some(victim) = self.smallest_violation(u, v) {
            self.remove(victim.u(), victim.v());
            self.evictions += 1;
        }
        true
    }

    fn smallest_violation(&self, u: Vertex, v: Vertex) -> Option<Edge> {
        [u, v]
            .into_iter()
            .flat_map(|x| {
                self.incident[x]
                    .iter()
                    .filter(move |&&w| ((self.degree[x] + self.degree[w]) as f64) > self.beta_plus)
                    .map(move |&w| Edge::new(x, w))
            })
            .min()
    }

    fn add(&mut self, u: Vertex, v: Vertex) {
        self.incident[u].insert(v);
        self.incident[v].insert(u);
        self.degree[u] += 1;
        self.degree[v] += 1;
    }

    fn remove(&mut self, u: Vertex, v: Vertex) {
        self.incident[u].remove(&v);
        self.incident[v].remove(&u);
        self.degree[u] -= 1;
        self.degree[v] -= 1;
    }

    pub fn evictions(&self) -> usize {
        self.evictions
    }

    /// `H` with edges in ascending order.
    pub fn finish(&self, parent: &Graph) -> Result<Graph, GraphError> {
        let edges: Vec<Edge> = self
            .incident
            .iter()
            .enumerate()
            .flat_map(|(u, ws)| ws.range(u + 1..).map(move |&w| Edge::new(u, w)))
            .collect();
        parent.tag_like(Graph::new(parent.n(), edges)?)
    }
}

/// Builds `H` from the Phase I prefix. `parent` supplies the vertex set and bipartition.
pub fn phase1_build_h(parent: &Graph, prefix: &[Edge], params: &AlgoParams) -> Graph {
    let mut b = PhaseOneBuilder::new(parent.n(), params);
    for &e in prefix {
        b.offer(e);
    }
    b.finish(parent).expect("H is a subgraph of the parent")
}

/// True iff `e` belongs in `U` given frozen `h`.
#[inline]
pub fn is_underfull(h: &Graph, e: Edge, beta_minus: f64) -> bool {
    (h.edge_degree(e) as f64) < beta_minus
}

/// Suffix edges whose `H`-edge-degree is below `β₋`, in arrival order.
pub fn phase2_collect_u(suffix: &[Edge], h: &Graph, params: &AlgoParams) -> Vec<Edge> {
    suffix
        .iter()
        .copied()
        .filter(|&e| is_underfull(h, e, params.beta_minus))
        .collect()
}

/// Streaming Phase II collector with the safety cap.
#[derive(Clone, Debug)]
pub struct UCollector {
    beta_minus: f64,
    cap: usize,
    edges: Vec<Edge>,
}

impl UCollector {
    pub fn new(n: usize, params: &AlgoParams) -> Self {
        UCollector {
            beta_minus: params.beta_minus,
            cap: params.u_cap_for(n),
            edges: Vec::new(),
        }
    }

    pub fn offer(&mut self, h: &Graph, e: Edge) -> Result<bool, SparsifierError> {
        if !is_underfull(h, e, self.beta_minus) {
            return Ok(false);
        }
        if self.edges.len() >= self.cap {
            return Err(SparsifierError::SafetyCapExceeded { cap: self.cap });
        }
        self.edges.push(e);
        Ok(true)
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }
}

/// The frozen pair `(H, U)`.
#[derive(Clone, Debug)]
pub struct Sparsifier {
    pub h: Graph,
    pub u: Vec<Edge>,
}

impl Sparsifier {
    /// `H ∪ U` as a graph carrying the parent's bipartition.
    pub fn union_graph(&self, parent: &Graph) -> Result<Graph, GraphError> {
        parent.tag_like(Graph::union(parent.n(), [self.h.edges(), &self.u[..]])?)
    }

    /// `|H| + |U|`, the stored edge count.
    pub fn stored_edges(&self) -> usize {
        self.h.m() + self.u.len()
    }
}

#[derive(Clone, Debug)]
pub struct BernsteinOutcome {
    pub matching: Matching,
    pub sparsifier: Sparsifier,
    pub split: PhaseSplit,
}

/// Runs both phases over `stream` and returns a maximum matching of `H ∪ U`.
pub fn bernstein_match(stream: &EdgeStream<'_>, params: &AlgoParams) -> Result<BernsteinOutcome, SparsifierError> {
    params.validate()?;
    let g = stream.graph();
    let split = PhaseSplit::without_subphases(stream.len(), params.eps)?;
    let h = phase1_build_h(g, &stream.range(split.phase_one()), params);
    let mut u = UCollector::new(g.n(), params);
    for pos in split.phase_two() {
        u.offer(&h, stream.at(pos))?;
    }
    let sparsifier = Sparsifier { h, u: u.into_edges() };
    let matching = max_matching(&sparsifier.union_graph(g)?);
    Ok(BernsteinOutcome {
        matching,
        sparsifier,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::make_stream;

    fn desk(bp: f64, bm: f64) -> AlgoParams {
        derive_params(0.1).unwrap().with_betas(bp, bm).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let p = derive_params(0.01).unwrap();
        assert!((p.lambda - 7.8125e-5).abs() < 1e-18);
        assert!((p.beta_minus / p.beta_plus - 0.999921875).abs() < 1e-12);
        let expected_bp = 64.0 / (7.8125e-5f64 * 7.8125e-5) * (1.0 / 7.8125e-5f64).ln();
        assert!((p.beta_plus - expected_bp).abs() / expected_bp < 1e-12);
        assert_eq!(p.gamma, 2.0 / 3.0);
        assert_eq!(p.b, 500);
        p.validate().unwrap();
    }

    #[test]
    fn smaller_eps_gives_larger_beta() {
        let eps = [0.4, 0.2, 0.1, 0.05, 0.01, 0.001];
        let betas: Vec<f64> = eps.iter().map(|&e| derive_params(e).unwrap().beta_plus).collect();
        assert!(betas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eps_range_is_enforced() {
        assert!(derive_params(0.0).is_err());
        assert!(derive_params(0.5).is_err());
        assert!(derive_params(-1.0).is_err());
    }

    #[test]
    fn overrides_set_effective_lambda() {
        let p = derive_params(0.05).unwrap().with_betas(50.0, 45.0).unwrap();
        assert!((p.lambda - 0.1).abs() < 1e-12);
        p.validate().unwrap();
        assert!(derive_params(0.05).unwrap().with_betas(10.0, 20.0).is_err());
        assert!(derive_params(0.05).unwrap().with_betas(10.0, 4.0).is_err());
    }

    #[test]
    fn star_keeps_three_edges_under_tight_caps() {
        let star = Graph::new(6, (1..6).map(|i| (0, i))).unwrap();
        let prefix: Vec<Edge> = star.edges().to_vec();
        let h = phase1_build_h(&star, &prefix, &desk(4.0, 3.0));
        assert_eq!(h.m(), 3);
        assert!(h.edges().iter().all(|&e| h.edge_degree(e) <= 4));
        // Any order gives the same count on a star.
        let rev: Vec<Edge> = prefix.iter().rev().copied().collect();
        assert_eq!(phase1_build_h(&star, &rev, &desk(4.0, 3.0)).m(), 3);
    }

    #[test]
    fn slack_caps_keep_the_whole_prefix() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let cap = 2.0 * g.max_degree() as f64 + 1.0;
        let h = phase1_build_h(&g, g.edges(), &desk(cap, cap * 0.95));
        assert_eq!(h.m(), g.m());
        assert_eq!(phase1_build_h(&g, &[], &desk(4.0, 3.0)).m(), 0);
    }

    #[test]
    fn eviction_restores_the_upper_bound() {
        // Path 0-1-2-3 built as 0-1, 2-3, then the middle edge 1-2.
        let g = Graph::new(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        let p = derive_params(0.1).unwrap().with_betas(4.0, 3.6).unwrap();
        let mut b = PhaseOneBuilder::new(4, &p);
        assert!(b.offer(Edge::new(0, 1)));
        assert!(b.offer(Edge::new(2, 3)));
        assert!(b.offer(Edge::new(1, 2)));
        // Edge-degrees are now 3, 4, 3: all within β₊ = 4.
        let h = b.finish(&g).unwrap();
        assert_eq!(h.m(), 3);
        assert_eq!(b.evictions(), 0);

        let p = derive_params(0.1).unwrap().with_betas(3.0, 2.5).unwrap();
        let mut b = PhaseOneBuilder::new(4, &p);
        b.offer(Edge::new(0, 1));
        b.offer(Edge::new(2, 3));
        // edge-degree of (1,2) is 2 < 2.5 so it goes in; (1,2) then has edge-degree 4 > 3,
        // as do none of the others; the smallest violator is (1,2) itself.
        assert!(b.offer(Edge::new(1, 2)));
        assert_eq!(b.evictions(), 1);
        let h = b.finish(&g).unwrap();
        assert_eq!(h.edges(), &[Edge::new(0, 1), Edge::new(2, 3)]);
    }

    #[test]
    fn u_takes_everything_when_h_is_empty() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let h = Graph::empty(4);
        assert_eq!(phase2_collect_u(g.edges(), &h, &desk(4.0, 3.0)), g.edges());
    }

    #[test]
    fn u_is_empty_when_degrees_are_high() {
        // H = K_{2,3}-ish hub: vertices 0 and 1 both have degree 3 in H.
        let h = Graph::new(8, [(0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7)]).unwrap();
        let suffix = [Edge::new(0, 1)];
        assert!(phase2_collect_u(&suffix, &h, &desk(6.0, 5.5)).is_empty());
    }

    #[test]
    fn matched_pair_suffix_edge_is_underfull() {
        // H is a perfect matching {0-1, 2-3}; suffix edge 1-2 has edge-degree 2 < 3.
        let h = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let u = phase2_collect_u(&[Edge::new(1, 2)], &h, &desk(4.0, 3.0));
        assert_eq!(u, vec![Edge::new(1, 2)]);
    }

    #[test]
    fn perfect_matching_graph_is_recovered() {
        let g = Graph::new(40, (0..20).map(|i| (2 * i, 2 * i + 1))).unwrap();
        for seed in 0..5 {
            let s = make_stream(&g, seed).unwrap();
            let out = bernstein_match(&s, &desk(4.0, 3.0)).unwrap();
            assert_eq!(out.matching.len(), 20);
        }
    }

    #[test]
    fn safety_cap_aborts() {
        let g = Graph::new(40, (0..20).map(|i| (2 * i, 2 * i + 1))).unwrap();
        let s = make_stream(&g, 1).unwrap();
        let p = desk(4.0, 3.0).with_u_cap(3);
        assert!(matches!(
            bernstein_match(&s, &p),
            Err(SparsifierError::SafetyCapExceeded { cap: 3 })
        ));
    }

    #[test]
    fn default_cap_formula() {
        assert_eq!(default_u_cap(1024), 1024 * 10 * 32);
        assert_eq!(default_u_cap(1000), 1000 * 10 * 32);
        assert_eq!(default_u_cap(2), 2 * 32);
    }
}
