//! The augmentation algorithm on top of the sparsifier, plus the greedy baseline.
//!
//! After Phase I fixes `M_H`, Phase II.A greedily builds a (2, b)-matching `T` between
//! `M_H`-matched vertices (cap 2) and unmatched ones (cap b). Phase II.B starts from
//! `M = M_H` and, on every arrival `e`, applies augmenting paths of length ≤ 5 inside
//! `M ∪ T ∪ {e}` until none remains. `U` is collected over all of Phase II. The output
//! is a maximum matching of `M ∪ H ∪ U`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augpath;
use crate::graph::{Edge, Graph, Vertex};
use crate::matching::{Matching, Path};
use crate::oracle::max_matching;
use crate::sparsifier::{AlgoParams, PhaseOneBuilder, Sparsifier, SparsifierError, UCollector};
use crate::stream::{EdgeStream, PhaseSplit};

/// Longest augmenting path Phase II.B looks for.
pub const MAX_AUGMENTING_LEN: usize = 5;

/// Greedy maximal matching in arrival order.
pub fn greedy_match(stream: &EdgeStream<'_>) -> Matching {
    let mut m = Matching::new(stream.graph().n());
    for e in stream.iter() {
        if !m.is_matched(e.u()) && !m.is_matched(e.v()) {
            m.insert(e).expect("both endpoints free");
        }
    }
    m
}

/// A (2, b)-matching between `V(M_H)` and the rest.
#[derive(Clone, Debug)]
pub struct TwoBMatching {
    b: usize,
    on_matched_side: Vec<bool>,
    degree: Vec<usize>,
    edges: Vec<Edge>,
    adj: Vec<Vec<Vertex>>,
    touched: Vec<Vertex>,
}

/// A broken (2, b)-matching invariant found by [`TwoBMatching::verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TViolation {
    CapExceeded(Vertex),
    NotInGh(Edge),
    /// Admissible edge skipped although both caps had room.
    NotMaximal(Edge),
    /// Edge in `T` that the greedy rule would have rejected.
    Inadmissible(Edge),
}

impl TwoBMatching {
    pub fn new(m_h: &Matching, b: usize) -> Self {
        assert!(b >= 2, "b must be at least 2");
        let n = m_h.n();
        TwoBMatching {
            b,
            on_matched_side: (0..n).map(|v| m_h.is_matched(v)).collect(),
            degree: vec![0; n],
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            touched: Vec::new(),
        }
    }

    /// Whether `e` is an edge of `G_H` (exactly one endpoint matched by `M_H`).
    #[inline]
    pub fn in_gh(&self, e: Edge) -> bool {
        self.on_matched_side[e.u()] != self.on_matched_side[e.v()]
    }

    fn cap(&self, v: Vertex) -> usize {
        if self.on_matched_side[v] {
            2
        } else {
            self.b
        }
    }

    fn has_room(&self, e: Edge) -> bool {
        self.degree[e.u()] < self.cap(e.u()) && self.degree[e.v()] < self.cap(e.v())
    }

    /// Offers one Phase II.A arrival; returns whether it joined `T`.
    pub fn offer(&mut self, e: Edge) -> bool {
        if !self.in_gh(e) || !self.has_room(e) {
            return false;
        }
        for x in [e.u(), e.v()] {
            if self.degree[x] == 0 {
                self.touched.push(x);
            }
            self.degree[x] += 1;
            let pos = self.adj[x].partition_point(|&w| w < e.other(x));
            self.adj[x].insert(pos, e.other(x));
        }
        self.edges.push(e);
        true
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.degree[v]
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.adj[e.u()].binary_search(&e.v()).is_ok()
    }

    /// Unmatched-side vertices with at least one `T` edge, ascending.
    fn free_side_vertices(&self) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self
            .touched
            .iter()
            .copied()
            .filter(|&x| !self.on_matched_side[x])
            .collect();
        v.sort_unstable();
        v
    }

    /// Replays `phase2a` against the caps and reports the first invariant that fails:
    /// caps, `G_H` membership, and that an edge was skipped only when a cap was full.
    pub fn verify(&self, phase2a: &[Edge]) -> Result<(), TViolation> {
        let n = self.degree.len();
        if let Some(v) = (0..n).find(|&v| self.degree[v] > self.cap(v)) {
            return Err(TViolation::CapExceeded(v));
        }
        if let Some(&e) = self.edges.iter().find(|&&e| !self.in_gh(e)) {
            return Err(TViolation::NotInGh(e));
        }
        let mut deg = vec![0usize; n];
        for &e in phase2a {
            if !self.in_gh(e) {
                if self.contains(e) {
                    return Err(TViolation::NotInGh(e));
                }
                continue;
            }
            let room = deg[e.u()] < self.cap(e.u()) && deg[e.v()] < self.cap(e.v());
            match (room, self.contains(e)) {
                (true, true) => {
                    deg[e.u()] += 1;
                    deg[e.v()] += 1;
                }
                (true, false) => return Err(TViolation::NotMaximal(e)),
                (false, true) => return Err(TViolation::Inadmissible(e)),
                (false, false) => {}
            }
        }
        Ok(())
    }
}

/// Greedy maximal (2, b)-matching of the `G_H` edges among `phase2a`, in arrival order.
pub fn build_t(phase2a: &[Edge], m_h: &Matching, b: usize) -> TwoBMatching {
    let mut t = TwoBMatching::new(m_h, b);
    for &e in phase2a {
        t.offer(e);
    }
    t
}

/// One augmentation applied during Phase II.B.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedPath {
    /// 0-based stream position of the edge whose arrival triggered the search.
    pub arrival: usize,
    pub trigger: Edge,
    pub vertices: Vec<Vertex>,
    pub size_before: usize,
    pub size_after: usize,
}

impl AppliedPath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 2
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::new(w[0], w[1]))
    }
}

/// `M` together with the log of applied paths.
#[derive(Clone, Debug)]
pub struct AugmentationState {
    pub matching: Matching,
    pub log: Vec<AppliedPath>,
}

impl AugmentationState {
    pub fn new(m_h: &Matching) -> Self {
        AugmentationState {
            matching: m_h.clone(),
            log: Vec::new(),
        }
    }

    /// Counts of applied paths of length 1, 3 and 5.
    pub fn histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for p in &self.log {
            h[p.len() / 2] += 1;
        }
        h
    }
}

/// Searches `M ∪ T ∪ {e}` for one augmenting path of length ≤ `max_len`.
fn find_in_universe(m: &Matching, t: &TwoBMatching, e: Edge, starts: &[Vertex], max_len: usize) -> Option<Path> {
    augpath::search(m, starts, max_len, |v, out| {
        let base = t.neighbors(v);
        if e.touches(v) {
            let w = e.other(v);
            let pos = base.partition_point(|&x| x < w);
            out.extend_from_slice(&base[..pos]);
            if base.get(pos) != Some(&w) {
                out.push(w);
            }
            out.extend_from_slice(&base[pos..]);
        } else {
            out.extend_from_slice(base);
        }
    })
}

/// Processes one Phase II.B arrival: applies augmenting paths of length ≤ 5 found in
/// `M ∪ T ∪ {e}` (shortest first, lowest free vertex first) until none is left.
/// Returns how many were applied.
pub fn phase2b_step(state: &mut AugmentationState, t: &TwoBMatching, e: Edge, arrival: usize) -> usize {
    // Every free vertex with an edge in the universe is an unmatched-side T vertex or
    // an endpoint of e; augmentation never frees a vertex.
    let mut starts = t.free_side_vertices();
    for x in [e.u(), e.v()] {
        if let Err(pos) = starts.binary_search(&x) {
            starts.insert(pos, x);
        }
    }
    let mut applied = 0;
    while let Some(p) = find_in_universe(&state.matching, t, e, &starts, MAX_AUGMENTING_LEN) {
        let size_before = state.matching.len();
        state
            .matching
            .augment(&p)
            .expect("search only returns augmenting paths");
        state.log.push(AppliedPath {
            arrival,
            trigger: e,
            vertices: p.vertices().to_vec(),
            size_before,
            size_after: state.matching.len(),
        });
        applied += 1;
    }
    applied
}

/// Everything a run of the augmentation algorithm produced, for reporting and checks.
#[derive(Clone, Debug)]
pub struct TrialDiagnostics {
    pub split: PhaseSplit,
    pub sparsifier: Sparsifier,
    pub m_h: Matching,
    pub t: TwoBMatching,
    pub augmented: AugmentationState,
    /// μ(H ∪ U).
    pub mu_hu: usize,
}

impl TrialDiagnostics {
    pub fn path_histogram(&self) -> [usize; 3] {
        self.augmented.histogram()
    }
}

/// Full single-pass run: Phase I sparsifier, `M_H`, `τ ~ B(m − ⌈εm⌉, γ)`, `T` over II.A,
/// augmentation over II.B, `U` over all of Phase II, then a maximum matching of
/// `M ∪ H ∪ U`.
pub fn beats23_match<R: Rng + ?Sized>(
    stream: &EdgeStream<'_>,
    params: &AlgoParams,
    rng: &mut R,
) -> Result<(Matching, TrialDiagnostics), SparsifierError> {
    params.validate()?;
    let g = stream.graph();
    let split = PhaseSplit::draw(stream.len(), params.eps, params.gamma, rng)?;

    let mut phase_one = PhaseOneBuilder::new(g.n(), params);
    for pos in split.phase_one() {
        phase_one.offer(stream.at(pos));
    }
    let h = phase_one.finish(g)?;
    let m_h = max_matching(&h);

    let mut u = UCollector::new(g.n(), params);
    let mut t = TwoBMatching::new(&m_h, params.b);
    for pos in split.phase_two_a() {
        let e = stream.at(pos);
        u.offer(&h, e)?;
        t.offer(e);
    }
    let mut state = AugmentationState::new(&m_h);
    for pos in split.phase_two_b() {
        let e = stream.at(pos);
        u.offer(&h, e)?;
        phase2b_step(&mut state, &t, e, pos);
    }

    let sparsifier = Sparsifier { h, u: u.into_edges() };
    let hu = sparsifier.union_graph(g)?;
    let mu_hu = max_matching(&hu).len();
    let m_edges = state.matching.edges();
    let final_graph = g.tag_like(Graph::union(
        g.n(),
        [&m_edges[..], sparsifier.h.edges(), &sparsifier.u[..]],
    )?)?;
    let output = max_matching(&final_graph);
    Ok((
        output,
        TrialDiagnostics {
            split,
            sparsifier,
            m_h,
            t,
            augmented: state,
            mu_hu,
        },
    ))
}

/// Checks one run of [`beats23_match`] for soundness and returns every violation found:
/// `T` caps and maximality, path lengths, one-step growth of `M`, path edges outside `M`
/// lying in `T` or being the trigger, and the output dominating `M` and `H ∪ U`.
pub fn soundness_violations(stream: &EdgeStream<'_>, diag: &TrialDiagnostics, output: &Matching) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(v) = diag.t.verify(&stream.range(diag.split.phase_two_a())) {
        out.push(format!("T invariant: {v:?}"));
    }
    let mut size = diag.m_h.len();
    for p in &diag.augmented.log {
        if !matches!(p.len(), 1 | 3 | 5) {
            out.push(format!("path of length {} at arrival {}", p.len(), p.arrival));
        }
        if p.size_before != size || p.size_after != size + 1 {
            out.push(format!(
                "size {} -> {} at arrival {}",
                p.size_before, p.size_after, p.arrival
            ));
        }
        size = p.size_after;
        for e in p.edges().step_by(2) {
            if e != p.trigger && !diag.t.contains(e) {
                out.push(format!(
                    "edge {e} of a path at arrival {} is outside T and the trigger",
                    p.arrival
                ));
            }
        }
    }
    if size != diag.augmented.matching.len() {
        out.push(format!(
            "log ends at {size} but |M| = {}",
            diag.augmented.matching.len()
        ));
    }
    if !output.is_subset_of(stream.graph()) {
        out.push("output uses a non-edge".into());
    }
    if output.len() < diag.augmented.matching.len().max(diag.mu_hu) {
        out.push(format!(
            "output {} below max(|M| = {}, mu(H+U) = {})",
            output.len(),
            diag.augmented.matching.len(),
            diag.mu_hu
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsifier::derive_params;
    use crate::stream::{make_stream, rng_for};

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;
    const E: usize = 4;
    const F: usize = 5;

    #[test]
    fn greedy_falls_into_the_p4_trap() {
        let g = Graph::new(4, [(B, C), (A, B), (C, D)]).unwrap();
        let s = EdgeStream::identity(&g).unwrap();
        let m = greedy_match(&s);
        assert_eq!(m.edges(), vec![Edge::new(B, C)]);
    }

    #[test]
    fn greedy_is_perfect_on_a_perfect_matching() {
        let g = Graph::new(10, (0..5).map(|i| (2 * i, 2 * i + 1))).unwrap();
        assert_eq!(greedy_match(&make_stream(&g, 3).unwrap()).len(), 5);
    }

    #[test]
    fn t_is_empty_without_m_h() {
        let m_h = Matching::new(4);
        let t = build_t(&[Edge::new(0, 1), Edge::new(2, 3)], &m_h, 2);
        assert!(t.is_empty());
    }

    #[test]
    fn t_skips_edges_outside_gh() {
        // M_H = {x, y} = {0, 1}; u = 2, z = 3 unmatched.
        let m_h = Matching::from_edges(4, [(0, 1)]).unwrap();
        let arrivals = [Edge::new(2, 0), Edge::new(2, 1), Edge::new(2, 3)];
        let t = build_t(&arrivals, &m_h, 500);
        assert_eq!(t.edges(), &[Edge::new(0, 2), Edge::new(1, 2)]);
        t.verify(&arrivals).unwrap();
    }

    #[test]
    fn unmatched_cap_binds() {
        // u = 0 unmatched; matched pairs (1,6), (2,7), (3,8), (4,9), (5,10).
        let m_h = Matching::from_edges(11, (1..6).map(|i| (i, i + 5))).unwrap();
        let arrivals: Vec<Edge> = (1..6).map(|i| Edge::new(0, i)).collect();
        let t = build_t(&arrivals, &m_h, 2);
        assert_eq!(t.edges(), &[Edge::new(0, 1), Edge::new(0, 2)]);
        t.verify(&arrivals).unwrap();
    }

    #[test]
    fn matched_cap_binds() {
        // matched vertex 0 (mate 1) sees three unmatched neighbours.
        let m_h = Matching::from_edges(5, [(0, 1)]).unwrap();
        let arrivals = [Edge::new(0, 2), Edge::new(0, 3), Edge::new(0, 4)];
        let t = build_t(&arrivals, &m_h, 500);
        assert_eq!(t.len(), 2);
        assert_eq!(t.degree(0), 2);
    }

    #[test]
    fn verify_catches_non_maximal_t() {
        let m_h = Matching::from_edges(4, [(0, 1)]).unwrap();
        let arrivals = [Edge::new(2, 0), Edge::new(3, 1)];
        let t = build_t(&arrivals[..1], &m_h, 500);
        assert_eq!(t.verify(&arrivals), Err(TViolation::NotMaximal(Edge::new(1, 3))));
    }

    #[test]
    fn length_three_through_t() {
        let m_h = Matching::from_edges(8, [(B, C)]).unwrap();
        let t = build_t(&[Edge::new(A, B), Edge::new(C, D)], &m_h, 500);
        let mut st = AugmentationState::new(&m_h);
        // An unrelated edge 6-7 arrives; both endpoints are free so it also augments.
        let applied = phase2b_step(&mut st, &t, Edge::new(6, 7), 10);
        assert_eq!(applied, 2);
        assert_eq!(st.log[0].vertices, vec![6, 7]);
        assert_eq!(st.log[1].vertices, vec![A, B, C, D]);
        assert_eq!(st.matching.len(), 3);
        assert_eq!(st.histogram(), [1, 1, 0]);
    }

    #[test]
    fn length_five_uses_the_arriving_middle_edge() {
        let m_h = Matching::from_edges(6, [(B, C), (D, E)]).unwrap();
        let t = build_t(&[Edge::new(A, B), Edge::new(E, F)], &m_h, 500);
        let mut st = AugmentationState::new(&m_h);
        assert_eq!(phase2b_step(&mut st, &t, Edge::new(C, D), 3), 1);
        assert_eq!(st.log[0].vertices, vec![A, B, C, D, E, F]);
        assert_eq!(st.matching.len(), 3);
    }

    #[test]
    fn no_path_leaves_state_unchanged() {
        let m_h = Matching::from_edges(6, [(B, C), (D, E)]).unwrap();
        let t = build_t(&[Edge::new(A, B)], &m_h, 500);
        let mut st = AugmentationState::new(&m_h);
        assert_eq!(phase2b_step(&mut st, &t, Edge::new(C, D), 0), 0);
        assert_eq!(st.matching, m_h);
        assert!(st.log.is_empty());
    }

    #[test]
    fn beats23_is_exact_on_perfect_matchings() {
        let g = Graph::new(200, (0..100).map(|i| (2 * i, 2 * i + 1))).unwrap();
        let p = derive_params(0.05).unwrap().with_betas(4.0, 3.0).unwrap();
        for seed in 0..5 {
            let s = make_stream(&g, seed).unwrap();
            let (out, diag) = beats23_match(&s, &p, &mut rng_for(seed, 1)).unwrap();
            assert_eq!(out.len(), 100);
            assert!(soundness_violations(&s, &diag, &out).is_empty());
        }
    }
}
