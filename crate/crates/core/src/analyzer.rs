//! Runtime checks of the sparsifier's structural guarantees and the augmenting-path
//! bookkeeping behind the augmentation algorithm.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augmenter::TrialDiagnostics;
use crate::graph::{Edge, Graph, GraphError, Vertex};
use crate::matching::{symmetric_difference, Matching};
use crate::oracle::max_matching;
use crate::sparsifier::AlgoParams;
use crate::stream::{EdgeStream, Phase, PhaseSplit};

/// Outcome of [`check_edcs`]. Every list is empty on a correct sparsifier output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdcsReport {
    /// `H` edges that are not edges of the input graph.
    pub not_in_g: Vec<Edge>,
    /// `H` edges whose edge-degree in `H` exceeds `β₊`.
    pub degree_violations: Vec<Edge>,
    /// Underfull suffix edges missing from `U`.
    pub missing_u: Vec<Edge>,
    /// `U` members that are not underfull suffix edges (or are repeated).
    pub extra_u: Vec<Edge>,
}

impl EdcsReport {
    pub fn degree_bound_holds(&self) -> bool {
        self.not_in_g.is_empty() && self.degree_violations.is_empty()
    }

    pub fn u_exact(&self) -> bool {
        self.missing_u.is_empty() && self.extra_u.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.degree_bound_holds() && self.u_exact()
    }
}

/// Checks the edge-degree cap on `H` and rescans `suffix` to confirm that `u` holds
/// exactly the edges whose `H`-edge-degree is below `β₋`.
pub fn check_edcs(g: &Graph, h: &Graph, u: &[Edge], params: &AlgoParams, suffix: &[Edge]) -> EdcsReport {
    let mut report = EdcsReport::default();
    let deg = |v: Vertex| if v < h.n() { h.degree(v) } else { 0 };
    for &e in h.edges() {
        if !g.has_edge(e.u(), e.v()) {
            report.not_in_g.push(e);
        }
        if (deg(e.u()) + deg(e.v())) as f64 > params.beta_plus {
            report.degree_violations.push(e);
        }
    }
    let expected: BTreeSet<Edge> = suffix
        .iter()
        .copied()
        .filter(|e| ((deg(e.u()) + deg(e.v())) as f64) < params.beta_minus)
        .collect();
    let mut seen = BTreeSet::new();
    for &e in u {
        if !expected.contains(&e) || !seen.insert(e) {
            report.extra_u.push(e);
        }
    }
    report.missing_u = expected.difference(&seen).copied().collect();
    report
}

/// Both branches of the sparsifier dichotomy, evaluated on exact matching sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub mu_g: usize,
    pub mu_h: usize,
    pub mu_hu: usize,
    pub delta: f64,
    pub lambda: f64,
    pub bipartite: bool,
    /// `μ(H) ≥ c₁(2/3 − δ)·μ(G)`.
    pub branch1_holds: bool,
    /// `μ(H ∪ U) ≥ c₂(2/3 + δ²/18)·μ(G)`.
    pub branch2_holds: bool,
    /// Signed slack of each branch: left side minus right side.
    pub margins: [f64; 2],
    /// Whether `β₊` is large enough relative to `λ` for the guarantee to apply.
    pub hypotheses_met: bool,
}

impl DichotomyReport {
    pub fn holds(&self) -> bool {
        self.branch1_holds || self.branch2_holds
    }
}

/// Coefficients `(c₁, c₂)` of the two branches.
pub fn dichotomy_constants(lambda: f64, bipartite: bool) -> (f64, f64) {
    if bipartite {
        (1.0 - 4.0 * lambda, 1.0 - 2.0 * lambda)
    } else {
        (1.0 - 8.0 * lambda, 1.0 - 4.0 * lambda)
    }
}

pub fn check_dichotomy(
    mu_g: usize,
    mu_h: usize,
    mu_hu: usize,
    lambda: f64,
    delta: f64,
    bipartite: bool,
) -> DichotomyReport {
    let (c1, c2) = dichotomy_constants(lambda, bipartite);
    let rhs1 = c1 * (2.0 / 3.0 - delta) * mu_g as f64;
    let rhs2 = c2 * (2.0 / 3.0 + delta * delta / 18.0) * mu_g as f64;
    let m1 = mu_h as f64 - rhs1;
    let m2 = mu_hu as f64 - rhs2;
    DichotomyReport {
        mu_g,
        mu_h,
        mu_hu,
        delta,
        lambda,
        bipartite,
        branch1_holds: m1 >= 0.0,
        branch2_holds: m2 >= 0.0,
        margins: [m1, m2],
        hypotheses_met: true,
    }
}

/// Whether `β₊ ≥ 64·λ⁻²·ln(1/λ)` and `β₋ ≥ (1−λ)·β₊`.
pub fn beta_hypotheses_met(params: &AlgoParams) -> bool {
    let l = params.lambda;
    params.beta_plus >= 64.0 / (l * l) * (1.0 / l).ln() * (1.0 - 1e-12)
        && params.beta_minus >= (1.0 - l) * params.beta_plus * (1.0 - 1e-12)
}

/// Exact matching sizes a run is judged against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeasures {
    /// μ(G') where `G' = H ∪ (Phase II edges)`, the graph the sparsifier guarantee speaks about.
    pub mu_g_prime: usize,
    pub mu_h: usize,
    pub mu_hu: usize,
}

/// `H` plus every Phase II edge.
pub fn g_prime(stream: &EdgeStream<'_>, split: &PhaseSplit, h: &Graph) -> Result<Graph, GraphError> {
    let g = stream.graph();
    let suffix = stream.range(split.phase_two());
    g.tag_like(Graph::union(g.n(), [h.edges(), &suffix[..]])?)
}

pub fn run_measures(stream: &EdgeStream<'_>, diag: &TrialDiagnostics) -> Result<RunMeasures, GraphError> {
    let gp = g_prime(stream, &diag.split, &diag.sparsifier.h)?;
    Ok(RunMeasures {
        mu_g_prime: max_matching(&gp).len(),
        mu_h: diag.m_h.len(),
        mu_hu: diag.mu_hu,
    })
}

/// Dichotomy report for one run, with `hypotheses_met` filled from `params`.
pub fn dichotomy_for_run(measures: &RunMeasures, params: &AlgoParams, delta: f64, bipartite: bool) -> DichotomyReport {
    let mut r = check_dichotomy(
        measures.mu_g_prime,
        measures.mu_h,
        measures.mu_hu,
        params.lambda,
        delta,
        bipartite,
    );
    r.hypotheses_met = beta_hypotheses_met(params);
    r
}

/// One augmenting path for `M_H` found in `M* Δ M_H`, listed from its smaller endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusPath {
    pub vertices: Vec<Vertex>,
}

impl CensusPath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 2
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.vertices.windows(2).map(|w| Edge::new(w[0], w[1])).collect()
    }
}

/// Short augmenting paths of `M_H` inside `M* Δ M_H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCensus {
    pub m_star_size: usize,
    pub m_h_size: usize,
    pub paths: Vec<CensusPath>,
    /// Indices into `paths` of the lucky ones; `None` until classified.
    pub lucky: Option<Vec<usize>>,
}

impl PathCensus {
    /// Paths of length 1, 3 and 5.
    pub fn counts_by_length(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for p in &self.paths {
            c[p.len() / 2] += 1;
        }
        c
    }

    /// `|paths| ≥ |M*| − (4/3)|M_H|`, compared in integers.
    pub fn observation_holds(&self) -> bool {
        3 * self.paths.len() + 4 * self.m_h_size >= 3 * self.m_star_size
    }

    pub fn lucky_count(&self) -> Option<usize> {
        self.lucky.as_ref().map(Vec::len)
    }
}

/// Collects the augmenting paths of `m_h` of length at most 5 among the components of
/// `M* Δ M_H`.
pub fn path_census(m_star: &Matching, m_h: &Matching) -> PathCensus {
    let diff = symmetric_difference(m_star, m_h);
    let mut paths = Vec::new();
    for comp in diff.components() {
        let ends: Vec<Vertex> = comp.iter().copied().filter(|&v| diff.degree(v) == 1).collect();
        let Some(&start) = ends.first() else {
            continue; // alternating cycle
        };
        let mut walk = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = diff.neighbors(cur).iter().find(|&&w| w != prev) {
            walk.push(next);
            prev = cur;
            cur = next;
        }
        let len = walk.len() - 1;
        if len % 2 == 1 && len <= 5 && m_star.contains(Edge::new(walk[0], walk[1])) {
            paths.push(CensusPath { vertices: walk });
        }
    }
    PathCensus {
        m_star_size: m_star.len(),
        m_h_size: m_h.len(),
        paths,
        lucky: None,
    }
}

/// `M*`: a maximum matching of the Phase II edges.
pub fn late_maximum_matching(stream: &EdgeStream<'_>, split: &PhaseSplit) -> Result<Matching, GraphError> {
    let g = stream.graph();
    let late = g.tag_like(Graph::new(g.n(), stream.range(split.phase_two()))?)?;
    Ok(max_matching(&late))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("census edge {0} has no phase")]
pub struct UnknownEdge(pub Edge);

/// Marks each census path lucky: length 1 with its edge in II.B; length 3 with both
/// outer edges in II.A; length 5 with both outer edges in II.A and the middle edge in II.B.
pub fn classify_lucky<F>(census: &PathCensus, phase_of: F) -> Result<PathCensus, UnknownEdge>
where
    F: Fn(Edge) -> Option<Phase>,
{
    let mut lucky = Vec::new();
    for (i, p) in census.paths.iter().enumerate() {
        let phases = p
            .edges()
            .into_iter()
            .map(|e| phase_of(e).ok_or(UnknownEdge(e)))
            .collect::<Result<Vec<_>, _>>()?;
        let hit = match phases.len() {
            1 => phases[0] == Phase::IIB,
            3 => phases[0] == Phase::IIA && phases[2] == Phase::IIA,
            5 => phases[0] == Phase::IIA && phases[4] == Phase::IIA && phases[2] == Phase::IIB,
            _ => false,
        };
        if hit {
            lucky.push(i);
        }
    }
    Ok(PathCensus {
        lucky: Some(lucky),
        ..census.clone()
    })
}

/// Phase of every edge in the stream.
pub fn phase_map(stream: &EdgeStream<'_>, split: &PhaseSplit) -> HashMap<Edge, Phase> {
    (0..stream.len()).map(|i| (stream.at(i), split.phase_at(i))).collect()
}
