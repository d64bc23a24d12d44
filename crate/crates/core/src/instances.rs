//! Instance generators: seeded random families for benchmarking and the XOR-gadget
//! hard distribution built over a family of induced matchings.

use std::collections::BTreeSet;
use std::path::Path as FsPath;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Bipartition, Edge, Graph, GraphError, Vertex};
use crate::stream::{rng_for, INSTANCE_SUBSTREAM};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("gadget size k = {0} is even")]
    EvenK(usize),
    #[error("gadget size k = {0} is below 3")]
    KTooSmall(usize),
    #[error("matching {index} is not an induced matching of the base graph: {reason}")]
    NotInduced { index: usize, reason: String },
    #[error("matching {index} has {got} edges, expected {expected}")]
    SizeMismatch { index: usize, got: usize, expected: usize },
    #[error("family is empty")]
    EmptyFamily,
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// An XOR gadget on `2k` local vertices: `s = 0`, `a_i = 2i − 1`, `b_i = 2i` for
/// `i = 1..k−1`, and `t = 2k − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorGadget {
    pub bits: Vec<bool>,
    pub graph: Graph,
    /// Edges controlled by each bit. The first and last bits control one edge each.
    pub bit_edges: Vec<Vec<Edge>>,
}

impl XorGadget {
    pub fn k(&self) -> usize {
        self.bits.len()
    }

    pub fn start(&self) -> Vertex {
        0
    }

    pub fn final_vertex(&self) -> Vertex {
        2 * self.k() - 1
    }

    pub fn parity(&self) -> bool {
        self.bits.iter().fold(false, |acc, &b| acc ^ b)
    }
}

fn a(i: usize) -> Vertex {
    2 * i - 1
}

fn b(i: usize) -> Vertex {
    2 * i
}

pub fn xor_gadget(bits: &[bool]) -> Result<XorGadget, InstanceError> {
    let k = bits.len();
    if k < 3 {
        return Err(InstanceError::KTooSmall(k));
    }
    if k.is_multiple_of(2) {
        return Err(InstanceError::EvenK(k));
    }
    let (s, t) = (0, 2 * k - 1);
    let mut bit_edges = Vec::with_capacity(k);
    bit_edges.push(vec![Edge::new(s, if bits[0] { b(1) } else { a(1) })]);
    for i in 2..k {
        bit_edges.push(if bits[i - 1] {
            vec![Edge::new(a(i - 1), b(i)), Edge::new(b(i - 1), a(i))]
        } else {
            vec![Edge::new(a(i - 1), a(i)), Edge::new(b(i - 1), b(i))]
        });
    }
    bit_edges.push(vec![Edge::new(t, if bits[k - 1] { b(k - 1) } else { a(k - 1) })]);
    let graph = Graph::new(2 * k, bit_edges.iter().flatten().copied())?;
    Ok(XorGadget {
        bits: bits.to_vec(),
        graph,
        bit_edges,
    })
}

/// Checks that every matching is a matching of `g`, that they are pairwise edge-disjoint
/// and that each is induced: no `g` edge joins two of its vertices other than its own.
pub fn verify_induced(g: &Graph, matchings: &[Vec<Edge>]) -> bool {
    check_family(g, matchings, None).is_ok()
}

fn check_family(g: &Graph, matchings: &[Vec<Edge>], size: Option<usize>) -> Result<(), InstanceError> {
    let mut used = BTreeSet::new();
    let not_induced = |index: usize, reason: String| InstanceError::NotInduced { index, reason };
    for (i, mi) in matchings.iter().enumerate() {
        if let Some(r) = size {
            if mi.len() != r {
                return Err(InstanceError::SizeMismatch {
                    index: i,
                    got: mi.len(),
                    expected: r,
                });
            }
        }
        let mut covered = vec![false; g.n()];
        for &e in mi {
            if e.v() >= g.n() || !g.has_edge(e.u(), e.v()) {
                return Err(not_induced(i, format!("{e} is not a graph edge")));
            }
            if !used.insert(e) {
                return Err(not_induced(i, format!("{e} appears in two matchings")));
            }
            for x in [e.u(), e.v()] {
                if std::mem::replace(&mut covered[x], true) {
                    return Err(not_induced(i, format!("vertex {x} is covered twice")));
                }
            }
        }
        let own: BTreeSet<Edge> = mi.iter().copied().collect();
        for &e in mi {
            for x in [e.u(), e.v()] {
                for &w in g.neighbors(x) {
                    if covered[w] && !own.contains(&Edge::new(x, w)) {
                        return Err(not_induced(
                            i,
                            format!("edge {} joins two matched vertices", Edge::new(x, w)),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// A base graph with a verified family of pairwise disjoint induced matchings of equal size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedFamily {
    graph: Graph,
    matchings: Vec<Vec<Edge>>,
}

/// On-disk form of an [`InducedFamily`]. An empty `matchings` list means one single-edge
/// matching per graph edge.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFile {
    pub n: usize,
    #[serde(default)]
    pub left: Option<usize>,
    pub edges: Vec<(Vertex, Vertex)>,
    #[serde(default)]
    pub matchings: Vec<Vec<(Vertex, Vertex)>>,
}

impl InducedFamily {
    pub fn new(graph: Graph, matchings: Vec<Vec<Edge>>) -> Result<Self, InstanceError> {
        let r = matchings.first().ok_or(InstanceError::EmptyFamily)?.len();
        check_family(&graph, &matchings, Some(r))?;
        Ok(InducedFamily { graph, matchings })
    }

    /// Every edge on its own: always induced, with `r = 1`.
    pub fn trivial(graph: Graph) -> Result<Self, InstanceError> {
        let matchings = graph.edges().iter().map(|&e| vec![e]).collect();
        InducedFamily::new(graph, matchings)
    }

    pub fn from_file(f: &FamilyFile) -> Result<Self, InstanceError> {
        let mut g = Graph::new(f.n, f.edges.iter().copied())?;
        if let Some(l) = f.left {
            g = g.with_bipartition(Bipartition::prefix(l, f.n))?;
        }
        if f.matchings.is_empty() {
            return InducedFamily::trivial(g);
        }
        let ms = f
            .matchings
            .iter()
            .map(|m| m.iter().map(|&e| Edge::from(e)).collect())
            .collect();
        InducedFamily::new(g, ms)
    }

    pub fn read(path: impl AsRef<FsPath>) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path)?;
        InducedFamily::from_file(&serde_json::from_str(&text)?)
    }

    pub fn to_file(&self) -> FamilyFile {
        let pair = |e: &Edge| (e.u(), e.v());
        FamilyFile {
            n: self.graph.n(),
            left: self.graph.bipartition().and_then(Bipartition::prefix_len),
            edges: self.graph.edges().iter().map(pair).collect(),
            matchings: self.matchings.iter().map(|m| m.iter().map(pair).collect()).collect(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matchings(&self) -> &[Vec<Edge>] {
        &self.matchings
    }

    /// Size of each matching.
    pub fn r(&self) -> usize {
        self.matchings[0].len()
    }
}

/// Smallest gadget size used by default.
pub const DEFAULT_GADGET_K: usize = 3;

/// `2⌈|log_{3/4} N|⌉ + 1`, the gadget size that makes `(3/4)^k ≤ 1/N²`.
pub fn log_gadget_k(n_per_side: usize) -> usize {
    let l = (n_per_side.max(2) as f64).ln() / (0.75f64).ln();
    2 * (l.abs() - 1e-9).ceil() as usize + 1
}

/// A sample from the hard distribution, with its ground truth.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub graph: Graph,
    pub truth: HardTruth,
}

/// Ground truth of a hard instance; written as the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardTruth {
    pub base_n: usize,
    pub k: usize,
    pub r: usize,
    pub family_size: usize,
    pub j_star: usize,
    pub special: Vec<Edge>,
    /// `y_v`: whether base vertex `v` is covered by the special matching.
    pub parity: Vec<bool>,
    pub bits: Vec<Vec<bool>>,
    /// Global id of each local gadget vertex; the final vertex maps to `v` itself.
    pub gadget_vertices: Vec<Vec<Vertex>>,
    pub base_edges: Vec<Edge>,
    /// Survival coin of each base edge, aligned with `base_edges`.
    pub survived: Vec<bool>,
}

impl HardTruth {
    /// `(n_base − 2r)·k + 2r·(k − 1)`: the largest possible μ once the special matching is removed.
    pub fn upper_bound(&self) -> usize {
        (self.base_n - 2 * self.r) * self.k + 2 * self.r * (self.k - 1)
    }

    /// Expected μ lower bound: the upper bound plus `r/2`.
    pub fn mean_lower_bound(&self) -> f64 {
        self.upper_bound() as f64 + self.r as f64 / 2.0
    }
}

impl HardInstance {
    /// The sampled graph with the special matching's edges removed.
    pub fn without_special(&self) -> Result<Graph, GraphError> {
        let special: BTreeSet<Edge> = self.truth.special.iter().copied().collect();
        let kept: Vec<Edge> = self
            .graph
            .edges()
            .iter()
            .copied()
            .filter(|e| !special.contains(e))
            .collect();
        Graph::new(self.graph.n(), kept)
    }

    /// Writes the edge list to `path` and the ground truth to `path` with a `.json` extension.
    pub fn write(&self, path: impl AsRef<FsPath>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        self.graph.write_edge_list(path)?;
        std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&self.truth)?)?;
        Ok(())
    }
}

/// Samples the hard distribution over `family` with gadgets of size `k`.
pub fn build_hard_instance<R: Rng + ?Sized>(
    family: &InducedFamily,
    k: usize,
    rng: &mut R,
) -> Result<HardInstance, InstanceError> {
    xor_gadget(&vec![false; k])?;
    let base = family.graph();
    let base_n = base.n();
    let j_star = rng.gen_range(0..family.matchings().len());
    let special = family.matchings()[j_star].clone();
    let mut parity = vec![false; base_n];
    for e in &special {
        parity[e.u()] = true;
        parity[e.v()] = true;
    }

    let stride = 2 * k - 1;
    let mut edges = Vec::with_capacity(base_n * (2 * k - 2) + base.m());
    let mut bits = Vec::with_capacity(base_n);
    let mut gadget_vertices = Vec::with_capacity(base_n);
    for (v, &y) in parity.iter().enumerate() {
        let mut x: Vec<bool> = (0..k - 1).map(|_| rng.gen()).collect();
        let partial = x.iter().fold(false, |acc, &b| acc ^ b);
        x.push(partial ^ y);
        let gadget = xor_gadget(&x)?;
        let map: Vec<Vertex> = (0..2 * k)
            .map(|l| {
                if l == gadget.final_vertex() {
                    v
                } else {
                    base_n + v * stride + l
                }
            })
            .collect();
        edges.extend(gadget.graph.edges().iter().map(|e| Edge::new(map[e.u()], map[e.v()])));
        bits.push(x);
        gadget_vertices.push(map);
    }
    let base_edges = base.edges().to_vec();
    let survived: Vec<bool> = base_edges.iter().map(|_| rng.gen()).collect();
    edges.extend(base_edges.iter().zip(&survived).filter(|(_, &z)| z).map(|(&e, _)| e));
    let graph = Graph::new(base_n + base_n * stride, edges)?;
    Ok(HardInstance {
        graph,
        truth: HardTruth {
            base_n,
            k,
            r: family.r(),
            family_size: family.matchings().len(),
            j_star,
            special,
            parity,
            bits,
            gadget_vertices,
            base_edges,
            survived,
        },
    })
}

/// Monte-Carlo frequency of the event that some gadget has every bit represented on one
/// side, when each gadget edge independently goes to either side with probability 1/2.
pub fn hiding_failure_rate<R: Rng + ?Sized>(
    vertices: usize,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64, InstanceError> {
    let per_bit: Vec<usize> = xor_gadget(&vec![false; k])?.bit_edges.iter().map(Vec::len).collect();
    let mut failures = 0usize;
    for _ in 0..trials {
        let mut exposed = false;
        // Consume every coin so the draw count per trial is fixed.
        for _ in 0..vertices {
            let mut all = true;
            for &c in &per_bit {
                let mut seen = false;
                for _ in 0..c {
                    seen |= rng.gen::<bool>();
                }
                all &= seen;
            }
            exposed |= all;
        }
        failures += exposed as usize;
    }
    Ok(failures as f64 / trials as f64)
}

/// Random instance families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// `n` vertices per side, left side `0..n`.
    BipartiteGnp,
    GeneralGnp,
    /// A random matching of `plant` edges plus `G(n, p)` noise.
    PlantedMatching,
}

impl std::str::FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bipartite-gnp" => Ok(GenKind::BipartiteGnp),
            "general-gnp" => Ok(GenKind::GeneralGnp),
            "planted-matching" => Ok(GenKind::PlantedMatching),
            _ => Err(format!("unknown generator {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub plant: Option<usize>,
}

pub fn gen_random(spec: &GenSpec, seed: u64) -> Result<Graph, InstanceError> {
    let GenSpec { kind, n, p, plant } = *spec;
    if n < 2 {
        return Err(InstanceError::OutOfRange {
            name: "n",
            value: n as f64,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(InstanceError::OutOfRange { name: "p", value: p });
    }
    let mut rng = rng_for(seed, INSTANCE_SUBSTREAM);
    match kind {
        GenKind::BipartiteGnp => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in n..2 * n {
                    if rng.gen_bool(p) {
                        edges.push(Edge::new(u, v));
                    }
                }
            }
            Ok(Graph::bipartite(n, n, edges)?)
        }
        GenKind::GeneralGnp => Ok(Graph::new(n, gnp_edges(n, p, &mut rng))?),
        GenKind::PlantedMatching => {
            let size = plant.unwrap_or(n / 2);
            if size > n / 2 {
                return Err(InstanceError::OutOfRange {
                    name: "plant",
                    value: size as f64,
                });
            }
            let mut perm: Vec<Vertex> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut edges: BTreeSet<Edge> = (0..size).map(|i| Edge::new(perm[2 * i], perm[2 * i + 1])).collect();
            edges.extend(gnp_edges(n, p, &mut rng));
            Ok(Graph::new(n, edges)?)
        }
    }
}

fn gnp_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<Edge> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge::new(u, v));
            }
        }
    }
    edges
}
