//! Random-order edge streams and phase bookkeeping.
//!
//! All randomness comes from ChaCha8 keyed by a 64-bit seed. A seed is split into
//! independent substreams with [`rng_for`]; per-trial seeds come from [`derive_seed`].

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph};

/// Substream used for the arrival permutation.
pub const ORDER_SUBSTREAM: u64 = 0;
/// Substream used for the Phase II.A length draw.
pub const PHASE_SUBSTREAM: u64 = 1;
/// Substream used by instance generators.
pub const INSTANCE_SUBSTREAM: u64 = 2;
/// Substream reserved for seed derivation.
const SEED_SUBSTREAM: u64 = u64::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("slice [{a}, {b}] out of range for a stream of {m} edges")]
    OutOfRange { a: usize, b: usize, m: usize },
    #[error("order is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("stream has {m} edges; at least {required} (= ceil(1/eps)) are needed")]
    TooFewEdges { m: usize, required: usize },
    #[error("{name} = {value} is outside its allowed range")]
    BadParameter { name: &'static str, value: f64 },
}

/// Generator for substream `substream` of `seed`.
pub fn rng_for(seed: u64, substream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream);
    rng
}

/// Seed of trial `index` under `base`; independent of how trials are scheduled.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(SEED_SUBSTREAM);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

/// Number of successes in `k` Bernoulli(`p`) trials, counted one trial at a time.
pub fn sample_binomial<R: Rng + ?Sized>(k: u64, p: f64, rng: &mut R) -> u64 {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    (0..k).filter(|_| rng.gen_bool(p)).count() as u64
}

/// A graph's edges in arrival order.
#[derive(Clone, Debug)]
pub struct EdgeStream<'g> {
    graph: &'g Graph,
    order: Vec<usize>,
    seed: Option<u64>,
}

/// Uniformly random arrival order (Fisher–Yates on the seeded generator).
pub fn make_stream(g: &Graph, seed: u64) -> Result<EdgeStream<'_>, StreamError> {
    if g.m() == 0 {
        return Err(StreamError::EmptyGraph);
    }
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut rng_for(seed, ORDER_SUBSTREAM));
    Ok(EdgeStream {
        graph: g,
        order,
        seed: Some(seed),
    })
}

impl<'g> EdgeStream<'g> {
    /// A stream with a caller-chosen arrival order (edge indices into `g.edges()`).
    pub fn from_order(g: &'g Graph, order: Vec<usize>) -> Result<Self, StreamError> {
        if g.m() == 0 {
            return Err(StreamError::EmptyGraph);
        }
        let mut seen = vec![false; g.m()];
        for &i in &order {
            if i >= g.m() || std::mem::replace(&mut seen[i], true) {
                return Err(StreamError::NotPermutation(g.m()));
            }
        }
        if order.len() != g.m() {
            return Err(StreamError::NotPermutation(g.m()));
        }
        Ok(EdgeStream {
            graph: g,
            order,
            seed: None,
        })
    }

    /// Edges arrive in the graph's own edge order.
    pub fn identity(g: &'g Graph) -> Result<Self, StreamError> {
        EdgeStream::from_order(g, (0..g.m()).collect())
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `i`-th arriving edge, 0-based.
    #[inline]
    pub fn at(&self, i: usize) -> Edge {
        self.graph.edges()[self.order[i]]
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.order.iter().map(|&i| self.graph.edges()[i])
    }

    /// Edges arriving at 0-based positions `range`.
    pub fn range(&self, range: std::ops::Range<usize>) -> Vec<Edge> {
        self.order[range].iter().map(|&i| self.graph.edges()[i]).collect()
    }

    /// `e_a, ..., e_b` with 1-based inclusive positions.
    pub fn slice(&self, a: usize, b: usize) -> Result<Vec<Edge>, StreamError> {
        let m = self.len();
        if a < 1 || a > b || b > m {
            return Err(StreamError::OutOfRange { a, b, m });
        }
        Ok(self.range(a - 1..b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    I,
    IIA,
    IIB,
}

/// Stream positions split into Phase I (`eps_cut` edges), Phase II.A (`tau` edges)
/// and Phase II.B (the rest).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSplit {
    pub m: usize,
    pub eps_cut: usize,
    pub tau: usize,
}

impl PhaseSplit {
    /// `⌈eps·m⌉`, requiring `m ≥ ⌈1/eps⌉`.
    pub fn phase_one_len(m: usize, eps: f64) -> Result<usize, StreamError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(StreamError::BadParameter {
                name: "eps",
                value: eps,
            });
        }
        let required = ceil_guarded(1.0 / eps);
        if m < required {
            return Err(StreamError::TooFewEdges { m, required });
        }
        Ok(ceil_guarded(eps * m as f64).min(m))
    }

    /// Phase I boundary plus `tau ~ B(m − eps_cut, gamma)`.
    pub fn draw<R: Rng + ?Sized>(m: usize, eps: f64, gamma: f64, rng: &mut R) -> Result<Self, StreamError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(StreamError::BadParameter {
                name: "gamma",
                value: gamma,
            });
        }
        let eps_cut = PhaseSplit::phase_one_len(m, eps)?;
        let tau = sample_binomial((m - eps_cut) as u64, gamma, rng) as usize;
        Ok(PhaseSplit { m, eps_cut, tau })
    }

    /// Phase I only; everything after it counts as Phase II.B.
    pub fn without_subphases(m: usize, eps: f64) -> Result<Self, StreamError> {
        Ok(PhaseSplit {
            m,
            eps_cut: PhaseSplit::phase_one_len(m, eps)?,
            tau: 0,
        })
    }

    pub fn phase_one(&self) -> std::ops::Range<usize> {
        0..self.eps_cut
    }

    pub fn phase_two(&self) -> std::ops::Range<usize> {
        self.eps_cut..self.m
    }

    pub fn phase_two_a(&self) -> std::ops::Range<usize> {
        self.eps_cut..self.eps_cut + self.tau
    }

    pub fn phase_two_b(&self) -> std::ops::Range<usize> {
        self.eps_cut + self.tau..self.m
    }

    /// Phase of 0-based stream position `pos`.
    pub fn phase_at(&self, pos: usize) -> Phase {
        if pos < self.eps_cut {
            Phase::I
        } else if pos < self.eps_cut + self.tau {
            Phase::IIA
        } else {
            Phase::IIB
        }
    }
}

// Products like 0.05 * 100 can land a hair above an integer.
fn ceil_guarded(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Assigns each of `count` Phase II edges to II.A or II.B the way the streaming algorithm
/// does: shuffle, draw `tau ~ B(count, gamma)`, and put the first `tau` arrivals in II.A.
pub fn random_phase_two_assignment<R: Rng + ?Sized>(count: usize, gamma: f64, rng: &mut R) -> Vec<Phase> {
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(rng);
    let tau = sample_binomial(count as u64, gamma, rng) as usize;
    let mut out = vec![Phase::IIB; count];
    for &i in &order[..tau] {
        out[i] = Phase::IIA;
    }
    out
}
