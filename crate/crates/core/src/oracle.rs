//! Exact maximum-matching oracles.
//!
//! [`max_matching`] dispatches to Hopcroft–Karp when the graph carries a bipartition
//! and to an Edmonds blossom search otherwise. Both are deterministic: free roots and
//! neighbours are scanned in ascending vertex order.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, Vertex};
use crate::matching::Matching;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {n} vertices; brute force is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("graph carries no bipartition")]
    NotBipartite,
}

/// A maximum-cardinality matching of `g`.
pub fn max_matching(g: &Graph) -> Matching {
    match g.bipartition() {
        Some(_) => hopcroft_karp(g),
        None => blossom_matching(g),
    }
}

/// μ(g).
pub fn matching_number(g: &Graph) -> usize {
    max_matching(g).len()
}

/// Edmonds' blossom algorithm, O(V³).
pub fn blossom_matching(g: &Graph) -> Matching {
    let n = g.n();
    let mut mate: Vec<Option<Vertex>> = vec![None; n];
    let mut search = BlossomSearch::new(n);
    for root in 0..n {
        if mate[root].is_none() && g.degree(root) > 0 {
            if let Some(end) = search.run(g, &mate, root) {
                // Walk back along parent pointers, flipping pairs.
                let mut v = Some(end);
                while let Some(x) = v {
                    let p = search.parent[x].expect("tree vertex has a parent");
                    let next = mate[p];
                    mate[x] = Some(p);
                    mate[p] = Some(x);
                    v = next;
                }
            }
        }
    }
    Matching::from_mates(mate)
}

struct BlossomSearch {
    parent: Vec<Option<Vertex>>,
    base: Vec<Vertex>,
    in_queue: Vec<bool>,
    queue: VecDeque<Vertex>,
    marks: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl BlossomSearch {
    fn new(n: usize) -> Self {
        BlossomSearch {
            parent: vec![None; n],
            base: (0..n).collect(),
            in_queue: vec![false; n],
            queue: VecDeque::new(),
            marks: vec![false; n],
            in_blossom: vec![false; n],
        }
    }

    fn lca(&mut self, mate: &[Option<Vertex>], mut a: Vertex, mut b: Vertex) -> Vertex {
        self.marks.iter_mut().for_each(|m| *m = false);
        loop {
            a = self.base[a];
            self.marks[a] = true;
            match mate[a] {
                None => break,
                Some(m) => a = self.parent[m].expect("matched tree vertex has parent"),
            }
        }
        loop {
            b = self.base[b];
            if self.marks[b] {
                return b;
            }
            b = self.parent[mate[b].expect("walk stays in tree")].expect("tree parent");
        }
    }

    fn mark_path(&mut self, mate: &[Option<Vertex>], mut v: Vertex, b: Vertex, mut child: Vertex) {
        while self.base[v] != b {
            let m = mate[v].expect("odd blossom vertex is matched");
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[m]] = true;
            self.parent[v] = Some(child);
            child = m;
            v = self.parent[m].expect("tree parent");
        }
    }

    /// BFS for an augmenting path from `root`; returns the free endpoint reached.
    fn run(&mut self, g: &Graph, mate: &[Option<Vertex>], root: Vertex) -> Option<Vertex> {
        let n = g.n();
        self.parent.iter_mut().for_each(|p| *p = None);
        self.in_queue.iter_mut().for_each(|q| *q = false);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.queue.push_back(root);
        self.in_queue[root] = true;
        while let Some(v) = self.queue.pop_front() {
            for &to in g.neighbors(v) {
                if self.base[v] == self.base[to] || mate[v] == Some(to) {
                    continue;
                }
                let to_is_outer = to == root || mate[to].is_some_and(|m| self.parent[m].is_some());
                if to_is_outer {
                    let cur = self.lca(mate, v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.in_queue[i] {
                                self.in_queue[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match mate[to] {
                        None => return Some(to),
                        Some(m) => {
                            self.in_queue[m] = true;
                            self.queue.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }
}

/// Hopcroft–Karp for bipartite graphs. Panics if `g` has no bipartition.
pub fn hopcroft_karp(g: &Graph) -> Matching {
    let sides = g.bipartition().expect("hopcroft_karp needs a bipartition");
    let n = g.n();
    let left: Vec<Vertex> = sides.left().collect();
    let mut mate: Vec<Option<Vertex>> = vec![None; n];
    let mut dist = vec![usize::MAX; n];
    loop {
        // Layer the left side from free left vertices.
        let mut queue = VecDeque::new();
        for &u in &left {
            if mate[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                match mate[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; n];
        for &u in &left {
            if mate[u].is_none() {
                hk_dfs(g, u, &mut mate, &mut dist, &mut next);
            }
        }
    }
    Matching::from_mates(mate)
}

fn hk_dfs(g: &Graph, u: Vertex, mate: &mut [Option<Vertex>], dist: &mut [usize], next: &mut [usize]) -> bool {
    while next[u] < g.degree(u) {
        let v = g.neighbors(u)[next[u]];
        next[u] += 1;
        let ok = match mate[v] {
            None => true,
            Some(w) => dist[w] == dist[u] + 1 && hk_dfs(g, w, mate, dist, next),
        };
        if ok {
            mate[u] = Some(v);
            mate[v] = Some(u);
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Vertex limit for [`brute_force_matching_size`].
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// μ(g) by exhaustive recursion over vertex subsets: the lowest remaining vertex is
/// either left unmatched or paired with each remaining neighbour in turn.
/// Shares no code with the augmenting-path oracles.
pub fn brute_force_matching_size(g: &Graph) -> Result<usize, OracleError> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let nbr_mask: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |acc, &w| acc | (1 << w)))
        .collect();
    let mut memo = HashMap::new();
    Ok(best(&nbr_mask, ((1u64 << n) - 1) as u32, &mut memo))
}

fn best(nbr: &[u32], mask: u32, memo: &mut HashMap<u32, usize>) -> usize {
    if mask == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let v = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << v);
    let mut res = best(nbr, rest, memo);
    let mut cand = nbr[v] & rest;
    while cand != 0 {
        let w = cand.trailing_zeros();
        cand &= cand - 1;
        res = res.max(1 + best(nbr, rest & !(1 << w), memo));
    }
    memo.insert(mask, res);
    res
}

/// Edge limit for [`all_maximum_matchings`].
pub const ENUMERATION_EDGE_LIMIT: usize = 24;

/// Every maximum matching of `g`, found by scanning all edge subsets. Intended for
/// gadget-sized graphs.
pub fn all_maximum_matchings(g: &Graph) -> Result<Vec<Vec<Edge>>, OracleError> {
    let m = g.m();
    if m > ENUMERATION_EDGE_LIMIT {
        return Err(OracleError::TooLarge {
            n: m,
            limit: ENUMERATION_EDGE_LIMIT,
        });
    }
    let edges = g.edges();
    let mut best_size = 0;
    let mut found: Vec<u32> = Vec::new();
    'subsets: for mask in 0u32..(1u32 << m) {
        let size = mask.count_ones() as usize;
        if size < best_size {
            continue;
        }
        let mut used = vec![false; g.n()];
        for (i, e) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if used[e.u()] || used[e.v()] {
                    continue 'subsets;
                }
                used[e.u()] = true;
                used[e.v()] = true;
            }
        }
        if size > best_size {
            best_size = size;
            found.clear();
        }
        found.push(mask);
    }
    Ok(found
        .into_iter()
        .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).map(|i| edges[i]).collect())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A set `A` on one side of a bipartite graph with its neighbourhood `N(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallWitness {
    pub side: Side,
    pub set: Vec<Vertex>,
    pub neighbors: Vec<Vertex>,
    pub deficiency: usize,
}

/// A maximum-deficiency set `A` maximising `|A| − |N(A)|` over both sides.
///
/// Built from a maximum matching: `A` is the set of same-side vertices reachable by
/// alternating paths from free vertices of that side, which attains deficiency
/// `|side| − μ(g)`. For equal side sizes this is `n − μ(g)`; ties go to the left side.
pub fn hall_witness(g: &Graph) -> Result<HallWitness, OracleError> {
    let sides = g.bipartition().ok_or(OracleError::NotBipartite)?;
    let m = hopcroft_karp(g);
    let left = witness_for(g, &m, sides.left().collect(), Side::Left);
    let right = witness_for(g, &m, sides.right().collect(), Side::Right);
    Ok(if right.deficiency > left.deficiency {
        right
    } else {
        left
    })
}

fn witness_for(g: &Graph, m: &Matching, side: Vec<Vertex>, tag: Side) -> HallWitness {
    let n = g.n();
    let mut in_a = vec![false; n];
    let mut in_nb = vec![false; n];
    let mut queue: VecDeque<Vertex> = side.iter().copied().filter(|&v| !m.is_matched(v)).collect();
    for &v in &queue {
        in_a[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if !in_nb[w] {
                in_nb[w] = true;
                // In a maximum matching every neighbour reached this way is matched.
                if let Some(x) = m.mate(w) {
                    if !in_a[x] {
                        in_a[x] = true;
                        queue.push_back(x);
                    }
                }
            }
        }
    }
    let set: Vec<Vertex> = (0..n).filter(|&v| in_a[v]).collect();
    let neighbors: Vec<Vertex> = (0..n).filter(|&v| in_nb[v]).collect();
    HallWitness {
        side: tag,
        deficiency: set.len() - neighbors.len(),
        set,
        neighbors,
    }
}
