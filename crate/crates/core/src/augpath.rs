//! Bounded-length augmenting path search.
//!
//! Shortest lengths are tried first (1, then 3, then 5, ...). Within one length the
//! lowest-index free start vertex wins, and from there neighbours are explored in
//! ascending order, so the returned path is the lexicographically first one.

use crate::graph::Vertex;
use crate::matching::{EdgeSet, Matching, Path};

/// Finds an augmenting path for `m` of odd length at most `max_len` using only edges of
/// `allowed` (which is expected to contain `m`'s edges). `None` if no such path exists.
pub fn find_augmenting_path(m: &Matching, allowed: &EdgeSet, max_len: usize) -> Option<Path> {
    let n = m.n().max(allowed.vertex_bound());
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for e in allowed.iter() {
        adj[e.u()].push(e.v());
        adj[e.v()].push(e.u());
    }
    // EdgeSet iterates in sorted order, so each list is already ascending.
    let starts: Vec<Vertex> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
    search(m, &starts, max_len, |v, out| out.extend_from_slice(&adj[v]))
}

/// Core search shared with the streaming augmenter. `neighbors(v, out)` must append the
/// allowed neighbours of `v` in ascending order; `starts` must be ascending.
pub(crate) fn search<F>(m: &Matching, starts: &[Vertex], max_len: usize, mut neighbors: F) -> Option<Path>
where
    F: FnMut(Vertex, &mut Vec<Vertex>),
{
    let mut stack = Vec::with_capacity(max_len + 1);
    for len in (1..=max_len).step_by(2) {
        for &s in starts {
            if s >= m.n() || m.is_matched(s) {
                continue;
            }
            stack.clear();
            stack.push(s);
            if extend(m, &mut stack, len, &mut neighbors) {
                return Some(Path::unchecked(stack).expect("search keeps vertices distinct"));
            }
        }
    }
    None
}

fn is_free(m: &Matching, v: Vertex) -> bool {
    v >= m.n() || !m.is_matched(v)
}

/// `stack` ends at a vertex whose next path edge must be a non-matching edge.
fn extend<F>(m: &Matching, stack: &mut Vec<Vertex>, len: usize, neighbors: &mut F) -> bool
where
    F: FnMut(Vertex, &mut Vec<Vertex>),
{
    let cur = *stack.last().unwrap();
    let edges_so_far = stack.len() - 1;
    let last_hop = edges_so_far + 1 == len;
    let mut nbrs = Vec::new();
    neighbors(cur, &mut nbrs);
    let cur_mate = if cur < m.n() { m.mate(cur) } else { None };
    for x in nbrs {
        if Some(x) == cur_mate || stack.contains(&x) {
            continue;
        }
        if last_hop {
            if is_free(m, x) {
                stack.push(x);
                return true;
            }
            continue;
        }
        let Some(y) = (if x < m.n() { m.mate(x) } else { None }) else {
            continue;
        };
        if stack.contains(&y) {
            continue;
        }
        stack.push(x);
        stack.push(y);
        if extend(m, stack, len, neighbors) {
            return true;
        }
        stack.truncate(stack.len() - 2);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;
    const E: usize = 4;
    const F: usize = 5;

    #[test]
    fn single_free_edge() {
        let m = Matching::new(2);
        let allowed: EdgeSet = [(A, B)].into_iter().collect();
        let p = find_augmenting_path(&m, &allowed, 1).unwrap();
        assert_eq!(p.vertices(), &[A, B]);
    }

    #[test]
    fn classic_p4() {
        let m = Matching::from_edges(4, [(B, C)]).unwrap();
        let allowed: EdgeSet = [(A, B), (B, C), (C, D)].into_iter().collect();
        let p = find_augmenting_path(&m, &allowed, 3).unwrap();
        assert_eq!(p.vertices(), &[A, B, C, D]);
        assert!(find_augmenting_path(&m, &allowed, 1).is_none());
    }

    #[test]
    fn p6_needs_length_five() {
        let m = Matching::from_edges(6, [(B, C), (D, E)]).unwrap();
        let allowed: EdgeSet = [(A, B), (B, C), (C, D), (D, E), (E, F)].into_iter().collect();
        assert!(find_augmenting_path(&m, &allowed, 3).is_none());
        let p = find_augmenting_path(&m, &allowed, 5).unwrap();
        assert_eq!(p.vertices(), &[A, B, C, D, E, F]);
    }

    #[test]
    fn prefers_shorter_paths() {
        // Free edge 6-7 alongside a P6.
        let m = Matching::from_edges(8, [(B, C), (D, E)]).unwrap();
        let allowed: EdgeSet = [(A, B), (B, C), (C, D), (D, E), (E, F), (6, 7)].into_iter().collect();
        let p = find_augmenting_path(&m, &allowed, 5).unwrap();
        assert_eq!(p.vertices(), &[6, 7]);
    }

    #[test]
    fn does_not_walk_matched_edge_as_free() {
        // Triangle A-B-C with A-B matched: no augmenting path of any length.
        let m = Matching::from_edges(3, [(A, B)]).unwrap();
        let allowed: EdgeSet = [(A, B), (B, C), (A, C)].into_iter().collect();
        assert!(find_augmenting_path(&m, &allowed, 5).is_none());
    }
}
