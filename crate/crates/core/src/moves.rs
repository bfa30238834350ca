//! Williams moves: in- and out-splittings and their inverse amalgamations,
//! each returning the elementary shift equivalence it induces.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::MoveError;
use crate::graph::{Edge, Graph};
use crate::linalg::IntMatrix;
use crate::shift::ShiftEquivalence;

/// Partition per vertex, as edge ids. Vertices not listed keep a single part.
pub type SplitSpec = BTreeMap<String, Vec<Vec<String>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Result of a move from `E` to `F` with `A_E^t = R S` and `A_F^t = S R`.
#[derive(Debug, Clone)]
pub struct MoveResult {
    pub graph: Graph,
    /// `|F^0| x |E^0|`.
    pub s: IntMatrix,
    /// `|E^0| x |F^0|`.
    pub r: IntMatrix,
}

impl MoveResult {
    /// The lag-1 equivalence `A_E^t ~ A_F^t`.
    pub fn shift_equivalence(&self, from: &Graph) -> ShiftEquivalence {
        ShiftEquivalence::new(
            from.adjacency(true),
            self.graph.adjacency(true),
            self.s.clone(),
            self.r.clone(),
            1,
        )
        .expect("moves induce elementary equivalences")
    }
}

// Resolves a split spec into index partitions of s^{-1}(v) (out) or r^{-1}(v) (in).
fn resolve(g: &Graph, spec: &SplitSpec, dir: Direction) -> Result<Vec<Vec<Vec<usize>>>, MoveError> {
    let mut parts: Vec<Vec<Vec<usize>>> = (0..g.num_vertices())
        .map(|v| {
            let all = match dir {
                Direction::Out => g.out_edges(v),
                Direction::In => g.in_edges(v),
            };
            if all.is_empty() { vec![] } else { vec![all.to_vec()] }
        })
        .collect();
    for (vid, p) in spec {
        let v = g.vertex_by_id(vid).ok_or_else(|| MoveError::UnknownVertex(vid.clone()))?;
        let expected: BTreeSet<usize> = parts[v].iter().flatten().copied().collect();
        let bad = |reason: &str| MoveError::InvalidPartition { vertex: vid.clone(), reason: reason.into() };
        let mut seen = BTreeSet::new();
        let mut resolved = Vec::new();
        for part in p {
            if part.is_empty() {
                return Err(bad("empty part"));
            }
            let mut idx = Vec::new();
            for eid in part {
                let e = g.edge_by_id(eid).ok_or_else(|| MoveError::UnknownEdge(eid.clone()))?;
                if !expected.contains(&e) {
                    return Err(bad(&format!("edge `{eid}` is not incident in this direction")));
                }
                if !seen.insert(e) {
                    return Err(bad(&format!("edge `{eid}` appears twice")));
                }
                idx.push(e);
            }
            idx.sort_unstable();
            resolved.push(idx);
        }
        if seen != expected {
            return Err(bad("parts do not cover every edge"));
        }
        parts[v] = resolved;
    }
    Ok(parts)
}

fn copy_ids(g: &Graph, copies: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for (v, &k) in copies.iter().enumerate() {
        if k == 1 {
            out.push(g.vertex_id(v).to_string());
        } else {
            out.extend((1..=k).map(|q| format!("{}^{q}", g.vertex_id(v))));
        }
    }
    out
}

fn offsets(copies: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    copies
        .iter()
        .map(|&k| {
            let o = acc;
            acc += k;
            o
        })
        .collect()
}

/// Out-splitting along partitions of each `s^{-1}(v)`.
///
/// New vertices are listed in the original vertex order, the copies `v^1, v^2, ...`
/// of a split vertex in the order of its parts.
pub fn out_split(g: &Graph, spec: &SplitSpec) -> Result<MoveResult, MoveError> {
    let parts = resolve(g, spec, Direction::Out)?;
    let copies: Vec<usize> = parts.iter().map(|p| p.len().max(1)).collect();
    let off = offsets(&copies);
    let n2: usize = copies.iter().sum();
    let part_of = part_lookup(g, &parts);

    let mut edges = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let from = off[e.source] + part_of[ei];
        for q in 0..copies[e.range] {
            let id = if copies[e.range] == 1 { e.id.clone() } else { format!("{}^{}", e.id, q + 1) };
            edges.push(Edge { id, source: from, range: off[e.range] + q });
        }
    }
    let graph = Graph::from_indices(copy_ids(g, &copies), edges)?;

    let mut s = IntMatrix::zeros(n2, g.num_vertices());
    let mut r = IntMatrix::zeros(g.num_vertices(), n2);
    for x in 0..g.num_vertices() {
        for q in 0..copies[x] {
            s.set(off[x] + q, x, 1);
        }
    }
    for (ei, e) in g.edges().iter().enumerate() {
        r.add_to(e.range, off[e.source] + part_of[ei], 1);
    }
    Ok(MoveResult { graph, s, r })
}

/// In-splitting along partitions of each `r^{-1}(v)`.
pub fn in_split(g: &Graph, spec: &SplitSpec) -> Result<MoveResult, MoveError> {
    let parts = resolve(g, spec, Direction::In)?;
    let copies: Vec<usize> = parts.iter().map(|p| p.len().max(1)).collect();
    let off = offsets(&copies);
    let n2: usize = copies.iter().sum();
    let part_of = part_lookup(g, &parts);

    let mut edges = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let to = off[e.range] + part_of[ei];
        for q in 0..copies[e.source] {
            let id = if copies[e.source] == 1 { e.id.clone() } else { format!("{}^{}", e.id, q + 1) };
            edges.push(Edge { id, source: off[e.source] + q, range: to });
        }
    }
    let graph = Graph::from_indices(copy_ids(g, &copies), edges)?;

    let mut s = IntMatrix::zeros(n2, g.num_vertices());
    let mut r = IntMatrix::zeros(g.num_vertices(), n2);
    for u in 0..g.num_vertices() {
        for q in 0..copies[u] {
            r.set(u, off[u] + q, 1);
        }
    }
    for (ei, e) in g.edges().iter().enumerate() {
        s.add_to(off[e.range] + part_of[ei], e.source, 1);
    }
    Ok(MoveResult { graph, s, r })
}

fn part_lookup(g: &Graph, parts: &[Vec<Vec<usize>>]) -> Vec<usize> {
    let mut part_of = vec![0; g.num_edges()];
    for vp in parts {
        for (p, part) in vp.iter().enumerate() {
            for &e in part {
                part_of[e] = p;
            }
        }
    }
    part_of
}

fn multiplicity(g: &Graph, from: usize, to: usize) -> usize {
    g.out_edges(from).iter().filter(|&&e| g.edge(e).range == to).count()
}

/// Whether `a` and `b` are copies produced by a split in direction `dir`:
/// equal predecessor multiplicities (out) or equal successor multiplicities (in).
pub fn mergeable(g: &Graph, dir: Direction, a: usize, b: usize) -> bool {
    a != b
        && (0..g.num_vertices()).all(|y| match dir {
            Direction::Out => multiplicity(g, y, a) == multiplicity(g, y, b),
            Direction::In => multiplicity(g, a, y) == multiplicity(g, b, y),
        })
}

pub fn mergeable_pairs(g: &Graph, dir: Direction) -> Vec<(usize, usize)> {
    let n = g.num_vertices();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| mergeable(g, dir, a, b))
        .collect()
}

/// Amalgamates the first mergeable pair in index order, if any.
pub fn amalgamate(g: &Graph, dir: Direction) -> Option<MoveResult> {
    let (a, b) = *mergeable_pairs(g, dir).first()?;
    Some(amalgamate_pair(g, dir, a, b).expect("pair checked mergeable"))
}

/// Merges `b` into `a`, undoing a split in direction `dir`.
///
/// Out: the merged vertex keeps the edges into `a` and all edges leaving
/// either vertex. In: it keeps the edges leaving `a` and all edges entering
/// either vertex.
pub fn amalgamate_pair(g: &Graph, dir: Direction, a: usize, b: usize) -> Result<MoveResult, MoveError> {
    let (a, b) = (a.min(b), a.max(b));
    if !mergeable(g, dir, a, b) {
        return Err(MoveError::NotMergeable(g.vertex_id(a).into(), g.vertex_id(b).into()));
    }
    let n = g.num_vertices();
    // π: F^0 -> G^0 and a representative of each G-vertex
    let pi: Vec<usize> = (0..n).map(|v| if v == b { a } else if v > b { v - 1 } else { v }).collect();
    let rep: Vec<usize> = (0..n).filter(|&v| v != b).collect();

    let kept: Vec<usize> = (0..g.num_edges())
        .filter(|&e| match dir {
            Direction::Out => g.edge(e).range != b,
            Direction::In => g.edge(e).source != b,
        })
        .collect();
    let vertex_ids = tidy_ids(rep.iter().map(|&v| g.vertex_id(v).to_string()).collect(), Some((a, g.vertex_id(b))));
    let edge_ids = tidy_ids(kept.iter().map(|&e| g.edge(e).id.clone()).collect(), None);
    let edges = kept
        .iter()
        .zip(edge_ids)
        .map(|(&e, id)| Edge { id, source: pi[g.edge(e).source], range: pi[g.edge(e).range] })
        .collect();
    let graph = Graph::from_indices(vertex_ids, edges)?;

    let m = n - 1;
    // the split G -> F has S_split (n x m), R_split (m x n); the move F -> G uses them swapped
    let mut s_split = IntMatrix::zeros(n, m);
    let mut r_split = IntMatrix::zeros(m, n);
    match dir {
        Direction::Out => {
            for x in 0..n {
                s_split.set(x, pi[x], 1);
            }
            for y in 0..m {
                for u in 0..n {
                    r_split.set(y, u, multiplicity(g, u, rep[y]) as i64);
                }
            }
        }
        Direction::In => {
            for u in 0..n {
                r_split.set(pi[u], u, 1);
            }
            for x in 0..n {
                for u in 0..m {
                    s_split.set(x, u, multiplicity(g, rep[u], x) as i64);
                }
            }
        }
    }
    Ok(MoveResult { graph, s: r_split, r: s_split })
}

// Drops a `^k` suffix when the base name becomes free; a merged pair of
// copies `x^i`, `x^j` takes the base `x` if nothing else uses it.
fn tidy_ids(ids: Vec<String>, merged: Option<(usize, &str)>) -> Vec<String> {
    let base = |s: &str| s.rsplit_once('^').map(|(b, k)| (b.to_string(), k.to_string()));
    let mut out = ids.clone();
    if let Some((pos, other)) = merged {
        if let (Some((b1, _)), Some((b2, _))) = (base(&ids[pos]), base(other)) {
            let clash = ids.iter().enumerate().any(|(i, s)| i != pos && (s == &b1 || base(s).is_some_and(|(b, _)| b == b1)));
            if b1 == b2 && !clash {
                out[pos] = b1;
            }
        }
    }
    let snapshot = out.clone();
    for (i, s) in snapshot.iter().enumerate() {
        if let Some((b, k)) = base(s) {
            if k.chars().all(|c| c.is_ascii_digit()) {
                let shared = snapshot
                    .iter()
                    .enumerate()
                    .any(|(j, t)| j != i && (t == &b || base(t).is_some_and(|(bt, _)| bt == b)));
                if !shared {
                    out[i] = b;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_graph() -> Graph {
        Graph::parse_json(r#"{"vertices":["v","w"],"edges":[["e","v","v"],["f","v","w"],["g","w","v"]]}"#).unwrap()
    }

    fn spec(v: &str, parts: &[&[&str]]) -> SplitSpec {
        let mut s = SplitSpec::new();
        s.insert(v.into(), parts.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect());
        s
    }

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn in_split_matrices() {
        let e = base_graph();
        let res = in_split(&e, &spec("v", &[&["e"], &["g"]])).unwrap();
        assert_eq!(res.s, m(&[vec![1, 0], vec![0, 1], vec![1, 0]]));
        assert_eq!(res.r, m(&[vec![1, 1, 0], vec![0, 0, 1]]));
        assert_eq!(res.graph.adjacency(true), m(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]));
        res.shift_equivalence(&e);
    }

    #[test]
    fn out_split_matrices() {
        let e = base_graph();
        let res = out_split(&e, &spec("v", &[&["e"], &["f"]])).unwrap();
        assert_eq!(res.s, m(&[vec![1, 0], vec![1, 0], vec![0, 1]]));
        assert_eq!(res.r, m(&[vec![1, 0, 1], vec![0, 1, 0]]));
        res.shift_equivalence(&e);
    }

    #[test]
    fn bad_partitions_are_rejected() {
        let e = base_graph();
        assert!(matches!(out_split(&e, &spec("v", &[&["e"]])), Err(MoveError::InvalidPartition { .. })));
        assert!(matches!(out_split(&e, &spec("v", &[&["e"], &["g"]])), Err(MoveError::InvalidPartition { .. })));
        assert!(matches!(out_split(&e, &spec("q", &[&["e"]])), Err(MoveError::UnknownVertex(_))));
    }

    #[test]
    fn amalgamation_undoes_split() {
        let e = base_graph();
        for dir in [Direction::In, Direction::Out] {
            let res = match dir {
                Direction::In => in_split(&e, &spec("v", &[&["e"], &["g"]])).unwrap(),
                Direction::Out => out_split(&e, &spec("v", &[&["e"], &["f"]])).unwrap(),
            };
            let back = amalgamate_pair(&res.graph, dir, 0, 1).unwrap();
            assert_eq!(back.graph.adjacency(true), e.adjacency(true));
            assert_eq!(back.graph.vertices(), e.vertices());
            back.shift_equivalence(&res.graph);
        }
    }
}
