//! Finite directed multigraphs, paths, and adjacency matrices.
//!
//! Vertices and edges keep the order in which they were supplied. Every path
//! enumeration in the crate is lexicographic in edge indices, so two runs over
//! the same input always see the same sequences.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::linalg::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub range: usize,
}

/// A finite directed multigraph `E = (E^0, E^1, r, s)`.
///
/// Parallel edges are distinct objects. Construction validates identifiers and
/// endpoint indices, after which the graph never changes.
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for Graph {}

/// On-disk form: `{"vertices": [...], "edges": [[id, source, range], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, String)>,
}

impl Graph {
    /// Builds a graph from vertex ids and `(edge id, source id, range id)` triples.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateId(v.clone()));
            }
        }
        let mut resolved = Vec::new();
        let mut edge_index = HashMap::new();
        for (id, s, r) in edges {
            let source = *vertex_index
                .get(&s)
                .ok_or_else(|| GraphError::DanglingVertex { edge: id.clone(), vertex: s.clone() })?;
            let range = *vertex_index
                .get(&r)
                .ok_or_else(|| GraphError::DanglingVertex { edge: id.clone(), vertex: r.clone() })?;
            if vertex_index.contains_key(&id) || edge_index.insert(id.clone(), resolved.len()).is_some() {
                return Err(GraphError::DuplicateId(id));
            }
            resolved.push(Edge { id, source, range });
        }
        Ok(Self::from_parts(vertices, resolved, vertex_index, edge_index))
    }

    /// Builds a graph from index-based edges; ids must already be unique.
    pub fn from_indices(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = vertices.len();
        let names: Vec<String> = vertices.clone();
        let triples = edges
            .into_iter()
            .map(|e| {
                if e.source >= n || e.range >= n {
                    Err(GraphError::DanglingVertex {
                        edge: e.id.clone(),
                        vertex: format!("#{}", e.source.max(e.range)),
                    })
                } else {
                    Ok((e.id, names[e.source].clone(), names[e.range].clone()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Graph::new(vertices, triples)
    }

    fn from_parts(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        vertex_index: HashMap<String, usize>,
        edge_index: HashMap<String, usize>,
    ) -> Self {
        let mut out_edges = vec![Vec::new(); vertices.len()];
        let mut in_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source].push(i);
            in_edges[e.range].push(i);
        }
        Graph { vertices, edges, vertex_index, edge_index, out_edges, in_edges }
    }

    /// Parses the JSON graph schema.
    pub fn parse_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        Graph::from_document(doc)
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        Graph::new(doc.vertices, doc.edges)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    (e.id.clone(), self.vertices[e.source].clone(), self.vertices[e.range].clone())
                })
                .collect(),
        }
    }

    /// The graph `E_A` with `a_ij` edges from `v_i` to `v_j` (untransposed convention).
    pub fn from_adjacency(a: &IntMatrix) -> Result<Self, GraphError> {
        if a.rows() != a.cols() {
            return Err(GraphError::Malformed("adjacency matrix must be square".into()));
        }
        let n = a.rows();
        let vertices: Vec<String> = (0..n).map(|i| format!("v{}", i + 1)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let count = a.get_i64(i, j).filter(|c| *c >= 0).ok_or_else(|| {
                    GraphError::Malformed(format!("entry ({i},{j}) is not a small nonnegative integer"))
                })?;
                for k in 0..count {
                    edges.push(Edge { id: format!("e{}_{}_{}", i + 1, j + 1, k + 1), source: i, range: j });
                }
            }
        }
        Graph::from_indices(vertices, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_by_id(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_by_id(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// `s^{-1}(v)` in edge order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    /// `r^{-1}(v)` in edge order.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.out_edges[v].is_empty()
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.in_edges[v].is_empty()
    }

    /// Adjacency matrix. Untransposed: entry `(i, j)` counts edges `v_i -> v_j`.
    /// Transposed gives the working matrix `A = A_E^t` used by all K-theory maps.
    pub fn adjacency(&self, transposed: bool) -> IntMatrix {
        let n = self.num_vertices();
        let mut a = IntMatrix::zeros(n, n);
        for e in &self.edges {
            let (i, j) = if transposed { (e.range, e.source) } else { (e.source, e.range) };
            a.add_to(i, j, 1);
        }
        a
    }

    pub fn classify_vertices(&self) -> VertexClassification {
        let sources: BTreeSet<usize> = (0..self.num_vertices()).filter(|&v| self.is_source(v)).collect();
        let sinks: BTreeSet<usize> = (0..self.num_vertices()).filter(|&v| self.is_sink(v)).collect();
        let essential = sources.is_empty() && sinks.is_empty();
        VertexClassification { sources, sinks, essential }
    }

    pub fn is_essential(&self) -> bool {
        self.classify_vertices().essential
    }

    pub fn has_sinks(&self) -> bool {
        (0..self.num_vertices()).any(|v| self.is_sink(v))
    }

    pub fn has_sources(&self) -> bool {
        (0..self.num_vertices()).any(|v| self.is_source(v))
    }

    /// The single-edge path `e`.
    pub fn edge_path(&self, e: usize) -> Path {
        let edge = &self.edges[e];
        Path { edges: vec![e], source: edge.source, range: edge.range }
    }

    /// Builds a path from edge indices, checking that consecutive edges compose.
    pub fn path_from_edges(&self, edges: Vec<usize>) -> Option<Path> {
        let first = *edges.first()?;
        let mut range = self.edges.get(first)?.source;
        for &e in &edges {
            let edge = self.edges.get(e)?;
            if edge.source != range {
                return None;
            }
            range = edge.range;
        }
        Some(Path { source: self.edges[first].source, range, edges })
    }

    /// All paths of length `d` matching the optional endpoint filters, in
    /// lexicographic order of edge indices.
    ///
    /// `|v_k E^d v_i|` equals `(A^d)_{ik}` for `A = adjacency(true)`.
    pub fn enumerate_paths(&self, d: usize, from: Option<usize>, to: Option<usize>) -> Vec<Path> {
        let mut out = Vec::new();
        if d == 0 {
            for v in 0..self.num_vertices() {
                if from.is_none_or(|f| f == v) && to.is_none_or(|t| t == v) {
                    out.push(Path::vertex(v));
                }
            }
            return out;
        }
        let mut stack = Vec::with_capacity(d);
        for (e, edge) in self.edges.iter().enumerate() {
            if from.is_some_and(|f| f != edge.source) {
                continue;
            }
            stack.push(e);
            self.extend_paths(&mut stack, edge.range, d, to, edge.source, &mut out);
            stack.pop();
        }
        out
    }

    fn extend_paths(
        &self,
        stack: &mut Vec<usize>,
        at: usize,
        d: usize,
        to: Option<usize>,
        source: usize,
        out: &mut Vec<Path>,
    ) {
        if stack.len() == d {
            if to.is_none_or(|t| t == at) {
                out.push(Path { edges: stack.clone(), source, range: at });
            }
            return;
        }
        for &e in &self.out_edges[at] {
            stack.push(e);
            self.extend_paths(stack, self.edges[e].range, d, to, source, out);
            stack.pop();
        }
    }

    /// Paths starting at `from` that either have length exactly `d` or have
    /// length `< d` and end at a sink, in lexicographic order.
    pub fn sink_aware_extensions(&self, from: usize, d: usize) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.collect_extensions(from, from, d, &mut stack, &mut out);
        out
    }

    fn collect_extensions(&self, source: usize, at: usize, d: usize, stack: &mut Vec<usize>, out: &mut Vec<Path>) {
        if stack.len() == d || self.is_sink(at) {
            out.push(Path { edges: stack.clone(), source, range: at });
            return;
        }
        for &e in &self.out_edges[at] {
            stack.push(e);
            self.collect_extensions(source, self.edges[e].range, d, stack, out);
            stack.pop();
        }
    }

    /// `Q_n`: paths of length `n`, plus shorter paths ending at a sink.
    /// Grouped by range vertex, lexicographic within each group.
    pub fn q_paths(&self, n: usize) -> Vec<Path> {
        let mut grouped: Vec<Vec<Path>> = vec![Vec::new(); self.num_vertices()];
        for v in 0..self.num_vertices() {
            for p in self.sink_aware_extensions(v, n) {
                grouped[p.range].push(p);
            }
        }
        for g in &mut grouped {
            g.sort();
        }
        grouped.into_iter().flatten().collect()
    }

    /// Isomorphism up to renaming, by trying every vertex bijection. Only
    /// meant for small graphs.
    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        let n = self.num_vertices();
        if n != other.num_vertices() || self.num_edges() != other.num_edges() {
            return false;
        }
        let a = self.adjacency(false);
        let b = other.adjacency(false);
        let mut perm: Vec<usize> = (0..n).collect();
        fn search(k: usize, perm: &mut Vec<usize>, a: &IntMatrix, b: &IntMatrix) -> bool {
            let n = perm.len();
            if k == n {
                return true;
            }
            for i in k..n {
                perm.swap(k, i);
                // rows and columns up to k are fixed now
                let ok = (0..=k).all(|j| a.get(k, j) == b.get(perm[k], perm[j]) && a.get(j, k) == b.get(perm[j], perm[k]));
                if ok && search(k + 1, perm, a, b) {
                    return true;
                }
                perm.swap(k, i);
            }
            false
        }
        search(0, &mut perm, &a, &b)
    }

    /// Formats a path as its edge ids joined by `.` (or the vertex id if empty).
    pub fn path_label(&self, p: &Path) -> String {
        if p.edges.is_empty() {
            self.vertices[p.source].clone()
        } else {
            p.edges.iter().map(|&e| self.edges[e].id.as_str()).collect::<Vec<_>>().join(".")
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices: {}; edges:", self.vertices.join(", "))?;
        for e in &self.edges {
            write!(f, " {}:{}->{}", e.id, self.vertices[e.source], self.vertices[e.range])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexClassification {
    pub sources: BTreeSet<usize>,
    pub sinks: BTreeSet<usize>,
    pub essential: bool,
}

/// A path `e_1 ... e_n` with `r(e_i) = s(e_{i+1})`; the empty path at `v` is the vertex `v`.
///
/// Ordering is lexicographic in edge indices, then by source vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    edges: Vec<usize>,
    source: usize,
    range: usize,
}

impl Path {
    pub fn vertex(v: usize) -> Self {
        Path { edges: Vec::new(), source: v, range: v }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Concatenation `self · other`; `None` unless `r(self) = s(other)`.
    pub fn concat(&self, other: &Path) -> Option<Path> {
        if self.range != other.source {
            return None;
        }
        let mut edges = Vec::with_capacity(self.len() + other.len());
        edges.extend_from_slice(&self.edges);
        edges.extend_from_slice(&other.edges);
        Some(Path { edges, source: self.source, range: other.range })
    }

    /// Prepends one edge whose range is `s(self)`.
    pub fn prepend(&self, g: &Graph, e: usize) -> Option<Path> {
        g.edge_path(e).concat(self)
    }

    /// If `self = prefix · rest`, returns `rest`.
    pub fn strip_prefix(&self, prefix: &Path) -> Option<Path> {
        if prefix.source != self.source || !self.edges.starts_with(&prefix.edges) {
            return None;
        }
        Some(Path { edges: self.edges[prefix.len()..].to_vec(), source: prefix.range, range: self.range })
    }

    pub fn has_prefix(&self, prefix: &Path) -> bool {
        prefix.source == self.source && self.edges.starts_with(&prefix.edges)
    }

    /// Drops the final edge, if any.
    pub fn split_last(&self, g: &Graph) -> Option<(Path, usize)> {
        let (&last, rest) = self.edges.split_last()?;
        let range = g.edge(last).source;
        Some((Path { edges: rest.to_vec(), source: self.source, range }, last))
    }

    pub fn last_edge(&self) -> Option<usize> {
        self.edges.last().copied()
    }
}
