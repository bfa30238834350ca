//! The degree-zero tower `ℳ(E)_0 ⊂ ℳ(E)_1 ⊂ ...` of finite-dimensional
//! algebras, matrix units `γμ*`, and homomorphisms between levels given by
//! path-embedding tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::TowerError;
use crate::graph::{Graph, Path};
use crate::linalg::IntMatrix;

pub type Q = BigRational;

/// Largest block a level may have before construction refuses it.
pub const DEFAULT_GUARD: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub range: usize,
    pub length: usize,
    pub start: usize,
    pub size: usize,
}

/// The index set `Q_n` of level `n`, split into full matrix blocks.
///
/// Blocks are keyed by (range vertex, path length); for graphs without sinks
/// there is one block per vertex. Within a block paths are lexicographic.
#[derive(Debug)]
pub struct LevelIndex {
    graph: Arc<Graph>,
    n: usize,
    paths: Vec<Path>,
    blocks: Vec<Block>,
    path_block: Vec<usize>,
    index: HashMap<Path, usize>,
}

impl LevelIndex {
    pub fn new(graph: Arc<Graph>, n: usize) -> Self {
        let mut paths = graph.q_paths(n);
        paths.sort_by(|p, q| (p.range(), p.len()).cmp(&(q.range(), q.len())).then_with(|| p.cmp(q)));
        let mut blocks: Vec<Block> = Vec::new();
        let mut path_block = Vec::with_capacity(paths.len());
        for (i, p) in paths.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if b.range == p.range() && b.length == p.len() => b.size += 1,
                _ => blocks.push(Block { range: p.range(), length: p.len(), start: i, size: 1 }),
            }
            path_block.push(blocks.len() - 1);
        }
        let index = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        LevelIndex { graph, n, paths, blocks, path_block, index }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> &Path {
        &self.paths[i]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_of(&self, path: usize) -> usize {
        self.path_block[path]
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn block_paths(&self, b: usize) -> std::ops::Range<usize> {
        let blk = &self.blocks[b];
        blk.start..blk.start + blk.size
    }

    /// Block index for vertex `v` among full-length blocks, if any path of length `n` ends there.
    pub fn vertex_block(&self, v: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.range == v && b.length == self.n)
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.size * b.size).sum()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(0)
    }

    /// All matrix units `(a, b)`, block by block.
    pub fn units(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.blocks.len()).flat_map(move |b| {
            let r = self.block_paths(b);
            r.clone().flat_map(move |i| r.clone().map(move |j| (i, j)))
        })
    }

    fn same(&self, other: &LevelIndex) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) && self.n == other.n
    }
}

/// Lazily built levels of one graph, shared by everything that refers to it.
#[derive(Debug)]
pub struct Tower {
    graph: Arc<Graph>,
    guard: usize,
    cache: Mutex<BTreeMap<usize, Arc<LevelIndex>>>,
}

impl Tower {
    pub fn new(graph: Arc<Graph>) -> Self {
        Self::with_guard(graph, DEFAULT_GUARD)
    }

    pub fn with_guard(graph: Arc<Graph>, guard: usize) -> Self {
        Tower { graph, guard, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn level(&self, n: usize) -> Result<Arc<LevelIndex>, TowerError> {
        let mut cache = self.cache.lock().expect("tower cache poisoned");
        if let Some(l) = cache.get(&n) {
            return Ok(l.clone());
        }
        let l = Arc::new(LevelIndex::new(self.graph.clone(), n));
        if l.max_block() > self.guard {
            return Err(TowerError::GuardExceeded { level: n, size: l.max_block(), guard: self.guard });
        }
        cache.insert(n, l.clone());
        Ok(l)
    }
}

/// An element `Σ c_{γμ} γμ*` of one level, stored sparsely by unit indices.
#[derive(Debug, Clone)]
pub struct MatricialElem {
    level: Arc<LevelIndex>,
    terms: BTreeMap<(usize, usize), Q>,
}

impl PartialEq for MatricialElem {
    fn eq(&self, other: &Self) -> bool {
        self.level.same(&other.level) && self.terms == other.terms
    }
}

impl MatricialElem {
    pub fn zero(level: &Arc<LevelIndex>) -> Self {
        MatricialElem { level: level.clone(), terms: BTreeMap::new() }
    }

    pub fn identity(level: &Arc<LevelIndex>) -> Self {
        let terms = (0..level.paths.len()).map(|i| ((i, i), Q::one())).collect();
        MatricialElem { level: level.clone(), terms }
    }

    pub fn unit(level: &Arc<LevelIndex>, a: usize, b: usize) -> Self {
        debug_assert_eq!(level.block_of(a), level.block_of(b));
        let mut terms = BTreeMap::new();
        terms.insert((a, b), Q::one());
        MatricialElem { level: level.clone(), terms }
    }

    /// The unit `γμ*` for paths; `None` unless both index the same block.
    pub fn unit_of_paths(level: &Arc<LevelIndex>, gamma: &Path, mu: &Path) -> Option<Self> {
        let a = level.index_of(gamma)?;
        let b = level.index_of(mu)?;
        (level.block_of(a) == level.block_of(b)).then(|| Self::unit(level, a, b))
    }

    pub fn from_terms(level: &Arc<LevelIndex>, terms: impl IntoIterator<Item = ((usize, usize), Q)>) -> Self {
        let mut x = Self::zero(level);
        for (k, c) in terms {
            x.add_term(k, c);
        }
        x
    }

    pub fn level(&self) -> &Arc<LevelIndex> {
        &self.level
    }

    pub fn terms(&self) -> &BTreeMap<(usize, usize), Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: (usize, usize), c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), TowerError> {
        if self.level.same(&other.level) { Ok(()) } else { Err(TowerError::LevelMismatch) }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TowerError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TowerError> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.level);
        }
        MatricialElem { level: self.level.clone(), terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, TowerError> {
        self.check(other)?;
        let mut by_row: HashMap<usize, Vec<(usize, &Q)>> = HashMap::new();
        for ((r, c), v) in &other.terms {
            by_row.entry(*r).or_default().push((*c, v));
        }
        let mut out = Self::zero(&self.level);
        for ((a, b), x) in &self.terms {
            if let Some(row) = by_row.get(b) {
                for (d, y) in row {
                    out.add_term((*a, *d), x * *y);
                }
            }
        }
        Ok(out)
    }

    /// `(γμ*)* = μγ*`, extended linearly over `Q`.
    pub fn star(&self) -> Self {
        MatricialElem { level: self.level.clone(), terms: self.terms.iter().map(|((a, b), c)| ((*b, *a), c.clone())).collect() }
    }

    /// Inverse computed block by block over `Q`.
    pub fn inverse(&self) -> Option<Self> {
        let lvl = &self.level;
        let mut out = Self::zero(lvl);
        for b in 0..lvl.blocks.len() {
            let range = lvl.block_paths(b);
            let k = range.len();
            let start = range.start;
            let mut m: Vec<Vec<Q>> = vec![vec![Q::zero(); 2 * k]; k];
            for i in 0..k {
                m[i][k + i] = Q::one();
            }
            for ((a, c), v) in self.terms.range((start, 0)..(start + k, 0)) {
                m[a - start][c - start] = v.clone();
            }
            for col in 0..k {
                let piv = (col..k).find(|&r| !m[r][col].is_zero())?;
                m.swap(col, piv);
                let inv = m[col][col].recip();
                for x in m[col].iter_mut() {
                    *x *= &inv;
                }
                for r in 0..k {
                    if r != col && !m[r][col].is_zero() {
                        let f = m[r][col].clone();
                        let pivot_row = m[col].clone();
                        for (x, p) in m[r].iter_mut().zip(pivot_row) {
                            *x -= &f * p;
                        }
                    }
                }
            }
            for i in 0..k {
                for j in 0..k {
                    out.add_term((start + i, start + j), m[i][k + j].clone());
                }
            }
        }
        Some(out)
    }

    /// Image under the connecting map to level `n2 >= n`.
    pub fn connect_to(&self, target: &Arc<LevelIndex>) -> Result<Self, TowerError> {
        let j = TowerHom::connecting(&self.level, target)?;
        j.apply(self)
    }
}

/// A homomorphism `ℳ(E)_n -> ℳ(F)_k` that sends `γμ*` to `Σ_s τ_s(γ) τ_s(μ)*`,
/// where `table[γ] = [τ_1(γ), τ_2(γ), ...]` lists target paths.
///
/// All homomorphisms built by the crate (connecting maps, corners, the lifted
/// diagram maps) have this form.
#[derive(Debug, Clone)]
pub struct TowerHom {
    source: Arc<LevelIndex>,
    target: Arc<LevelIndex>,
    table: Vec<Vec<usize>>,
}

impl TowerHom {
    /// Checks that slots line up: within a source block every path has the same
    /// number of slots and slot `s` always lands in the same target block.
    pub fn new(source: Arc<LevelIndex>, target: Arc<LevelIndex>, table: Vec<Vec<usize>>) -> Result<Self, TowerError> {
        if table.len() != source.paths.len() {
            return Err(TowerError::MalformedTable(format!("{} rows for {} paths", table.len(), source.paths.len())));
        }
        for b in 0..source.blocks.len() {
            let range = source.block_paths(b);
            let first = &table[range.start];
            for p in range {
                let row = &table[p];
                if row.len() != first.len() {
                    return Err(TowerError::MalformedTable(format!("row {p} has {} slots, expected {}", row.len(), first.len())));
                }
                for (s, (&t, &t0)) in row.iter().zip(first).enumerate() {
                    if t >= target.paths.len() {
                        return Err(TowerError::MalformedTable(format!("row {p} slot {s} out of range")));
                    }
                    if target.block_of(t) != target.block_of(t0) {
                        return Err(TowerError::MalformedTable(format!("row {p} slot {s} leaves its target block")));
                    }
                }
            }
        }
        Ok(TowerHom { source, target, table })
    }

    pub fn source(&self) -> &Arc<LevelIndex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LevelIndex> {
        &self.target
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn table_mut_unchecked(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.table
    }

    pub fn identity(level: &Arc<LevelIndex>) -> Self {
        TowerHom { source: level.clone(), target: level.clone(), table: (0..level.paths.len()).map(|i| vec![i]).collect() }
    }

    /// `j_{n,n2}: γμ* ↦ Σ γκ(μκ)*` over the sink-aware extensions `κ` of `r(γ)`.
    pub fn connecting(source: &Arc<LevelIndex>, target: &Arc<LevelIndex>) -> Result<Self, TowerError> {
        if !Arc::ptr_eq(&source.graph, &target.graph) || target.n < source.n {
            return Err(TowerError::LevelMismatch);
        }
        let g = &source.graph;
        let d = target.n - source.n;
        let mut table = Vec::with_capacity(source.paths.len());
        for p in &source.paths {
            let row = g
                .sink_aware_extensions(p.range(), d)
                .iter()
                .map(|k| target.index_of(&p.concat(k).expect("extension starts at the range")).ok_or(TowerError::UnknownPath))
                .collect::<Result<Vec<_>, _>>()?;
            table.push(row);
        }
        TowerHom::new(source.clone(), target.clone(), table)
    }

    /// The corner map `α: γμ* ↦ (e_{s(γ)}γ)(e_{s(μ)}μ)*` from level `n` to `n + 1`,
    /// where `chosen[v]` is an edge with range `v`.
    pub fn corner(source: &Arc<LevelIndex>, target: &Arc<LevelIndex>, chosen: &[usize]) -> Result<Self, TowerError> {
        if !Arc::ptr_eq(&source.graph, &target.graph) || target.n != source.n + 1 {
            return Err(TowerError::LevelMismatch);
        }
        let g = &source.graph;
        let table = source
            .paths
            .iter()
            .map(|p| {
                let hat = p.prepend(g, chosen[p.source()]).ok_or(TowerError::UnknownPath)?;
                Ok(vec![target.index_of(&hat).ok_or(TowerError::UnknownPath)?])
            })
            .collect::<Result<Vec<_>, TowerError>>()?;
        TowerHom::new(source.clone(), target.clone(), table)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &TowerHom) -> Result<TowerHom, TowerError> {
        if !first.target.same(&self.source) {
            return Err(TowerError::LevelMismatch);
        }
        let table = first
            .table
            .iter()
            .map(|row| row.iter().flat_map(|&t| self.table[t].iter().copied()).collect())
            .collect();
        TowerHom::new(first.source.clone(), self.target.clone(), table)
    }

    pub fn image_of_unit(&self, a: usize, b: usize) -> MatricialElem {
        let mut out = MatricialElem::zero(&self.target);
        for (&x, &y) in self.table[a].iter().zip(&self.table[b]) {
            out.add_term((x, y), Q::one());
        }
        out
    }

    pub fn apply(&self, x: &MatricialElem) -> Result<MatricialElem, TowerError> {
        if !x.level.same(&self.source) {
            return Err(TowerError::LevelMismatch);
        }
        let mut out = MatricialElem::zero(&self.target);
        for ((a, b), c) in &x.terms {
            for (&p, &q) in self.table[*a].iter().zip(&self.table[*b]) {
                out.add_term((p, q), c.clone());
            }
        }
        Ok(out)
    }

    /// Induced map on `K_0` of the levels: entry `(j, i)` is the trace over
    /// target block `j` of the image of a rank-one projection in source block `i`.
    pub fn k0(&self) -> Result<IntMatrix, TowerError> {
        let mut out = IntMatrix::zeros(self.target.blocks.len(), self.source.blocks.len());
        for (i, blk) in self.source.blocks.iter().enumerate() {
            let p = MatricialElem::unit(&self.source, blk.start, blk.start);
            let img = self.apply(&p)?;
            if img.mul(&img)? != img {
                return Err(TowerError::NotIdempotent);
            }
            let mut traces: BTreeMap<usize, Q> = BTreeMap::new();
            for ((a, b), c) in &img.terms {
                if a == b {
                    *traces.entry(self.target.block_of(*a)).or_insert_with(Q::zero) += c;
                }
            }
            for (j, t) in traces {
                if !t.is_integer() || t.is_negative() {
                    return Err(TowerError::NotIdempotent);
                }
                out.set(j, i, t.to_integer());
            }
        }
        Ok(out)
    }

    /// First matrix unit on which the two maps differ, or `None` if they agree.
    pub fn first_disagreement(&self, other: &TowerHom) -> Option<(usize, usize)> {
        if !self.source.same(&other.source) || !self.target.same(&other.target) {
            return Some((0, 0));
        }
        self.source.units().find(|&(a, b)| {
            let mut x: Vec<(usize, usize)> = self.table[a].iter().copied().zip(self.table[b].iter().copied()).collect();
            let mut y: Vec<(usize, usize)> = other.table[a].iter().copied().zip(other.table[b].iter().copied()).collect();
            x.sort_unstable();
            y.sort_unstable();
            x != y
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomCheck {
    pub multiplicative: bool,
    pub star: bool,
    pub unital: Option<bool>,
    /// Human-readable description of the first few failures.
    pub failures: Vec<String>,
}

impl HomCheck {
    pub fn passed(&self) -> bool {
        self.multiplicative && self.star && self.unital.unwrap_or(true)
    }
}

const MAX_REPORTED: usize = 8;

/// Checks multiplicativity, `*`-compatibility and (optionally) unitality.
///
/// Multiplicativity is checked on a generating set of relations: for each
/// block with base index `0`, `h(e_{a0}) h(e_{0d}) = h(e_{ad})`, and across all
/// blocks `h(e_{0b}) h(e'_{c0}) = δ h(e_{00})`. Together these force
/// `h(e_{ab}) h(e'_{cd}) = δ h(e_{ad})` for every pair of units.
/// With `exhaustive` every pair of units is multiplied instead.
pub fn verify_hom(h: &TowerHom, unital: bool, exhaustive: bool) -> HomCheck {
    let src = &h.source;
    let mut failures = Vec::new();
    let note = |failures: &mut Vec<String>, msg: String| {
        if failures.len() < MAX_REPORTED {
            failures.push(msg);
        }
    };
    let label = |i: usize| src.graph.path_label(src.path(i));

    let mut multiplicative = true;
    if exhaustive {
        let units: Vec<(usize, usize)> = src.units().collect();
        for &(a, b) in &units {
            let x = h.image_of_unit(a, b);
            for &(c, d) in &units {
                let lhs = x.mul(&h.image_of_unit(c, d)).expect("same level");
                let rhs = if b == c { h.image_of_unit(a, d) } else { MatricialElem::zero(&h.target) };
                if lhs != rhs {
                    multiplicative = false;
                    note(&mut failures, format!("h({0}{1}*) h({2}{3}*) wrong", label(a), label(b), label(c), label(d)));
                }
            }
        }
    } else {
        for blk in &src.blocks {
            let z = blk.start;
            let range = z..z + blk.size;
            for a in range.clone() {
                let left = h.image_of_unit(a, z);
                for d in range.clone() {
                    if left.mul(&h.image_of_unit(z, d)).expect("same level") != h.image_of_unit(a, d) {
                        multiplicative = false;
                        note(&mut failures, format!("h({0}{1}*) h({1}{2}*) != h({0}{2}*)", label(a), label(z), label(d)));
                    }
                }
            }
        }
        for b1 in &src.blocks {
            for b in b1.start..b1.start + b1.size {
                let left = h.image_of_unit(b1.start, b);
                for b2 in &src.blocks {
                    for c in b2.start..b2.start + b2.size {
                        let lhs = left.mul(&h.image_of_unit(c, b2.start)).expect("same level");
                        let rhs = if b == c { h.image_of_unit(b1.start, b1.start) } else { MatricialElem::zero(&h.target) };
                        if lhs != rhs {
                            multiplicative = false;
                            note(
                                &mut failures,
                                format!("h({0}{1}*) h({2}{3}*) wrong", label(b1.start), label(b), label(c), label(b2.start)),
                            );
                        }
                    }
                }
            }
        }
    }

    let mut star = true;
    for (a, b) in src.units() {
        if h.image_of_unit(a, b).star() != h.image_of_unit(b, a) {
            star = false;
            note(&mut failures, format!("h(({0}{1}*)*) != h({0}{1}*)*", label(a), label(b)));
        }
    }

    let unital = unital.then(|| {
        let mut counts = vec![0usize; h.target.paths.len()];
        for row in &h.table {
            for &t in row {
                counts[t] += 1;
            }
        }
        let ok = counts.iter().all(|&c| c == 1);
        if !ok {
            note(&mut failures, "h(1) != 1".to_string());
        }
        ok
    });

    HomCheck { multiplicative, star, unital, failures }
}

/// Whether `x` lies in the center of the direct limit `ℳ(E) = lim ℳ(E)_n`.
///
/// `x` must be a block scalar at its own level; the scalars are then pushed
/// up along the connecting maps until the pattern repeats or two different
/// scalars meet in one block.
pub fn is_central_in_limit(x: &MatricialElem) -> bool {
    let lvl = &x.level;
    let g = &lvl.graph;
    let mut scalars: Vec<Q> = Vec::with_capacity(lvl.blocks.len());
    for (b, blk) in lvl.blocks.iter().enumerate() {
        let range = lvl.block_paths(b);
        let c = x.terms.get(&(blk.start, blk.start)).cloned().unwrap_or_else(Q::zero);
        for i in range.clone() {
            for j in range.clone() {
                let v = x.terms.get(&(i, j)).cloned().unwrap_or_else(Q::zero);
                let expect = if i == j { c.clone() } else { Q::zero() };
                if v != expect {
                    return false;
                }
            }
        }
        scalars.push(c);
    }
    // only blocks of full length move; shorter blocks end at sinks and stay put
    let mut state: Vec<Option<Q>> = (0..g.num_vertices())
        .map(|v| lvl.vertex_block(v).filter(|_| !g.is_sink(v)).map(|b| scalars[b].clone()))
        .collect();
    let mut seen: HashSet<Vec<Option<Q>>> = HashSet::new();
    while seen.insert(state.clone()) {
        let mut next: Vec<Option<Q>> = vec![None; g.num_vertices()];
        for e in g.edges() {
            if let Some(c) = &state[e.source] {
                match &next[e.range] {
                    None => next[e.range] = Some(c.clone()),
                    Some(d) if d != c => return false,
                    _ => {}
                }
            }
        }
        for (v, s) in next.iter_mut().enumerate() {
            if g.is_sink(v) {
                *s = None;
            }
        }
        state = next;
    }
    true
}

/// Bratteli diagram of levels `0..=levels` in Graphviz DOT. Node labels give
/// the range vertex and block size; edge multiplicities come from `K_0` of
/// the connecting maps.
pub fn bratteli_dot(tower: &Tower, levels: usize) -> Result<String, TowerError> {
    let g = tower.graph();
    let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    let mut prev: Option<Arc<LevelIndex>> = None;
    for n in 0..=levels {
        let lvl = tower.level(n)?;
        let _ = writeln!(out, "  subgraph level_{n} {{ rank=same;");
        for (b, blk) in lvl.blocks.iter().enumerate() {
            let _ = writeln!(out, "    L{n}_{b} [label=\"{}:{}\"];", g.vertex_id(blk.range), blk.size);
        }
        out.push_str("  }\n");
        if let Some(p) = &prev {
            let k0 = TowerHom::connecting(p, &lvl)?.k0()?;
            for j in 0..k0.rows() {
                for i in 0..k0.cols() {
                    for _ in 0..k0.get(j, i).to_usize().unwrap_or(0) {
                        let _ = writeln!(out, "  L{}_{i} -> L{n}_{j};", n - 1);
                    }
                }
            }
        }
        prev = Some(lvl);
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn q_from_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}
