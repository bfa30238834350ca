//! Symbolic Leavitt path algebra `L_Q(E)` in the basis of irreducible
//! monomials `γμ*`.
//!
//! For each non-sink `v` the first edge of `s^{-1}(v)` is special; a monomial
//! is reducible when `γ` and `μ` end in the same special edge `f`, and then
//! `γ'f(μ'f)* = γ'μ'* - Σ_{e ≠ f, s(e) = s(f)} (γ'e)(μ'e)*`. Reduced monomials
//! form a basis, so every element has a unique normal form.

mod parse;
mod theta;

pub use parse::parse_expr;
pub use theta::{
    decompose_graded_auto, kernel_test, local_conjugator, random_theta_data, Generator, LocalConjugator, ThetaData,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::LpaError;
use crate::graph::{Graph, Path};
use crate::tower::{LevelIndex, MatricialElem, Q};

/// The monomial `γμ*` with `r(γ) = r(μ)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub gamma: Path,
    pub mu: Path,
}

impl Monomial {
    pub fn new(gamma: Path, mu: Path) -> Option<Self> {
        (gamma.range() == mu.range()).then_some(Monomial { gamma, mu })
    }

    pub fn degree(&self) -> i64 {
        self.gamma.len() as i64 - self.mu.len() as i64
    }

    pub fn star(&self) -> Monomial {
        Monomial { gamma: self.mu.clone(), mu: self.gamma.clone() }
    }

    /// `(γ1 μ1*)(γ2 μ2*)`: nonzero only if one of `μ1`, `γ2` extends the other.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        if let Some(k) = other.gamma.strip_prefix(&self.mu) {
            Some(Monomial { gamma: self.gamma.concat(&k)?, mu: other.mu.clone() })
        } else if let Some(k) = self.mu.strip_prefix(&other.gamma) {
            Some(Monomial { gamma: self.gamma.clone(), mu: other.mu.concat(&k)? })
        } else {
            None
        }
    }
}

/// A finite `Q`-linear combination of monomials. Elements returned by
/// [`Lpa`] methods are always in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LpaElem {
    terms: BTreeMap<Monomial, Q>,
}

impl LpaElem {
    pub fn zero() -> Self {
        LpaElem::default()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Builds an element without normalizing.
    pub fn from_raw(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut x = LpaElem::zero();
        for (m, c) in terms {
            x.add_term(m, c);
        }
        x
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        add_into(&mut self.terms, m, c);
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return LpaElem::zero();
        }
        LpaElem { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn star(&self) -> Self {
        LpaElem { terms: self.terms.iter().map(|(m, c)| (m.star(), c.clone())).collect() }
    }

    pub fn is_homogeneous(&self, degree: i64) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    /// Longest path appearing in any monomial.
    pub fn max_length(&self) -> usize {
        self.terms.keys().map(|m| m.gamma.len().max(m.mu.len())).max().unwrap_or(0)
    }
}

fn add_into(terms: &mut BTreeMap<Monomial, Q>, m: Monomial, c: Q) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
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

/// Order in which reducible monomials are rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Always the largest reducible monomial.
    Canonical,
    /// A pseudo-random reducible monomial, drawn from the given seed.
    Seeded(u64),
}

/// `L_Q(E)` for a fixed graph, with its special and chosen edges.
#[derive(Debug, Clone)]
pub struct Lpa {
    graph: Arc<Graph>,
    special: Vec<Option<usize>>,
    chosen: Vec<Option<usize>>,
}

impl Lpa {
    pub fn new(graph: Arc<Graph>) -> Self {
        let special = (0..graph.num_vertices()).map(|v| graph.out_edges(v).first().copied()).collect();
        let chosen = (0..graph.num_vertices()).map(|v| graph.in_edges(v).first().copied()).collect();
        Lpa { graph, special, chosen }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// The edge `e_v ∈ r^{-1}(v)` used by `t+`, `t-` and the corner maps.
    pub fn chosen_edge(&self, v: usize) -> Option<usize> {
        self.chosen[v]
    }

    pub fn vertex(&self, v: usize) -> LpaElem {
        LpaElem::from_raw([(Monomial { gamma: Path::vertex(v), mu: Path::vertex(v) }, Q::one())])
    }

    pub fn edge(&self, e: usize) -> LpaElem {
        let r = self.graph.edge(e).range;
        LpaElem::from_raw([(Monomial { gamma: self.graph.edge_path(e), mu: Path::vertex(r) }, Q::one())])
    }

    pub fn ghost(&self, e: usize) -> LpaElem {
        self.edge(e).star()
    }

    pub fn path(&self, p: &Path) -> LpaElem {
        LpaElem::from_raw([(Monomial { gamma: p.clone(), mu: Path::vertex(p.range()) }, Q::one())])
    }

    /// The unit `γμ*` (normalized).
    pub fn monomial(&self, gamma: &Path, mu: &Path) -> Option<LpaElem> {
        let m = Monomial::new(gamma.clone(), mu.clone())?;
        Some(self.normal_form(&LpaElem::from_raw([(m, Q::one())]), Strategy::Canonical))
    }

    pub fn one(&self) -> LpaElem {
        LpaElem::from_raw((0..self.graph.num_vertices()).map(|v| (Monomial { gamma: Path::vertex(v), mu: Path::vertex(v) }, Q::one())))
    }

    pub fn scalar(&self, c: Q) -> LpaElem {
        self.one().scale(&c)
    }

    /// `t+ = Σ_v e_v`; needs every vertex to receive an edge.
    pub fn t_plus(&self) -> Result<LpaElem, LpaError> {
        let mut out = LpaElem::zero();
        for c in &self.chosen {
            out = out.add(&self.edge(c.ok_or(LpaError::HasSources)?));
        }
        Ok(out)
    }

    pub fn t_minus(&self) -> Result<LpaElem, LpaError> {
        Ok(self.t_plus()?.star())
    }

    fn reducible(&self, m: &Monomial) -> Option<usize> {
        let f = m.gamma.last_edge()?;
        (m.mu.last_edge() == Some(f) && self.special[self.graph.edge(f).source] == Some(f)).then_some(f)
    }

    /// Rewrites to the unique irreducible form; the result does not depend on `strategy`.
    pub fn normal_form(&self, x: &LpaElem, strategy: Strategy) -> LpaElem {
        let mut rng = match strategy {
            Strategy::Seeded(seed) => Some(<rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)),
            Strategy::Canonical => None,
        };
        let mut done: BTreeMap<Monomial, Q> = BTreeMap::new();
        let mut pending = x.terms.clone();
        while !pending.is_empty() {
            let key = match rng.as_mut() {
                Some(rng) => {
                    let i = rng.gen_range(0..pending.len());
                    pending.keys().nth(i).cloned().expect("index in range")
                }
                None => pending.keys().next_back().cloned().expect("nonempty"),
            };
            let c = pending.remove(&key).expect("present");
            let Some(f) = self.reducible(&key) else {
                add_into(&mut done, key, c);
                continue;
            };
            let (g0, _) = key.gamma.split_last(&self.graph).expect("nonempty");
            let (m0, _) = key.mu.split_last(&self.graph).expect("nonempty");
            let u = self.graph.edge(f).source;
            for &e in self.graph.out_edges(u) {
                if e != f {
                    let ep = self.graph.edge_path(e);
                    let m = Monomial { gamma: g0.concat(&ep).expect("ends at u"), mu: m0.concat(&ep).expect("ends at u") };
                    add_into(&mut done, m, -c.clone());
                }
            }
            add_into(&mut pending, Monomial { gamma: g0, mu: m0 }, c);
        }
        LpaElem { terms: done }
    }

    pub fn mul(&self, x: &LpaElem, y: &LpaElem) -> LpaElem {
        let mut raw: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (a, c) in &x.terms {
            for (b, d) in &y.terms {
                if let Some(m) = a.mul(b) {
                    add_into(&mut raw, m, c * d);
                }
            }
        }
        self.normal_form(&LpaElem { terms: raw }, Strategy::Canonical)
    }

    pub fn product(&self, factors: &[&LpaElem]) -> LpaElem {
        factors.iter().fold(self.one(), |acc, f| self.mul(&acc, f))
    }

    pub fn pow(&self, x: &LpaElem, k: usize) -> LpaElem {
        (0..k).fold(self.one(), |acc, _| self.mul(&acc, x))
    }

    pub fn degree_components(&self, x: &LpaElem) -> BTreeMap<i64, LpaElem> {
        let mut out: BTreeMap<i64, LpaElem> = BTreeMap::new();
        for (m, c) in &x.terms {
            out.entry(m.degree()).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// The matricial image at level `n` of a degree-0 element whose monomials
    /// have length at most `n`.
    pub fn to_matricial(&self, x: &LpaElem, level: &Arc<LevelIndex>) -> Result<MatricialElem, LpaError> {
        let n = level.level();
        let mut out = MatricialElem::zero(level);
        for (m, c) in &x.terms {
            if m.degree() != 0 || m.gamma.len() > n {
                return Err(LpaError::NotDegreeZero);
            }
            for k in self.graph.sink_aware_extensions(m.gamma.range(), n - m.gamma.len()) {
                let a = level.index_of(&m.gamma.concat(&k).expect("extension")).ok_or(crate::TowerError::UnknownPath)?;
                let b = level.index_of(&m.mu.concat(&k).expect("extension")).ok_or(crate::TowerError::UnknownPath)?;
                out.add_term((a, b), c.clone());
            }
        }
        Ok(out)
    }

    pub fn from_matricial(&self, x: &MatricialElem) -> LpaElem {
        let lvl = x.level();
        let raw = x.terms().iter().map(|((a, b), c)| {
            (Monomial { gamma: lvl.path(*a).clone(), mu: lvl.path(*b).clone() }, c.clone())
        });
        self.normal_form(&LpaElem::from_raw(raw), Strategy::Canonical)
    }

    /// Level that holds a degree-0 element.
    pub fn natural_level(&self, x: &LpaElem) -> Arc<LevelIndex> {
        Arc::new(LevelIndex::new(self.graph.clone(), x.max_length()))
    }

    /// Inverse of a degree-0 element, computed in its matricial level.
    pub fn inverse(&self, x: &LpaElem) -> Result<LpaElem, LpaError> {
        if !x.is_homogeneous(0) {
            return Err(LpaError::NotDegreeZero);
        }
        let lvl = self.natural_level(x);
        let inv = self.to_matricial(x, &lvl)?.inverse().ok_or(LpaError::NotInvertible)?;
        Ok(self.from_matricial(&inv))
    }

    /// Multiplies generator-style: `e`, `e*`, vertices.
    pub fn generator(&self, g: Generator) -> LpaElem {
        match g {
            Generator::Vertex(v) => self.vertex(v),
            Generator::Edge(e) => self.edge(e),
            Generator::Ghost(e) => self.ghost(e),
        }
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut out: Vec<Generator> = (0..self.graph.num_vertices()).map(Generator::Vertex).collect();
        out.extend((0..self.graph.num_edges()).map(Generator::Edge));
        out.extend((0..self.graph.num_edges()).map(Generator::Ghost));
        out
    }

    pub fn generator_label(&self, g: Generator) -> String {
        match g {
            Generator::Vertex(v) => self.graph.vertex_id(v).to_string(),
            Generator::Edge(e) => self.graph.edge(e).id.clone(),
            Generator::Ghost(e) => format!("{}*", self.graph.edge(e).id),
        }
    }

    /// Human-readable form, e.g. `e f* - 1/2 v`; the unit prints as `1`.
    pub fn format(&self, x: &LpaElem) -> String {
        if x.is_zero() {
            return "0".into();
        }
        if *x == self.one() {
            return "1".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in x.terms.iter().enumerate() {
            let neg = c < &Q::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&format!("{abs} "));
            }
            out.push_str(&self.format_monomial(m));
        }
        out
    }

    fn format_monomial(&self, m: &Monomial) -> String {
        let g = &self.graph;
        if m.gamma.is_empty() && m.mu.is_empty() {
            return g.vertex_id(m.gamma.source()).to_string();
        }
        let mut parts: Vec<String> = m.gamma.edges().iter().map(|&e| g.edge(e).id.clone()).collect();
        parts.extend(m.mu.edges().iter().rev().map(|&e| format!("{}*", g.edge(e).id)));
        parts.join(" ")
    }

    /// A random element: `terms` monomials with paths of length `<= max_len`
    /// and small integer coefficients.
    pub fn random_elem<R: Rng>(&self, rng: &mut R, terms: usize, max_len: usize) -> LpaElem {
        let g = &self.graph;
        let mut raw = Vec::new();
        for _ in 0..terms {
            let v = rng.gen_range(0..g.num_vertices());
            let walk = |len: usize, rng: &mut R| -> Path {
                // backwards random walk so the path ends at v
                let mut edges = Vec::new();
                let mut at = v;
                for _ in 0..len {
                    let ins = g.in_edges(at);
                    if ins.is_empty() {
                        break;
                    }
                    let e = ins[rng.gen_range(0..ins.len())];
                    edges.push(e);
                    at = g.edge(e).source;
                }
                edges.reverse();
                g.path_from_edges(edges).unwrap_or_else(|| Path::vertex(v))
            };
            let a = rng.gen_range(0..=max_len);
            let b = rng.gen_range(0..=max_len);
            let gamma = walk(a, rng);
            let mu = walk(b, rng);
            let c = Q::from_integer(rng.gen_range(-3i64..=3).into());
            raw.push((Monomial { gamma, mu }, c));
        }
        LpaElem::from_raw(raw)
    }
}
