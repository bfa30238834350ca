//! Graded automorphisms `θ_{u,z}` and their local conjugators.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;

use super::{Lpa, LpaElem, Strategy};
use crate::error::LpaError;
use crate::graph::Path;
use crate::tower::{is_central_in_limit, LevelIndex, MatricialElem, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Vertex(usize),
    Edge(usize),
    Ghost(usize),
}

/// Invertible degree-0 `u`, `z` with `z` commuting with every `u v u^{-1}`.
///
/// Defines `θ(v) = u v u^{-1}`, `θ(e) = (u e u^{-1}) z`, `θ(e*) = z^{-1} (u e* u^{-1})`.
#[derive(Debug, Clone)]
pub struct ThetaData {
    lpa: Lpa,
    pub u: LpaElem,
    pub u_inv: LpaElem,
    pub z: LpaElem,
    pub z_inv: LpaElem,
    edge_img: Vec<LpaElem>,
    ghost_img: Vec<LpaElem>,
    vertex_img: Vec<LpaElem>,
    path_cache: RefCell<HashMap<Path, LpaElem>>,
    ghost_cache: RefCell<HashMap<Path, LpaElem>>,
}

impl ThetaData {
    pub fn new(lpa: &Lpa, u: LpaElem, z: LpaElem) -> Result<Self, LpaError> {
        let u_inv = lpa.inverse(&u)?;
        let z_inv = lpa.inverse(&z)?;
        let g = lpa.graph().clone();
        let mut vertex_img = Vec::with_capacity(g.num_vertices());
        for v in 0..g.num_vertices() {
            let c = lpa.product(&[&u, &lpa.vertex(v), &u_inv]);
            if lpa.mul(&z, &c) != lpa.mul(&c, &z) {
                return Err(LpaError::NotCommuting(g.vertex_id(v).to_string()));
            }
            vertex_img.push(c);
        }
        let edge_img = (0..g.num_edges()).map(|e| lpa.product(&[&u, &lpa.edge(e), &u_inv, &z])).collect();
        let ghost_img = (0..g.num_edges()).map(|e| lpa.product(&[&z_inv, &u, &lpa.ghost(e), &u_inv])).collect();
        Ok(ThetaData {
            lpa: lpa.clone(),
            u,
            u_inv,
            z,
            z_inv,
            edge_img,
            ghost_img,
            vertex_img,
            path_cache: RefCell::new(HashMap::new()),
            ghost_cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn lpa(&self) -> &Lpa {
        &self.lpa
    }

    pub fn on_generator(&self, g: Generator) -> LpaElem {
        match g {
            Generator::Vertex(v) => self.vertex_img[v].clone(),
            Generator::Edge(e) => self.edge_img[e].clone(),
            Generator::Ghost(e) => self.ghost_img[e].clone(),
        }
    }

    /// `θ(γ)`.
    fn on_path(&self, p: &Path) -> LpaElem {
        if p.is_empty() {
            return self.vertex_img[p.source()].clone();
        }
        if let Some(x) = self.path_cache.borrow().get(p) {
            return x.clone();
        }
        let (rest, last) = p.split_last(self.lpa.graph()).expect("nonempty");
        let head = if rest.is_empty() { self.vertex_img[rest.source()].clone() } else { self.on_path(&rest) };
        let x = self.lpa.mul(&head, &self.edge_img[last]);
        self.path_cache.borrow_mut().insert(p.clone(), x.clone());
        x
    }

    /// `θ(μ*)`.
    fn on_ghost(&self, p: &Path) -> LpaElem {
        if p.is_empty() {
            return self.vertex_img[p.source()].clone();
        }
        if let Some(x) = self.ghost_cache.borrow().get(p) {
            return x.clone();
        }
        let (rest, last) = p.split_last(self.lpa.graph()).expect("nonempty");
        let tail = if rest.is_empty() { self.vertex_img[rest.source()].clone() } else { self.on_ghost(&rest) };
        let x = self.lpa.mul(&self.ghost_img[last], &tail);
        self.ghost_cache.borrow_mut().insert(p.clone(), x.clone());
        x
    }

    /// `θ(x)`, applied monomial by monomial.
    pub fn apply(&self, x: &LpaElem) -> LpaElem {
        let mut out = LpaElem::zero();
        for (m, c) in x.terms() {
            let img = match (m.gamma.is_empty(), m.mu.is_empty()) {
                (true, true) => self.vertex_img[m.gamma.source()].clone(),
                (false, true) => self.on_path(&m.gamma),
                (true, false) => self.on_ghost(&m.mu),
                (false, false) => self.lpa.mul(&self.on_path(&m.gamma), &self.on_ghost(&m.mu)),
            };
            out = out.add(&img.scale(c));
        }
        out
    }
}

/// The conjugator `u_n = Σ_{γ ∈ Q_n} u^γ` and its inverse.
#[derive(Debug, Clone)]
pub struct LocalConjugator {
    pub level: usize,
    pub u_n: LpaElem,
    pub u_n_inv: LpaElem,
}

/// Builds `u_n` from `u^γ = θ(γ') u e γ*` for `γ = γ'e` (and `u^v = u v`),
/// with inverse `Σ γ e* u^{-1} θ(γ'*)`, then checks `θ(x) = u_n x u_n^{-1}`
/// on every matrix unit of level `n`.
pub fn local_conjugator(theta: &ThetaData, n: usize) -> Result<LocalConjugator, LpaError> {
    let lpa = &theta.lpa;
    let g = lpa.graph();
    if g.has_sources() {
        return Err(LpaError::HasSources);
    }
    let level = LevelIndex::new(g.clone(), n);
    let mut u_n = LpaElem::zero();
    let mut u_n_inv = LpaElem::zero();
    for p in level.paths() {
        let gamma_star = lpa.path(p).star();
        match p.split_last(g) {
            None => {
                let v = lpa.vertex(p.source());
                u_n = u_n.add(&lpa.mul(&theta.u, &v));
                u_n_inv = u_n_inv.add(&lpa.mul(&v, &theta.u_inv));
            }
            Some((rest, e)) => {
                let head = if rest.is_empty() { lpa.one() } else { theta.on_path(&rest) };
                let head_inv = if rest.is_empty() { lpa.one() } else { theta.on_ghost(&rest) };
                u_n = u_n.add(&lpa.product(&[&head, &theta.u, &lpa.edge(e), &gamma_star]));
                u_n_inv = u_n_inv.add(&lpa.product(&[&lpa.path(p), &lpa.ghost(e), &theta.u_inv, &head_inv]));
            }
        }
    }
    let one = lpa.one();
    if lpa.mul(&u_n, &u_n_inv) != one || lpa.mul(&u_n_inv, &u_n) != one {
        return Err(LpaError::ConjugationFailure("u_n u_n^-1".into()));
    }
    for (a, b) in level.units() {
        let x = lpa.monomial(level.path(a), level.path(b)).expect("same block");
        if theta.apply(&x) != lpa.product(&[&u_n, &x, &u_n_inv]) {
            let label = format!("{} ({})*", g.path_label(level.path(a)), g.path_label(level.path(b)));
            return Err(LpaError::ConjugationFailure(label));
        }
    }
    Ok(LocalConjugator { level: n, u_n, u_n_inv })
}

fn random_invertible<R: Rng>(rng: &mut R, k: usize) -> Vec<Vec<Q>> {
    loop {
        let m: Vec<Vec<Q>> =
            (0..k).map(|_| (0..k).map(|_| Q::from_integer(rng.gen_range(-2i64..=2).into())).collect()).collect();
        if det_q(&m) != Q::zero() {
            return m;
        }
    }
}

fn det_q(m: &[Vec<Q>]) -> Q {
    let k = m.len();
    let mut a = m.to_vec();
    let mut det = Q::one();
    for c in 0..k {
        let Some(p) = (c..k).find(|&r| !a[r][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for r in c + 1..k {
            let f = &a[r][c] / &a[c][c];
            for j in c..k {
                let t = &f * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    det
}

/// Random admissible `(u, z)` at level 1: `u` invertible in each block, and
/// `z = u z0 u^{-1}` with `z0` invertible and block-diagonal by source vertex,
/// so `z0` commutes with every vertex and `z` with every `u v u^{-1}`.
pub fn random_theta_data<R: Rng>(lpa: &Lpa, rng: &mut R) -> Result<ThetaData, LpaError> {
    let level = Arc::new(LevelIndex::new(lpa.graph().clone(), 1));
    let mut u = MatricialElem::zero(&level);
    let mut z0 = MatricialElem::zero(&level);
    for b in 0..level.blocks().len() {
        let range: Vec<usize> = level.block_paths(b).collect();
        let m = random_invertible(rng, range.len());
        for (i, &p) in range.iter().enumerate() {
            for (j, &q) in range.iter().enumerate() {
                u.add_term((p, q), m[i][j].clone());
            }
        }
        let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &p in &range {
            by_source.entry(level.path(p).source()).or_default().push(p);
        }
        for group in by_source.values() {
            let m = random_invertible(rng, group.len());
            for (i, &p) in group.iter().enumerate() {
                for (j, &q) in group.iter().enumerate() {
                    z0.add_term((p, q), m[i][j].clone());
                }
            }
        }
    }
    let u = lpa.from_matricial(&u);
    let z0 = lpa.from_matricial(&z0);
    let u_inv = lpa.inverse(&u)?;
    let z = lpa.product(&[&u, &z0, &u_inv]);
    ThetaData::new(lpa, u, z)
}

/// Recovers `(u, z)` from the images of the generators of a graded
/// automorphism and a candidate `u`: with `a_0 = φ(t+) t-` and
/// `ζ = α(u) u^{-1} a_0`, the twist is `z = t- ζ t+`. Fails unless `θ_{u,z}`
/// reproduces every image.
pub fn decompose_graded_auto(
    lpa: &Lpa,
    images: &BTreeMap<Generator, LpaElem>,
    u: &LpaElem,
) -> Result<ThetaData, LpaError> {
    let g = lpa.graph();
    let t_plus = lpa.t_plus()?;
    let t_minus = lpa.t_minus()?;
    let mut phi_t_plus = LpaElem::zero();
    for v in 0..g.num_vertices() {
        let e = lpa.chosen_edge(v).ok_or(LpaError::HasSources)?;
        let img = images.get(&Generator::Edge(e)).ok_or_else(|| LpaError::MissingImage(lpa.generator_label(Generator::Edge(e))))?;
        phi_t_plus = phi_t_plus.add(img);
    }
    let a0 = lpa.mul(&phi_t_plus, &t_minus);
    let u_inv = lpa.inverse(u)?;
    let alpha_u = lpa.product(&[&t_plus, u, &t_minus]);
    let zeta = lpa.product(&[&alpha_u, &u_inv, &a0]);
    let z = lpa.product(&[&t_minus, &zeta, &t_plus]);
    let theta = ThetaData::new(lpa, u.clone(), z)?;
    for gen in lpa.generators() {
        let want = images.get(&gen).ok_or_else(|| LpaError::MissingImage(lpa.generator_label(gen)))?;
        if &theta.on_generator(gen) != want {
            return Err(LpaError::GeneratorMismatch(lpa.generator_label(gen)));
        }
    }
    Ok(theta)
}

/// Whether `θ_{u,z}` is the identity: `u` central in the degree-0 limit and
/// `u e u^{-1} = e z^{-1}` for every edge.
pub fn kernel_test(theta: &ThetaData) -> bool {
    let lpa = &theta.lpa;
    let level = lpa.natural_level(&theta.u);
    let Ok(um) = lpa.to_matricial(&theta.u, &level) else { return false };
    if !is_central_in_limit(&um) {
        return false;
    }
    (0..lpa.graph().num_edges()).all(|e| {
        let lhs = lpa.product(&[&theta.u, &lpa.edge(e), &theta.u_inv]);
        lhs == lpa.mul(&lpa.edge(e), &theta.z_inv)
    })
}

impl Lpa {
    /// Normal form check helper used by tests of the rewriting system.
    pub fn is_normal(&self, x: &LpaElem) -> bool {
        self.normal_form(x, Strategy::Canonical) == *x
    }
}
