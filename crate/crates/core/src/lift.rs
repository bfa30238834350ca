//! Lifting a unital shift equivalence `(R, S): A_E^t ~ A_F^t` to a commuting
//! diagram of tower homomorphisms
//!
//! ```text
//! ℳ(E)_0 -> ℳ(E)_l -> ℳ(E)_2l -> ...
//!      φ_0 ↘  ↗ ψ_m  ↘ ...
//! ℳ(F)_m -> ℳ(F)_{m+l} -> ...
//! ```
//!
//! All maps are path-embedding tables (see [`TowerHom`]). The base level is
//! chosen by partitioning path sets into slots; every further level is
//! derived by prefixing, so the whole diagram is determined by four tables:
//! `λ^0` (slices of `F^m w_j`), `λ^1` (slices of `F^{m+1} w_j`), `γ^m` (slices
//! of `v_k E^l v_i`) and the bridge enumeration of `w_t F^l w_j`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::LiftError;
use crate::graph::{Graph, Path};
use crate::linalg::IntMatrix;
use crate::shift::ShiftEquivalence;
use crate::tower::{verify_hom, TowerHom, Tower, DEFAULT_GUARD};

#[derive(Debug, Clone)]
pub struct LiftInput {
    e: Arc<Graph>,
    f: Arc<Graph>,
    se: ShiftEquivalence,
    m: usize,
    seed: u64,
    guard: usize,
    chosen_e: Vec<usize>,
    chosen_f: Vec<usize>,
    lag_bumped: bool,
}

fn first_in_edges(g: &Graph) -> Vec<usize> {
    (0..g.num_vertices()).map(|v| g.in_edges(v)[0]).collect()
}

impl LiftInput {
    /// Validates the data: both graphs essential, adjacency matrices equal to
    /// `A` and `B`, `m >= 1` and `S 1 = B^m 1`.
    ///
    /// A lag-1 equivalence is replaced by `(S, RB)` of lag 2: with `l = 1` the
    /// level-1 map would be both a base choice and a derived one.
    pub fn new(e: Graph, f: Graph, se: ShiftEquivalence, m: usize) -> Result<Self, LiftError> {
        if !e.is_essential() {
            return Err(LiftError::NotEssential("E"));
        }
        if !f.is_essential() {
            return Err(LiftError::NotEssential("F"));
        }
        if &e.adjacency(true) != se.a() {
            return Err(LiftError::MatrixMismatch("E"));
        }
        if &f.adjacency(true) != se.b() {
            return Err(LiftError::MatrixMismatch("F"));
        }
        if m == 0 {
            return Err(LiftError::ZeroShift);
        }
        check_unital(&se, m)?;
        let lag_bumped = se.lag() == 1;
        let se = if lag_bumped { se.increase_lag() } else { se };
        let chosen_e = first_in_edges(&e);
        let chosen_f = first_in_edges(&f);
        Ok(LiftInput {
            e: Arc::new(e),
            f: Arc::new(f),
            se,
            m,
            seed: 0,
            guard: DEFAULT_GUARD,
            chosen_e,
            chosen_f,
            lag_bumped,
        })
    }

    /// Seed 0 slices every path set in lexicographic order; other seeds
    /// shuffle each set with ChaCha8 before slicing.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_guard(mut self, guard: usize) -> Self {
        self.guard = guard;
        self
    }

    /// Overrides the edges `e_i ∈ r^{-1}(v_i)` and `f_j ∈ r^{-1}(w_j)` used by the corner maps.
    pub fn with_chosen_edges(mut self, chosen_e: Vec<usize>, chosen_f: Vec<usize>) -> Result<Self, LiftError> {
        for (g, c) in [(&self.e, &chosen_e), (&self.f, &chosen_f)] {
            if c.len() != g.num_vertices() {
                return Err(LiftError::BadChosenEdge(c.len()));
            }
            for (v, &e) in c.iter().enumerate() {
                if e >= g.num_edges() || g.edge(e).range != v {
                    return Err(LiftError::BadChosenEdge(v));
                }
            }
        }
        self.chosen_e = chosen_e;
        self.chosen_f = chosen_f;
        Ok(self)
    }

    pub fn shift_equivalence(&self) -> &ShiftEquivalence {
        &self.se
    }

    pub fn lag(&self) -> usize {
        self.se.lag()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lag_bumped(&self) -> bool {
        self.lag_bumped
    }
}

fn check_unital(se: &ShiftEquivalence, m: usize) -> Result<(), LiftError> {
    let lhs = se.s().mul_vec(&vec![BigInt::one(); se.a().rows()]);
    let rhs = se.b().pow(m).mul_vec(&vec![BigInt::one(); se.b().rows()]);
    match lhs.iter().zip(&rhs).position(|(x, y)| x != y) {
        Some(row) => Err(LiftError::NotUnital { row, lhs: lhs[row].to_string(), rhs: rhs[row].to_string() }),
        None => Ok(()),
    }
}

fn small(m: &IntMatrix) -> Vec<Vec<usize>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_usize().expect("nonnegative entry")).collect()).collect()
}

/// The base choices plus every derived level built so far.
#[derive(Debug)]
pub struct PartitionTables {
    input: LiftInput,
    e_tower: Tower,
    f_tower: Tower,
    s: Vec<Vec<usize>>,
    r: Vec<Vec<usize>>,
    /// `λ^0[j][i]`: slice of `F^m w_j` for `v_i`, length `s_{ji}`.
    lambda0: Vec<Vec<Vec<Path>>>,
    /// `λ^1[j][e]`: slice of `F^{m+1} w_j` for the edge `e`, length `s_{j,r(e)}`.
    lambda1: Vec<Vec<Vec<Path>>>,
    /// `γ^m[λ][i]` for `λ ∈ F^m`: slice of `s(γ)E^l v_i` of length `r_{ij}`.
    gamma_m: HashMap<Path, Vec<Vec<Path>>>,
    /// `bridge[t][j]`: `w_t F^l w_j`, indexed by `(i, p < r_{it}, q < s_{ji})`.
    bridge: Vec<Vec<Vec<Path>>>,
    phi: BTreeMap<usize, TowerHom>,
    psi: BTreeMap<usize, TowerHom>,
    depth: usize,
}

/// Chooses `λ^0`, `λ^1`, `γ^m` and the bridge, and builds `φ_0`, `φ_1`.
pub fn base_partitions(input: LiftInput) -> Result<PartitionTables, LiftError> {
    let (e, f) = (input.e.clone(), input.f.clone());
    let (n, mm) = (e.num_vertices(), f.num_vertices());
    let (m, l) = (input.m, input.se.lag());
    let s = small(input.se.s());
    let r = small(input.se.r());
    let mut rng = (input.seed != 0).then(|| ChaCha8Rng::seed_from_u64(input.seed));
    let mut arrange = |mut v: Vec<Path>| {
        if let Some(rng) = rng.as_mut() {
            v.shuffle(rng);
        }
        v
    };

    let mut lambda0 = Vec::with_capacity(mm);
    for j in 0..mm {
        let paths = arrange(f.enumerate_paths(m, None, Some(j)));
        let expected: usize = s[j].iter().sum();
        if paths.len() != expected {
            return Err(LiftError::CardinalityMismatch { row: j, expected: expected.to_string(), actual: paths.len() });
        }
        let mut it = paths.into_iter();
        lambda0.push((0..n).map(|i| it.by_ref().take(s[j][i]).collect()).collect::<Vec<Vec<Path>>>());
    }

    // λ^1: the chosen edge e_k takes the hats of λ^0(v_k); the rest is sliced
    // over the remaining edges in edge order
    let mut lambda1 = Vec::with_capacity(mm);
    for j in 0..mm {
        let mut slices: Vec<Vec<Path>> = vec![Vec::new(); e.num_edges()];
        let mut used = std::collections::HashSet::new();
        for k in 0..n {
            let hats: Vec<Path> = lambda0[j][k].iter().map(|p| hat(&f, &input.chosen_f, p)).collect();
            used.extend(hats.iter().cloned());
            slices[input.chosen_e[k]] = hats;
        }
        let all = f.enumerate_paths(m + 1, None, Some(j));
        let total = all.len();
        let rest = arrange(all.into_iter().filter(|p| !used.contains(p)).collect());
        let mut it = rest.into_iter();
        for (ei, edge) in e.edges().iter().enumerate() {
            if input.chosen_e[edge.range] != ei {
                slices[ei] = it.by_ref().take(s[j][edge.range]).collect();
                if slices[ei].len() != s[j][edge.range] {
                    return Err(LiftError::CardinalityMismatch { row: j, expected: "more".into(), actual: total });
                }
            }
        }
        if it.next().is_some() {
            return Err(LiftError::CardinalityMismatch { row: j, expected: "fewer".into(), actual: total });
        }
        lambda1.push(slices);
    }

    // γ^m: slice v_k E^l v_i over the F^m paths assigned to v_k
    let mut gamma_m: HashMap<Path, Vec<Vec<Path>>> = HashMap::new();
    for k in 0..n {
        for j in 0..mm {
            for lam in &lambda0[j][k] {
                gamma_m.insert(lam.clone(), vec![Vec::new(); n]);
            }
        }
        for i in 0..n {
            let paths = arrange(e.enumerate_paths(l, Some(k), Some(i)));
            let expected: usize = (0..mm).map(|j| s[j][k] * r[i][j]).sum();
            if paths.len() != expected {
                return Err(LiftError::Partition(format!("|v_{k} E^{l} v_{i}| = {}, expected {expected}", paths.len())));
            }
            let mut it = paths.into_iter();
            for j in 0..mm {
                for lam in &lambda0[j][k] {
                    gamma_m.get_mut(lam).expect("inserted above")[i] = it.by_ref().take(r[i][j]).collect();
                }
            }
        }
    }

    let mut bridge = Vec::with_capacity(mm);
    for t in 0..mm {
        let mut row = Vec::with_capacity(mm);
        for j in 0..mm {
            let paths = arrange(f.enumerate_paths(l, Some(t), Some(j)));
            let expected: usize = (0..n).map(|i| r[i][t] * s[j][i]).sum();
            if paths.len() != expected {
                return Err(LiftError::Partition(format!("|w_{t} F^{l} w_{j}| = {}, expected {expected}", paths.len())));
            }
            row.push(paths);
        }
        bridge.push(row);
    }

    let e_tower = Tower::with_guard(e.clone(), input.guard);
    let f_tower = Tower::with_guard(f.clone(), input.guard);
    let mut tables = PartitionTables {
        input,
        e_tower,
        f_tower,
        s,
        r,
        lambda0,
        lambda1,
        gamma_m,
        bridge,
        phi: BTreeMap::new(),
        psi: BTreeMap::new(),
        depth: 0,
    };
    tables.build_base_phi()?;
    Ok(tables)
}

fn hat(g: &Graph, chosen: &[usize], p: &Path) -> Path {
    p.prepend(g, chosen[p.source()]).expect("chosen edge ends at the source")
}

impl PartitionTables {
    pub fn input(&self) -> &LiftInput {
        &self.input
    }

    pub fn e_tower(&self) -> &Tower {
        &self.e_tower
    }

    pub fn f_tower(&self) -> &Tower {
        &self.f_tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `φ_n: ℳ(E)_n -> ℳ(F)_{m+n}`.
    pub fn phi(&self, n: usize) -> Option<&TowerHom> {
        self.phi.get(&n)
    }

    /// `ψ_{k}: ℳ(F)_k -> ℳ(E)_{k-m+l}`, keyed by the F-level `k`.
    pub fn psi(&self, k: usize) -> Option<&TowerHom> {
        self.psi.get(&k)
    }

    /// Mutable access for fault-injection tests.
    pub fn phi_mut(&mut self, n: usize) -> Option<&mut TowerHom> {
        self.phi.get_mut(&n)
    }

    pub fn phi_levels(&self) -> Vec<usize> {
        self.phi.keys().copied().collect()
    }

    pub fn psi_levels(&self) -> Vec<usize> {
        self.psi.keys().copied().collect()
    }

    // slot (j, q) of a φ row for a path ending at v_i
    fn phi_slot(&self, i: usize, mut s: usize) -> (usize, usize) {
        for (j, row) in self.s.iter().enumerate() {
            if s < row[i] {
                return (j, s);
            }
            s -= row[i];
        }
        unreachable!("slot out of range")
    }

    // slot (i, p) of a ψ row for a path ending at w_t
    fn psi_slot(&self, t: usize, mut s: usize) -> (usize, usize) {
        for (i, row) in self.r.iter().enumerate() {
            if s < row[t] {
                return (i, s);
            }
            s -= row[t];
        }
        unreachable!("slot out of range")
    }

    fn build_base_phi(&mut self) -> Result<(), LiftError> {
        let m = self.input.m;
        let mm = self.s.len();
        for n in [0, 1] {
            let src = self.e_tower.level(n)?;
            let tgt = self.f_tower.level(m + n)?;
            let mut table = Vec::with_capacity(src.paths().len());
            for p in src.paths() {
                let mut row = Vec::new();
                for j in 0..mm {
                    let slice = if n == 0 { &self.lambda0[j][p.source()] } else { &self.lambda1[j][p.edges()[0]] };
                    for lam in slice {
                        row.push(tgt.index_of(lam).ok_or_else(|| LiftError::Partition("λ path missing".into()))?);
                    }
                }
                table.push(row);
            }
            self.phi.insert(n, TowerHom::new(src, tgt, table)?);
        }
        Ok(())
    }

    /// `ψ_{m+n}` from `φ_n`: the slot `(i, r)` of `λ^n_{jq}(γ)` is `γ · γ^m_{ir}(λ^0_{jq}(r(γ)))`.
    fn derive_psi(&mut self, n: usize) -> Result<(), LiftError> {
        let (m, l) = (self.input.m, self.input.se.lag());
        let phi = self.phi.get(&n).ok_or(LiftError::MissingLevel { level: n })?;
        let src = self.f_tower.level(m + n)?;
        let tgt = self.e_tower.level(n + l)?;
        let mut table: Vec<Option<Vec<usize>>> = vec![None; src.paths().len()];
        for (gi, gamma) in phi.source().paths().iter().enumerate() {
            for (slot, &lam) in phi.table()[gi].iter().enumerate() {
                let (j, q) = self.phi_slot(gamma.range(), slot);
                let base = &self.lambda0[j][gamma.range()][q];
                let pieces = &self.gamma_m[base];
                let mut row = Vec::new();
                for slice in pieces {
                    for kappa in slice {
                        let full = gamma.concat(kappa).ok_or_else(|| LiftError::Partition("γ^m slice does not start at r(γ)".into()))?;
                        row.push(tgt.index_of(&full).ok_or_else(|| LiftError::Partition("derived ψ path missing".into()))?);
                    }
                }
                if table[lam].replace(row).is_some() {
                    return Err(LiftError::Partition(format!("φ_{n} hits an F-path twice")));
                }
            }
        }
        let table = table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| LiftError::Partition(format!("φ_{n} misses an F-path")))?;
        self.psi.insert(m + n, TowerHom::new(src, tgt, table)?);
        Ok(())
    }

    /// `φ_{n+l}` from `ψ_{m+n}`: the slot `(j, q)` of `γ^{m+n}_{ip}(λ)` is `λ · bridge^{jt}_{ipq}`.
    fn derive_phi(&mut self, n: usize) -> Result<(), LiftError> {
        let (m, l) = (self.input.m, self.input.se.lag());
        let nv = self.r.len();
        let psi = self.psi.get(&(m + n)).ok_or(LiftError::MissingLevel { level: m + n })?;
        let src = self.e_tower.level(n + l)?;
        let tgt = self.f_tower.level(m + n + l)?;
        let mut table: Vec<Option<Vec<usize>>> = vec![None; src.paths().len()];
        for (li, lam) in psi.source().paths().iter().enumerate() {
            let t = lam.range();
            for (slot, &gamma) in psi.table()[li].iter().enumerate() {
                let (i, p) = self.psi_slot(t, slot);
                let mut row = Vec::new();
                for j in 0..self.s.len() {
                    // offset of (i, p, ·) inside the bridge list for (t, j)
                    let before: usize = (0..i).map(|i2| self.r[i2][t] * self.s[j][i2]).sum();
                    let base = before + p * self.s[j][i];
                    for q in 0..self.s[j][i] {
                        let kappa = &self.bridge[t][j][base + q];
                        let full = lam.concat(kappa).ok_or_else(|| LiftError::Partition("bridge does not start at r(λ)".into()))?;
                        row.push(tgt.index_of(&full).ok_or_else(|| LiftError::Partition("derived φ path missing".into()))?);
                    }
                }
                if table[gamma].replace(row).is_some() {
                    return Err(LiftError::Partition(format!("ψ_{} hits an E-path twice", m + n)));
                }
            }
        }
        debug_assert_eq!(nv, self.e_tower.graph().num_vertices());
        let table = table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| LiftError::Partition(format!("ψ_{} misses an E-path", m + n)))?;
        self.phi.insert(n + l, TowerHom::new(src, tgt, table)?);
        Ok(())
    }

    /// Builds `φ` at E-levels `kl`, `kl + 1` for `k <= depth` and `ψ` at
    /// F-levels `m + (k-1)l`, `m + (k-1)l + 1` for `1 <= k <= depth`.
    pub fn extend_tables(&mut self, depth: usize) -> Result<(), LiftError> {
        let l = self.input.se.lag();
        let m = self.input.m;
        for k in 0..depth {
            for eps in [0, 1] {
                let n = k * l + eps;
                if !self.psi.contains_key(&(m + n)) {
                    self.derive_psi(n)?;
                }
                if !self.phi.contains_key(&(n + l)) {
                    self.derive_phi(n)?;
                }
            }
        }
        self.depth = self.depth.max(depth);
        Ok(())
    }

    fn corner_e(&self, n: usize) -> Result<TowerHom, LiftError> {
        Ok(TowerHom::corner(&self.e_tower.level(n)?, &self.e_tower.level(n + 1)?, &self.input.chosen_e)?)
    }

    fn corner_f(&self, n: usize) -> Result<TowerHom, LiftError> {
        Ok(TowerHom::corner(&self.f_tower.level(n)?, &self.f_tower.level(n + 1)?, &self.input.chosen_f)?)
    }

    fn j_e(&self, a: usize, b: usize) -> Result<TowerHom, LiftError> {
        Ok(TowerHom::connecting(&self.e_tower.level(a)?, &self.e_tower.level(b)?)?)
    }

    fn j_f(&self, a: usize, b: usize) -> Result<TowerHom, LiftError> {
        Ok(TowerHom::connecting(&self.f_tower.level(a)?, &self.f_tower.level(b)?)?)
    }

    /// `g_k = ψ_{m+(k+1)l} ∘ j^F_{m+kl+1, m+(k+1)l} ∘ φ_{kl+1}`, from E-level
    /// `kl + 1` to E-level `(k+2)l`.
    pub fn twist_g(&self, k: usize) -> Result<TowerHom, LiftError> {
        let (m, l) = (self.input.m, self.input.se.lag());
        let phi = self.phi(k * l + 1).ok_or(LiftError::MissingLevel { level: k * l + 1 })?;
        let psi = self.psi(m + (k + 1) * l).ok_or(LiftError::MissingLevel { level: m + (k + 1) * l })?;
        let j = self.j_f(m + k * l + 1, m + (k + 1) * l)?;
        Ok(psi.compose(&j.compose(phi)?)?)
    }

    /// Every identity of the diagram at every built level.
    pub fn verify_diamond(&self) -> LiftReport {
        let mut report = LiftReport::new(&self.input, self.depth);
        let (m, l) = (self.input.m, self.input.se.lag());
        let e = self.e_tower.graph().clone();
        let f = self.f_tower.graph().clone();

        for (&n, phi) in &self.phi {
            let levels = format!("φ_{n}");
            let hc = verify_hom(phi, true, false);
            report.push("homomorphism", &levels, hc.multiplicative && hc.star, hc.failures.first().cloned());
            report.push("unitality", &levels, hc.unital == Some(true), None);
            report.push_result("K0(φ) = S", &levels, phi.k0().map(|k| &k == self.input.se.s()));
            let bad_slot = phi.table().iter().enumerate().find_map(|(p, row)| {
                let i = phi.source().path(p).range();
                row.iter().enumerate().find(|(s, &t)| phi.target().path(t).range() != self.phi_slot(i, *s).0).map(|_| p)
            });
            report.push("partition", &levels, bad_slot.is_none(), bad_slot.map(|p| format!("slot range wrong for {}", e.path_label(phi.source().path(p)))));
        }
        for (&k, psi) in &self.psi {
            let levels = format!("ψ_{k}");
            let hc = verify_hom(psi, true, false);
            report.push("homomorphism", &levels, hc.multiplicative && hc.star, hc.failures.first().cloned());
            report.push("unitality", &levels, hc.unital == Some(true), None);
            report.push_result("K0(ψ) = R", &levels, psi.k0().map(|x| &x == self.input.se.r()));
            let bad_slot = psi.table().iter().enumerate().find_map(|(p, row)| {
                let t = psi.source().path(p).range();
                row.iter().enumerate().find(|(s, &g)| psi.target().path(g).range() != self.psi_slot(t, *s).0).map(|_| p)
            });
            report.push("partition", &levels, bad_slot.is_none(), bad_slot.map(|p| format!("slot range wrong for {}", f.path_label(psi.source().path(p)))));
        }

        // triangles
        for (&n, phi) in &self.phi {
            if let Some(psi) = self.psi.get(&(m + n)) {
                let levels = format!("ψ_{}∘φ_{n}", m + n);
                report.push_agreement("ψφ = j^E", &levels, psi.compose(phi).map_err(Into::into), self.j_e(n, n + l), &e);
            }
        }
        for (&k, psi) in &self.psi {
            let n = k - m;
            if let Some(phi) = self.phi.get(&(n + l)) {
                let levels = format!("φ_{}∘ψ_{k}", n + l);
                report.push_agreement("φψ = j^F", &levels, phi.compose(psi).map_err(Into::into), self.j_f(k, k + l), &f);
            }
        }

        // exchange squares, numbered along the zig-zag
        for (&n, phi) in &self.phi {
            if n % l != 0 {
                continue;
            }
            let Some(phi_next) = self.phi.get(&(n + 1)) else { continue };
            let ex = 2 * (n / l) + 1;
            let lhs = self.corner_e(n).and_then(|a| Ok(phi_next.compose(&a)?));
            let rhs = self.corner_f(m + n).and_then(|b| Ok(b.compose(phi)?));
            report.push_agreement(&format!("Ex{ex}: φα = βφ"), &format!("φ_{}, φ_{n}", n + 1), lhs, rhs, &e);
        }
        for (&k, psi) in &self.psi {
            let n = k - m;
            if n % l != 0 {
                continue;
            }
            let Some(psi_next) = self.psi.get(&(k + 1)) else { continue };
            let ex = 2 * (n / l + 1);
            let lhs = self.corner_e(n + l).and_then(|a| Ok(a.compose(psi)?));
            let rhs = self.corner_f(k).and_then(|b| Ok(psi_next.compose(&b)?));
            report.push_agreement(&format!("Ex{ex}: αψ = ψβ"), &format!("ψ_{}, ψ_{k}", k + 1), lhs, rhs, &f);
        }

        // twist g_k on K_0 is A^{2l-1}
        let target = self.input.se.a().pow(2 * l - 1);
        for k in 0..self.depth.saturating_sub(1) {
            let levels = format!("g_{k}");
            let res = self.twist_g(k).and_then(|g| Ok(g.k0()? == target));
            report.push_result("K0(g) = A^(2l-1)", &levels, res);
        }
        for c in self.graded_iso_check() {
            report.checks.push(c);
        }
        report
    }

    /// `φ_{(k+2)l} ∘ g_k ∘ α = j^F ∘ β ∘ φ_{kl}` on every matrix unit of E-level `kl`.
    pub fn graded_iso_check(&self) -> Vec<CheckResult> {
        let (m, l) = (self.input.m, self.input.se.lag());
        let e = self.e_tower.graph().clone();
        let mut out = LiftReport::new(&self.input, self.depth);
        for k in 0..self.depth.saturating_sub(1) {
            let n = k * l;
            let lhs = (|| -> Result<TowerHom, LiftError> {
                let phi = self.phi((k + 2) * l).ok_or(LiftError::MissingLevel { level: (k + 2) * l })?;
                let g = self.twist_g(k)?;
                Ok(phi.compose(&g.compose(&self.corner_e(n)?)?)?)
            })();
            let rhs = (|| -> Result<TowerHom, LiftError> {
                let phi = self.phi(n).ok_or(LiftError::MissingLevel { level: n })?;
                let b = self.corner_f(m + n)?;
                let j = self.j_f(m + n + 1, m + (k + 2) * l)?;
                Ok(j.compose(&b.compose(phi)?)?)
            })();
            out.push_agreement("φ g α = j^F β φ", &format!("level {n}"), lhs, rhs, &e);
        }
        out.checks
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub levels: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub m: usize,
    pub lag: usize,
    pub lag_bumped: bool,
    /// The unitality equation can force `m > l`; the construction does not need `m <= l`.
    pub m_exceeds_lag: bool,
    pub depth: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl LiftReport {
    fn new(input: &LiftInput, depth: usize) -> Self {
        LiftReport {
            m: input.m,
            lag: input.se.lag(),
            lag_bumped: input.lag_bumped,
            m_exceeds_lag: input.m > input.se.lag(),
            depth, seed: input.seed, checks: Vec::new() }
    }

    fn push(&mut self, name: &str, levels: &str, passed: bool, detail: Option<String>) {
        self.checks.push(CheckResult { name: name.into(), levels: levels.into(), passed, detail });
    }

    fn push_result<E: std::fmt::Display>(&mut self, name: &str, levels: &str, res: Result<bool, E>) {
        match res {
            Ok(ok) => self.push(name, levels, ok, None),
            Err(e) => self.push(name, levels, false, Some(e.to_string())),
        }
    }

    fn push_agreement(
        &mut self,
        name: &str,
        levels: &str,
        lhs: Result<TowerHom, LiftError>,
        rhs: Result<TowerHom, LiftError>,
        g: &Graph,
    ) {
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => {
                let bad = a.first_disagreement(&b);
                let detail = bad.map(|(x, y)| {
                    let lvl = a.source();
                    format!("differs on {}({})*", g.path_label(lvl.path(x)), g.path_label(lvl.path(y)))
                });
                self.push(name, levels, bad.is_none(), detail);
            }
            (Err(e), _) | (_, Err(e)) => self.push(name, levels, false, Some(e.to_string())),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Result of [`build_towers`]: the tables and the verification report.
#[derive(Debug)]
pub struct Lift {
    pub tables: PartitionTables,
    pub report: LiftReport,
}

pub fn build_towers(input: LiftInput, depth: usize) -> Result<Lift, LiftError> {
    let mut tables = base_partitions(input)?;
    tables.extend_tables(depth)?;
    let report = tables.verify_diamond();
    Ok(Lift { tables, report })
}

/// Serializable dump of one map: each source path with its slot images.
#[derive(Debug, Clone, Serialize)]
pub struct TableDump {
    pub map: String,
    pub rows: Vec<(String, Vec<String>)>,
}

impl PartitionTables {
    pub fn dump(&self) -> Vec<TableDump> {
        let e = self.e_tower.graph();
        let f = self.f_tower.graph();
        let mut out = Vec::new();
        for (n, h) in &self.phi {
            out.push(dump_one(format!("phi_{n}"), h, e, f));
        }
        for (k, h) in &self.psi {
            out.push(dump_one(format!("psi_{k}"), h, f, e));
        }
        out
    }
}

fn dump_one(map: String, h: &TowerHom, src: &Graph, tgt: &Graph) -> TableDump {
    let rows = h
        .table()
        .iter()
        .enumerate()
        .map(|(p, row)| {
            (src.path_label(h.source().path(p)), row.iter().map(|&t| tgt.path_label(h.target().path(t))).collect())
        })
        .collect();
    TableDump { map, rows }
}
