//! Shift equivalence of nonnegative integer matrices, the induced isomorphism
//! of dimension modules, and the Bowen-Franks obstruction.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ShiftError;
use crate::ktheory::{bowen_franks, BowenFranks, Decision, DimElem, DimTriple};
use crate::linalg::IntMatrix;

/// A verified shift equivalence `(R, S): A ~ B` of lag `l`:
/// `AR = RB`, `SA = BS`, `A^l = RS`, `B^l = SR`.
///
/// `A` is `N x N`, `B` is `M x M`, `S` is `M x N`, `R` is `N x M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShiftCertificate")]
pub struct ShiftEquivalence {
    #[serde(rename = "A")]
    a: IntMatrix,
    #[serde(rename = "B")]
    b: IntMatrix,
    #[serde(rename = "S")]
    s: IntMatrix,
    #[serde(rename = "R")]
    r: IntMatrix,
    lag: usize,
}

/// Unverified on-disk form of a shift equivalence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftCertificate {
    #[serde(rename = "A")]
    pub a: IntMatrix,
    #[serde(rename = "B")]
    pub b: IntMatrix,
    #[serde(rename = "S")]
    pub s: IntMatrix,
    #[serde(rename = "R")]
    pub r: IntMatrix,
    pub lag: usize,
}

impl TryFrom<ShiftCertificate> for ShiftEquivalence {
    type Error = ShiftError;

    fn try_from(c: ShiftCertificate) -> Result<Self, ShiftError> {
        ShiftEquivalence::new(c.a, c.b, c.s, c.r, c.lag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationCheck {
    pub name: &'static str,
    pub holds: bool,
    /// First entry (row, column) where the two sides differ.
    pub first_violation: Option<(usize, usize)>,
}

fn compare(name: &'static str, lhs: &IntMatrix, rhs: &IntMatrix) -> EquationCheck {
    let mut first_violation = None;
    'outer: for i in 0..lhs.rows() {
        for j in 0..lhs.cols() {
            if lhs.get(i, j) != rhs.get(i, j) {
                first_violation = Some((i, j));
                break 'outer;
            }
        }
    }
    EquationCheck { name, holds: first_violation.is_none(), first_violation }
}

/// Checks the four lag equations, reporting each separately.
pub fn check_equations(
    a: &IntMatrix,
    b: &IntMatrix,
    s: &IntMatrix,
    r: &IntMatrix,
    lag: usize,
) -> Result<Vec<EquationCheck>, ShiftError> {
    let (n, m) = (a.rows(), b.rows());
    if !a.is_square() || !b.is_square() {
        return Err(ShiftError::DimensionMismatch("A and B must be square".into()));
    }
    if (s.rows(), s.cols()) != (m, n) {
        return Err(ShiftError::DimensionMismatch(format!("S is {}x{}, expected {m}x{n}", s.rows(), s.cols())));
    }
    if (r.rows(), r.cols()) != (n, m) {
        return Err(ShiftError::DimensionMismatch(format!("R is {}x{}, expected {n}x{m}", r.rows(), r.cols())));
    }
    if lag == 0 {
        return Err(ShiftError::ZeroLag);
    }
    Ok(vec![
        compare("AR = RB", &(a * r), &(r * b)),
        compare("SA = BS", &(s * a), &(b * s)),
        compare("A^l = RS", &a.pow(lag), &(r * s)),
        compare("B^l = SR", &b.pow(lag), &(s * r)),
    ])
}

impl ShiftEquivalence {
    pub fn new(a: IntMatrix, b: IntMatrix, s: IntMatrix, r: IntMatrix, lag: usize) -> Result<Self, ShiftError> {
        let checks = check_equations(&a, &b, &s, &r, lag)?;
        for m in [&a, &b, &s, &r] {
            if !m.is_nonnegative() {
                return Err(ShiftError::Verification("matrices must be nonnegative".into()));
            }
        }
        if let Some(bad) = checks.iter().find(|c| !c.holds) {
            let (i, j) = bad.first_violation.unwrap_or_default();
            return Err(ShiftError::Verification(format!("{} fails at entry ({i}, {j})", bad.name)));
        }
        Ok(ShiftEquivalence { a, b, s, r, lag })
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &IntMatrix {
        &self.b
    }

    pub fn s(&self) -> &IntMatrix {
        &self.s
    }

    pub fn r(&self) -> &IntMatrix {
        &self.r
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn certificate(&self) -> ShiftCertificate {
        ShiftCertificate { a: self.a.clone(), b: self.b.clone(), s: self.s.clone(), r: self.r.clone(), lag: self.lag }
    }

    /// `(S, RB)` is a shift equivalence of lag `l + 1` with the same `S`.
    pub fn increase_lag(&self) -> ShiftEquivalence {
        let r = &self.r * &self.b;
        ShiftEquivalence::new(self.a.clone(), self.b.clone(), self.s.clone(), r, self.lag + 1)
            .expect("lag increase preserves the equations")
    }

    /// The reversed equivalence `(S, R): B ~ A`.
    pub fn reversed(&self) -> ShiftEquivalence {
        ShiftEquivalence {
            a: self.b.clone(),
            b: self.a.clone(),
            s: self.r.clone(),
            r: self.s.clone(),
            lag: self.lag,
        }
    }
}

/// Bounded exhaustive search for a shift equivalence `A ~ B`.
///
/// Tries lags `1..=max_lag` in order and entries `0..=bound`, so the result
/// is deterministic. `None` says only that nothing exists within the bounds.
pub fn search_shift_equivalence(a: &IntMatrix, b: &IntMatrix, max_lag: usize, bound: u32) -> Option<ShiftEquivalence> {
    let (n, m) = (a.rows(), b.rows());
    for lag in 1..=max_lag {
        let al = a.pow(lag);
        let bl = b.pow(lag);
        let mut found = None;
        for_each_matrix(m, n, bound, &mut |s| {
            if s * a != b * s {
                return false;
            }
            let r = search_r(a, b, s, &al, &bl, bound);
            if let Some(r) = r {
                found = Some(ShiftEquivalence::new(a.clone(), b.clone(), s.clone(), r, lag).expect("search checks every equation"));
                return true;
            }
            false
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

// Row i of RS depends only on row i of R, so rows are pruned as they fill.
fn search_r(a: &IntMatrix, b: &IntMatrix, s: &IntMatrix, al: &IntMatrix, bl: &IntMatrix, bound: u32) -> Option<IntMatrix> {
    let (n, m) = (a.rows(), b.rows());
    let mut candidates: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut rows = Vec::new();
        for_each_matrix(1, m, bound, &mut |row| {
            if (row * s).row(0) == al.row(i) {
                rows.push(row.row(0).to_vec());
            }
            false
        });
        if rows.is_empty() {
            return None;
        }
        candidates.push(rows);
    }
    let mut pick = vec![0usize; n];
    loop {
        let rows: Vec<Vec<BigInt>> = (0..n).map(|i| candidates[i][pick[i]].clone()).collect();
        let r = IntMatrix::from_rows(&rows);
        if a * &r == &r * b && &(s * &r) == bl {
            return Some(r);
        }
        let mut i = 0;
        loop {
            if i == n {
                return None;
            }
            pick[i] += 1;
            if pick[i] < candidates[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Visits every `rows x cols` matrix with entries in `0..=bound`, row-major
/// odometer order, until the callback returns true.
fn for_each_matrix(rows: usize, cols: usize, bound: u32, f: &mut dyn FnMut(&IntMatrix) -> bool) {
    let len = rows * cols;
    let mut digits = vec![0u32; len];
    loop {
        let data: Vec<Vec<u32>> = (0..rows).map(|i| digits[i * cols..(i + 1) * cols].to_vec()).collect();
        let mat = if rows == 0 { IntMatrix::zeros(0, cols) } else { IntMatrix::from_rows(&data) };
        if f(&mat) {
            return;
        }
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if digits[k] < bound {
                digits[k] += 1;
                break;
            }
            digits[k] = 0;
        }
    }
}

/// The isomorphism `(Δ_A, δ_A) -> (Δ_B, δ_B)`, `(n, x) ↦ (m + n, S x)`, induced
/// by a shift equivalence and a shift `m`.
#[derive(Debug, Clone)]
pub struct InducedIso {
    pub se: ShiftEquivalence,
    pub m: usize,
}

impl InducedIso {
    pub fn new(se: ShiftEquivalence, m: usize) -> Self {
        InducedIso { se, m }
    }

    pub fn apply(&self, x: &DimElem) -> DimElem {
        DimElem::new(self.m + x.level, self.se.s.mul_vec(&x.vector))
    }

    /// Inverse map `Δ_B -> Δ_A`; levels below `m` are first raised to `m`.
    pub fn apply_inverse(&self, y: &DimElem) -> DimElem {
        let (k, v) = if y.level >= self.m {
            (y.level, y.vector.clone())
        } else {
            (self.m, self.se.b.pow(self.m - y.level).mul_vec(&y.vector))
        };
        DimElem::new(k - self.m + self.se.lag, self.se.r.mul_vec(&v))
    }

    /// Whether the induced map sends `[1_{E_A}]` to `[1_{E_B}]`.
    pub fn preserves_order_unit(&self, bound: usize) -> Decision {
        let tb = DimTriple::new(self.se.b.clone()).expect("verified matrices are nonnegative");
        let ta = DimTriple::new(self.se.a.clone()).expect("verified matrices are nonnegative");
        tb.dim_equal(&self.apply(&ta.order_unit()), &tb.order_unit(), bound)
            .expect("dimensions agree by construction")
    }
}

/// Finds the least `k <= max_k` such that `S' = B^k S`, `R' = R`, lag `l + k`
/// and `m' = m + k >= 1` satisfy `S' 1 = B^{m'} 1` exactly.
pub fn normalize_to_unital(se: &ShiftEquivalence, m: usize, max_k: usize) -> Result<(ShiftEquivalence, usize), ShiftError> {
    let ones = vec![BigInt::one(); se.a.rows()];
    let ones_b = vec![BigInt::one(); se.b.rows()];
    for k in 0..=max_k {
        let m2 = m + k;
        if m2 == 0 {
            continue;
        }
        let s2 = &se.b.pow(k) * &se.s;
        if s2.mul_vec(&ones) == se.b.pow(m2).mul_vec(&ones_b) {
            let out = ShiftEquivalence::new(se.a.clone(), se.b.clone(), s2, se.r.clone(), se.lag + k)?;
            return Ok((out, m2));
        }
    }
    Err(ShiftError::NormalizationBound(max_k))
}

/// Composes elementary equivalences `A_{i-1} = R_i S_i`, `A_i = S_i R_i` into
/// a lag-`l` equivalence with `S = S_l ... S_1` and `R = R_1 ... R_l`.
pub fn compose_elementary(chain: &[(IntMatrix, IntMatrix)]) -> Result<ShiftEquivalence, ShiftError> {
    let (first_s, first_r) = chain.first().ok_or(ShiftError::ZeroLag)?;
    let a0 = first_r
        .checked_mul(first_s)
        .ok_or_else(|| ShiftError::DimensionMismatch("R_1 S_1 undefined".into()))?;
    let mut current = a0.clone();
    let mut s_total = IntMatrix::identity(a0.rows());
    let mut r_total = IntMatrix::identity(a0.rows());
    for (i, (s, r)) in chain.iter().enumerate() {
        let rs = r.checked_mul(s).ok_or_else(|| ShiftError::DimensionMismatch(format!("R_{} S_{} undefined", i + 1, i + 1)))?;
        if rs != current {
            return Err(ShiftError::BrokenChain(format!("R_{} S_{} differs from A_{}", i + 1, i + 1, i)));
        }
        current = s.checked_mul(r).ok_or_else(|| ShiftError::DimensionMismatch(format!("S_{} R_{} undefined", i + 1, i + 1)))?;
        s_total = s * &s_total;
        r_total = &r_total * r;
    }
    ShiftEquivalence::new(a0, current, s_total, r_total, chain.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct FranksReport {
    pub a: BowenFranks,
    pub b: BowenFranks,
    /// True when the Bowen-Franks invariants differ.
    pub obstructed: bool,
    pub reason: Option<String>,
}

/// Compares `BF(A)` and `BF(B)`. Different invariants rule out flow
/// equivalence, hence shift equivalence and (via Franks) any isomorphism
/// compatible with the graph structure.
pub fn franks_obstruction(a: &IntMatrix, b: &IntMatrix) -> Result<FranksReport, crate::error::KTheoryError> {
    let ba = bowen_franks(a)?;
    let bb = bowen_franks(b)?;
    let reason = if !ba.group.isomorphic(&bb.group) {
        Some(format!("coker(I - A) = {} but coker(I - B) = {}", ba.group, bb.group))
    } else if ba.det_sign != bb.det_sign {
        Some(format!("sign det(I - A) = {} but sign det(I - B) = {}", ba.det_sign, bb.det_sign))
    } else {
        None
    };
    Ok(FranksReport { obstructed: reason.is_some(), reason, a: ba, b: bb })
}

/// True when `(I + A)^{n-1}` is strictly positive.
pub fn is_irreducible(a: &IntMatrix) -> bool {
    let n = a.rows();
    if n == 0 {
        return false;
    }
    let p = (&IntMatrix::identity(n) + a).pow(n - 1);
    let reach = p.entries().iter().all(|x| !x.is_zero());
    // a single vertex needs a loop to be irreducible
    reach && (n > 1 || !a.get(0, 0).is_zero())
}

/// The first irreducible `dim x dim` matrix with entries in `0..=max_entry`
/// (odometer order) whose Bowen-Franks group is trivial and `det(I - B) = +1`.
pub fn find_positive_trivial_bf(dim: usize, max_entry: u32) -> Option<IntMatrix> {
    let mut found = None;
    for_each_matrix(dim, dim, max_entry, &mut |b| {
        if !is_irreducible(b) {
            return false;
        }
        let bf = bowen_franks(b).expect("nonnegative square");
        if bf.det_sign == 1 && bf.group.is_trivial() {
            found = Some(b.clone());
            return true;
        }
        false
    });
    found
}
