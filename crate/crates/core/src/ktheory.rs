//! Graded K-theory of a graph algebra: `K_0`, the Bowen-Franks invariant, and
//! the dimension module `(Δ_A, Δ_A^+, δ_A)` with its shift automorphism.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::KTheoryError;
use crate::graph::Graph;
use crate::linalg::{bigvec, cokernel, AbelianGroup, IntMatrix};

/// Number of powers of `A` tried before a dimension-module query gives up.
pub const DEFAULT_BOUND: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct K0Data {
    pub group: AbelianGroup,
    /// Normalized coordinates of `[1_E]`, the image of the all-ones vector.
    #[serde(with = "bigvec")]
    pub order_unit: Vec<BigInt>,
}

/// `K_0(L(E)) = coker(I - A_E^t)`.
pub fn k0(g: &Graph) -> AbelianGroup {
    let a = g.adjacency(true);
    cokernel(&(&IntMatrix::identity(a.rows()) - &a))
}

/// `K_0` with the class of the unit. Refuses graphs with sinks, where
/// `I - A_E^t` is not the right presentation.
pub fn k0_with_unit(g: &Graph) -> Result<K0Data, KTheoryError> {
    if g.has_sinks() {
        return Err(KTheoryError::HasSinks);
    }
    let group = k0(g);
    let ones = vec![BigInt::one(); g.num_vertices()];
    let order_unit = group.project(&ones);
    Ok(K0Data { group, order_unit })
}

#[derive(Debug, Clone, Serialize)]
pub struct BowenFranks {
    pub group: AbelianGroup,
    /// Sign of `det(I - A)`: -1, 0 or 1.
    pub det_sign: i8,
    #[serde(serialize_with = "crate::serde_bigint")]
    pub det: BigInt,
}

/// `BF(A) = (coker(I - A), sign det(I - A))` for a square nonnegative `A`.
pub fn bowen_franks(a: &IntMatrix) -> Result<BowenFranks, KTheoryError> {
    if !a.is_square() || !a.is_nonnegative() {
        return Err(KTheoryError::NotNonnegativeSquare);
    }
    let i_minus = &IntMatrix::identity(a.rows()) - a;
    let det = i_minus.det();
    let det_sign = if det.is_zero() { 0 } else if det.is_positive() { 1 } else { -1 };
    Ok(BowenFranks { group: cokernel(&i_minus), det_sign, det })
}

/// Outcome of a bounded decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Undecided,
}

/// The element `(n, x)` of `Δ_A = lim (Z^N, A)`, represented at level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimElem {
    pub level: usize,
    #[serde(with = "bigvec")]
    pub vector: Vec<BigInt>,
}

impl DimElem {
    pub fn new(level: usize, vector: Vec<BigInt>) -> Self {
        DimElem { level, vector }
    }
}

/// The dimension triple of a square nonnegative matrix `A`.
#[derive(Debug, Clone)]
pub struct DimTriple {
    a: IntMatrix,
    stable: usize,
}

impl DimTriple {
    pub fn new(a: IntMatrix) -> Result<Self, KTheoryError> {
        if !a.is_square() || !a.is_nonnegative() {
            return Err(KTheoryError::NotNonnegativeSquare);
        }
        let stable = kernel_stabilization(&a);
        Ok(DimTriple { a, stable })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    fn check(&self, x: &DimElem) -> Result<(), KTheoryError> {
        if x.vector.len() != self.dim() {
            return Err(KTheoryError::DimensionMismatch { expected: self.dim(), got: x.vector.len() });
        }
        Ok(())
    }

    /// Rewrites `(n, x)` as the equal element `(level, A^{level-n} x)`, `level >= n`.
    pub fn lift_to(&self, x: &DimElem, level: usize) -> DimElem {
        assert!(level >= x.level);
        DimElem::new(level, self.a.pow(level - x.level).mul_vec(&x.vector))
    }

    pub fn add(&self, x: &DimElem, y: &DimElem) -> Result<DimElem, KTheoryError> {
        self.check(x)?;
        self.check(y)?;
        let level = x.level.max(y.level);
        let (x, y) = (self.lift_to(x, level), self.lift_to(y, level));
        Ok(DimElem::new(level, x.vector.iter().zip(&y.vector).map(|(a, b)| a + b).collect()))
    }

    pub fn neg(&self, x: &DimElem) -> DimElem {
        DimElem::new(x.level, x.vector.iter().map(|a| -a).collect())
    }

    /// `δ_A(n, x) = (n + 1, x)`.
    pub fn delta(&self, x: &DimElem) -> DimElem {
        DimElem::new(x.level + 1, x.vector.clone())
    }

    /// `δ_A^{-1}(n, x) = (n, A x)`.
    pub fn delta_inv(&self, x: &DimElem) -> DimElem {
        DimElem::new(x.level, self.a.mul_vec(&x.vector))
    }

    /// `(A^t)_*(n, x) = (n, A x)`; coincides with `δ^{-1}` on `Δ_A`.
    pub fn alpha_star(&self, x: &DimElem) -> DimElem {
        self.delta_inv(x)
    }

    /// Equality in `Δ_A`. The eventual kernel of `A` is `ker A^s` for the rank
    /// stabilization index `s`, so "no" is exact; "undecided" only when the
    /// difference dies after more than `bound` steps.
    pub fn dim_equal(&self, x: &DimElem, y: &DimElem, bound: usize) -> Result<Decision, KTheoryError> {
        let d = self.add(x, &self.neg(y))?;
        let mut v = d.vector;
        for k in 0..=bound.min(self.stable) {
            if v.iter().all(Zero::is_zero) {
                return Ok(Decision::Yes);
            }
            if k < self.stable {
                v = self.a.mul_vec(&v);
            }
        }
        if bound >= self.stable {
            return Ok(Decision::No);
        }
        // v = A^{bound+1} d; finish the climb to A^s d
        let tail = self.a.pow(self.stable - bound - 1).mul_vec(&v);
        Ok(if tail.iter().all(Zero::is_zero) { Decision::Undecided } else { Decision::No })
    }

    /// Membership in `Δ_A^+`: some `A^k x` is nonnegative.
    ///
    /// "No" is certified when `A` has no zero column and some `A^k x` is
    /// nonpositive and nonzero: then every later power stays nonpositive and
    /// nonzero.
    pub fn dim_positive(&self, x: &DimElem, bound: usize) -> Result<Decision, KTheoryError> {
        self.check(x)?;
        let no_zero_column = (0..self.dim()).all(|j| (0..self.dim()).any(|i| !self.a.get(i, j).is_zero()));
        let mut v = x.vector.clone();
        for _ in 0..=bound {
            if v.iter().all(|c| !c.is_negative()) {
                return Ok(Decision::Yes);
            }
            if no_zero_column && v.iter().all(|c| !c.is_positive()) {
                return Ok(Decision::No);
            }
            v = self.a.mul_vec(&v);
        }
        Ok(Decision::Undecided)
    }

    /// `[1_E] = (0, 1)`.
    pub fn order_unit(&self) -> DimElem {
        DimElem::new(0, vec![BigInt::one(); self.dim()])
    }
}

/// Least `s` with `rank A^s = rank A^{s+1}`; then `ker A^k = ker A^s` for all `k >= s`.
pub fn kernel_stabilization(a: &IntMatrix) -> usize {
    let mut p = IntMatrix::identity(a.rows());
    let mut rank = a.rows();
    for s in 0..=a.rows() {
        let next = &p * a;
        let next_rank = next.rank();
        if next_rank == rank {
            return s;
        }
        rank = next_rank;
        p = next;
    }
    a.rows()
}
