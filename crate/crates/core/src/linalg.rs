//! Exact integer matrices, Smith normal form, determinants and cokernels.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense row-major matrix over `Z` with arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Panics on ragged input; use [`IntMatrix::try_from_rows`] for untrusted data.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        Self::try_from_rows(rows).expect("ragged matrix")
    }

    pub fn try_from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return None;
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Some(IntMatrix { rows: r, cols: c, data })
    }

    pub fn column(v: &[BigInt]) -> Self {
        IntMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn get_i64(&self, i: usize, j: usize) -> Option<i64> {
        self.get(i, j).to_i64()
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.cols + j] = v.into();
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.cols + j] += v.into();
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    /// `None` on a dimension mismatch.
    pub fn checked_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != other.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn max_entry(&self) -> Option<&BigInt> {
        self.data.iter().max()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[n - 1][n - 1]
    }

    pub fn smith(&self) -> Smith {
        smith_normal_form(self)
    }

    pub fn rank(&self) -> usize {
        self.smith().rank()
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl Add for &IntMatrix {
    type Output = IntMatrix;

    fn add(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &IntMatrix {
    type Output = IntMatrix;

    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

// Entries serialize as JSON integers when they fit in an i64 and as decimal
// strings otherwise, so large powers survive a round trip.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Small(i64),
    Big(String),
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Entry>> = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| x.to_i64().map_or_else(|| Entry::Big(x.to_string()), Entry::Small))
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<Entry>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Small(v) => Ok(BigInt::from(v)),
                        Entry::Big(s) => s.parse::<BigInt>().map_err(D::Error::custom),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        IntMatrix::try_from_rows(&rows).ok_or_else(|| D::Error::custom("ragged matrix"))
    }
}

/// Serde helper for integer vectors with the same encoding as matrix entries.
pub mod bigvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let row: Vec<Entry> =
            v.iter().map(|x| x.to_i64().map_or_else(|| Entry::Big(x.to_string()), Entry::Small)).collect();
        row.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let row: Vec<Entry> = Vec::deserialize(d)?;
        row.into_iter()
            .map(|e| match e {
                Entry::Small(v) => Ok(BigInt::from(v)),
                Entry::Big(s) => s.parse::<BigInt>().map_err(D::Error::custom),
            })
            .collect()
    }
}

pub fn big_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | ...`, `d_i >= 0`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.to_rows();
    let mut u = IntMatrix::identity(r).to_rows();
    let mut v = IntMatrix::identity(c).to_rows();

    fn row_axpy(x: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        // row_dst -= q * row_src
        let (lo, hi) = if dst < src { (dst, src) } else { (src, dst) };
        let (left, right) = x.split_at_mut(hi);
        let (d, s) = if dst < src { (&mut left[lo], &right[0]) } else { (&mut right[0], &left[lo]) };
        for (a, b) in d.iter_mut().zip(s.iter()) {
            if !b.is_zero() {
                *a -= q * b;
            }
        }
    }
    fn col_axpy(x: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
        for row in x.iter_mut() {
            if !row[src].is_zero() {
                let t = q * &row[src];
                row[dst] -= t;
            }
        }
    }
    fn col_swap(x: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in x.iter_mut() {
            row.swap(i, j);
        }
    }

    for t in 0..r.min(c) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(a, u, v);
            };
            a.swap(t, pi);
            u.swap(t, pi);
            col_swap(&mut a, t, pj);
            col_swap(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..r {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(&mut a, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..c {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into the pivot row and retry
            let offending = (t + 1..r).find(|&i| (t + 1..c).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match offending {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut a, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    finish(a, u, v)
}

fn finish(a: Vec<Vec<BigInt>>, u: Vec<Vec<BigInt>>, v: Vec<Vec<BigInt>>) -> Smith {
    let d = if a.is_empty() {
        IntMatrix::zeros(0, v.len())
    } else {
        IntMatrix::from_rows(&a)
    };
    let u = if u.is_empty() { IntMatrix::zeros(0, 0) } else { IntMatrix::from_rows(&u) };
    let v = if v.is_empty() { IntMatrix::zeros(0, 0) } else { IntMatrix::from_rows(&v) };
    Smith { u, v, d }
}

/// A finitely generated abelian group `Z/d_1 ⊕ ... ⊕ Z/d_k ⊕ Z^f` together with
/// the projection from the ambient `Z^n` it was presented as a quotient of.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianGroup {
    /// Nontrivial invariant factors, each `> 1`, each dividing the next.
    #[serde(serialize_with = "bigvec::serialize")]
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
    /// Rows map `Z^n` onto the torsion coordinates, then the free coordinates.
    pub projection: IntMatrix,
}

impl AbelianGroup {
    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    /// Same isomorphism type.
    pub fn isomorphic(&self, other: &AbelianGroup) -> bool {
        self.invariant_factors == other.invariant_factors && self.free_rank == other.free_rank
    }

    /// Image of `x ∈ Z^n` in normalized coordinates (torsion parts reduced).
    pub fn project(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut y = self.projection.mul_vec(x);
        for (yi, d) in y.iter_mut().zip(&self.invariant_factors) {
            *yi = yi.mod_floor(d);
        }
        y
    }

    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.invariant_factors.iter().product())
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        if self.free_rank == 1 {
            parts.push("Z".into());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `coker(M) = Z^rows / M Z^cols`.
pub fn cokernel(m: &IntMatrix) -> AbelianGroup {
    let smith = m.smith();
    let diag = smith.diagonal();
    let mut invariant_factors = Vec::new();
    let mut torsion_rows = Vec::new();
    let mut free_rows = Vec::new();
    for i in 0..m.rows {
        match diag.get(i) {
            Some(d) if d.is_one() => {}
            Some(d) if !d.is_zero() => {
                invariant_factors.push(d.clone());
                torsion_rows.push(smith.u.row(i).to_vec());
            }
            _ => free_rows.push(smith.u.row(i).to_vec()),
        }
    }
    let free_rank = free_rows.len();
    torsion_rows.extend(free_rows);
    let projection = if torsion_rows.is_empty() {
        IntMatrix::zeros(0, m.rows)
    } else {
        IntMatrix::from_rows(&torsion_rows)
    };
    AbelianGroup { invariant_factors, free_rank, projection }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    // Cofactor expansion; slow but independent of the elimination code.
    fn det_oracle(a: &[Vec<i64>]) -> i64 {
        let n = a.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    a[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * a[0][j] * det_oracle(&minor)
            })
            .sum()
    }

    // Order of coker for a nonsingular square matrix is |det|.
    #[test]
    fn cokernel_of_known_matrices() {
        let g = cokernel(&m(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(g.invariant_factors, big_vec(&[6]));
        assert_eq!(g.free_rank, 0);
        let g = cokernel(&m(&[vec![2, 4], vec![4, 2]]));
        assert_eq!(g.invariant_factors, big_vec(&[2, 6]));
        let g = cokernel(&m(&[vec![0, 0], vec![0, 0]]));
        assert_eq!(g.free_rank, 2);
        assert_eq!(g.to_string(), "Z^2");
        // I - [[2]] = [[-1]]
        assert!(cokernel(&m(&[vec![-1]])).is_trivial());
        // I - [[1,1],[1,1]]^... for [[3]] : Z/2
        assert_eq!(cokernel(&m(&[vec![-2]])).to_string(), "Z/2");
    }

    #[test]
    fn det_examples() {
        assert_eq!(m(&[vec![1, 2], vec![3, 4]]).det(), BigInt::from(-2));
        assert_eq!(m(&[vec![0, 1], vec![1, 0]]).det(), BigInt::from(-1));
        assert_eq!(m(&[vec![0, 0], vec![1, 0]]).det(), BigInt::zero());
    }

    #[test]
    fn projection_kills_image() {
        let a = m(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]);
        let i_minus = &IntMatrix::identity(3) - &a;
        let g = cokernel(&i_minus);
        for j in 0..3 {
            let col: Vec<BigInt> = (0..3).map(|i| i_minus.get(i, j).clone()).collect();
            assert!(g.project(&col).iter().all(Zero::is_zero));
        }
    }

    fn small_matrix(max_dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-4i64..=4, c), r))
    }

    proptest! {
        #[test]
        fn smith_is_a_valid_factorization(rows in small_matrix(4)) {
            let a = m(&rows);
            let s = a.smith();
            prop_assert_eq!(&(&s.u * &a) * &s.v, s.d.clone());
            prop_assert_eq!(s.u.det().abs(), BigInt::one());
            prop_assert_eq!(s.v.det().abs(), BigInt::one());
            let diag = s.diagonal();
            for i in 0..s.d.rows() {
                for j in 0..s.d.cols() {
                    if i != j {
                        prop_assert!(s.d.get(i, j).is_zero());
                    }
                }
            }
            for w in diag.windows(2) {
                prop_assert!(!w[0].is_negative());
                if w[0].is_zero() {
                    prop_assert!(w[1].is_zero());
                } else {
                    prop_assert!(w[1].is_multiple_of(&w[0]));
                }
            }
        }

        #[test]
        fn det_matches_cofactor_oracle(n in 1usize..=4, seed in prop::collection::vec(-5i64..=5, 16)) {
            let rows: Vec<Vec<i64>> = (0..n).map(|i| seed[i * n..(i + 1) * n].to_vec()).collect();
            prop_assert_eq!(m(&rows).det(), BigInt::from(det_oracle(&rows)));
        }

        #[test]
        fn cokernel_order_is_abs_det(n in 1usize..=4, seed in prop::collection::vec(-5i64..=5, 16)) {
            let rows: Vec<Vec<i64>> = (0..n).map(|i| seed[i * n..(i + 1) * n].to_vec()).collect();
            let a = m(&rows);
            let d = BigInt::from(det_oracle(&rows));
            let g = cokernel(&a);
            if d.is_zero() {
                prop_assert!(g.free_rank > 0);
            } else {
                prop_assert_eq!(g.order().unwrap(), d.abs());
            }
        }

        #[test]
        fn serde_round_trip(rows in small_matrix(3)) {
            let a = m(&rows);
            let s = serde_json::to_string(&a).unwrap();
            let b: IntMatrix = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
