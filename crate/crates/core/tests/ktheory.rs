mod common;

use gradlift::ktheory::{bowen_franks, k0_with_unit, Decision, DimElem, DimTriple};
use gradlift::shift::{search_shift_equivalence, InducedIso, ShiftEquivalence};
use gradlift::IntMatrix;
use num_bigint::BigInt;
use proptest::prelude::*;

fn elem(level: usize, v: &[i64]) -> DimElem {
    DimElem::new(level, v.iter().map(|&c| BigInt::from(c)).collect())
}

fn vector(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, n)
}

proptest! {
    #[test]
    fn cokernel_order_is_abs_det(rows in common::matrix(4, 3)) {
        let n = rows.len();
        let i_minus: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j) - rows[i][j]).collect()).collect();
        let d = common::det(&i_minus);
        let bf = bowen_franks(&IntMatrix::from_rows(&rows)).unwrap();
        prop_assert_eq!(bf.det.clone(), BigInt::from(d));
        if d == 0 {
            prop_assert!(bf.group.free_rank > 0);
        } else {
            prop_assert_eq!(bf.group.free_rank, 0);
            prop_assert_eq!(bf.group.order(), Some(BigInt::from(d.abs())));
        }
    }

    #[test]
    fn dimension_group_arithmetic((rows, vx, vy) in common::essential_matrix(3, 3).prop_flat_map(|m| {
        let n = m.len();
        (Just(m), vector(n), vector(n))
    }), lx in 0usize..3, ly in 0usize..3) {
        let n = rows.len();
        let t = DimTriple::new(IntMatrix::from_rows(&rows)).unwrap();
        let (x, y) = (elem(lx, &vx), elem(ly, &vy));
        prop_assert_eq!(t.dim_equal(&t.delta_inv(&t.delta(&x)), &x, 32).unwrap(), Decision::Yes);
        prop_assert_eq!(t.dim_equal(&x, &y, 32).unwrap(), t.dim_equal(&y, &x, 32).unwrap());
        let zero = elem(0, &vec![0; n]);
        prop_assert_eq!(t.dim_equal(&t.add(&x, &t.neg(&x)).unwrap(), &zero, 32).unwrap(), Decision::Yes);
        // x + y, both lifted to the common level by hand
        let lvl = lx.max(ly);
        let (ax, ay) = (common::pow(&rows, lvl - lx), common::pow(&rows, lvl - ly));
        let sum: Vec<i64> = (0..n).map(|i| (0..n).map(|j| ax[i][j] * vx[j] + ay[i][j] * vy[j]).sum()).collect();
        prop_assert_eq!(t.add(&x, &y).unwrap(), elem(lvl, &sum));
    }

    #[test]
    fn order_unit_is_positive_and_its_negative_is_not(rows in common::essential_matrix(3, 3)) {
        let t = DimTriple::new(IntMatrix::from_rows(&rows)).unwrap();
        let u = t.order_unit();
        prop_assert_eq!(t.dim_positive(&u, 8).unwrap(), Decision::Yes);
        prop_assert_eq!(t.dim_positive(&t.neg(&u), 8).unwrap(), Decision::No);
    }

    #[test]
    fn identity_equivalence_preserves_unit(rows in common::essential_matrix(3, 2)) {
        let a = IntMatrix::from_rows(&rows);
        let se = ShiftEquivalence::new(a.clone(), a.clone(), IntMatrix::identity(a.rows()), a.clone(), 1).unwrap();
        prop_assert_eq!(InducedIso::new(se.clone(), 0).preserves_order_unit(16), Decision::Yes);
        prop_assert!(search_shift_equivalence(&a, &a, 1, 2).is_some());
    }
}

#[test]
fn k0_unit_of_three_petal_rose() {
    let g = common::graph_of(&[vec![3]]);
    let k = k0_with_unit(&g).unwrap();
    assert_eq!(k.group.to_string(), "Z/2");
    assert_eq!(k.order_unit, vec![BigInt::from(1)]);
}
