#![allow(dead_code)]

use gradlift::{Graph, IntMatrix};
use proptest::prelude::*;

/// Square matrices up to `max_n`, entries in `0..=max_entry`.
pub fn matrix(max_n: usize, max_entry: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_n).prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(0..=max_entry, n), n))
}

pub fn essential(rows: &[Vec<i64>]) -> bool {
    let n = rows.len();
    rows.iter().all(|r| r.iter().any(|&x| x > 0)) && (0..n).all(|j| rows.iter().any(|r| r[j] > 0))
}

pub fn essential_matrix(max_n: usize, max_entry: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    matrix(max_n, max_entry).prop_filter("essential", |m| essential(m))
}

/// The graph whose working matrix `A_E^t` is `rows`.
pub fn graph_of(rows: &[Vec<i64>]) -> Graph {
    Graph::from_adjacency(&IntMatrix::from_rows(rows).transpose()).unwrap()
}

pub fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let m = b.first().map_or(0, Vec::len);
    a.iter().map(|r| (0..m).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

pub fn pow(a: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..k {
        p = mul(&p, a);
    }
    p
}

pub fn to_i64(m: &IntMatrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get_i64(i, j).unwrap()).collect()).collect()
}

/// Cofactor expansion.
pub fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect()).collect();
                (if c % 2 == 0 { 1 } else { -1 }) * m[0][c] * det(&minor)
            })
            .sum(),
    }
}
