//! Graded matricial towers, graph moves, and the lifting of shift
//! equivalences to graded isomorphisms of Leavitt path algebras.

pub mod error;
pub mod graph;
pub mod ktheory;
pub mod lift;
pub mod linalg;
pub mod lpa;
pub mod moves;
pub mod shift;
pub mod tower;

pub use error::*;
pub use graph::{Edge, Graph, Path};
pub use linalg::IntMatrix;

pub(crate) fn serde_bigint<S: serde::Serializer>(x: &num_bigint::BigInt, s: S) -> Result<S::Ok, S::Error> {
    use num_traits::ToPrimitive;
    match x.to_i64() {
        Some(v) => s.serialize_i64(v),
        None => s.serialize_str(&x.to_string()),
    }
}
