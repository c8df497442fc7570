//! Reference computations for tests. Nothing here calls into the engine;
//! every oracle works on plain adjacency lists, matrices and masks.

pub mod games;
pub mod hml;
pub mod metric;
pub mod partition;
pub mod termination;
pub mod transport;

pub type Q = num_rational::BigRational;

pub fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}
