//! Sparse storage, block (nest) matrices and solvers.

mod csr;
pub mod dense;
mod io;
mod nest;
mod solve;

pub use csr::{CsrMatrix, TripletBuilder};
pub use io::{read_matrix_market, read_vector, write_matrix_market, write_vector};
pub use nest::{convert_to_monolithic, BlockNestMatrix, BlockVector};
pub use solve::{solve_direct, solve_krylov, KrylovMethod, KrylovResult};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
