//! Matrix types, Matrix Market I/O, synthetic generators and the reference
//! products every kernel is checked against.

mod csc;
mod dense;
pub mod fixtures;
pub mod market;
pub mod reference;
pub mod synthetic;
mod triplets;

pub use csc::CscMatrix;
pub use dense::DenseMatrix;
pub use market::{read_matrix_market, read_matrix_market_str, write_matrix_market};
pub use reference::{
    csc_matches, dense_oracle, gustavson_reference, gustavson_reference_counted, matrices_match,
};
pub use synthetic::{generate_random, generate_synthetic};
pub use triplets::TripletList;
