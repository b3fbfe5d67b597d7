//! Sparse general matrix-matrix multiplication (SpGEMM) on an abstract
//! long-vector machine.
//!
//! Six algorithms are provided, all written against [`machine::VecEngine`],
//! which executes masked gather/scatter/FMA instructions on plain slices and
//! records what a vector unit would have done in a [`CostReport`]:
//!
//! - [`kernels::spa_kernel`]: one output column at a time, dense accumulator.
//! - [`kernels::spars_kernel`]: one output column per vector lane, columns
//!   sorted by load and processed in blocks.
//! - [`kernels::hash_kernel`]: like SPARS, but each lane accumulates into a
//!   linear-probing hash table sized per block.
//! - [`kernels::hybrid_kernel`]: heavy columns through SPA, the rest blocked.
//! - [`kernels::esc_kernel`]: expand all products, radix sort, compress.
//!
//! Everything numeric is generic over [`Scalar`]; the `*F64`/`*F32` aliases
//! below cover the usual cases.

pub mod error;
pub mod kernels;
pub mod machine;
pub mod plan;
pub mod scalar;
pub mod sparse;

pub use error::{Error, ModelFault, Result};
pub use kernels::{
    esc_kernel, hash_kernel, hybrid_kernel, spa_kernel, spars_kernel, Accumulator, EscParams,
    KernelOutput, RadixPolicy, DEFAULT_HASH_C,
};
pub use machine::{CostReport, VecEngine, VecMask, VecReg};
pub use plan::{ColumnPlan, PlanConfig, Threshold};
pub use scalar::Scalar;
pub use sparse::{CscMatrix, DenseMatrix, TripletList};

pub type CscMatrixF64 = CscMatrix<f64>;
pub type CscMatrixF32 = CscMatrix<f32>;
pub type DenseMatrixF64 = DenseMatrix<f64>;
pub type DenseMatrixF32 = DenseMatrix<f32>;
pub type TripletListF64 = TripletList<f64>;
pub type TripletListF32 = TripletList<f32>;
pub type KernelOutputF64 = KernelOutput<f64>;
pub type KernelOutputF32 = KernelOutput<f32>;
