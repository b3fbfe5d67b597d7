//! Abstract long-vector machine.
//!
//! Instructions execute eagerly on ordinary slices; the engine's job is to
//! enforce the vector contract (bounded VL, in-bounds indices, conflict-free
//! scatters) and to count what a real vector unit would have issued.

mod engine;
mod register;
mod report;

pub use engine::{Cmp, IndexOp, VecEngine, DEFAULT_LANES, DEFAULT_MAX_VL};
pub use register::{Operand, VecMask, VecReg};
pub use report::CostReport;
