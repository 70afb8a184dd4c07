//! Benchmark fixtures shared by the criterion benches.

use birthflow_core::ModelParams;

/// The reference system at birth rate `b` (mu = 1, n0 = 15).
pub fn reference(b: f64) -> ModelParams {
    ModelParams::new(b, 1.0, 15).expect("reference parameters are valid")
}
