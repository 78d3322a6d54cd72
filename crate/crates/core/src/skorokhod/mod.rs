//! Skorokhod-type distances on exploding paths and tightness diagnostics.

mod distance;
mod tightness;

pub use distance::{
    convergence_probe, global_distance, local_distance, ConvergenceProbe, Reparametrization, LOCAL_LEVELS,
};
pub use tightness::{aldous_tightness, TightnessReport, COVERAGE_NOTE};
