//! Exploding cadlag step paths on a locally compact state space with a
//! cemetery point, random time changes by speed functions, Skorokhod
//! distances, and Monte-Carlo checks of stopped martingale problems,
//! generators, Feller properties and convergence of process families.
//!
//! The `locfell` binary drives these checks from JSON experiment files.

pub mod error;
pub mod functions;
pub mod harness;
pub mod martingale;
pub mod operator;
pub mod path;
pub mod simulators;
pub mod skorokhod;
pub mod speed;
pub mod state_space;
pub mod stats;
pub mod time_change;

pub use error::{Error, Result};
pub use functions::{Coefficient, TestFunction};
pub use operator::{Generator, Operator, Pair};
pub use path::{PathKind, StepPath, StoppingSpec, Times};
pub use simulators::{Ensemble, FamilyKind, FamilySimulator, Horizon, InitialLaw};
pub use speed::SpeedFunction;
pub use state_space::{ClosedInterval, DeltaChart, OpenInterval, StatePoint, StateSpace};
