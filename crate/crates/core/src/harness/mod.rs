//! End-to-end experiments, configuration files and report emission.

pub mod config;
pub mod convergence;
pub mod demo;
pub mod localisation;
pub mod run;

pub use convergence::{law_convergence_table, operator_convergence_table, Functional, LawTable, OperatorTable};
pub use demo::{timechange_to_feller_demo, DemoChecks, DemoReport};
pub use localisation::{localisation_experiment, LocalisationReport};
