//! Worked universes as parameterized runs producing reports.

pub mod approx;
pub mod geiger;
pub mod mzi;
pub mod observing;
pub mod pointer;
pub mod stern_gerlach;

pub use approx::{approx_report, rebase_approximate_measurement, ApproxRun};
pub use geiger::{geiger_report, geiger_run, GeigerParams, GeigerRun};
pub use mzi::{mirror_overlap, mzi_report, mzi_run, MirrorMode, MziParams, MziRun};
pub use observing::{observers_report, spins_report};
pub use pointer::{pointer_report, von_neumann_run, PointerParams, PointerRun, Profile};
pub use stern_gerlach::{stern_gerlach_report, stern_gerlach_run, SternGerlachParams, SternGerlachRun};

/// Registered scenario names.
pub const SCENARIOS: [&str; 7] = ["mzi", "approx", "spins", "observers", "pointer", "stern_gerlach", "geiger"];
