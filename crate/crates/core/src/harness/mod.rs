//! Experiment runner: domain families, the verification suite and its outputs.

pub mod config;
pub mod generate;
pub mod suite;

pub use config::{DeficitSpec, ExperimentConfig, FamilyConfig, FamilyKind, Resolution, Tolerances};
pub use generate::{deficit_matched_from, generate, generate_deficit_matched, isoperimetric_deficit};
pub use suite::{run_cases, run_rfk_suite, build_cases, CaseReport, DomainCase, LemmaCheck, Status, SuiteReport, VerificationRow};
