//! Selective, ancilla-free estimation of process-matrix elements for
//! simulated n-qubit channels.
//!
//! Every element `χ_ab` of a channel's process matrix in the Pauli basis is an
//! affine function of an average survival probability over a state 2-design.
//! This crate builds that 2-design from mutually unbiased bases, compiles the
//! Clifford circuits that prepare the required input states, and estimates
//! elements or target fidelities by sampling those survival probabilities.
//!
//! Module map:
//! - [`pauli`]: exact Pauli arithmetic in binary symplectic form
//! - [`dense`]: dense state/density-matrix simulation used as ground truth
//! - [`clifford`]: circuits, tableau conjugation, basis synthesis, preparation compiler
//! - [`design`]: mutually unbiased bases and the translation rule
//! - [`channels`]: Kraus / process-matrix channels, the named channel registry, fidelities
//! - [`estimator`]: exact and sampled element estimation, tomography, setting deduplication
//! - [`harness`]: run configuration, task registry and report emission

pub mod channels;
pub mod clifford;
pub mod dense;
pub mod design;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod pauli;

pub use channels::{ChiMatrix, QuantumChannel, TargetSupport};
pub use clifford::{compile_prep, CliffordCircuit, Direction, Gate, PhaseTurn, PrepProgram};
pub use dense::{DensityMatrix, RawState, StateVector};
pub use design::{MubBasis, MubDesign};
pub use error::{Error, Result};
pub use estimator::{EstimationResult, SamplingPlan, Shots};
pub use pauli::{PauliIndex, PauliOperator};

pub type C64 = nalgebra::Complex<f64>;

/// Largest qubit count for dense matrix export and simulation.
pub const DENSE_LIMIT: usize = 6;
