//! Simulation library for adiabatic dynamics of dephasing-coupled qubits.
//!
//! The crate propagates Lindblad master equations in three equivalent
//! pictures (density matrix, vectorized superoperator, spectral coefficient
//! space), performs biorthogonal spectral analysis of the non-Hermitian
//! superoperator, evaluates the open-system adiabatic quantum condition, and
//! provides the oscillating Landau-Zener and adiabatic-Deutsch models along
//! with fidelity/tomography figures of merit.
//!
//! All frequencies and rates are angular (rad/s) unless noted otherwise.

pub mod adiabatic;
pub mod dynamics;
pub mod linalg;
pub mod measurement;
pub mod models;
pub mod spectral;
pub mod superop;

pub use linalg::{ComplexMatrix, EigenResult, LinalgError};
pub use measurement::{fidelity, trace_distance, TomographyProtocol, TomographyResult};
pub use spectral::{SpectralError, SpectralFrame, SpectralPath};
pub use superop::{CoherenceVector, DensityMatrix, NoiseChannel, OperatorBasis, SuperoperatorFn};

/// Convert an ordinary frequency in Hz to angular frequency in rad/s.
pub fn angular_from_hz(f: f64) -> f64 {
    std::f64::consts::TAU * f
}
