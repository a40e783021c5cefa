//! Exact synthesis of n-qubit unitaries into CNOT and single-qubit rotation
//! circuits via recursive block-ZXZ decomposition.
//!
//! ```
//! use zxzsynth::{synthesize, Circuit64, OptLevel, SynthesisConfig};
//! use zxzsynth::numerics::haar_unitary;
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let u = haar_unitary::<f64, _>(8, &mut rng);
//! let c: Circuit64 = synthesize(&u, &SynthesisConfig::new(OptLevel::L3)).unwrap();
//! assert_eq!(c.cnot_count().unwrap(), 19);
//! ```
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the common `f64` case. CNOT-count formulas are evaluated exactly
//! with rationals in [`optimizer`].

pub mod blockzxz;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod optimizer;
pub mod report;
pub mod scalar;
pub mod smallgate;
pub mod ucr;

pub use blockzxz::{synthesize, SynthesisConfig};
pub use circuit::{circuit_to_unitary, distance_up_to_phase, Gate, GateKind};
pub use error::{Error, Result};
pub use optimizer::{expected_count, OptLevel};
pub use scalar::Real;

pub type Matrix64 = numerics::CMatrix<f64>;
pub type Matrix32 = numerics::CMatrix<f32>;
pub type Circuit64 = circuit::Circuit<f64>;
pub type Circuit32 = circuit::Circuit<f32>;
pub type Gate64 = circuit::Gate<f64>;
pub type Gate32 = circuit::Gate<f32>;
