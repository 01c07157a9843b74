//! Exact desk-scale simulation of quantum-walk search and quantum Metropolis
//! annealing over discrete energy landscapes.
//!
//! The crate provides:
//!
//! - dense real/complex kernels and a Jacobi symmetric eigensolver
//!   ([`linalg`]),
//! - energy landscapes with ±1 coordinate moves and a bit-exact text format
//!   ([`landscape`]),
//! - Metropolis-Hastings chains, stationary distributions, spectral gaps,
//!   annealing schedules, and hitting/mixing times ([`markov`]),
//! - Grover search and amplitude amplification, including the monotone π/3
//!   recursion and the Chebyshev fixed-point sequence ([`amplitude`]),
//! - bipartite walk operators with their discriminant spectral
//!   correspondence, quantum fast forwarding, and block-encoded unitary sums
//!   ([`szegedy`]),
//! - the coin-based quantum Metropolis walk and measurement-driven annealing
//!   ([`qmetropolis`]),
//! - the dense Fourier transform and textbook phase estimation ([`qpe`]),
//! - total-time-to-solution curves, minima, and log-log exponent fits with
//!   bootstrap spread ([`tts`]).
//!
//! Everything is deterministic: exact propagation wherever possible, explicit
//! seeds wherever sampling is part of the algorithm.

// Dense kernels index several buffers by the same loop variable; explicit
// indices read better than zipped iterators there.
#![allow(clippy::needless_range_loop)]

pub mod amplitude;
pub mod caps;
pub mod landscape;
pub mod linalg;
pub mod markov;
pub mod qmetropolis;
pub mod qpe;
pub mod szegedy;
pub mod tol;
pub mod tts;

pub use amplitude::{AmplitudeProcess, SearchInstance};
pub use landscape::EnergyLandscape;
pub use linalg::{ComplexMatrix, RealMatrix, SpectralData};
pub use markov::{AnnealingSchedule, MarkovChain, ScheduleKind, StationaryDistribution};
pub use qmetropolis::{CoinWalk, EvolutionTrace, RegisterLayout};
pub use qpe::PhaseEstimate;
pub use szegedy::{LcuProgram, SzegedyWalk};
pub use tts::{FitResult, TtsCurve};
