//! Lindbladian simulation by Hamiltonian twirling.
//!
//! Averaging `e^{-iHs} ρ e^{iHs}` over a random time `s` gives a channel that
//! is diagonal (Schur) in the eigenbasis of `H`. For Gaussian `s` of variance
//! `t` it equals `e^{tL}` with `L(ρ) = HρH − ½{H², ρ}`, so a single randomly
//! timed Hamiltonian evolution simulates a dissipative Lindbladian without
//! ancillas. This crate provides the exact channels, independent oracles,
//! the randomized samplers with their cost ledgers, a classical emulation of
//! continuous-variable phase estimation, and the `twirl` command-line tool.

pub mod channels;
pub mod cli;
pub mod config;
pub mod cvqpe;
pub mod distribution;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod random;
pub mod sampler;
pub mod twirl;

pub use channels::{ChoiMatrix, DensityMatrix, SchurMultiplier, SuperoperatorMatrix};
pub use distribution::{DistributionSpec, LevyTriplet};
pub use error::{CliError, Result, TwirlError};
pub use hamiltonian::HermitianOperator;
pub use linalg::{ComplexMatrix, C64};
