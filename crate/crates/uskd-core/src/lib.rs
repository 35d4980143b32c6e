//! Simulation laboratory for phase-noise-immune classical key distribution over a
//! doubly coupled Mach-Zehnder interferometer (MZI).
//!
//! The crate is organized bottom-up:
//!
//! * [`optics`] — exact complex 2x2 linear algebra for two-port optical elements.
//! * [`mzi`] — one-way and round-trip MZI transfer matrices and their closed-form
//!   intensities, plus independent analytic oracles.
//! * [`noise`] — deterministic, seedable phase-noise processes (counter-based streams).
//! * [`experiments`] — Monte Carlo sweep engine for the intensity-averaging figures.
//! * [`protocol`] — key-distribution sessions with thresholded detection and
//!   eavesdropper strategies.
//! * [`verify`] — self-contained invariant suite (unitarity, composition oracles,
//!   noise immunity) usable both from tests and from the CLI.
//!
//! Every public operation is a pure function of its inputs; all randomness flows
//! through [`noise::NoiseStream`] values keyed by `(seed, trial_index, cursor)`, so
//! any experiment output is reproducible bit-for-bit from its spec and seed.

pub mod error;
pub mod experiments;
pub mod mzi;
pub mod noise;
pub mod optics;
pub mod protocol;
pub mod verify;

pub use error::{Error, Result};
