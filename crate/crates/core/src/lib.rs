//! Klauder-Perelomov coherent states of the Morse oscillator.
//!
//! The bound-state ladder of a Morse well with integer depth parameter `l`
//! is an `(l+1)`-dimensional space. On it this crate builds:
//!
//! - the spectrum and thermal parameters ([`spectrum`]),
//! - the ladder algebra and the displacement-expansion combinatorics ([`ladder`]),
//! - binomial coherent states, their measure and kernel ([`coherent`]),
//! - photon-number style statistics of those states ([`statistics`]),
//! - the canonical ensemble: partition function, Husimi and P representations,
//!   thermal correlation functions and thermodynamics ([`thermal`]),
//! - a verification suite that runs every identity through two independent
//!   routes ([`verify`]).
//!
//! Grid sweeps and quadratures run through [`exec::Execution`], which uses
//! rayon when the `parallel` feature is enabled and falls back to a plain
//! loop otherwise.

pub mod coherent;
pub mod error;
pub mod exec;
pub mod ladder;
pub mod numerics;
pub mod spectrum;
pub mod statistics;
pub mod thermal;
pub mod verify;

pub use coherent::CoherentState;
pub use error::{Error, Result};
pub use exec::Execution;
pub use spectrum::{MorseSpace, ThermalParams};
pub use statistics::DiagonalObservable;
pub use thermal::{ExpSum, EulerTermSeries, ThermalState};

pub use num_complex::Complex64;
