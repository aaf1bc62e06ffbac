//! Adaptive diffusion networks that make decisions in multi-task settings.
//!
//! Agents observe discrete symbols, run LMS-type recursions on per-hypothesis
//! statistics and combine their status with neighbors they estimate to share
//! the same observation model. The crate covers the simulation engine, the
//! steady-state Gaussian approximation of agent status, and a Monte Carlo
//! harness driven by JSON scenario files.

pub mod diffusion;
pub mod error;
pub mod harness;
pub mod network;
pub mod simplex;
pub mod theory;

pub use error::{Error, Result};
