// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of open quantum systems under dephasing Lindbladians.
//!
//! Three mutually validating backends:
//! - exact master-equation integration ([`lindblad`]),
//! - stochastic mixed-unitary channel sampling ([`stochastic`]),
//! - the decoupling scheme that trades interaction-dephasing for ancilla
//!   qubits and measurement-conditioned circuits ([`dcube`], [`iqp`]),
//!
//! plus a single-particle fast path for non-interacting fermions ([`flo`])
//! and an experiment harness with CSV emitters ([`harness`]).

pub mod error;
pub mod rng;
pub mod tensor;

pub mod lindblad;

pub use error::{CoreError, Result};
pub use tensor::{CMat, CVec, DensityMatrix, Factor, FactorKind, LocalOp, SpaceLayout, C64};
