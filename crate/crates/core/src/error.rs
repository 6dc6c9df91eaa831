// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the crate.

/// Errors produced by operator construction, evolution and sampling.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    /// A dense object would exceed the configured dimension cap.
    #[error("capacity exceeded in {what}: dimension {dim} > cap {cap} (set DCUBE_DIM_CAP to override)")]
    Capacity {
        what: &'static str,
        dim: usize,
        cap: usize,
    },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("index out of range in {what}: {index} not below {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numerical failure in {what}: {diagnostic}")]
    Numerical {
        what: &'static str,
        diagnostic: String,
    },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("{path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
