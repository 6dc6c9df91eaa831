// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Operators acting on a subset of tensor factors.
//!
//! A [`LocalOp`] stores a dense matrix on the product of a few factors plus
//! precomputed index tables, so applying it to a state vector costs
//! O(dim * d_local) and to a density matrix O(dim^2 * d_local) instead of a
//! full dim^3 matrix product. Dense full-space operators are the special
//! case where the factor set covers the whole layout.

use ndarray::s;

use crate::error::{CoreError, Result};
use crate::tensor::{dagger, CMat, CVec, SpaceLayout, C64};

/// A dense operator on a subset of the layout's tensor factors.
#[derive(Debug, Clone)]
pub struct LocalOp {
    /// Ascending factor indices the operator acts on.
    pub factors: Vec<usize>,
    /// Dense matrix of dimension prod(factor dims).
    pub mat: CMat,
    /// Global index offset of each local basis state.
    offsets: Vec<usize>,
    /// Global base index for each complement basis state.
    bases: Vec<usize>,
    total_dim: usize,
}

impl LocalOp {
    pub fn new(layout: &SpaceLayout, mut factors: Vec<usize>, mat: CMat) -> Result<Self> {
        factors.sort_unstable();
        factors.dedup();
        for &f in &factors {
            if f >= layout.num_factors() {
                return Err(CoreError::IndexOutOfRange {
                    what: "local operator factor",
                    index: f,
                    len: layout.num_factors(),
                });
            }
        }
        let d_local: usize = factors.iter().map(|&f| layout.factor(f).dim).product();
        if mat.nrows() != d_local || mat.ncols() != d_local {
            return Err(CoreError::DimMismatch {
                what: "local operator matrix",
                expected: d_local,
                got: mat.nrows(),
            });
        }
        let strides = layout.strides();
        // Offsets of the selected factors' digit combinations, in the order
        // matching kron over the ascending factor list.
        let mut offsets = vec![0usize];
        for &f in &factors {
            let d = layout.factor(f).dim;
            let mut next = Vec::with_capacity(offsets.len() * d);
            for &base in &offsets {
                for v in 0..d {
                    next.push(base + v * strides[f]);
                }
            }
            offsets = next;
        }
        let mut bases = vec![0usize];
        for f in 0..layout.num_factors() {
            if factors.contains(&f) {
                continue;
            }
            let d = layout.factor(f).dim;
            let mut next = Vec::with_capacity(bases.len() * d);
            for &base in &bases {
                for v in 0..d {
                    next.push(base + v * strides[f]);
                }
            }
            bases = next;
        }
        Ok(LocalOp {
            factors,
            mat,
            offsets,
            bases,
            total_dim: layout.total_dim(),
        })
    }

    /// Operator on all factors (a plain dense matrix).
    pub fn full(layout: &SpaceLayout, mat: CMat) -> Result<Self> {
        LocalOp::new(layout, (0..layout.num_factors()).collect(), mat)
    }

    pub fn local_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn is_full(&self) -> bool {
        self.local_dim() == self.total_dim
    }

    /// Adjoint with the same support.
    pub fn adjoint(&self) -> LocalOp {
        LocalOp {
            factors: self.factors.clone(),
            mat: dagger(&self.mat),
            offsets: self.offsets.clone(),
            bases: self.bases.clone(),
            total_dim: self.total_dim,
        }
    }

    /// Same support, matrix mapped through `f`.
    pub fn map_mat(&self, f: impl Fn(&CMat) -> CMat) -> LocalOp {
        let mat = f(&self.mat);
        assert_eq!(mat.nrows(), self.local_dim());
        LocalOp {
            factors: self.factors.clone(),
            mat,
            offsets: self.offsets.clone(),
            bases: self.bases.clone(),
            total_dim: self.total_dim,
        }
    }

    /// Materialize as a dense matrix on the full space.
    pub fn to_dense(&self, layout: &SpaceLayout) -> Result<CMat> {
        let dim = layout.total_dim();
        if dim != self.total_dim {
            return Err(CoreError::DimMismatch {
                what: "local operator layout",
                expected: self.total_dim,
                got: dim,
            });
        }
        let mut out = CMat::zeros((dim, dim));
        let d = self.local_dim();
        for &b in &self.bases {
            for a in 0..d {
                for ap in 0..d {
                    let v = self.mat[[a, ap]];
                    if v != C64::new(0.0, 0.0) {
                        out[[b + self.offsets[a], b + self.offsets[ap]]] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// op |psi>.
    pub fn apply_vec(&self, psi: &CVec) -> CVec {
        assert_eq!(psi.len(), self.total_dim);
        if self.is_full() {
            return self.mat.dot(psi);
        }
        let d = self.local_dim();
        let mut out = psi.clone();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for &b in &self.bases {
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = psi[b + self.offsets[a]];
            }
            for a in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (ap, amp) in buf.iter().enumerate() {
                    acc += self.mat[[a, ap]] * amp;
                }
                out[b + self.offsets[a]] = acc;
            }
        }
        out
    }

    /// op . rho (left multiplication).
    pub fn apply_left(&self, rho: &CMat) -> CMat {
        assert_eq!(rho.nrows(), self.total_dim);
        if self.is_full() {
            return self.mat.dot(rho);
        }
        let d = self.local_dim();
        let n = rho.ncols();
        let mut out = CMat::zeros((self.total_dim, n));
        for &b in &self.bases {
            for a in 0..d {
                let row_out = b + self.offsets[a];
                for ap in 0..d {
                    let coeff = self.mat[[a, ap]];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let row_in = b + self.offsets[ap];
                    let src = rho.slice(s![row_in, ..]);
                    let mut dst = out.slice_mut(s![row_out, ..]);
                    dst.zip_mut_with(&src, |o, &v| *o += coeff * v);
                }
            }
        }
        out
    }

    /// rho . op (right multiplication).
    pub fn apply_right(&self, rho: &CMat) -> CMat {
        assert_eq!(rho.ncols(), self.total_dim);
        if self.is_full() {
            return rho.dot(&self.mat);
        }
        let d = self.local_dim();
        let n = rho.nrows();
        let mut out = CMat::zeros((n, self.total_dim));
        for &b in &self.bases {
            for a in 0..d {
                let col_out = b + self.offsets[a];
                for ap in 0..d {
                    // (rho.op)[:, a] = sum_ap rho[:, ap] op[ap, a]
                    let coeff = self.mat[[ap, a]];
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let col_in = b + self.offsets[ap];
                    let src = rho.slice(s![.., col_in]);
                    let mut dst = out.slice_mut(s![.., col_out]);
                    dst.zip_mut_with(&src, |o, &v| *o += coeff * v);
                }
            }
        }
        out
    }

    /// op . rho . op^dag in one pass.
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        self.apply_right_dagger(&self.apply_left(rho))
    }

    /// rho . op^dag.
    pub fn apply_right_dagger(&self, rho: &CMat) -> CMat {
        self.adjoint_cheap().apply_right(rho)
    }

    fn adjoint_cheap(&self) -> LocalOp {
        // Same tables, daggered matrix; cheap because tables are shared clones.
        self.adjoint()
    }
}
