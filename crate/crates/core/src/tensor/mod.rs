// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex operator algebra over composite Hilbert spaces.
//!
//! Everything downstream (Lindblad generators, channel sampling, the
//! decoupling scheme) is built from the primitives here: Kronecker products,
//! embeddings of site-local operators, truncated boson ladder operators,
//! Jordan–Wigner fermion operators, matrix exponentials, partial traces and
//! distance measures.
//!
//! Conventions (fixed once, used everywhere):
//! - Basis indices decompose big-endian over the factor list: factor 0 is the
//!   most significant digit, i.e. `kron(a, b)` puts `a` on factor 0.
//! - Qubits: |0> = (1,0) with Z|0> = +|0>.
//! - Fermion modes: |0> = unoccupied, c = sigma^- = |0><1| with Jordan–Wigner
//!   Z strings on lower factor indices.

pub mod linalg;
pub mod local;

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub use local::LocalOp;

const DEFAULT_DIM_CAP: usize = 1 << 16;

/// Dense-dimension cap. Read once from `DCUBE_DIM_CAP`, default 2^16.
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("DCUBE_DIM_CAP")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

fn check_cap(what: &'static str, dim: usize) -> Result<()> {
    if dim > dim_cap() {
        Err(CoreError::Capacity {
            what,
            dim,
            cap: dim_cap(),
        })
    } else {
        Ok(())
    }
}

/// Kind of a tensor factor in a [`SpaceLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Qubit,
    FermionMode,
    BosonMode,
}

/// One tensor factor: kind, local dimension and a human-readable tag.
#[derive(Debug, Clone)]
pub struct Factor {
    pub kind: FactorKind,
    pub dim: usize,
    pub label: String,
}

impl Factor {
    pub fn qubit(label: impl Into<String>) -> Self {
        Factor {
            kind: FactorKind::Qubit,
            dim: 2,
            label: label.into(),
        }
    }

    pub fn fermion(label: impl Into<String>) -> Self {
        Factor {
            kind: FactorKind::FermionMode,
            dim: 2,
            label: label.into(),
        }
    }

    pub fn boson(n_levels: usize, label: impl Into<String>) -> Self {
        Factor {
            kind: FactorKind::BosonMode,
            dim: n_levels,
            label: label.into(),
        }
    }
}

/// Ordered list of tensor factors defining index conventions for all
/// operators on the composite space.
#[derive(Debug, Clone)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl SpaceLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut total: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            match f.kind {
                FactorKind::Qubit | FactorKind::FermionMode => {
                    if f.dim != 2 {
                        return Err(CoreError::Validation(format!(
                            "factor {i} ({}) must have local dim 2, got {}",
                            f.label, f.dim
                        )));
                    }
                }
                FactorKind::BosonMode => {
                    if f.dim < 2 {
                        return Err(CoreError::Validation(format!(
                            "boson factor {i} ({}) must have local dim >= 2, got {}",
                            f.label, f.dim
                        )));
                    }
                }
            }
            total = total.checked_mul(f.dim).ok_or(CoreError::Capacity {
                what: "space layout",
                dim: usize::MAX,
                cap: dim_cap(),
            })?;
        }
        check_cap("space layout", total)?;
        Ok(SpaceLayout {
            factors,
            total_dim: total,
        })
    }

    pub fn qubits(n: usize) -> Self {
        SpaceLayout::new((0..n).map(|i| Factor::qubit(format!("q{i}"))).collect())
            .expect("qubit layout")
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &Factor {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Row-major strides: `stride[i]` is the index weight of factor `i`.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.factors.len();
        let mut s = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.factors[i + 1].dim;
        }
        s
    }

    /// Append extra factors, returning a new layout.
    pub fn extend(&self, extra: Vec<Factor>) -> Result<Self> {
        let mut f = self.factors.clone();
        f.extend(extra);
        SpaceLayout::new(f)
    }

    /// Basis index of a product basis state given per-factor digits.
    pub fn basis_index(&self, digits: &[usize]) -> usize {
        let strides = self.strides();
        digits
            .iter()
            .zip(strides.iter())
            .map(|(d, s)| d * s)
            .sum()
    }
}

pub fn identity(dim: usize) -> CMat {
    CMat::eye(dim)
}

pub fn pauli_x() -> CMat {
    ndarray::array![
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    ]
}

pub fn pauli_y() -> CMat {
    ndarray::array![
        [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]
    ]
}

pub fn pauli_z() -> CMat {
    ndarray::array![
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
    ]
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

/// Max elementwise deviation from Hermiticity, max_ij |m_ij - conj(m_ji)|.
pub fn hermiticity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_error(m) <= tol
}

/// Max-norm of U^dag U - I.
pub fn unitarity_error(u: &CMat) -> f64 {
    let p = dagger(u).dot(u);
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            let d = (p[[i, j]] - C64::new(want, 0.0)).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Kronecker product, `a` on the more significant factor.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    let rows = ra.checked_mul(rb).ok_or(CoreError::Capacity {
        what: "kron",
        dim: usize::MAX,
        cap: dim_cap(),
    })?;
    check_cap("kron", rows)?;
    let cols = ca * cb;
    let mut out = CMat::zeros((rows, cols));
    for ia in 0..ra {
        for ja in 0..ca {
            let f = a[[ia, ja]];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[[ia * rb + ib, ja * cb + jb]] = f * b[[ib, jb]];
                }
            }
        }
    }
    Ok(out)
}

/// Embed `op` on factor `factor_index` of `layout`, identity elsewhere.
pub fn embed(op: &CMat, layout: &SpaceLayout, factor_index: usize) -> Result<CMat> {
    if factor_index >= layout.num_factors() {
        return Err(CoreError::IndexOutOfRange {
            what: "embed factor index",
            index: factor_index,
            len: layout.num_factors(),
        });
    }
    let d = layout.factor(factor_index).dim;
    if op.nrows() != d || op.ncols() != d {
        return Err(CoreError::DimMismatch {
            what: "embed operator",
            expected: d,
            got: op.nrows(),
        });
    }
    LocalOp::new(layout, vec![factor_index], op.clone())?.to_dense(layout)
}

/// Truncated boson annihilation operator q, with q[m, m+1] = sqrt(m+1).
pub fn boson_annihilate(n_levels: usize) -> Result<CMat> {
    if n_levels < 2 {
        return Err(CoreError::Validation(format!(
            "boson truncation must be >= 2, got {n_levels}"
        )));
    }
    let mut q = CMat::zeros((n_levels, n_levels));
    for m in 0..n_levels - 1 {
        q[[m, m + 1]] = C64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    Ok(q)
}

/// Truncated boson position operator x = (q + q^dag)/sqrt(2).
pub fn boson_position(n_levels: usize) -> Result<CMat> {
    let q = boson_annihilate(n_levels)?;
    let x = (&q + &dagger(&q)).mapv(|z| z / C64::new(2.0f64.sqrt(), 0.0));
    Ok(x)
}

/// Jordan–Wigner annihilation operator for fermion mode `mode_index`
/// (index among the layout's fermion factors, in layout order).
///
/// c_m = Z x ... x Z x sigma^- x I x ..., with the Z string on all earlier
/// factors. Requires every factor before the target to be a fermion mode so
/// the string stays confined to the fermionic block.
pub fn jordan_wigner(layout: &SpaceLayout, mode_index: usize) -> Result<(CMat, CMat)> {
    let local = jordan_wigner_local(layout, mode_index)?;
    let c = local.to_dense(layout)?;
    let cdag = dagger(&c);
    Ok((c, cdag))
}

/// Jordan–Wigner operator as a [`LocalOp`] on factors `0..=target`.
pub fn jordan_wigner_local(layout: &SpaceLayout, mode_index: usize) -> Result<LocalOp> {
    let fermion_factors: Vec<usize> = (0..layout.num_factors())
        .filter(|&i| layout.factor(i).kind == FactorKind::FermionMode)
        .collect();
    if mode_index >= fermion_factors.len() {
        return Err(CoreError::IndexOutOfRange {
            what: "jordan_wigner mode index",
            index: mode_index,
            len: fermion_factors.len(),
        });
    }
    let target = fermion_factors[mode_index];
    for i in 0..target {
        if layout.factor(i).kind != FactorKind::FermionMode {
            return Err(CoreError::Validation(format!(
                "jordan_wigner: factor {i} before mode {mode_index} is not a fermion mode; \
                 fermionic block must come first"
            )));
        }
    }
    // sigma^- = |0><1| in the |0> = empty convention.
    let mut sm = CMat::zeros((2, 2));
    sm[[0, 1]] = C64::new(1.0, 0.0);
    let mut op = sm;
    for _ in 0..target {
        op = kron(&pauli_z(), &op)?;
    }
    LocalOp::new(layout, (0..=target).collect(), op)
}

/// Number operator n = c^dag c on a single fermion mode: diag(0, 1).
pub fn fermion_number() -> CMat {
    let mut n = CMat::zeros((2, 2));
    n[[1, 1]] = C64::new(1.0, 0.0);
    n
}

const PADE_THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120., 60., 12., 1.],
        5 => &[30240., 15120., 3360., 420., 30., 1.],
        7 => &[17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.],
        9 => &[
            17643225600.,
            8821612800.,
            2075673600.,
            302702400.,
            30270240.,
            2162160.,
            110880.,
            3960.,
            90.,
            1.,
        ],
        13 => &[
            64764752532480000.,
            32382376266240000.,
            7771770303897600.,
            1187353796428800.,
            129060195264000.,
            10559470521600.,
            670442572800.,
            33522128640.,
            1323241920.,
            40840800.,
            960960.,
            16380.,
            182.,
            1.,
        ],
        _ => unreachable!(),
    }
}

fn one_norm(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        if s > worst {
            worst = s;
        }
    }
    worst
}

fn expm_pade(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(CoreError::Numerical {
            what: "matrix_exp",
            diagnostic: format!("input 1-norm not finite: {norm}"),
        });
    }
    let (m, squarings) = PADE_THETA
        .iter()
        .find(|&&(_, theta)| norm <= theta)
        .map(|&(m, _)| (m, 0u32))
        .unwrap_or_else(|| {
            let theta13 = PADE_THETA[4].1;
            let s = (norm / theta13).log2().ceil().max(0.0) as u32;
            (13, s)
        });
    let scale = C64::new(2f64.powi(-(squarings as i32)), 0.0);
    let a_scaled = a.mapv(|z| z * scale);
    let b = pade_coeffs(m);

    // Even/odd polynomial split: exp(A) ~ p(A)/q(A), p = V + U, q = V - U,
    // U = A * sum_k b[2k+1] A^{2k}, V = sum_k b[2k] A^{2k}.
    let a2 = a_scaled.dot(&a_scaled);
    let mut even = CMat::eye(n).mapv(|z| z * C64::new(b[0], 0.0));
    let mut odd = CMat::eye(n).mapv(|z| z * C64::new(b[1], 0.0));
    let mut pow = CMat::eye(n);
    let half = (m - 1) / 2;
    for k in 1..=half {
        pow = pow.dot(&a2);
        even = even + pow.mapv(|z| z * C64::new(b[2 * k], 0.0));
        if 2 * k + 1 <= m {
            odd = odd + pow.mapv(|z| z * C64::new(b[2 * k + 1], 0.0));
        }
    }
    let u = a_scaled.dot(&odd);
    let p = &even + &u;
    let q = &even - &u;
    let mut r = linalg::solve(&q, &p)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::Numerical {
            what: "matrix_exp",
            diagnostic: format!("non-finite result, input 1-norm {norm}"),
        });
    }
    Ok(r)
}

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian inputs go through an eigendecomposition
/// (exactly unitary output for anti-Hermitian generators); everything else
/// uses Pade approximation with scaling and squaring.
pub fn matrix_exp(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(CoreError::DimMismatch {
            what: "matrix_exp",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let tol = 1e-12;
    if is_hermitian(m, tol) {
        let (vals, vecs) = linalg::eigh(m)?;
        return Ok(reconstruct_function(&vals, &vecs, |l| C64::new(l.exp(), 0.0)));
    }
    // Anti-Hermitian: m = i h with h Hermitian.
    let h = m.mapv(|z| z * C64::new(0.0, -1.0));
    if is_hermitian(&h, tol) {
        let (vals, vecs) = linalg::eigh(&h)?;
        return Ok(reconstruct_function(&vals, &vecs, |l| {
            C64::new(0.0, l).exp()
        }));
    }
    expm_pade(m)
}

/// V f(diag) V^dag from a Hermitian eigendecomposition.
fn reconstruct_function(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let n = vals.len();
    let mut scaled = CMat::zeros((n, n));
    for k in 0..n {
        let fk = f(vals[k]);
        for i in 0..n {
            scaled[[i, k]] = vecs[[i, k]] * fk;
        }
    }
    scaled.dot(&dagger(vecs))
}

/// exp(-i h t) for Hermitian h, exactly unitary via eigendecomposition.
pub fn expi_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let (vals, vecs) = linalg::eigh(h)?;
    Ok(reconstruct_function(&vals, &vecs, |l| {
        C64::new(0.0, -l * t).exp()
    }))
}

/// Frobenius norm of a matrix.
pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ||a - b||_F. Zero iff equal.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "frobenius_distance: dimension mismatch");
    let mut s = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        s += (x - y).norm_sqr();
    }
    s.sqrt()
}

/// Trace distance (1/2) ||a - b||_1, the singular values summed.
///
/// Singular values are obtained as sqrt of the eigenvalues of M^dag M.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "trace_distance: dimension mismatch");
    let d = a - b;
    let gram = dagger(&d).dot(&d);
    let (vals, _) = linalg::eigh(&gram).expect("gram eigendecomposition");
    0.5 * vals.iter().map(|&l| l.max(0.0).sqrt()).sum::<f64>()
}

/// Density matrix tied to a layout.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub layout: SpaceLayout,
    pub mat: CMat,
}

impl DensityMatrix {
    /// Construct with trace and Hermiticity validation.
    pub fn new(layout: SpaceLayout, mat: CMat) -> Result<Self> {
        if mat.nrows() != layout.total_dim() || mat.ncols() != layout.total_dim() {
            return Err(CoreError::DimMismatch {
                what: "density matrix",
                expected: layout.total_dim(),
                got: mat.nrows(),
            });
        }
        let tr = trace(&mat);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(CoreError::Validation(format!(
                "density matrix trace {tr} deviates from 1"
            )));
        }
        if hermiticity_error(&mat) > 1e-12 {
            return Err(CoreError::Validation(
                "density matrix is not Hermitian within 1e-12".into(),
            ));
        }
        Ok(DensityMatrix { layout, mat })
    }

    /// Construct without validation (trusted internal paths).
    pub fn from_parts_unchecked(layout: SpaceLayout, mat: CMat) -> Self {
        DensityMatrix { layout, mat }
    }

    /// Pure state |psi><psi|.
    pub fn pure_state(layout: SpaceLayout, psi: &CVec) -> Result<Self> {
        if psi.len() != layout.total_dim() {
            return Err(CoreError::DimMismatch {
                what: "pure state",
                expected: layout.total_dim(),
                got: psi.len(),
            });
        }
        let n = psi.len();
        let mat = CMat::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Ok(DensityMatrix { layout, mat })
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Smallest eigenvalue (positivity check helper).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = linalg::eigh(&self.mat)?;
        Ok(vals.first().copied().unwrap_or(0.0))
    }
}

/// Partial trace keeping the factors in `keep` (original order preserved).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(CoreError::Validation(
            "partial_trace: keep set must be nonempty".into(),
        ));
    }
    let layout = &rho.layout;
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    for &k in &keep_sorted {
        if k >= layout.num_factors() {
            return Err(CoreError::IndexOutOfRange {
                what: "partial_trace keep index",
                index: k,
                len: layout.num_factors(),
            });
        }
    }
    let traced: Vec<usize> = (0..layout.num_factors())
        .filter(|i| !keep_sorted.contains(i))
        .collect();
    let strides = layout.strides();

    let offsets = |set: &[usize]| -> Vec<usize> {
        // All index offsets spanned by the given factor set.
        let mut out = vec![0usize];
        for &f in set {
            let d = layout.factor(f).dim;
            let stride = strides[f];
            let mut next = Vec::with_capacity(out.len() * d);
            for &base in &out {
                for v in 0..d {
                    next.push(base + v * stride);
                }
            }
            out = next;
        }
        out
    };
    let keep_off = offsets(&keep_sorted);
    let tr_off = offsets(&traced);

    let dk = keep_off.len();
    let mut out = CMat::zeros((dk, dk));
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &tr_off {
                acc += rho.mat[[oi + ot, oj + ot]];
            }
            out[[i, j]] = acc;
        }
    }
    let new_layout = SpaceLayout::new(
        keep_sorted
            .iter()
            .map(|&k| layout.factor(k).clone())
            .collect(),
    )?;
    Ok(DensityMatrix {
        layout: new_layout,
        mat: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn random_hermitian(dim: usize, seed: u64) -> CMat {
        use rand::Rng;
        let mut rng = stream_rng(seed, 0);
        let a = CMat::from_shape_fn((dim, dim), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = &a + &dagger(&a);
        h.mapv(|z| z * c(0.5, 0.0))
    }

    pub fn random_density(dim: usize, seed: u64) -> CMat {
        use rand::Rng;
        let mut rng = stream_rng(seed, 1);
        let a = CMat::from_shape_fn((dim, dim), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let p = a.dot(&dagger(&a));
        let tr = trace(&p);
        p.mapv(|z| z / tr)
    }

    #[test]
    fn kron_identity_case() {
        let id2 = identity(2);
        let got = kron(&id2, &id2).unwrap();
        assert_eq!(got, identity(4));
    }

    #[test]
    fn kron_diagonal_structure() {
        let got = kron(&pauli_z(), &identity(2)).unwrap();
        let want = array![
            [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(-1., 0.), c(0., 0.)],
            [c(0., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn kron_bit_flip_on_both_factors() {
        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let mut ket00 = CVec::zeros(4);
        ket00[0] = c(1., 0.);
        let out = xx.dot(&ket00);
        let mut want = CVec::zeros(4);
        want[3] = c(1., 0.);
        assert_eq!(out, want);
    }

    #[test]
    fn embed_on_first_factor() {
        let layout = SpaceLayout::qubits(2);
        let got = embed(&pauli_x(), &layout, 0).unwrap();
        let want = kron(&pauli_x(), &identity(2)).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn embed_identity_is_global_identity() {
        let layout = SpaceLayout::qubits(3);
        let got = embed(&identity(2), &layout, 1).unwrap();
        assert_eq!(got, identity(8));
    }

    #[test]
    fn embed_z_eigenstate_sign() {
        // Z on the last of 3 qubits acting on |001> gives -|001>.
        let layout = SpaceLayout::qubits(3);
        let z2 = embed(&pauli_z(), &layout, 2).unwrap();
        let mut ket = CVec::zeros(8);
        ket[1] = c(1., 0.); // |001>
        let out = z2.dot(&ket);
        assert_eq!(out[1], c(-1., 0.));
    }

    #[test]
    fn embed_factor_index_out_of_range() {
        let layout = SpaceLayout::qubits(2);
        assert!(matches!(
            embed(&pauli_x(), &layout, 2),
            Err(CoreError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn boson_lowest_truncation() {
        let q = boson_annihilate(2).unwrap();
        assert_eq!(q[[0, 1]], c(1., 0.));
        assert_eq!(q[[0, 0]], c(0., 0.));
        assert_eq!(q[[1, 0]], c(0., 0.));
        assert_eq!(q[[1, 1]], c(0., 0.));
    }

    #[test]
    fn boson_number_operator() {
        let nb = 5;
        let q = boson_annihilate(nb).unwrap();
        let n = dagger(&q).dot(&q);
        for m in 0..nb {
            assert_abs_diff_eq!(n[[m, m]].re, m as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn boson_commutator_below_truncation_edge() {
        let nb = 6;
        let q = boson_annihilate(nb).unwrap();
        let comm = q.dot(&dagger(&q)) - dagger(&q).dot(&q);
        for m in 0..nb - 1 {
            assert_abs_diff_eq!(comm[[m, m]].re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn jw_single_mode_is_sigma_minus() {
        let layout = SpaceLayout::new(vec![Factor::fermion("m0")]).unwrap();
        let (cop, _) = jordan_wigner(&layout, 0).unwrap();
        assert_eq!(cop[[0, 1]], c(1., 0.));
        assert_eq!(cop[[1, 0]], c(0., 0.));
    }

    #[test]
    fn jw_car_algebra() {
        let layout =
            SpaceLayout::new(vec![Factor::fermion("m0"), Factor::fermion("m1")]).unwrap();
        let (c0, c0d) = jordan_wigner(&layout, 0).unwrap();
        let (_, c1d) = jordan_wigner(&layout, 1).unwrap();
        let anti = c0.dot(&c0d) + c0d.dot(&c0);
        assert!(frobenius_distance(&anti, &identity(4)) < 1e-14);
        let cross = c0.dot(&c1d) + c1d.dot(&c0);
        assert!(frobenius_norm(&cross) < 1e-14);
        let cc = c0.dot(&c0);
        assert!(frobenius_norm(&cc) < 1e-14);
    }

    #[test]
    fn jw_mode_out_of_range() {
        let layout = SpaceLayout::new(vec![Factor::fermion("m0")]).unwrap();
        assert!(jordan_wigner(&layout, 1).is_err());
    }

    #[test]
    fn exp_zero_is_identity() {
        let z = CMat::zeros((3, 3));
        let e = matrix_exp(&z).unwrap();
        assert!(frobenius_distance(&e, &identity(3)) < 1e-14);
    }

    #[test]
    fn exp_pauli_involution_identity() {
        // exp(-i theta X) = cos(theta) I - i sin(theta) X.
        let theta = 0.3;
        let m = pauli_x().mapv(|z| z * c(0.0, -theta));
        let e = matrix_exp(&m).unwrap();
        let want = identity(2).mapv(|z| z * c(theta.cos(), 0.0))
            + pauli_x().mapv(|z| z * c(0.0, -theta.sin()));
        assert!(frobenius_distance(&e, &want) < 1e-12);
    }

    #[test]
    fn exp_self_inverse_random_hermitian() {
        // Oracle: direct multiplication exp(A) exp(-A) must give I.
        let a = random_hermitian(8, 42);
        let ea = matrix_exp(&a).unwrap();
        let ena = matrix_exp(&a.mapv(|z| -z)).unwrap();
        let prod = ea.dot(&ena);
        assert!(frobenius_distance(&prod, &identity(8)) < 1e-10);
    }

    #[test]
    fn exp_anti_hermitian_is_unitary() {
        let h = random_hermitian(6, 7);
        let m = h.mapv(|z| z * c(0.0, -1.0));
        let u = matrix_exp(&m).unwrap();
        assert!(unitarity_error(&u) <= 1e-10);
    }

    #[test]
    fn exp_pade_general_matrix_vs_hermitian_route() {
        // Non-normal matrix: compare Pade against a scaling-free series.
        let a = array![[c(0.1, 0.2), c(0.3, -0.1)], [c(0.0, 0.05), c(-0.2, 0.1)]];
        let e = matrix_exp(&a).unwrap();
        let mut series = identity(2);
        let mut term = identity(2);
        for k in 1..30 {
            term = term.dot(&a).mapv(|z| z / c(k as f64, 0.0));
            series = series + &term;
        }
        assert!(frobenius_distance(&e, &series) < 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let layout = SpaceLayout::qubits(2);
        let rho_a = random_density(2, 3);
        let rho_b = random_density(2, 4);
        let joint = kron(&rho_a, &rho_b).unwrap();
        let rho = DensityMatrix::from_parts_unchecked(layout, joint);
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!(frobenius_distance(&red.mat, &rho_a) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state_is_maximally_mixed() {
        let layout = SpaceLayout::qubits(2);
        let mut psi = CVec::zeros(4);
        psi[0] = c(1.0 / 2f64.sqrt(), 0.0);
        psi[3] = c(1.0 / 2f64.sqrt(), 0.0);
        let rho = DensityMatrix::pure_state(layout, &psi).unwrap();
        let red = partial_trace(&rho, &[0]).unwrap();
        let want = identity(2).mapv(|z| z * c(0.5, 0.0));
        assert!(frobenius_distance(&red.mat, &want) < 1e-14);
    }

    /// Brute-force partial trace by naive index summation, as an independent
    /// oracle for the stride-based implementation.
    fn brute_force_ptrace(rho: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
        let n = dims.len();
        let digits = |mut idx: usize| -> Vec<usize> {
            let mut d = vec![0usize; n];
            for i in (0..n).rev() {
                d[i] = idx % dims[i];
                idx /= dims[i];
            }
            d
        };
        let dk: usize = keep.iter().map(|&k| dims[k]).product();
        let total: usize = dims.iter().product();
        let mut out = CMat::zeros((dk, dk));
        for r in 0..total {
            for cidx in 0..total {
                let dr = digits(r);
                let dc = digits(cidx);
                if (0..n)
                    .filter(|i| !keep.contains(i))
                    .all(|i| dr[i] == dc[i])
                {
                    let enc = |d: &Vec<usize>| {
                        keep.iter().fold(0usize, |acc, &k| acc * dims[k] + d[k])
                    };
                    out[[enc(&dr), enc(&dc)]] += rho[[r, cidx]];
                }
            }
        }
        out
    }

    #[test]
    fn partial_trace_matches_brute_force_and_preserves_trace() {
        let layout = SpaceLayout::qubits(4);
        let mat = random_density(16, 9);
        let rho = DensityMatrix::from_parts_unchecked(layout, mat.clone());
        for keep in [vec![0], vec![1, 3], vec![0, 2], vec![0, 1, 2, 3]] {
            let red = partial_trace(&rho, &keep).unwrap();
            let oracle = brute_force_ptrace(&mat, &[2, 2, 2, 2], &keep);
            assert!(frobenius_distance(&red.mat, &oracle) < 1e-12);
            assert!((trace(&red.mat) - trace(&mat)).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_empty_keep_rejected() {
        let layout = SpaceLayout::qubits(2);
        let rho = DensityMatrix::from_parts_unchecked(layout, random_density(4, 5));
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn distance_of_equal_matrices_is_zero() {
        let m = random_density(4, 11);
        assert_eq!(frobenius_distance(&m, &m), 0.0);
        assert!(trace_distance(&m, &m) < 1e-12);
    }

    #[test]
    fn trace_distance_orthogonal_states() {
        let mut p0 = CMat::zeros((2, 2));
        p0[[0, 0]] = c(1., 0.);
        let mut p1 = CMat::zeros((2, 2));
        p1[[1, 1]] = c(1., 0.);
        assert_abs_diff_eq!(trace_distance(&p0, &p1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn frobenius_distance_identity_vs_z() {
        assert_abs_diff_eq!(
            frobenius_distance(&identity(2), &pauli_z()),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn embed_commutes_with_kron_composition() {
        // Embedding into a composite equals the kron of embeddings.
        let layout = SpaceLayout::qubits(3);
        let a = random_hermitian(2, 21);
        let lhs = embed(&a, &layout, 1).unwrap();
        let rhs = kron(&identity(2), &kron(&a, &identity(2)).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            worst = worst.max((x - y).norm());
        }
        assert!(worst <= 1e-14);
    }

    #[test]
    fn layout_rejects_bad_dims() {
        assert!(SpaceLayout::new(vec![Factor::boson(1, "b")]).is_err());
        assert!(SpaceLayout::new(vec![Factor {
            kind: FactorKind::Qubit,
            dim: 3,
            label: "q".into()
        }])
        .is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let layout = SpaceLayout::qubits(1);
        let ok = DensityMatrix::new(layout.clone(), random_density(2, 13));
        assert!(ok.is_ok());
        let bad = DensityMatrix::new(layout, identity(2));
        assert!(bad.is_err());
    }
}
