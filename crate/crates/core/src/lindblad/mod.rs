// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad generators and the exact master-equation backend.
//!
//! A [`LindbladSpec`] is the object every backend consumes: a Hamiltonian as
//! a list of (coefficient, operator) terms plus jump terms (rate, operator,
//! hermitian flag). The generator acts as
//!
//!   L(rho) = -i[H, rho] + sum_i rate_i (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho})
//!
//! For Hermitian jump operators this is unital: L(I) = 0.

pub mod ode;

use ndarray::Array2;

use crate::error::{CoreError, Result};
use crate::tensor::{
    self, boson_position, dagger, dim_cap, fermion_number, frobenius_norm, hermiticity_error,
    identity, jordan_wigner_local, kron, trace, CMat, CVec, DensityMatrix, Factor, LocalOp,
    SpaceLayout, C64,
};

pub use ode::OdeOptions;

/// One Hamiltonian term, coefficient times operator.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub coeff: f64,
    pub op: LocalOp,
}

/// One dissipative channel: rate, jump operator and hermiticity flag.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub rate: f64,
    pub op: LocalOp,
    pub hermitian: bool,
}

/// Lindblad generator tied to a layout.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub layout: SpaceLayout,
    pub hamiltonian: Vec<HamiltonianTerm>,
    pub jumps: Vec<JumpTerm>,
    /// Cached L^dag with matching support, one per jump.
    jump_adjoints: Vec<LocalOp>,
    /// Cached L^dag L with matching support, one per jump.
    jump_grams: Vec<LocalOp>,
}

impl LindbladSpec {
    pub fn new(
        layout: SpaceLayout,
        hamiltonian: Vec<HamiltonianTerm>,
        jumps: Vec<JumpTerm>,
    ) -> Result<Self> {
        let dim = layout.total_dim();
        for term in &hamiltonian {
            if term.op.total_dim() != dim {
                return Err(CoreError::DimMismatch {
                    what: "hamiltonian term",
                    expected: dim,
                    got: term.op.total_dim(),
                });
            }
            if !term.coeff.is_finite() {
                return Err(CoreError::Validation("non-finite coefficient".into()));
            }
        }
        for jump in &jumps {
            if jump.op.total_dim() != dim {
                return Err(CoreError::DimMismatch {
                    what: "jump term",
                    expected: dim,
                    got: jump.op.total_dim(),
                });
            }
            if !(jump.rate.is_finite() && jump.rate >= 0.0) {
                return Err(CoreError::Validation(format!(
                    "jump rate must be finite and >= 0, got {}",
                    jump.rate
                )));
            }
            if jump.hermitian && hermiticity_error(&jump.op.mat) > 1e-12 {
                return Err(CoreError::Validation(
                    "jump operator flagged hermitian deviates from L = L^dag beyond 1e-12".into(),
                ));
            }
        }
        let jump_adjoints: Vec<LocalOp> = jumps.iter().map(|j| j.op.adjoint()).collect();
        let jump_grams: Vec<LocalOp> = jumps
            .iter()
            .zip(jump_adjoints.iter())
            .map(|(j, adj)| j.op.map_mat(|m| adj.mat.dot(m)))
            .collect();
        Ok(LindbladSpec {
            layout,
            hamiltonian,
            jumps,
            jump_adjoints,
            jump_grams,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// All jump operators Hermitian (mixed-unitary samplable).
    pub fn all_jumps_hermitian(&self) -> bool {
        self.jumps.iter().all(|j| j.hermitian)
    }

    /// L(rho), matrix-free over the term structure.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut acc = CMat::zeros(rho.raw_dim());
        let minus_i = C64::new(0.0, -1.0);
        for term in &self.hamiltonian {
            let c = minus_i * C64::new(term.coeff, 0.0);
            let left = term.op.apply_left(rho);
            let right = term.op.apply_right(rho);
            acc.zip_mut_with(&left, |a, &b| *a += c * b);
            acc.zip_mut_with(&right, |a, &b| *a -= c * b);
        }
        for (i, jump) in self.jumps.iter().enumerate() {
            if jump.rate == 0.0 {
                continue;
            }
            let g = C64::new(jump.rate, 0.0);
            let half_g = C64::new(0.5 * jump.rate, 0.0);
            let sandwich = self.jump_adjoints[i].apply_right(&jump.op.apply_left(rho));
            acc.zip_mut_with(&sandwich, |a, &b| *a += g * b);
            let gram_left = self.jump_grams[i].apply_left(rho);
            let gram_right = self.jump_grams[i].apply_right(rho);
            acc.zip_mut_with(&gram_left, |a, &b| *a -= half_g * b);
            acc.zip_mut_with(&gram_right, |a, &b| *a -= half_g * b);
        }
        acc
    }

    /// Adjoint (Heisenberg) generator: L^dag(W) = +i[H, W] + sum rate (L^dag W L - 1/2 {L^dag L, W}).
    pub fn apply_adjoint(&self, w: &CMat) -> CMat {
        let mut acc = CMat::zeros(w.raw_dim());
        let plus_i = C64::new(0.0, 1.0);
        for term in &self.hamiltonian {
            let c = plus_i * C64::new(term.coeff, 0.0);
            let left = term.op.apply_left(w);
            let right = term.op.apply_right(w);
            acc.zip_mut_with(&left, |a, &b| *a += c * b);
            acc.zip_mut_with(&right, |a, &b| *a -= c * b);
        }
        for (i, jump) in self.jumps.iter().enumerate() {
            if jump.rate == 0.0 {
                continue;
            }
            let g = C64::new(jump.rate, 0.0);
            let half_g = C64::new(0.5 * jump.rate, 0.0);
            let sandwich = jump.op.apply_right(&self.jump_adjoints[i].apply_left(w));
            acc.zip_mut_with(&sandwich, |a, &b| *a += g * b);
            let gram_left = self.jump_grams[i].apply_left(w);
            let gram_right = self.jump_grams[i].apply_right(w);
            acc.zip_mut_with(&gram_left, |a, &b| *a -= half_g * b);
            acc.zip_mut_with(&gram_right, |a, &b| *a -= half_g * b);
        }
        acc
    }

    /// Dense Hamiltonian, sum of all terms.
    pub fn hamiltonian_dense(&self) -> Result<CMat> {
        let dim = self.dim();
        let mut h = CMat::zeros((dim, dim));
        for term in &self.hamiltonian {
            let dense = term.op.to_dense(&self.layout)?;
            h.zip_mut_with(&dense, |a, &b| *a += C64::new(term.coeff, 0.0) * b);
        }
        Ok(h)
    }

    /// ||L(I)||_F. Zero for unital generators.
    pub fn unitality_residual(&self) -> f64 {
        frobenius_norm(&self.apply(&identity(self.dim())))
    }

    /// Dense superoperator under the column-stacking convention
    /// vec(A rho B) = (B^T kron A) vec(rho).
    pub fn vectorize(&self) -> Result<CMat> {
        let dim = self.dim();
        let sq = dim.checked_mul(dim).ok_or(CoreError::Capacity {
            what: "vectorize",
            dim: usize::MAX,
            cap: dim_cap(),
        })?;
        if sq > dim_cap() {
            return Err(CoreError::Capacity {
                what: "vectorize",
                dim: sq,
                cap: dim_cap(),
            });
        }
        let id = identity(dim);
        let mut sup = CMat::zeros((sq, sq));
        let minus_i = C64::new(0.0, -1.0);
        let h = self.hamiltonian_dense()?;
        let ht = h.t().to_owned();
        let left = kron(&id, &h)?;
        let right = kron(&ht, &id)?;
        sup.zip_mut_with(&left, |a, &b| *a += minus_i * b);
        sup.zip_mut_with(&right, |a, &b| *a -= minus_i * b);
        for (i, jump) in self.jumps.iter().enumerate() {
            if jump.rate == 0.0 {
                continue;
            }
            let g = C64::new(jump.rate, 0.0);
            let l = jump.op.to_dense(&self.layout)?;
            let gram = self.jump_grams[i].to_dense(&self.layout)?;
            let lconj = l.mapv(|z| z.conj());
            let sandwich = kron(&lconj, &l)?;
            let gram_left = kron(&id, &gram)?;
            let gram_right = kron(&gram.t().to_owned(), &id)?;
            sup.zip_mut_with(&sandwich, |a, &b| *a += g * b);
            sup.zip_mut_with(&gram_left, |a, &b| *a -= C64::new(0.5, 0.0) * g * b);
            sup.zip_mut_with(&gram_right, |a, &b| *a -= C64::new(0.5, 0.0) * g * b);
        }
        Ok(sup)
    }

    /// Eigenvalues of the vectorized generator (small systems only).
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        tensor::linalg::eigvals(&self.vectorize()?)
    }
}

/// Column-stacking vectorization: entry (r, c) lands at index c*dim + r.
pub fn vec_col(m: &CMat) -> CVec {
    let dim = m.nrows();
    CVec::from_shape_fn(dim * dim, |k| m[[k % dim, k / dim]])
}

/// Inverse of [`vec_col`].
pub fn unvec_col(v: &CVec, dim: usize) -> CMat {
    Array2::from_shape_fn((dim, dim), |(r, c)| v[c * dim + r])
}

/// Build a unital Lindbladian from Hermitian jump operators.
///
/// Rejects any jump term whose operator deviates from L = L^dag.
pub fn build_unital(
    layout: SpaceLayout,
    hamiltonian: Vec<HamiltonianTerm>,
    jumps: Vec<(f64, LocalOp)>,
) -> Result<LindbladSpec> {
    let jumps = jumps
        .into_iter()
        .map(|(rate, op)| JumpTerm {
            rate,
            op,
            hermitian: true,
        })
        .collect();
    LindbladSpec::new(layout, hamiltonian, jumps)
}

/// Electron-phonon style model parameters on an open chain.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub l_sites: usize,
    /// Nearest-neighbour hopping J.
    pub hopping: f64,
    /// On-site interaction U (spinful only).
    pub interaction: f64,
    /// Boson frequency per site.
    pub omegas: Vec<f64>,
    /// Coupling g per site.
    pub couplings: Vec<f64>,
    /// Boson truncation (levels per site).
    pub n_boson: usize,
    pub spinful: bool,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_sites == 0 {
            return Err(CoreError::Validation("l_sites must be >= 1".into()));
        }
        if self.omegas.len() != self.l_sites || self.couplings.len() != self.l_sites {
            return Err(CoreError::Validation(format!(
                "omegas/couplings must have one entry per site ({})",
                self.l_sites
            )));
        }
        for v in self
            .omegas
            .iter()
            .chain(self.couplings.iter())
            .chain([self.hopping, self.interaction].iter())
        {
            if !v.is_finite() {
                return Err(CoreError::Validation("non-finite model parameter".into()));
            }
        }
        Ok(())
    }

    /// Number of fermion modes: sites times spin species.
    pub fn n_modes(&self) -> usize {
        self.l_sites * if self.spinful { 2 } else { 1 }
    }

    /// Mode index of (site, spin); spin blocks are contiguous (all up, then
    /// all down) so Jordan–Wigner strings stay in order.
    pub fn mode_index(&self, site: usize, spin: usize) -> usize {
        debug_assert!(spin == 0 || (self.spinful && spin == 1));
        spin * self.l_sites + site
    }
}

/// Layout bookkeeping for the fermion-boson model: fermion modes first,
/// boson sites after.
#[derive(Debug, Clone)]
pub struct ModelLayout {
    pub layout: SpaceLayout,
    pub n_modes: usize,
    pub l_sites: usize,
    pub with_bosons: bool,
}

impl ModelLayout {
    pub fn fermion_factor(&self, mode: usize) -> usize {
        mode
    }

    pub fn boson_factor(&self, site: usize) -> usize {
        debug_assert!(self.with_bosons);
        self.n_modes + site
    }
}

fn fermion_layout(cfg: &ModelConfig) -> Result<SpaceLayout> {
    let spins: &[&str] = if cfg.spinful { &["u", "d"] } else { &[""] };
    let mut factors = Vec::new();
    for (s, tag) in spins.iter().enumerate() {
        for site in 0..cfg.l_sites {
            let _ = s;
            factors.push(Factor::fermion(format!("f{site}{tag}")));
        }
    }
    SpaceLayout::new(factors)
}

pub fn model_layout(cfg: &ModelConfig, with_bosons: bool) -> Result<ModelLayout> {
    cfg.validate()?;
    let mut layout = fermion_layout(cfg)?;
    if with_bosons {
        if cfg.n_boson < 2 {
            return Err(CoreError::Validation(format!(
                "boson truncation must be >= 2, got {}",
                cfg.n_boson
            )));
        }
        layout = layout.extend(
            (0..cfg.l_sites)
                .map(|site| Factor::boson(cfg.n_boson, format!("b{site}")))
                .collect(),
        )?;
    }
    Ok(ModelLayout {
        layout,
        n_modes: cfg.n_modes(),
        l_sites: cfg.l_sites,
        with_bosons,
    })
}

/// Dense hopping + interaction Hamiltonian on the fermionic block:
/// H_F = -J sum_<i,j>,s (c^dag_i,s c_j,s + h.c.) + U sum_i n_i,up n_i,dn.
pub fn fermion_hamiltonian_dense(cfg: &ModelConfig) -> Result<CMat> {
    let layout = fermion_layout(cfg)?;
    let dim = layout.total_dim();
    let mut h = CMat::zeros((dim, dim));
    let spins = if cfg.spinful { 2 } else { 1 };
    for spin in 0..spins {
        for site in 0..cfg.l_sites.saturating_sub(1) {
            let m0 = cfg.mode_index(site, spin);
            let m1 = cfg.mode_index(site + 1, spin);
            let c0 = jordan_wigner_local(&layout, m0)?.to_dense(&layout)?;
            let c1 = jordan_wigner_local(&layout, m1)?.to_dense(&layout)?;
            let hop = dagger(&c0).dot(&c1) + dagger(&c1).dot(&c0);
            h.zip_mut_with(&hop, |a, &b| *a -= C64::new(cfg.hopping, 0.0) * b);
        }
    }
    if cfg.spinful && cfg.interaction != 0.0 {
        for site in 0..cfg.l_sites {
            let nu = number_on_mode(&layout, cfg.mode_index(site, 0))?;
            let nd = number_on_mode(&layout, cfg.mode_index(site, 1))?;
            let prod = nu.dot(&nd);
            h.zip_mut_with(&prod, |a, &b| *a += C64::new(cfg.interaction, 0.0) * b);
        }
    }
    Ok(h)
}

fn number_on_mode(layout: &SpaceLayout, mode: usize) -> Result<CMat> {
    LocalOp::new(layout, vec![mode], fermion_number())?.to_dense(layout)
}

/// Hamiltonian terms of the fermion-boson model: the fermionic block as one
/// local term, then one harmonic term omega q^dag q per boson site.
fn model_hamiltonian_terms(cfg: &ModelConfig, ml: &ModelLayout) -> Result<Vec<HamiltonianTerm>> {
    let hf = fermion_hamiltonian_dense(cfg)?;
    let mut terms = vec![HamiltonianTerm {
        coeff: 1.0,
        op: LocalOp::new(&ml.layout, (0..ml.n_modes).collect(), hf)?,
    }];
    if ml.with_bosons {
        for site in 0..cfg.l_sites {
            let q = tensor::boson_annihilate(cfg.n_boson)?;
            let num = dagger(&q).dot(&q);
            terms.push(HamiltonianTerm {
                coeff: cfg.omegas[site],
                op: LocalOp::new(&ml.layout, vec![ml.boson_factor(site)], num)?,
            });
        }
    }
    Ok(terms)
}

/// Interaction-dephasing Lindbladian of the fermion-boson model:
///
///   L(rho) = -i[H_F + H_Q, rho] + (1/4) sum_j g_j^2 D[x_j (2 n_j - 1)](rho)
///
/// with x_j = (q_j + q_j^dag)/sqrt(2). Spinful models carry one jump per
/// (site, spin) so every dephasing factor squares to the identity.
pub fn build_eph_lindblad(cfg: &ModelConfig) -> Result<LindbladSpec> {
    let ml = model_layout(cfg, true)?;
    let terms = model_hamiltonian_terms(cfg, &ml)?;
    let x = boson_position(cfg.n_boson)?;
    let spins = if cfg.spinful { 2 } else { 1 };
    let mut jumps = Vec::new();
    for spin in 0..spins {
        for site in 0..cfg.l_sites {
            let mode = cfg.mode_index(site, spin);
            // 2n - 1 on the fermion factor; fermion factor index < boson
            // factor index, so it is the first kron slot.
            let sign = {
                let mut m = CMat::zeros((2, 2));
                m[[0, 0]] = C64::new(-1.0, 0.0);
                m[[1, 1]] = C64::new(1.0, 0.0);
                m
            };
            let local = kron(&sign, &x)?;
            jumps.push((
                cfg.couplings[site] * cfg.couplings[site] / 4.0,
                LocalOp::new(
                    &ml.layout,
                    vec![ml.fermion_factor(mode), ml.boson_factor(site)],
                    local,
                )?,
            ));
        }
    }
    build_unital(ml.layout.clone(), terms, jumps)
}

/// Purely fermionic dephasing: L_e(rho) = -i[H_F, rho] + sum_j g_j^2 D[n_j](rho),
/// one jump per fermion mode.
pub fn build_fermion_dephasing(cfg: &ModelConfig) -> Result<LindbladSpec> {
    let ml = model_layout(cfg, false)?;
    let hf = fermion_hamiltonian_dense(cfg)?;
    let terms = vec![HamiltonianTerm {
        coeff: 1.0,
        op: LocalOp::new(&ml.layout, (0..ml.n_modes).collect(), hf)?,
    }];
    let spins = if cfg.spinful { 2 } else { 1 };
    let mut jumps = Vec::new();
    for spin in 0..spins {
        for site in 0..cfg.l_sites {
            let mode = cfg.mode_index(site, spin);
            jumps.push((
                cfg.couplings[site] * cfg.couplings[site],
                LocalOp::new(&ml.layout, vec![mode], fermion_number())?,
            ));
        }
    }
    build_unital(ml.layout.clone(), terms, jumps)
}

/// Fock product state: given per-mode occupations, bosons in vacuum.
pub fn fock_state(ml: &ModelLayout, occupations: &[usize]) -> Result<CVec> {
    if occupations.len() != ml.n_modes {
        return Err(CoreError::DimMismatch {
            what: "fock occupations",
            expected: ml.n_modes,
            got: occupations.len(),
        });
    }
    let mut digits = vec![0usize; ml.layout.num_factors()];
    for (m, &occ) in occupations.iter().enumerate() {
        if occ > 1 {
            return Err(CoreError::Validation(format!(
                "fermion occupation must be 0 or 1, got {occ}"
            )));
        }
        digits[ml.fermion_factor(m)] = occ;
    }
    let idx = ml.layout.basis_index(&digits);
    let mut psi = CVec::zeros(ml.layout.total_dim());
    psi[idx] = C64::new(1.0, 0.0);
    Ok(psi)
}

/// Ground state of H_F restricted to a particle-number (and, when spinful,
/// S_z) sector, tensored with the boson vacuum when bosons are present.
///
/// Degeneracies resolve deterministically to the lowest-index eigenvector.
pub fn ground_state(
    cfg: &ModelConfig,
    ml: &ModelLayout,
    n_particles: usize,
    two_sz: i32,
) -> Result<CVec> {
    let f_layout = fermion_layout(cfg)?;
    let hf = fermion_hamiltonian_dense(cfg)?;
    let dim_f = f_layout.total_dim();
    let n_modes = ml.n_modes;
    // Enumerate the sector basis.
    let mut sector = Vec::new();
    for idx in 0..dim_f {
        let mut total = 0usize;
        let mut sz2 = 0i32;
        for m in 0..n_modes {
            let bit = (idx >> (n_modes - 1 - m)) & 1;
            total += bit;
            if cfg.spinful {
                let spin_up = m < cfg.l_sites;
                sz2 += if bit == 1 {
                    if spin_up {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                };
            }
        }
        if total == n_particles && (!cfg.spinful || sz2 == two_sz) {
            sector.push(idx);
        }
    }
    if sector.is_empty() {
        return Err(CoreError::Validation(format!(
            "empty sector: n = {n_particles}, 2Sz = {two_sz}"
        )));
    }
    let ns = sector.len();
    let mut h_sec = CMat::zeros((ns, ns));
    for (a, &ia) in sector.iter().enumerate() {
        for (b, &ib) in sector.iter().enumerate() {
            h_sec[[a, b]] = hf[[ia, ib]];
        }
    }
    let (_, vecs) = tensor::linalg::eigh(&h_sec)?;
    let mut psi_f = CVec::zeros(dim_f);
    for (a, &ia) in sector.iter().enumerate() {
        psi_f[ia] = vecs[[a, 0]];
    }
    if !ml.with_bosons {
        return Ok(psi_f);
    }
    // Tensor with the boson vacuum: fermion factors are most significant.
    let boson_dim: usize = ml.layout.total_dim() / dim_f;
    let mut psi = CVec::zeros(ml.layout.total_dim());
    for (i, amp) in psi_f.iter().enumerate() {
        psi[i * boson_dim] = *amp;
    }
    Ok(psi)
}

/// rho(t) = exp(t L)(rho0) by adaptive integration of the master equation.
pub fn evolve_exact(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    t: f64,
    opts: &OdeOptions,
) -> Result<DensityMatrix> {
    let states = evolve_exact_grid(spec, rho0, &[t], opts)?;
    Ok(DensityMatrix::from_parts_unchecked(
        spec.layout.clone(),
        states.into_iter().next().expect("one output"),
    ))
}

/// State at each requested time along one integration pass.
pub fn evolve_exact_grid(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<CMat>> {
    if rho0.dim() != spec.dim() {
        return Err(CoreError::DimMismatch {
            what: "evolve_exact initial state",
            expected: spec.dim(),
            got: rho0.dim(),
        });
    }
    for &t in times {
        if t < 0.0 {
            return Err(CoreError::Validation("evolution time must be >= 0".into()));
        }
    }
    let f = |rho: &CMat| spec.apply(rho);
    ode::integrate_grid(&f, &rho0.mat, times, opts)
}

/// Heisenberg evolution W(t) = exp(t L^dag)(W) at each requested time.
pub fn evolve_adjoint_grid(
    spec: &LindbladSpec,
    w0: &CMat,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<CMat>> {
    let f = |w: &CMat| spec.apply_adjoint(w);
    ode::integrate_grid(&f, w0, times, opts)
}
