// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Mixed-unitary approximation of unital Lindbladians.
//!
//! The dissipative semigroup exp(t L) generated by Hermitian jumps is
//! approximated by the expectation of stochastic unitaries
//!
//!   U_s = prod_{r=1..R} ( prod_k e^{-i (t/R) h_k} prod_j e^{s_{jr} i sqrt(t/R * rate_j) L_j} )
//!
//! with signs s_{jr} uniform on {-1, +1}. Products apply index 1 first
//! (rightmost factor); within a step the jump factors act before the
//! Hamiltonian factors, exactly as written above.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::lindblad::LindbladSpec;
use crate::rng::stream_rng;
use crate::tensor::{
    dagger, dim_cap, hermiticity_error, identity, kron, matrix_exp, trace, CMat, CVec, LocalOp,
    SpaceLayout, C64,
};

/// Signs s_{jk} in {-1, +1}, shape (jumps, trotter steps).
#[derive(Debug, Clone)]
pub struct SignVector {
    pub entries: Array2<i8>,
}

impl SignVector {
    pub fn constant(n_jumps: usize, r_steps: usize, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        SignVector {
            entries: Array2::from_elem((n_jumps, r_steps), sign),
        }
    }

    /// Draw uniformly; fill order is jump-major within each step so a fixed
    /// seed reproduces the same signs regardless of how they are consumed.
    pub fn sample(n_jumps: usize, r_steps: usize, rng: &mut impl Rng) -> Self {
        let mut entries = Array2::from_elem((n_jumps, r_steps), 1i8);
        for step in 0..r_steps {
            for j in 0..n_jumps {
                entries[[j, step]] = if rng.random::<bool>() { 1 } else { -1 };
            }
        }
        SignVector { entries }
    }

    /// Decode from the bits of `index`, bit (step * n_jumps + j); bit 0 maps
    /// to +1. Used for exhaustive channel sums.
    pub fn from_index(n_jumps: usize, r_steps: usize, index: usize) -> Self {
        let mut entries = Array2::from_elem((n_jumps, r_steps), 1i8);
        for step in 0..r_steps {
            for j in 0..n_jumps {
                let bit = (index >> (step * n_jumps + j)) & 1;
                entries[[j, step]] = if bit == 0 { 1 } else { -1 };
            }
        }
        SignVector { entries }
    }

    pub fn negated(&self) -> Self {
        SignVector {
            entries: self.entries.mapv(|s| -s),
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub samples: Option<Vec<f64>>,
}

/// Mean and std-error (sample stddev / sqrt(n)) from ordered samples.
pub fn estimate_from_samples(values: Vec<f64>, keep: bool) -> ChannelEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    ChannelEstimate {
        mean,
        std_error,
        n_samples: n,
        samples: keep.then_some(values),
    }
}

/// Pure or mixed state with local-operator application fast paths.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(CVec),
    Mixed(CMat),
}

impl QuantumState {
    pub fn apply_unitary(&mut self, u: &LocalOp) {
        match self {
            QuantumState::Pure(psi) => *psi = u.apply_vec(psi),
            QuantumState::Mixed(rho) => *rho = u.conjugate(rho),
        }
    }

    pub fn expectation(&self, op: &LocalOp) -> C64 {
        match self {
            QuantumState::Pure(psi) => {
                let opsi = op.apply_vec(psi);
                psi.iter().zip(opsi.iter()).map(|(a, b)| a.conj() * b).sum()
            }
            QuantumState::Mixed(rho) => trace(&op.apply_left(rho)),
        }
    }

    pub fn density(&self) -> CMat {
        match self {
            QuantumState::Pure(psi) => {
                let n = psi.len();
                CMat::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj())
            }
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }
}

/// Precomputed per-step unitary factors for a (spec, t, R) triple.
pub struct StepFactors {
    /// e^{-i coeff (t/R) op} per Hamiltonian term, declaration order.
    pub h_factors: Vec<LocalOp>,
    /// [e^{+i sqrt(rate t/R) L}, e^{-i sqrt(rate t/R) L}] per jump.
    pub jump_factors: Vec<[LocalOp; 2]>,
}

/// Build the per-step factors. Fails for R = 0 or non-Hermitian jumps.
pub fn step_factors(spec: &LindbladSpec, t: f64, r_steps: usize) -> Result<StepFactors> {
    if r_steps == 0 {
        return Err(CoreError::Validation("trotter step count must be >= 1".into()));
    }
    if t < 0.0 {
        return Err(CoreError::Validation("evolution time must be >= 0".into()));
    }
    let tau = t / r_steps as f64;
    let mut h_factors = Vec::with_capacity(spec.hamiltonian.len());
    for term in &spec.hamiltonian {
        let gen = term.op.mat.mapv(|z| z * C64::new(0.0, -term.coeff * tau));
        h_factors.push(term.op.map_mat(|_| matrix_exp(&gen).expect("hamiltonian factor")));
    }
    let mut jump_factors = Vec::with_capacity(spec.jumps.len());
    for jump in &spec.jumps {
        if !jump.hermitian || hermiticity_error(&jump.op.mat) > 1e-12 {
            return Err(CoreError::Validation(
                "stochastic sampling requires Hermitian jump operators".into(),
            ));
        }
        let angle = (jump.rate * tau).sqrt();
        let plus = jump.op.map_mat(|m| {
            matrix_exp(&m.mapv(|z| z * C64::new(0.0, angle))).expect("jump factor")
        });
        let minus = jump.op.map_mat(|m| {
            matrix_exp(&m.mapv(|z| z * C64::new(0.0, -angle))).expect("jump factor")
        });
        jump_factors.push([plus, minus]);
    }
    Ok(StepFactors {
        h_factors,
        jump_factors,
    })
}

impl StepFactors {
    /// Apply U_s to a state in place.
    pub fn apply(&self, signs: &SignVector, state: &mut QuantumState) {
        let (n_jumps, r_steps) = (signs.entries.nrows(), signs.entries.ncols());
        assert_eq!(n_jumps, self.jump_factors.len());
        for step in 0..r_steps {
            for (j, pair) in self.jump_factors.iter().enumerate() {
                let idx = if signs.entries[[j, step]] > 0 { 0 } else { 1 };
                state.apply_unitary(&pair[idx]);
            }
            for h in &self.h_factors {
                state.apply_unitary(h);
            }
        }
    }

    /// Dense U_s.
    pub fn dense(&self, signs: &SignVector, layout: &SpaceLayout) -> Result<CMat> {
        let dim = layout.total_dim();
        let mut u = identity(dim);
        let (_, r_steps) = (signs.entries.nrows(), signs.entries.ncols());
        for step in 0..r_steps {
            for (j, pair) in self.jump_factors.iter().enumerate() {
                let idx = if signs.entries[[j, step]] > 0 { 0 } else { 1 };
                u = pair[idx].apply_left(&u);
            }
            for h in &self.h_factors {
                u = h.apply_left(&u);
            }
        }
        Ok(u)
    }
}

/// One-step mixed-unitary map for a spec with a single Hermitian jump:
///
///   E(rho) = e^{-iHt} (1/2)(e^{i a L} rho e^{-i a L} + e^{-i a L} rho e^{i a L}) e^{iHt}
///
/// with a = sqrt(rate * t).
pub fn one_step_map(spec: &LindbladSpec, rho: &CMat, t: f64) -> Result<CMat> {
    if spec.jumps.len() != 1 {
        return Err(CoreError::Validation(format!(
            "one_step_map expects exactly one jump operator, got {}",
            spec.jumps.len()
        )));
    }
    let factors = step_factors(spec, t, 1)?;
    let mut acc = CMat::zeros(rho.raw_dim());
    for sign in [1i8, -1] {
        let signs = SignVector::constant(1, 1, sign);
        let mut state = QuantumState::Mixed(rho.clone());
        factors.apply(&signs, &mut state);
        let out = state.density();
        acc.zip_mut_with(&out, |a, &b| *a += C64::new(0.5, 0.0) * b);
    }
    Ok(acc)
}

/// Dense stochastic unitary U_s with the exact product ordering above.
pub fn build_unitary_alg1(
    spec: &LindbladSpec,
    t: f64,
    r_steps: usize,
    signs: &SignVector,
) -> Result<CMat> {
    if signs.entries.nrows() != spec.jumps.len() || signs.entries.ncols() != r_steps {
        return Err(CoreError::DimMismatch {
            what: "sign vector shape",
            expected: spec.jumps.len() * r_steps,
            got: signs.entries.len(),
        });
    }
    let factors = step_factors(spec, t, r_steps)?;
    factors.dense(signs, &spec.layout)
}

/// Monte Carlo estimate of Tr(U_s rho0 U_s^dag O) over M sign draws.
///
/// Sample p draws from the RNG stream (seed, p); results are identical for
/// any thread count.
pub fn run_alg1(
    spec: &LindbladSpec,
    state0: &QuantumState,
    observable: &LocalOp,
    t: f64,
    r_steps: usize,
    m_samples: usize,
    seed: u64,
    keep_samples: bool,
) -> Result<ChannelEstimate> {
    if m_samples == 0 {
        return Err(CoreError::Validation("sample count must be >= 1".into()));
    }
    let factors = step_factors(spec, t, r_steps)?;
    let n_jumps = spec.jumps.len();
    let values: Vec<f64> = (0..m_samples as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream_rng(seed, p);
            let signs = SignVector::sample(n_jumps, r_steps, &mut rng);
            let mut state = state0.clone();
            factors.apply(&signs, &mut state);
            state.expectation(observable).re
        })
        .collect();
    Ok(estimate_from_samples(values, keep_samples))
}

/// Superoperator of the conjugation rho -> U rho U^dag (column stacking).
pub fn unitary_superop(u: &CMat) -> Result<CMat> {
    let uc = u.mapv(|z| z.conj());
    kron(&uc, u)
}

/// Exact convex sum over all 2^(N_L R) sign vectors: the expected channel
/// as a dense superoperator, no sampling.
pub fn averaged_channel_exact(spec: &LindbladSpec, t: f64, r_steps: usize) -> Result<CMat> {
    let n_jumps = spec.jumps.len();
    let bits = n_jumps
        .checked_mul(r_steps)
        .filter(|&b| b < usize::BITS as usize)
        .ok_or(CoreError::Capacity {
            what: "averaged_channel_exact",
            dim: usize::MAX,
            cap: dim_cap(),
        })?;
    let count = 1usize << bits;
    let dim = spec.dim();
    let sq = dim * dim;
    if sq > dim_cap() || count.saturating_mul(sq) > 64 * dim_cap() {
        return Err(CoreError::Capacity {
            what: "averaged_channel_exact",
            dim: count.saturating_mul(sq),
            cap: 64 * dim_cap(),
        });
    }
    let factors = step_factors(spec, t, r_steps)?;
    let weight = C64::new(1.0 / count as f64, 0.0);
    let mut sup = CMat::zeros((sq, sq));
    for idx in 0..count {
        let signs = SignVector::from_index(n_jumps, r_steps, idx);
        let u = factors.dense(&signs, &spec.layout)?;
        let term = unitary_superop(&u)?;
        sup.zip_mut_with(&term, |a, &b| *a += weight * b);
    }
    Ok(sup)
}

/// Hermitian dilation of an arbitrary jump operator.
///
/// L = ell (x) sigma^+ + ell^dag (x) sigma^-, with sigma^+ = |1><0| raising
/// the ancilla out of its initial |0> state. Applying the one-step map to
/// rho (x) |0><0| and tracing the ancilla approximates the general
/// Lindbladian with jump ell to O(t^2).
#[derive(Debug, Clone)]
pub struct AncillaExtension {
    /// System factors plus one ancilla qubit as the last factor.
    pub layout: SpaceLayout,
    /// The Hermitian dilated jump operator on the extended space.
    pub jump: LocalOp,
    pub ancilla_factor: usize,
    system_dim: usize,
}

pub fn ancilla_extend(system: &SpaceLayout, ell: &CMat) -> Result<AncillaExtension> {
    let dim = system.total_dim();
    if ell.nrows() != dim || ell.ncols() != dim {
        return Err(CoreError::DimMismatch {
            what: "ancilla_extend jump",
            expected: dim,
            got: ell.nrows(),
        });
    }
    let layout = system.extend(vec![crate::tensor::Factor::qubit("anc")])?;
    let mut raise = CMat::zeros((2, 2));
    raise[[1, 0]] = C64::new(1.0, 0.0); // sigma^+ = |1><0|
    let lower = dagger(&raise);
    let l = kron(ell, &raise)? + kron(&dagger(ell), &lower)?;
    let jump = LocalOp::full(&layout, l)?;
    Ok(AncillaExtension {
        layout,
        jump,
        ancilla_factor: system.num_factors(),
        system_dim: dim,
    })
}

impl AncillaExtension {
    /// rho_sys (x) |0><0| on the extended space.
    pub fn extend_state(&self, rho_sys: &CMat) -> Result<CMat> {
        let mut anc = CMat::zeros((2, 2));
        anc[[0, 0]] = C64::new(1.0, 0.0);
        kron(rho_sys, &anc)
    }

    /// Trace out the ancilla.
    pub fn reduce(&self, rho_ext: &CMat) -> CMat {
        let d = self.system_dim;
        CMat::from_shape_fn((d, d), |(i, j)| {
            rho_ext[[2 * i, 2 * j]] + rho_ext[[2 * i + 1, 2 * j + 1]]
        })
    }
}

/// Dephasing Lindbladian equivalent to averaging over uniform disorder
/// xi in [a, b] of H(xi) = H0 + xi H1:
///
///   L(rho) = -i[H0 + (a+b)/2 H1, rho] + t (b-a)^2 / 12 D[H1](rho)
pub fn disorder_to_dephasing(
    layout: &SpaceLayout,
    h0: &CMat,
    h1: &CMat,
    a: f64,
    b: f64,
    t: f64,
) -> Result<LindbladSpec> {
    if b <= a {
        return Err(CoreError::Validation(format!(
            "disorder interval must have b > a, got [{a}, {b}]"
        )));
    }
    if hermiticity_error(h0) > 1e-12 || hermiticity_error(h1) > 1e-12 {
        return Err(CoreError::Validation(
            "disorder Hamiltonians must be Hermitian".into(),
        ));
    }
    let rate = t * (b - a) * (b - a) / 12.0;
    let terms = vec![
        crate::lindblad::HamiltonianTerm {
            coeff: 1.0,
            op: LocalOp::full(layout, h0.clone())?,
        },
        crate::lindblad::HamiltonianTerm {
            coeff: 0.5 * (a + b),
            op: LocalOp::full(layout, h1.clone())?,
        },
    ];
    crate::lindblad::build_unital(
        layout.clone(),
        terms,
        vec![(rate, LocalOp::full(layout, h1.clone())?)],
    )
}
