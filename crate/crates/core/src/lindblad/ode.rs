// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integrator on dense complex matrices.

use crate::error::{CoreError, Result};
use crate::tensor::{frobenius_norm, CMat, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-9,
            rtol: 1e-9,
            max_steps: 50_000_000,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn scaled_add(acc: &mut CMat, m: &CMat, w: f64) {
    if w == 0.0 {
        return;
    }
    let wc = C64::new(w, 0.0);
    acc.zip_mut_with(m, |a, &b| *a += wc * b);
}

/// Integrate dy/dt = f(y) from t=0, returning the state at each requested
/// time. `times` must be ascending and start at a value >= 0.
pub fn integrate_grid(
    f: &dyn Fn(&CMat) -> CMat,
    y0: &CMat,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<CMat>> {
    for w in times.windows(2) {
        if w[1] < w[0] {
            return Err(CoreError::Integration(
                "output times must be ascending".into(),
            ));
        }
    }
    if let Some(&t0) = times.first() {
        if t0 < 0.0 {
            return Err(CoreError::Integration("negative output time".into()));
        }
    }
    let mut outputs = Vec::with_capacity(times.len());
    let mut y = y0.clone();
    let mut t = 0.0f64;
    let t_end = times.last().copied().unwrap_or(0.0);

    // Initial step heuristic.
    let f0 = f(&y);
    let d0 = frobenius_norm(&y).max(1e-8);
    let d1 = frobenius_norm(&f0).max(1e-8);
    let mut dt = (0.01 * d0 / d1).min(if t_end > 0.0 { t_end } else { 1.0 });
    let mut k1 = f0;
    let mut next_out = 0usize;
    let mut steps = 0usize;

    // Emit any outputs at t = 0.
    while next_out < times.len() && times[next_out] <= t {
        outputs.push(y.clone());
        next_out += 1;
    }

    while next_out < times.len() {
        if steps >= opts.max_steps {
            return Err(CoreError::Integration(format!(
                "step budget {} exhausted at t = {t:.6e}",
                opts.max_steps
            )));
        }
        steps += 1;
        let t_target = times[next_out];
        let mut clipped = false;
        let mut h = dt;
        if t + h >= t_target {
            h = t_target - t;
            clipped = true;
        }
        if h < 1e-14 * t_end.max(1.0) {
            // A clipped landing step may legitimately be tiny.
            if clipped {
                outputs.push(y.clone());
                t = t_target;
                next_out += 1;
                k1 = f(&y);
                continue;
            }
            return Err(CoreError::Integration(format!(
                "step size underflow: dt = {h:.3e} at t = {t:.6e}"
            )));
        }

        // Stages.
        let mut ks: Vec<CMat> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for stage in 0..6 {
            let mut arg = y.clone();
            for (j, k) in ks.iter().enumerate() {
                scaled_add(&mut arg, k, h * A[stage][j]);
            }
            ks.push(f(&arg));
        }
        let mut y5 = y.clone();
        let mut err = CMat::zeros(y.raw_dim());
        for (j, k) in ks.iter().enumerate() {
            scaled_add(&mut y5, k, h * B5[j]);
            scaled_add(&mut err, k, h * (B5[j] - B4[j]));
        }

        // Weighted RMS error norm.
        let mut acc = 0.0f64;
        let n = err.len() as f64;
        for ((e, a), b) in err.iter().zip(y.iter()).zip(y5.iter()) {
            let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
            let r = e.norm() / scale;
            acc += r * r;
        }
        let err_norm = (acc / n).sqrt();

        if err_norm <= 1.0 {
            t += h;
            y = y5;
            k1 = ks.pop().expect("stage 7"); // FSAL
            if clipped && (t - t_target).abs() <= 1e-12 * t_end.max(1.0) {
                outputs.push(y.clone());
                next_out += 1;
                while next_out < times.len() && times[next_out] <= t {
                    outputs.push(y.clone());
                    next_out += 1;
                }
            }
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        let grown = h * factor;
        // Keep the pre-clip step size as the baseline when we only shrank to
        // land on an output point.
        dt = if clipped { dt.max(grown) } else { grown };
    }
    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exponential_decay_scalar() {
        // dy/dt = -y, y(0) = 1.
        let y0 = array![[C64::new(1.0, 0.0)]];
        let f = |y: &CMat| y.mapv(|z| -z);
        let out = integrate_grid(&f, &y0, &[0.0, 0.5, 1.0], &OdeOptions::default()).unwrap();
        assert!((out[0][[0, 0]].re - 1.0).abs() < 1e-12);
        assert!((out[1][[0, 0]].re - (-0.5f64).exp()).abs() < 1e-8);
        assert!((out[2][[0, 0]].re - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn oscillator_phase() {
        // dy/dt = i y -> y(t) = e^{it}.
        let y0 = array![[C64::new(1.0, 0.0)]];
        let f = |y: &CMat| y.mapv(|z| C64::new(0.0, 1.0) * z);
        let out = integrate_grid(&f, &y0, &[2.0], &OdeOptions::default()).unwrap();
        let want = C64::new(0.0, 2.0).exp();
        assert!((out[0][[0, 0]] - want).norm() < 1e-8);
    }
}
