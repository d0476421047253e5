//! FFT helpers for periodic samples on an [`AngleGrid`](crate::grid::AngleGrid).
//!
//! Coefficients are normalized so that `f(θ_i) = Σ_j c_j e^{ijθ_i}` with
//! `j` running over `-n/2 .. n/2`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed frequency stored at FFT index `k` for a transform of length `n`.
#[inline]
pub(crate) fn frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub(crate) fn forward(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

pub(crate) fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&buf)
}

/// Evaluates `Σ c_k e^{ikθ_j}` at the `m` nodes of a uniform grid.
pub(crate) fn synthesize(coeffs: &mut [Complex64]) {
    let m = coeffs.len();
    FftPlanner::new().plan_fft_inverse(m).process(coeffs);
}

/// Trigonometric interpolation of real periodic samples onto `m` uniform
/// nodes. Frequencies at or above either Nyquist limit are dropped.
pub fn resample(values: &[f64], m: usize) -> Vec<f64> {
    let n = values.len();
    let c = forward_real(values);
    let cut = (n.min(m) / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (k, ck) in c.iter().enumerate() {
        let f = frequency(k, n);
        if f.abs() < cut {
            out[f.rem_euclid(m as i64) as usize] = *ck;
        }
    }
    synthesize(&mut out);
    out.iter().map(|z| z.re).collect()
}

/// Magnitudes `|c_j|` of the Fourier coefficients of real samples, `j = 0..=n/2`.
///
/// For `j ≥ 1` the value is doubled so that a pure `A cos(jθ + φ)` reports `A`.
pub fn harmonic_amplitudes(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let c = forward_real(values);
    (0..=n / 2)
        .map(|j| {
            if j == 0 || j == n / 2 {
                c[j].norm()
            } else {
                2.0 * c[j].norm()
            }
        })
        .collect()
}

/// `∫₀^{2π} f(θ) e^{-ijθ} dθ / π` for real samples: the cosine and sine
/// amplitudes `(a_j, b_j)` of harmonic `j`.
pub fn harmonic(values: &[f64], j: usize) -> (f64, f64) {
    let n = values.len();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let t = j as f64 * h * i as f64;
        a += v * t.cos();
        b += v * t.sin();
    }
    let s = 2.0 / n as f64;
    (a * s, b * s)
}
