//! Uniform periodic grid on `[0, 2π)` with fourth-order finite differences
//! and trapezoid quadrature.

use std::f64::consts::PI;

use crate::error::{FlowError, Result};

/// Uniform grid of turning angles `θ_i = 2πi/n`, right endpoint excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    n: usize,
}

impl AngleGrid {
    pub const MIN_NODES: usize = 16;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_NODES || n % 2 != 0 {
            return Err(FlowError::Domain(format!(
                "grid size must be even and at least {}, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n {
            return Err(FlowError::ShapeMismatch {
                expected: self.n,
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// Fourth-order centered periodic first derivative.
pub fn d_theta(values: &[f64], grid: &AngleGrid) -> Result<Vec<f64>> {
    grid.check(values)?;
    let mut out = vec![0.0; grid.n];
    d_theta_into(values, grid.spacing(), &mut out);
    Ok(out)
}

/// Fourth-order centered periodic second derivative.
pub fn d2_theta(values: &[f64], grid: &AngleGrid) -> Result<Vec<f64>> {
    grid.check(values)?;
    let mut out = vec![0.0; grid.n];
    d2_theta_into(values, grid.spacing(), &mut out);
    Ok(out)
}

/// Periodic trapezoid rule `Δθ·Σ v_i`.
pub fn integrate(values: &[f64], grid: &AngleGrid) -> Result<f64> {
    grid.check(values)?;
    Ok(trapezoid(values, grid.spacing()))
}

// Unchecked kernels used in the solver hot loop. Callers guarantee
// `out.len() == values.len() >= 4`.

pub(crate) fn d_theta_into(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    let scale = 1.0 / (12.0 * h);
    for i in 0..n {
        let m2 = values[(i + n - 2) % n];
        let m1 = values[(i + n - 1) % n];
        let p1 = values[(i + 1) % n];
        let p2 = values[(i + 2) % n];
        out[i] = (8.0 * (p1 - m1) - (p2 - m2)) * scale;
    }
}

pub(crate) fn d2_theta_into(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    let scale = 1.0 / (12.0 * h * h);
    for i in 0..n {
        let m2 = values[(i + n - 2) % n];
        let m1 = values[(i + n - 1) % n];
        let c = values[i];
        let p1 = values[(i + 1) % n];
        let p2 = values[(i + 2) % n];
        out[i] = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * c) * scale;
    }
}

#[inline]
pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    h * values.iter().sum::<f64>()
}
