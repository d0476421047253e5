//! Per-snapshot functionals, identity and monotonicity checks, and
//! exponential rate fits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::curve::{self, CurvatureProfile};
use crate::error::{FlowError, Result};
use crate::geometry::{self, RadiiPair};
use crate::grid;
use crate::point::Point2;

/// Column order of [`DiagnosticsRecord::csv_row`].
pub const CSV_HEADER: &str = "t,L,A,deficit,alpha,entropy,lyapunov,min_k,max_k,closure_x,closure_y,\
k1_2,k2_2,k1_4,k1_inf,r_in,r_out,bonnesen_gap,gage_gap,barrier";

/// One time-stamped row of monitored functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    /// `L² − 4πA`.
    pub deficit: f64,
    pub alpha: f64,
    pub entropy: f64,
    pub lyapunov: f64,
    pub min_k: f64,
    pub max_k: f64,
    pub closure_defect: (f64, f64),
    pub norm_k1_2: f64,
    pub norm_k2_2: f64,
    pub norm_k1_4: f64,
    pub norm_k1_inf: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub bonnesen_gap: f64,
    pub gage_gap: f64,
    /// `max(1/k) − A/L − 2πt/L`.
    pub barrier: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 20] {
        [
            self.t,
            self.length,
            self.area,
            self.deficit,
            self.alpha,
            self.entropy,
            self.lyapunov,
            self.min_k,
            self.max_k,
            self.closure_defect.0,
            self.closure_defect.1,
            self.norm_k1_2,
            self.norm_k2_2,
            self.norm_k1_4,
            self.norm_k1_inf,
            self.r_in,
            self.r_out,
            self.bonnesen_gap,
            self.gage_gap,
            self.barrier,
        ]
    }

    /// Comma-separated values with 17 significant digits.
    pub fn csv_row(&self) -> String {
        let mut s = String::with_capacity(480);
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{v:.16e}").unwrap();
        }
        s
    }
}

pub fn record(p: &CurvatureProfile, t: f64, radii: &RadiiPair) -> Result<DiagnosticsRecord> {
    let length = curve::length(p);
    let area = curve::area(p)?;
    let deficit = curve::isoperimetric_deficit(p)?;
    let alpha = curve::alpha_of(p);
    let norms = curve::sobolev_norms(p);
    let (min_k, max_k) = (p.min_k(), p.max_k());
    Ok(DiagnosticsRecord {
        t,
        length,
        area,
        deficit,
        alpha,
        entropy: curve::entropy(p),
        lyapunov: curve::lyapunov(p),
        min_k,
        max_k,
        closure_defect: curve::closure_defect(p),
        norm_k1_2: norms.k1_l2,
        norm_k2_2: norms.k2_l2,
        norm_k1_4: norms.k1_l4,
        norm_k1_inf: norms.k1_inf,
        r_in: radii.r_in,
        r_out: radii.r_out,
        bonnesen_gap: geometry::bonnesen_gap_from_deficit(deficit, radii),
        gage_gap: 2.0 * PI * alpha - PI * length / area,
        barrier: 1.0 / min_k - area / length - 2.0 * PI * t / length,
    })
}

/// Reconstructs `p`, measures its radii and builds the record.
pub fn snapshot_record(p: &CurvatureProfile, t: f64, seed: u64) -> Result<DiagnosticsRecord> {
    let c = curve::reconstruct(p, Point2::default())?;
    let radii = geometry::radii(&c, seed)?;
    record(p, t, &radii)
}

/// Tolerances for [`check_step_identities`]. Rate identities are relative
/// to the predicted value, with an absolute floor for quantities that have
/// decayed to rounding level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityTolerances {
    /// Absolute bound on `|dL/dt|`, as a fraction of `L`.
    pub length: f64,
    pub area: f64,
    pub alpha: f64,
    pub lyapunov: f64,
    pub abs_floor: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            length: 1e-6,
            area: 1e-4,
            alpha: 1e-4,
            lyapunov: 1e-4,
            abs_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub measured: f64,
    pub predicted: f64,
    pub residual: f64,
    pub allowed: f64,
}

impl IdentityResidual {
    pub fn passed(&self) -> bool {
        self.residual <= self.allowed
    }

    /// `|measured − predicted| / |predicted|`.
    pub fn relative(&self) -> f64 {
        self.residual / self.predicted.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub t: f64,
    pub length: IdentityResidual,
    pub area: IdentityResidual,
    pub alpha: IdentityResidual,
    pub lyapunov: IdentityResidual,
    /// `Δlyapunov ≥ −tol·Δt`.
    pub lyapunov_monotone: bool,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.lyapunov_monotone
            && [self.length, self.area, self.alpha, self.lyapunov]
                .iter()
                .all(IdentityResidual::passed)
    }
}

/// Predicted `dα/dt = −(1/π)∫k k′² dθ + (1/2π)∫k²(k−α) dθ` on the
/// length-preserving flow.
pub fn alpha_rate(p: &CurvatureProfile) -> f64 {
    let h = p.grid().spacing();
    let k = p.k();
    let alpha = curve::alpha_of(p);
    let mut d1 = vec![0.0; k.len()];
    grid::d_theta_into(k, h, &mut d1);
    let a: f64 = k.iter().zip(&d1).map(|(k, d)| k * d * d).sum();
    let b: f64 = k.iter().map(|k| k * k * (k - alpha)).sum();
    h * (-a / PI + b / (2.0 * PI))
}

/// Predicted `d/dt ∫(k−α)² − (k′)² dθ = 2∫(k − α + k″)²k² dθ`.
pub fn lyapunov_rate(p: &CurvatureProfile) -> f64 {
    let h = p.grid().spacing();
    let k = p.k();
    let alpha = curve::alpha_of(p);
    let mut d2 = vec![0.0; k.len()];
    grid::d2_theta_into(k, h, &mut d2);
    2.0 * h
        * k.iter()
            .zip(&d2)
            .map(|(k, kk)| (k - alpha + kk).powi(2) * k * k)
            .sum::<f64>()
}

/// Compares centered differences between two records against the rate
/// identities of the length-preserving flow, evaluated on the profile at
/// the midpoint time.
pub fn check_step_identities(
    prev: &DiagnosticsRecord,
    next: &DiagnosticsRecord,
    p_mid: &CurvatureProfile,
    tol: &IdentityTolerances,
) -> IdentityReport {
    let dt = next.t - prev.t;
    let rate = |a: f64, b: f64| (b - a) / dt;
    let l_mid = curve::length(p_mid);
    let alpha_mid = curve::alpha_of(p_mid);

    let residual = |name, measured: f64, predicted: f64, rel: f64| IdentityResidual {
        name,
        measured,
        predicted,
        residual: (measured - predicted).abs(),
        allowed: rel * predicted.abs() + tol.abs_floor,
    };

    let dl = rate(prev.length, next.length);
    let length = IdentityResidual {
        name: "dL/dt = 0",
        measured: dl,
        predicted: 0.0,
        residual: dl.abs(),
        allowed: tol.length * l_mid,
    };
    let area = residual(
        "dA/dt = αL − 2π",
        rate(prev.area, next.area),
        alpha_mid * l_mid - 2.0 * PI,
        tol.area,
    );
    let alpha = residual(
        "dα/dt",
        rate(prev.alpha, next.alpha),
        alpha_rate(p_mid),
        tol.alpha,
    );
    let lyapunov = residual(
        "dV/dt = 2∫(k−α+k″)²k²",
        rate(prev.lyapunov, next.lyapunov),
        lyapunov_rate(p_mid),
        tol.lyapunov,
    );
    IdentityReport {
        t: 0.5 * (prev.t + next.t),
        length,
        area,
        alpha,
        lyapunov,
        lyapunov_monotone: next.lyapunov - prev.lyapunov >= -tol.lyapunov * dt,
    }
}

/// Largest observed violations of the monotone quantities along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub entropy_max_increase: f64,
    pub area_max_decrease: f64,
    pub deficit_max_increase: f64,
    /// `max_t barrier(t) − barrier(0)`.
    pub barrier_max_excess: f64,
}

impl MonotonicityReport {
    pub fn passed(&self, slack: f64) -> bool {
        self.entropy_max_increase <= slack
            && self.area_max_decrease <= slack
            && self.deficit_max_increase <= slack
            && self.barrier_max_excess <= slack
    }
}

pub fn check_monotonicity(records: &[DiagnosticsRecord]) -> MonotonicityReport {
    let worst = |f: &dyn Fn(&DiagnosticsRecord, &DiagnosticsRecord) -> f64| {
        records
            .windows(2)
            .map(|w| f(&w[0], &w[1]))
            .fold(0.0, f64::max)
    };
    let barrier0 = records.first().map_or(0.0, |r| r.barrier);
    MonotonicityReport {
        entropy_max_increase: worst(&|a, b| b.entropy - a.entropy),
        area_max_decrease: worst(&|a, b| a.area - b.area),
        deficit_max_increase: worst(&|a, b| b.deficit - a.deficit),
        barrier_max_excess: records
            .iter()
            .map(|r| r.barrier - barrier0)
            .fold(0.0, f64::max),
    }
}

/// Least-squares fit of `log v = log_intercept − rate·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub log_intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

pub fn fit_exponential_rate(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(FlowError::ShapeMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(FlowError::Domain(format!(
            "rate fit needs at least {MIN_FIT_SAMPLES} samples in [{lo}, {hi}], got {}",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(FlowError::Domain(format!(
            "rate fit needs positive values, got {v} at t = {t}"
        )));
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxy += (t - t_mean) * (v.ln() - y_mean);
        sxx += (t - t_mean).powi(2);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let rss: f64 = pts
        .iter()
        .map(|&(t, v)| (v.ln() - intercept - slope * t).powi(2))
        .sum();
    Ok(RateFit {
        rate: -slope,
        log_intercept: intercept,
        residual: (rss / m).sqrt(),
        window,
        samples: pts.len(),
    })
}

/// Samples whose value is above `floor`, last half of them.
pub fn late_window(times: &[f64], values: &[f64], floor: f64) -> (f64, f64) {
    let usable: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > floor)
        .map(|(t, _)| *t)
        .collect();
    match usable.len() {
        0 => (0.0, 0.0),
        n => (usable[n / 2], usable[n - 1]),
    }
}

pub const DEFAULT_FIT_FLOOR: f64 = 1e-12;
