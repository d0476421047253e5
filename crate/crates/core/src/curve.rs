//! Convex curves represented by curvature as a function of turning angle.
//!
//! A [`CurvatureProfile`] stores `k(θ_i)` on an [`AngleGrid`]. Arclength is
//! recovered from `ds = dθ/k`, so the radius of curvature `ρ = 1/k` carries
//! all metric information: length is `∫ρ dθ`, the tangent is `(cos θ, sin θ)`
//! and positions follow by integrating `ρ·T`.
//!
//! Generators sample at the outward normal angle `ψ = θ − π/2`, where
//! support functions live.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{FlowError, Result};
use crate::grid::{self, AngleGrid};
use crate::point::Point2;
use crate::spectral;

/// Curvature sampled on a periodic turning-angle grid. All samples are
/// finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    grid: AngleGrid,
    k: Vec<f64>,
}

impl CurvatureProfile {
    pub fn new(grid: AngleGrid, k: Vec<f64>) -> Result<Self> {
        if k.len() != grid.n() {
            return Err(FlowError::ShapeMismatch {
                expected: grid.n(),
                got: k.len(),
            });
        }
        if let Some((i, v)) = k.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(FlowError::Domain(format!(
                "curvature must be finite and positive, k[{i}] = {v}"
            )));
        }
        Ok(Self { grid, k })
    }

    /// Samples `k = f(θ)` at the grid nodes.
    pub fn from_fn(grid: AngleGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    #[inline]
    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    #[inline]
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn into_values(self) -> Vec<f64> {
        self.k
    }

    pub fn min_k(&self) -> f64 {
        self.k.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_k(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Radius of curvature `ρ = 1/k` at each node.
    pub fn radius_of_curvature(&self) -> Vec<f64> {
        self.k.iter().map(|k| 1.0 / k).collect()
    }

    /// Largest admissible closure defect, `1e-6·L`.
    pub fn closure_tol(&self) -> f64 {
        1e-6 * length(self)
    }

    fn ensure_closed(&self) -> Result<()> {
        let (dx, dy) = closure_defect(self);
        let tol = self.closure_tol();
        if dx.hypot(dy) > tol {
            return Err(FlowError::NotClosed {
                defect_x: dx,
                defect_y: dy,
                tol,
            });
        }
        Ok(())
    }
}

/// Support-function description of a smooth convex curve:
/// `h(ψ) = a0 + Σ_j (c_j cos jψ + s_j sin jψ)` over harmonics `j ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCoefficients {
    pub a0: f64,
    pub harmonics: Vec<Harmonic>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub j: u32,
    pub c: f64,
    pub s: f64,
}

impl SupportCoefficients {
    pub fn circle(a0: f64) -> Self {
        Self {
            a0,
            harmonics: Vec::new(),
        }
    }

    /// `a0 − Σ (j²−1)·|(c_j, s_j)|`; positive margin guarantees `h + h″ > 0`.
    pub fn convexity_margin(&self) -> f64 {
        self.a0
            - self
                .harmonics
                .iter()
                .map(|h| {
                    let j = h.j as f64;
                    (j * j - 1.0) * h.c.hypot(h.s)
                })
                .sum::<f64>()
    }

    /// Radius of curvature `ρ = h + h″` at normal angle `ψ`.
    pub fn radius_of_curvature(&self, psi: f64) -> f64 {
        self.a0
            + self
                .harmonics
                .iter()
                .map(|h| {
                    let j = h.j as f64;
                    (1.0 - j * j) * (h.c * (j * psi).cos() + h.s * (j * psi).sin())
                })
                .sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0) {
            return Err(FlowError::Domain(format!("a0 must be positive, got {}", self.a0)));
        }
        if let Some(h) = self.harmonics.iter().find(|h| h.j < 2) {
            return Err(FlowError::Domain(format!(
                "harmonic j = {} not allowed (j = 0 is a0, j = 1 is a translation)",
                h.j
            )));
        }
        let margin = self.convexity_margin();
        if !(margin > 0.0) {
            return Err(FlowError::Convexity { margin });
        }
        Ok(())
    }
}

/// Closed polygon with positively oriented convex vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Point2>,
}

impl PolylineCurve {
    pub const MIN_POINTS: usize = 8;

    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(FlowError::Geometry(format!(
                "polyline needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(FlowError::Geometry("non-finite vertex".into()));
        }
        let c = Self { points };
        if !(c.signed_area() > 0.0) {
            return Err(FlowError::Geometry("polyline is not positively oriented".into()));
        }
        let tol = 1e-9 * c.diameter().powi(2);
        let m = c.points.len();
        for i in 0..m {
            let a = c.points[(i + m - 1) % m];
            let b = c.points[i];
            let d = c.points[(i + 1) % m];
            if (b - a).cross(d - b) < -tol {
                return Err(FlowError::Geometry(format!("polyline is not convex at vertex {i}")));
            }
        }
        Ok(c)
    }

    #[inline]
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterator over edges `(p_i, p_{i+1})`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let m = self.points.len();
        (0..m).map(move |i| (self.points[i], self.points[(i + 1) % m]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Shoelace area, positive for counter-clockwise order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Area centroid of the enclosed region.
    pub fn centroid(&self) -> Point2 {
        let o = self.points[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (p, q) = (p - o, q - o);
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        o + Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max(p.distance(*q));
            }
        }
        d
    }

    pub fn translated(&self, by: Point2) -> Self {
        Self {
            points: self.points.iter().map(|p| *p + by).collect(),
        }
    }
}

pub fn circle_profile(r: f64, grid: &AngleGrid) -> Result<CurvatureProfile> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(FlowError::Domain(format!("radius must be positive, got {r}")));
    }
    CurvatureProfile::new(*grid, vec![1.0 / r; grid.n()])
}

/// Ellipse with semi-axes `a ≥ b > 0`; `k = h(ψ)³/(a²b²)` with
/// `h(ψ) = √(a²cos²ψ + b²sin²ψ)`.
pub fn ellipse_profile(a: f64, b: f64, grid: &AngleGrid) -> Result<CurvatureProfile> {
    if !(b > 0.0 && a >= b && a.is_finite()) {
        return Err(FlowError::Domain(format!(
            "ellipse needs a >= b > 0, got a = {a}, b = {b}"
        )));
    }
    let ab2 = (a * b).powi(2);
    CurvatureProfile::from_fn(*grid, |theta| {
        let psi = theta - 0.5 * PI;
        let h = (a * a * psi.cos().powi(2) + b * b * psi.sin().powi(2)).sqrt();
        h.powi(3) / ab2
    })
}

pub fn support_fourier_profile(
    coeffs: &SupportCoefficients,
    grid: &AngleGrid,
) -> Result<CurvatureProfile> {
    coeffs.validate()?;
    CurvatureProfile::from_fn(*grid, |theta| {
        1.0 / coeffs.radius_of_curvature(theta - 0.5 * PI)
    })
}

/// Random smooth convex curve with `a0 = 1` and harmonics `2..=j_max` whose
/// weighted amplitudes `Σ (j²−1)·amp_j` add up to `budget`.
pub fn random_convex_coefficients(seed: u64, budget: f64, j_max: u32) -> Result<SupportCoefficients> {
    if !(0.0..1.0).contains(&budget) {
        return Err(FlowError::Domain(format!(
            "harmonic budget must lie in [0, 1), got {budget}"
        )));
    }
    if j_max < 2 {
        return Err(FlowError::Domain(format!("j_max must be at least 2, got {j_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(u32, f64, f64)> = (2..=j_max)
        .map(|j| (j, rng.gen_range(0.05..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let weighted: f64 = draws
        .iter()
        .map(|&(j, w, _)| (j as f64 * j as f64 - 1.0) * w)
        .sum();
    let harmonics = if budget == 0.0 {
        Vec::new()
    } else {
        draws
            .into_iter()
            .map(|(j, w, phase)| {
                let amp = budget * w / weighted;
                Harmonic {
                    j,
                    c: amp * phase.cos(),
                    s: amp * phase.sin(),
                }
            })
            .collect()
    };
    Ok(SupportCoefficients { a0: 1.0, harmonics })
}

pub fn random_convex_profile(
    seed: u64,
    budget: f64,
    j_max: u32,
    grid: &AngleGrid,
) -> Result<CurvatureProfile> {
    support_fourier_profile(&random_convex_coefficients(seed, budget, j_max)?, grid)
}

/// `L = ∫ dθ/k`.
pub fn length(p: &CurvatureProfile) -> f64 {
    let h = p.grid.spacing();
    h * p.k.iter().map(|k| 1.0 / k).sum::<f64>()
}

/// Nonlocal term `α = (1/2π)∫k dθ = (1/2π)∫k² ds`.
pub fn alpha_of(p: &CurvatureProfile) -> f64 {
    grid::trapezoid(&p.k, p.grid.spacing()) / (2.0 * PI)
}

/// `(∫cos θ/k dθ, ∫sin θ/k dθ)`, the gap between the endpoints of the
/// integrated tangent field.
pub fn closure_defect(p: &CurvatureProfile) -> (f64, f64) {
    let h = p.grid.spacing();
    let (mut x, mut y) = (0.0, 0.0);
    for (theta, k) in p.grid.nodes().zip(&p.k) {
        x += theta.cos() / k;
        y += theta.sin() / k;
    }
    (h * x, h * y)
}

/// Reconstructs the curve with one vertex per grid node, starting at `basepoint`.
pub fn reconstruct(p: &CurvatureProfile, basepoint: Point2) -> Result<PolylineCurve> {
    reconstruct_at(p, p.grid.n(), basepoint)
}

/// Reconstructs the curve at `m ≥ n` equally spaced turning angles.
///
/// Positions are the spectrally exact antiderivative of `ρ(θ)(cos θ, sin θ)`
/// for the band-limited interpolant of the samples, so the vertices lie on
/// the smooth curve rather than on a trapezoid approximation of it.
pub fn reconstruct_at(p: &CurvatureProfile, m: usize, basepoint: Point2) -> Result<PolylineCurve> {
    let n = p.grid.n();
    if m < n {
        return Err(FlowError::Domain(format!(
            "reconstruction size {m} is below the profile resolution {n}"
        )));
    }
    p.ensure_closed()?;
    let h = p.grid.spacing();
    let g: Vec<Complex64> = p
        .k
        .iter()
        .enumerate()
        .map(|(i, k)| Complex64::from_polar(1.0 / k, h * i as f64))
        .collect();
    let g_hat = spectral::forward(&g);

    let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
    for (idx, c) in g_hat.iter().enumerate() {
        let f = spectral::frequency(idx, n);
        // The mean is the closure defect; the Nyquist mode has no unique antiderivative.
        if f == 0 || idx == n / 2 {
            continue;
        }
        let slot = f.rem_euclid(m as i64) as usize;
        coeffs[slot] = c / Complex64::new(0.0, f as f64);
    }
    let offset: Complex64 = coeffs.iter().sum();
    spectral::synthesize(&mut coeffs);
    let points = coeffs
        .iter()
        .map(|z| {
            let z = z - offset;
            Point2::new(basepoint.x + z.re, basepoint.y + z.im)
        })
        .collect();
    PolylineCurve::new(points)
}

/// Enclosed area `A = ½∫(h² − h′²)dψ = π Σ_{j≠±1} |ρ̂_j|²/(1 − j²)`.
pub fn area(p: &CurvatureProfile) -> Result<f64> {
    p.ensure_closed()?;
    let n = p.grid.n();
    let rho_hat = spectral::forward_real(&p.radius_of_curvature());
    let sum: f64 = rho_hat
        .iter()
        .enumerate()
        .filter_map(|(idx, c)| {
            let f = spectral::frequency(idx, n) as f64;
            (f.abs() != 1.0).then(|| c.norm_sqr() / (1.0 - f * f))
        })
        .sum();
    Ok(PI * sum)
}

/// `L² − 4πA` summed mode by mode, `4π² Σ_{|j|≥2} |ρ̂_j|²/(j² − 1)`, which
/// avoids the cancellation of subtracting two nearly equal numbers.
pub fn isoperimetric_deficit(p: &CurvatureProfile) -> Result<f64> {
    p.ensure_closed()?;
    let n = p.grid.n();
    let rho_hat = spectral::forward_real(&p.radius_of_curvature());
    let sum: f64 = rho_hat
        .iter()
        .enumerate()
        .filter_map(|(idx, c)| {
            let f = spectral::frequency(idx, n) as f64;
            (f.abs() >= 2.0).then(|| c.norm_sqr() / (f * f - 1.0))
        })
        .sum();
    Ok(4.0 * PI * PI * sum)
}

/// `∫ log k dθ`.
pub fn entropy(p: &CurvatureProfile) -> f64 {
    p.grid.spacing() * p.k.iter().map(|k| k.ln()).sum::<f64>()
}

/// `∫(k − α)² dθ − ∫(∂_θ k)² dθ`.
pub fn lyapunov(p: &CurvatureProfile) -> f64 {
    let h = p.grid.spacing();
    let alpha = alpha_of(p);
    let mut dk = vec![0.0; p.k.len()];
    grid::d_theta_into(&p.k, h, &mut dk);
    h * p
        .k
        .iter()
        .zip(&dk)
        .map(|(k, d)| (k - alpha).powi(2) - d * d)
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    pub k1_l2: f64,
    pub k2_l2: f64,
    pub k1_l4: f64,
    pub k1_inf: f64,
}

pub fn sobolev_norms(p: &CurvatureProfile) -> SobolevNorms {
    let h = p.grid.spacing();
    let n = p.k.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    grid::d_theta_into(&p.k, h, &mut d1);
    grid::d2_theta_into(&p.k, h, &mut d2);
    SobolevNorms {
        k1_l2: (h * d1.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        k2_l2: (h * d2.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        k1_l4: (h * d1.iter().map(|v| v.powi(4)).sum::<f64>()).powf(0.25),
        k1_inf: d1.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Writes `theta,k` rows.
pub fn write_profile_csv<W: Write>(mut w: W, p: &CurvatureProfile) -> io::Result<()> {
    writeln!(w, "theta,k")?;
    for (theta, k) in p.grid.nodes().zip(&p.k) {
        writeln!(w, "{theta:.16e},{k:.16e}")?;
    }
    Ok(())
}

/// Writes `x,y` rows in orientation order.
pub fn write_polyline_csv<W: Write>(mut w: W, c: &PolylineCurve) -> io::Result<()> {
    writeln!(w, "x,y")?;
    for p in c.points() {
        writeln!(w, "{:.16e},{:.16e}", p.x, p.y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> AngleGrid {
        AngleGrid::new(n).unwrap()
    }

    /// Raw functional input: positivity is all that is checked.
    fn raw(n: usize, f: impl Fn(f64) -> f64) -> CurvatureProfile {
        CurvatureProfile::from_fn(grid(n), f).unwrap()
    }

    /// Composite Simpson rule on `[0, 2π]` with `m` panels, an oracle
    /// independent of the periodic trapezoid rule.
    fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
        let h = 2.0 * PI / m as f64;
        let mut s = f(0.0) + f(2.0 * PI);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn circle_generator() {
        assert!(circle_profile(1.0, &grid(64)).unwrap().k().iter().all(|&k| k == 1.0));
        assert!(circle_profile(2.0, &grid(64)).unwrap().k().iter().all(|&k| k == 0.5));
        assert!(matches!(circle_profile(0.0, &grid(64)), Err(FlowError::Domain(_))));
    }

    #[test]
    fn ellipse_generator_vertices() {
        let g = grid(64);
        let p = ellipse_profile(2.0, 1.0, &g).unwrap();
        // ψ = 0 sits at θ = π/2 (node 16), ψ = π/2 at θ = π (node 32).
        assert!((p.k()[16] - 2.0).abs() < 1e-12);
        assert!((p.k()[32] - 0.25).abs() < 1e-12);
        let e = ellipse_profile(1.5, 1.5, &g).unwrap();
        let c = circle_profile(1.5, &g).unwrap();
        for (a, b) in e.k().iter().zip(c.k()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(ellipse_profile(1.0, 2.0, &g).is_err());
        assert!(ellipse_profile(1.0, 0.0, &g).is_err());
    }

    #[test]
    fn support_fourier_generator() {
        let g = grid(64);
        let circ = support_fourier_profile(&SupportCoefficients::circle(1.0), &g).unwrap();
        assert_eq!(circ, circle_profile(1.0, &g).unwrap());

        let coeffs = SupportCoefficients {
            a0: 1.0,
            harmonics: vec![Harmonic { j: 2, c: 0.1, s: 0.0 }],
        };
        let p = support_fourier_profile(&coeffs, &g).unwrap();
        // ψ = 0 at node 16.
        assert!((p.k()[16] - 1.0 / 0.7).abs() < 1e-12);

        let bad = SupportCoefficients {
            a0: 1.0,
            harmonics: vec![Harmonic { j: 2, c: 0.4, s: 0.0 }],
        };
        match support_fourier_profile(&bad, &g) {
            Err(FlowError::Convexity { margin }) => assert!((margin + 0.2).abs() < 1e-12),
            other => panic!("expected convexity error, got {other:?}"),
        }
        let first = SupportCoefficients {
            a0: 1.0,
            harmonics: vec![Harmonic { j: 1, c: 0.1, s: 0.0 }],
        };
        assert!(support_fourier_profile(&first, &g).is_err());
    }

    #[test]
    fn random_generator_is_deterministic_and_valid() {
        let g = grid(128);
        let a = random_convex_profile(7, 0.5, 5, &g).unwrap();
        let b = random_convex_profile(7, 0.5, 5, &g).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_convex_profile(8, 0.5, 5, &g).unwrap());
        assert!(a.min_k() > 0.0);
        let (dx, dy) = closure_defect(&a);
        assert!(dx.abs() <= 1e-8 && dy.abs() <= 1e-8);
        let coeffs = random_convex_coefficients(7, 0.5, 5).unwrap();
        assert!((coeffs.convexity_margin() - 0.5).abs() < 1e-12);
        assert_eq!(
            random_convex_profile(3, 0.0, 5, &g).unwrap(),
            circle_profile(1.0, &g).unwrap()
        );
        assert!(random_convex_profile(3, 1.0, 5, &g).is_err());
    }

    #[test]
    fn length_values() {
        assert!((length(&circle_profile(2.0, &grid(64)).unwrap()) - 4.0 * PI).abs() < 1e-12);
        // Perimeter of the (2, 1) ellipse from Simpson on the parametric form.
        let oracle = simpson(|t| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(), 20000);
        let l = length(&ellipse_profile(2.0, 1.0, &grid(256)).unwrap());
        assert!((l - oracle).abs() < 1e-4);
        assert!((l - 9.688448).abs() < 1e-4);
        for j in 2..6 {
            let coeffs = SupportCoefficients {
                a0: 1.0,
                harmonics: vec![Harmonic { j, c: 0.02, s: 0.01 }],
            };
            let p = support_fourier_profile(&coeffs, &grid(128)).unwrap();
            assert!((length(&p) - 2.0 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_values() {
        assert!((alpha_of(&circle_profile(2.0, &grid(64)).unwrap()) - 0.5).abs() < 1e-14);
        assert!((alpha_of(&raw(64, |t| 1.0 + 0.3 * t.cos())) - 1.0).abs() < 1e-14);

        // Independent route: ∫k² ds on the reconstructed polygon, k taken
        // from the analytic ellipse at each vertex.
        let p = ellipse_profile(2.0, 1.0, &grid(256)).unwrap();
        let c = reconstruct_at(&p, 4096, Point2::default()).unwrap();
        let center = c.centroid();
        let k_at = |q: Point2| {
            let (x, y) = ((q.x - center.x) / 2.0, q.y - center.y);
            // curvature of (2cos t, sin t): 2 / (4 sin²t + cos²t)^{3/2}
            2.0 / (4.0 * y * y + x * x).powf(1.5)
        };
        let pts = c.points();
        let m = pts.len();
        let mut int = 0.0;
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            int += 0.5 * (k_at(a).powi(2) + k_at(b).powi(2)) * a.distance(b);
        }
        assert!((alpha_of(&p) - int / (2.0 * PI)).abs() < 1e-4);
    }

    #[test]
    fn reconstruct_circle_and_ellipse() {
        let c = reconstruct(&circle_profile(1.0, &grid(64)).unwrap(), Point2::default()).unwrap();
        let top = c.points()[32];
        assert!(top.x.abs() < 1e-10 && (top.y - 2.0).abs() < 1e-10);

        let e = reconstruct(&ellipse_profile(2.0, 1.0, &grid(256)).unwrap(), Point2::default())
            .unwrap();
        let ctr = e.centroid();
        for q in e.points() {
            let r = ((q.x - ctr.x) / 2.0).powi(2) + (q.y - ctr.y).powi(2) - 1.0;
            assert!(r.abs() < 1e-3);
        }
    }

    #[test]
    fn non_closed_profile_is_rejected() {
        let p = raw(128, |t| 1.0 + 0.3 * t.cos());
        let expected = (2.0 * PI / 0.3) * (1.0 - 1.0 / 0.91f64.sqrt());
        match reconstruct(&p, Point2::default()) {
            Err(FlowError::NotClosed { defect_x, .. }) => {
                assert!((defect_x - expected).abs() < 1e-8);
                assert!((defect_x + 1.011).abs() < 1e-3);
            }
            other => panic!("expected NotClosed, got {other:?}"),
        }
        assert!(area(&p).is_err());
    }

    #[test]
    fn closure_defect_values() {
        let (x, y) = closure_defect(&circle_profile(3.0, &grid(64)).unwrap());
        assert!(x.abs() < 1e-12 && y.abs() < 1e-12);
        let (x, y) = closure_defect(&ellipse_profile(2.0, 1.0, &grid(128)).unwrap());
        assert!(x.abs() <= 1e-6 && y.abs() <= 1e-6);
        let (x, _) = closure_defect(&raw(128, |t| 1.0 + 0.3 * t.cos()));
        assert!((x + 1.011).abs() < 1e-3);
    }

    #[test]
    fn area_values() {
        let a = area(&circle_profile(2.0, &grid(256)).unwrap()).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-6);

        // Shoelace on a dense analytic ellipse polygon.
        let m = 200_000;
        let dense: f64 = (0..m)
            .map(|i| {
                let t0 = 2.0 * PI * i as f64 / m as f64;
                let t1 = 2.0 * PI * (i + 1) as f64 / m as f64;
                0.5 * (2.0 * t0.cos() * t1.sin() - 2.0 * t1.cos() * t0.sin())
            })
            .sum();
        let a = area(&ellipse_profile(2.0, 1.0, &grid(256)).unwrap()).unwrap();
        assert!((a - dense).abs() < 1e-4);

        let coeffs = SupportCoefficients {
            a0: 1.0,
            harmonics: vec![Harmonic { j: 2, c: 0.1, s: 0.0 }],
        };
        let p = support_fourier_profile(&coeffs, &grid(128)).unwrap();
        let a = area(&p).unwrap();
        let l = length(&p);
        assert!(a > 0.0 && a <= PI && a < l * l / (4.0 * PI));
    }

    #[test]
    fn area_agrees_with_refined_shoelace() {
        let p = random_convex_profile(11, 0.6, 6, &grid(128)).unwrap();
        let a = area(&p).unwrap();
        let fine = reconstruct_at(&p, 8192, Point2::default()).unwrap().signed_area();
        assert!((a - fine).abs() / a < 1e-6);
        let def = isoperimetric_deficit(&p).unwrap();
        let l = length(&p);
        assert!((def - (l * l - 4.0 * PI * a)).abs() < 1e-10 * l * l);
    }

    #[test]
    fn entropy_values() {
        assert!(entropy(&circle_profile(1.0, &grid(64)).unwrap()).abs() < 1e-14);
        let e = entropy(&circle_profile(2.0, &grid(64)).unwrap());
        assert!((e - 2.0 * PI * 0.5f64.ln()).abs() < 1e-12);
        assert!((e + 4.35517).abs() < 1e-5);

        let eps: f64 = 0.3;
        let p = raw(128, |t| 1.0 / (1.0 - eps * (2.0 * t).cos()));
        let quad = -simpson(|t| (1.0 - eps * (2.0 * t).cos()).ln(), 20000);
        let closed = -2.0 * PI * ((1.0 + (1.0 - eps * eps).sqrt()) / 2.0).ln();
        assert!((quad - closed).abs() < 1e-10);
        assert!((entropy(&p) - closed).abs() < 1e-10);
        assert!(entropy(&p) > 0.0);
    }

    #[test]
    fn lyapunov_values() {
        assert!(lyapunov(&circle_profile(1.7, &grid(64)).unwrap()).abs() < 1e-14);
        let v = lyapunov(&raw(128, |t| 1.0 + 0.1 * (2.0 * t).cos()));
        assert!((v + 0.03 * PI).abs() < 1e-6);

        // Wirtinger equality case: only the fourth-order truncation of the
        // first derivative survives, ∫(0.1 cos)²·(1 − σ²) with σ the stencil
        // symbol (8 sin h − sin 2h)/(6h).
        let g = grid(128);
        let h = g.spacing();
        let sigma = (8.0 * h.sin() - (2.0 * h).sin()) / (6.0 * h);
        let expected = PI * 0.01 * (1.0 - sigma * sigma);
        let v = lyapunov(&raw(128, |t| 1.0 + 0.1 * t.cos()));
        assert!((v - expected).abs() < 1e-13);
        assert!(v.abs() < 1.3e-8);
        assert!(lyapunov(&raw(256, |t| 1.0 + 0.1 * t.cos())).abs() < 1e-9);
    }

    #[test]
    fn sobolev_norm_values() {
        let n = sobolev_norms(&circle_profile(1.0, &grid(64)).unwrap());
        assert!(n.k1_l2 < 1e-12 && n.k2_l2 < 1e-10 && n.k1_l4 < 1e-12 && n.k1_inf < 1e-12);
        let n = sobolev_norms(&raw(256, |t| 1.0 + 0.1 * (2.0 * t).cos()));
        assert!((n.k1_l2 - (PI * 0.04).sqrt()).abs() < 1e-4);
        assert!((n.k2_l2 - (PI * 0.16).sqrt()).abs() < 1e-4);
        assert!((n.k1_inf - 0.2).abs() < 1e-4);
    }

    #[test]
    fn csv_headers() {
        let p = circle_profile(1.0, &grid(16)).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,k\n"));
        assert_eq!(text.lines().count(), 17);

        let c = reconstruct(&p, Point2::default()).unwrap();
        let mut buf = Vec::new();
        write_polyline_csv(&mut buf, &c).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,y\n"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn generated_profiles_close_and_satisfy_isoperimetry(seed in 0u64..10_000, budget in 0.0f64..0.9, j_max in 2u32..8) {
                let p = random_convex_profile(seed, budget, j_max, &grid(128)).unwrap();
                let (dx, dy) = closure_defect(&p);
                prop_assert!(dx.abs() <= 1e-8 && dy.abs() <= 1e-8);
                prop_assert!((length(&p) - 2.0 * PI).abs() < 1e-10);
                let l = length(&p);
                let a = area(&p).unwrap();
                prop_assert!(l * l - 4.0 * PI * a >= -1e-8 * l * l);
            }

            #[test]
            fn wirtinger_without_first_harmonic(seed in 0u64..10_000, budget in 0.0f64..0.9) {
                // k built from even harmonics only has no first harmonic.
                let coeffs = random_convex_coefficients(seed, budget, 6).unwrap();
                let even = SupportCoefficients {
                    a0: 1.0,
                    harmonics: coeffs.harmonics.into_iter().filter(|h| h.j % 2 == 0).collect(),
                };
                let p = support_fourier_profile(&even, &grid(128)).unwrap();
                prop_assert!(lyapunov(&p) <= 1e-8);
            }
        }
    }
}
