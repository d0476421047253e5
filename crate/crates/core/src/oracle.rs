//! Marker-particle solver that moves polygon vertices along their normals.
//! It shares no discretization with [`crate::flow`] and serves as an
//! independent check on it.

use std::f64::consts::PI;

use crate::curve::{self, CurvatureProfile, PolylineCurve};
use crate::error::{FlowError, Result};
use crate::flow::{FlowSpec, Integrator, SolverConfig};
use crate::geometry::hausdorff_distance;
use crate::grid::AngleGrid;
use crate::point::Point2;
use crate::spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerState {
    pub points: PolylineCurve,
    pub t: f64,
}

/// Steps between arclength resamplings in [`evolve_markers`].
pub const RESAMPLE_EVERY: usize = 20;

/// Turning angle at each vertex divided by the mean of its two edges.
pub fn polyline_curvature(c: &PolylineCurve) -> Result<Vec<f64>> {
    let pts = c.points();
    let m = pts.len();
    let tiny = 1e-12 * c.diameter();
    let edges: Vec<Point2> = (0..m).map(|i| pts[(i + 1) % m] - pts[i]).collect();
    if let Some(i) = edges.iter().position(|e| e.norm() < tiny) {
        return Err(FlowError::Geometry(format!("degenerate edge at vertex {i}")));
    }
    Ok((0..m)
        .map(|i| {
            let (a, b) = (edges[(i + m - 1) % m], edges[i]);
            a.cross(b).atan2(a.dot(b)) / (0.5 * (a.norm() + b.norm()))
        })
        .collect())
}

/// Unit inward normals from the bisector of the adjacent edge directions.
fn inward_normals(c: &PolylineCurve) -> Vec<Point2> {
    let pts = c.points();
    let m = pts.len();
    (0..m)
        .map(|i| {
            let a = pts[i] - pts[(i + m - 1) % m];
            let b = pts[(i + 1) % m] - pts[i];
            let t = a * (1.0 / a.norm()) + b * (1.0 / b.norm());
            t.perp() * (1.0 / t.norm())
        })
        .collect()
}

/// Normal speeds at the vertices, with the nonlocal term from polygon sums.
fn vertex_speeds(c: &PolylineCurve, spec: FlowSpec) -> Result<Vec<f64>> {
    let k = polyline_curvature(c)?;
    let pts = c.points();
    let m = pts.len();
    let ds: Vec<f64> = (0..m)
        .map(|i| 0.5 * (pts[i].distance(pts[(i + m - 1) % m]) + pts[i].distance(pts[(i + 1) % m])))
        .collect();
    let perimeter = c.perimeter();
    let alpha = match spec {
        FlowSpec::LengthPreserving => k.iter().zip(&ds).map(|(k, s)| k * k * s).sum::<f64>() / (2.0 * PI),
        FlowSpec::AreaPreserving => 2.0 * PI / perimeter,
        FlowSpec::Shortening => 0.0,
        FlowSpec::PanYang => perimeter / (2.0 * PI),
    };
    Ok(k.iter().map(|&k| spec.speed(k, alpha)).collect())
}

/// Forward Euler: each vertex moves by `dt·F·N`.
pub fn oracle_step(s: &MarkerState, spec: FlowSpec, dt: f64) -> Result<MarkerState> {
    let f = vertex_speeds(&s.points, spec)?;
    let n = inward_normals(&s.points);
    let moved = s
        .points
        .points()
        .iter()
        .zip(f.iter().zip(&n))
        .map(|(p, (f, n))| *p + *n * (dt * f))
        .collect();
    Ok(MarkerState {
        points: PolylineCurve::new(moved)?,
        t: s.t + dt,
    })
}

/// `0.25·h_min²` with `h_min` the shortest edge.
pub fn oracle_dt(c: &PolylineCurve) -> f64 {
    let h = c.edges().map(|(a, b)| a.distance(b)).fold(f64::INFINITY, f64::min);
    0.25 * h * h
}

/// Closed curve through the vertices: cubic Lagrange interpolation in the
/// cumulative chord-length parameter.
struct ChordSpline<'a> {
    pts: &'a [Point2],
    knots: Vec<f64>,
    period: f64,
}

impl<'a> ChordSpline<'a> {
    fn new(pts: &'a [Point2]) -> Self {
        let m = pts.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(0.0);
        for i in 0..m {
            knots.push(knots[i] + pts[i].distance(pts[(i + 1) % m]));
        }
        let period = knots[m];
        knots.pop();
        Self { pts, knots, period }
    }

    /// Parameter of vertex `i`, unwrapped for any integer `i`.
    fn knot(&self, i: i64) -> f64 {
        let m = self.pts.len() as i64;
        let wraps = i.div_euclid(m);
        self.knots[i.rem_euclid(m) as usize] + wraps as f64 * self.period
    }

    fn point(&self, i: i64) -> Point2 {
        self.pts[i.rem_euclid(self.pts.len() as i64) as usize]
    }

    fn eval(&self, s: f64) -> Point2 {
        let m = self.pts.len() as i64;
        let wraps = s.div_euclid(self.period);
        let local = s - wraps * self.period;
        let seg = match self.knots.binary_search_by(|k| k.total_cmp(&local)) {
            Ok(i) => return self.pts[i],
            Err(i) => i as i64 - 1,
        };
        let seg = seg.clamp(0, m - 1);
        let idx = [seg - 1, seg, seg + 1, seg + 2];
        let u = idx.map(|i| self.knot(i));
        let mut out = Point2::default();
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (local - u[b]) / (u[a] - u[b]);
                }
            }
            out = out + self.point(idx[a]) * w;
        }
        out
    }
}

/// Parameter `s > s0` where the chord from `from` reaches length `c`.
fn next_at_chord(sp: &ChordSpline, from: Point2, s0: f64, c: f64) -> f64 {
    let g = |s: f64| sp.eval(s).distance(from) - c;
    // Bracket, then bisect and polish with secant steps.
    let (mut lo, mut hi) = (s0, s0 + c);
    while g(hi) < 0.0 {
        lo = hi;
        hi += 0.5 * c;
    }
    let (mut glo, mut ghi) = (g(lo), g(hi));
    for _ in 0..100 {
        let mid = if ghi != glo { hi - ghi * (hi - lo) / (ghi - glo) } else { 0.5 * (lo + hi) };
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        let gm = g(mid);
        if gm.abs() <= 1e-15 * c || hi - lo <= 1e-15 * sp.period {
            return mid;
        }
        if gm < 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    0.5 * (lo + hi)
}

/// `m` points with equal consecutive chords on the interpolating curve,
/// starting at the first vertex.
pub fn resample_by_arclength(c: &PolylineCurve, m: usize) -> Result<PolylineCurve> {
    if m < 8 {
        return Err(FlowError::Domain(format!("resample needs m ≥ 8, got {m}")));
    }
    let sp = ChordSpline::new(c.points());
    let start = c.points()[0];
    let walk = |chord: f64| {
        let mut s = 0.0;
        let mut p = start;
        let mut out = Vec::with_capacity(m);
        out.push(start);
        for _ in 0..m {
            s = next_at_chord(&sp, p, s, chord);
            p = sp.eval(s);
            out.push(p);
        }
        out.pop();
        (s, out)
    };
    // Parameter reached after m chords is increasing in the chord length;
    // find the chord that closes the chain exactly.
    let target = sp.period;
    let mut lo = 0.5 * target / m as f64;
    let mut hi = target / m as f64;
    while walk(hi).0 < target {
        hi *= 1.05;
    }
    let (mut flo, mut fhi) = (walk(lo).0 - target, walk(hi).0 - target);
    let mut best = hi;
    for _ in 0..200 {
        let mid = if fhi != flo { hi - fhi * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        let fm = walk(mid).0 - target;
        best = mid;
        if fm.abs() <= 1e-14 * target || hi - lo <= 1e-16 * target {
            break;
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    PolylineCurve::new(walk(best).1)
}

/// Steps to `t_target`, resampling every [`RESAMPLE_EVERY`] steps. Returns
/// the final state and the number of steps taken.
pub fn evolve_markers(s: &MarkerState, spec: FlowSpec, t_target: f64) -> Result<(MarkerState, usize)> {
    let m = s.points.len();
    let mut cur = s.clone();
    let mut steps = 0;
    while cur.t < t_target {
        let dt = oracle_dt(&cur.points);
        let last = cur.t + dt >= t_target * (1.0 - 1e-14);
        cur = oracle_step(&cur, spec, if last { t_target - cur.t } else { dt })?;
        if last {
            cur.t = t_target;
        }
        steps += 1;
        if steps % RESAMPLE_EVERY == 0 {
            cur.points = resample_by_arclength(&cur.points, m)?;
        }
    }
    Ok((cur, steps))
}

/// Runs the engine at resolution `n` and the marker solver at `m` vertices
/// from the same initial curve. Returns the Hausdorff distance between the
/// two curves, each centered at its area centroid, at ten equally spaced
/// times in `(0, t_horizon]` plus `t = 0`.
pub fn cross_validate(
    initial: &CurvatureProfile,
    spec: FlowSpec,
    t_horizon: f64,
    n: usize,
    m: usize,
) -> Result<Vec<(f64, f64)>> {
    if m < n {
        return Err(FlowError::Domain(format!("oracle needs m ≥ n, got m={m}, n={n}")));
    }
    let grid = AngleGrid::new(n)?;
    let rho = spectral::resample(&initial.radius_of_curvature(), n);
    let mut engine = CurvatureProfile::new(grid, rho.iter().map(|r| 1.0 / r).collect())?;
    let mut integ = Integrator::new(spec, SolverConfig::default(), &engine)?;
    let c0 = curve::reconstruct_at(&engine, m, Point2::default())?;
    let mut markers = MarkerState {
        points: resample_by_arclength(&c0, m)?,
        t: 0.0,
    };

    let compare = |p: &CurvatureProfile, c: &PolylineCurve| -> Result<f64> {
        let e = curve::reconstruct_at(p, m, Point2::default())?;
        let e = e.translated(-e.centroid());
        let o = c.translated(-c.centroid());
        Ok(hausdorff_distance(&e, &o))
    };

    let samples = 10;
    let mut out = vec![(0.0, compare(&engine, &markers.points)?)];
    let mut t = 0.0;
    for j in 1..=samples {
        let t_next = t_horizon * j as f64 / samples as f64;
        engine = integ
            .advance(&engine, t, t_next)
            .map_err(|f| FlowError::Domain(format!("engine stopped: {}", f.kind.name())))?
            .0;
        markers = evolve_markers(&markers, spec, t_next)?.0;
        t = t_next;
        out.push((t, compare(&engine, &markers.points)?));
    }
    Ok(out)
}
