//! Inscribed and circumscribed circles, Hausdorff distance and the
//! convex-curve inequalities monitored along the flow.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{self, CurvatureProfile, PolylineCurve};
use crate::error::{FlowError, Result};
use crate::lp::{self, HalfSpace};
use crate::point::{point_segment_distance, Point2};

/// Shuffle seed used when callers do not supply one.
pub const DEFAULT_SHUFFLE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiiPair {
    pub r_in: f64,
    pub r_out: f64,
    pub in_center: Point2,
    pub out_center: Point2,
}

/// Largest inscribed circle (Chebyshev center) of a convex polygon.
///
/// Solves `max r` s.t. `n_i·x + r ≤ h_i` for every edge, `n_i` the outward
/// unit normal and `h_i` the edge offset.
pub fn inradius(c: &PolylineCurve, seed: u64) -> Result<(f64, Point2)> {
    // Work relative to the centroid so the bounding box is well scaled.
    let origin = c.centroid();
    let bound = 4.0 * c.diameter().max(f64::MIN_POSITIVE);
    let constraints: Vec<HalfSpace> = c
        .edges()
        .filter_map(|(a, b)| {
            let e = b - a;
            let len = e.norm();
            (len > 0.0).then(|| {
                let n = Point2::new(e.y / len, -e.x / len);
                HalfSpace {
                    a: vec![n.x, n.y, 1.0],
                    b: n.dot(a - origin),
                }
            })
        })
        .collect();
    let x = lp::maximize(&constraints, &[0.0, 0.0, 1.0], bound, seed)
        .ok_or_else(|| FlowError::Geometry("inscribed-circle program is infeasible".into()))?;
    if !(x[2] > 0.0) {
        return Err(FlowError::Geometry("polygon has no interior".into()));
    }
    Ok((x[2], origin + Point2::new(x[0], x[1])))
}

#[derive(Debug, Clone, Copy)]
struct Circle {
    center: Point2,
    radius: f64,
}

impl Circle {
    fn contains(&self, p: Point2) -> bool {
        p.distance(self.center) <= self.radius * (1.0 + 1e-12) + 1e-300
    }

    fn from_two(a: Point2, b: Point2) -> Self {
        let center = a.midpoint(b);
        Circle {
            center,
            radius: center.distance(a),
        }
    }

    fn from_three(a: Point2, b: Point2, c: Point2) -> Self {
        let (ba, ca) = (b - a, c - a);
        let d = 2.0 * ba.cross(ca);
        if d.abs() <= 1e-14 * (ba.dot(ba) + ca.dot(ca)) {
            // Collinear: the widest pair decides.
            return [Self::from_two(a, b), Self::from_two(a, c), Self::from_two(b, c)]
                .into_iter()
                .max_by(|u, v| u.radius.total_cmp(&v.radius))
                .unwrap();
        }
        let (b2, c2) = (ba.dot(ba), ca.dot(ca));
        let off = Point2::new(ca.y * b2 - ba.y * c2, ba.x * c2 - ca.x * b2) * (1.0 / d);
        Circle {
            center: a + off,
            radius: off.norm(),
        }
    }
}

/// Smallest circle enclosing the vertices (Welzl, iterative form).
pub fn circumradius(c: &PolylineCurve, seed: u64) -> Result<(f64, Point2)> {
    min_enclosing_circle(c.points(), seed)
}

pub(crate) fn min_enclosing_circle(points: &[Point2], seed: u64) -> Result<(f64, Point2)> {
    if points.len() < 2 {
        return Err(FlowError::Geometry("enclosing circle needs at least 2 points".into()));
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut circ = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if circ.contains(pts[i]) {
            continue;
        }
        circ = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if circ.contains(pts[j]) {
                continue;
            }
            circ = Circle::from_two(pts[i], pts[j]);
            for k in 0..j {
                if !circ.contains(pts[k]) {
                    circ = Circle::from_three(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    Ok((circ.radius, circ.center))
}

pub fn radii(c: &PolylineCurve, seed: u64) -> Result<RadiiPair> {
    let (r_in, in_center) = inradius(c, seed)?;
    let (r_out, out_center) = circumradius(c, seed)?;
    Ok(RadiiPair {
        r_in,
        r_out,
        in_center,
        out_center,
    })
}

/// `(L² − 4πA) − π²(r_out − r_in)²`, non-negative by Bonnesen's inequality.
pub fn bonnesen_gap(length: f64, area: f64, radii: &RadiiPair) -> f64 {
    bonnesen_gap_from_deficit(length * length - 4.0 * PI * area, radii)
}

pub(crate) fn bonnesen_gap_from_deficit(deficit: f64, radii: &RadiiPair) -> f64 {
    deficit - PI * PI * (radii.r_out - radii.r_in).powi(2)
}

/// `∫k² ds − πL/A`, non-negative for closed convex curves (Gage).
pub fn gage_gap(p: &CurvatureProfile) -> Result<f64> {
    let a = curve::area(p)?;
    Ok(2.0 * PI * curve::alpha_of(p) - PI * curve::length(p) / a)
}

/// Largest `b` such that `k > b` on some θ-interval of length `w`.
///
/// The window covers `⌈w/Δθ⌉ + 1` consecutive nodes, i.e. every node of a
/// closed interval spanning at least `w`.
pub fn k_star(p: &CurvatureProfile, w: f64) -> Result<f64> {
    let g = p.grid();
    let h = g.spacing();
    if !(w >= 2.0 * h * (1.0 - 1e-12) && w < 2.0 * PI) {
        return Err(FlowError::Domain(format!(
            "window length must lie in [2Δθ, 2π), got {w}"
        )));
    }
    let n = g.n();
    let span = ((w / h - 1e-9).ceil() as usize + 1).min(n);
    let k = p.k();
    let best = (0..n)
        .map(|start| {
            (0..span)
                .map(|o| k[(start + o) % n])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// `K(w) = 2cos(w/2) / (1 − cos(w/2))` on `(0, π]`.
#[allow(non_snake_case)]
pub fn K_of(w: f64) -> Result<f64> {
    if !(w > 0.0 && w <= PI) {
        return Err(FlowError::Domain(format!("K(w) needs 0 < w <= π, got {w}")));
    }
    let c = (0.5 * w).cos();
    Ok(2.0 * c / (1.0 - c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundCheck {
    /// `k*_w·r_in ≤ 1/(1 − K(w)(r_out/r_in − 1))` holds.
    Pass { lhs: f64, rhs: f64 },
    Violated { lhs: f64, rhs: f64 },
    /// `K(w)(r_out/r_in − 1) ≥ 1`: the bound says nothing.
    Inactive { k_factor: f64 },
}

impl BoundCheck {
    pub fn is_violation(&self) -> bool {
        matches!(self, BoundCheck::Violated { .. })
    }
}

/// Checks the windowed curvature bound on a profile and its reconstruction.
pub fn gage_hamilton_bound_check(
    p: &CurvatureProfile,
    c: &PolylineCurve,
    w: f64,
    seed: u64,
) -> Result<BoundCheck> {
    let r = radii(c, seed)?;
    gage_hamilton_with_radii(p, &r, w)
}

pub(crate) fn gage_hamilton_with_radii(p: &CurvatureProfile, r: &RadiiPair, w: f64) -> Result<BoundCheck> {
    let factor = K_of(w)? * (r.r_out / r.r_in - 1.0);
    if factor >= 1.0 {
        return Ok(BoundCheck::Inactive { k_factor: factor });
    }
    let lhs = k_star(p, w)? * r.r_in;
    let rhs = 1.0 / (1.0 - factor);
    Ok(if lhs <= rhs + 1e-6 {
        BoundCheck::Pass { lhs, rhs }
    } else {
        BoundCheck::Violated { lhs, rhs }
    })
}

/// Symmetric Hausdorff distance between two closed polylines.
pub fn hausdorff_distance(c1: &PolylineCurve, c2: &PolylineCurve) -> f64 {
    directed_hausdorff(c1, c2).max(directed_hausdorff(c2, c1))
}

fn directed_hausdorff(from: &PolylineCurve, to: &PolylineCurve) -> f64 {
    from.points()
        .iter()
        .map(|&p| {
            to.edges()
                .map(|(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{circle_profile, ellipse_profile, reconstruct, CurvatureProfile};
    use crate::grid::AngleGrid;

    fn regular(m: usize, r: f64, phase: f64, center: Point2) -> PolylineCurve {
        PolylineCurve::new(
            (0..m)
                .map(|i| {
                    let t = phase + 2.0 * PI * i as f64 / m as f64;
                    center + Point2::new(r * t.cos(), r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    fn unit_square() -> PolylineCurve {
        let pts = [
            (-0.5, -0.5),
            (0.0, -0.5),
            (0.5, -0.5),
            (0.5, 0.0),
            (0.5, 0.5),
            (0.0, 0.5),
            (-0.5, 0.5),
            (-0.5, 0.0),
        ];
        PolylineCurve::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn square_radii() {
        let sq = unit_square();
        let (r, c) = inradius(&sq, 1).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!(c.norm() < 1e-12);
        let (r, c) = circumradius(&sq, 1).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(c.norm() < 1e-12);
    }

    #[test]
    fn hexagon_apothem() {
        // 8 vertices needed, so subdivide each hexagon edge at its midpoint.
        let hex: Vec<Point2> = (0..6)
            .map(|i| {
                let t = PI / 3.0 * i as f64;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        let pts: Vec<Point2> = (0..6).flat_map(|i| [hex[i], hex[i].midpoint(hex[(i + 1) % 6])]).collect();
        let c = PolylineCurve::new(pts).unwrap();
        let (r, _) = inradius(&c, 9).unwrap();
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructed_curve_radii() {
        let g = AngleGrid::new(256).unwrap();
        let e = reconstruct(&ellipse_profile(2.0, 1.0, &g).unwrap(), Point2::default()).unwrap();
        let r = radii(&e, DEFAULT_SHUFFLE_SEED).unwrap();
        assert!((r.r_in - 1.0).abs() < 2e-3);
        assert!((r.r_out - 2.0).abs() < 2e-3);
        let c = reconstruct(&circle_profile(2.0, &g).unwrap(), Point2::default()).unwrap();
        assert!((circumradius(&c, 4).unwrap().0 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn radii_do_not_depend_on_seed() {
        let g = AngleGrid::new(128).unwrap();
        let p = crate::curve::random_convex_profile(5, 0.6, 5, &g).unwrap();
        let c = reconstruct(&p, Point2::new(3.0, -1.0)).unwrap();
        let a = radii(&c, 1).unwrap();
        for seed in 2..6 {
            let b = radii(&c, seed).unwrap();
            assert!((a.r_in - b.r_in).abs() < 1e-10);
            assert!((a.r_out - b.r_out).abs() < 1e-10);
        }
    }

    #[test]
    fn inscribed_circle_fits_and_enclosing_circle_covers() {
        let g = AngleGrid::new(128).unwrap();
        let p = crate::curve::random_convex_profile(21, 0.7, 6, &g).unwrap();
        let c = reconstruct(&p, Point2::default()).unwrap();
        let r = radii(&c, 0).unwrap();
        assert!(r.r_in <= r.r_out + 1e-9);
        for (a, b) in c.edges() {
            let e = b - a;
            let n = Point2::new(e.y, -e.x) * (1.0 / e.norm());
            assert!(n.dot(r.in_center - a) + r.r_in <= 1e-9);
        }
        for q in c.points() {
            assert!(q.distance(r.out_center) <= r.r_out + 1e-9);
        }
    }

    #[test]
    fn circumradius_needs_two_points() {
        assert!(min_enclosing_circle(&[Point2::default()], 0).is_err());
        let (r, _) = min_enclosing_circle(&[Point2::new(0.0, 0.0), Point2::new(2.0, 0.0)], 0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bonnesen_values() {
        let circle = RadiiPair {
            r_in: 1.0,
            r_out: 1.0,
            in_center: Point2::default(),
            out_center: Point2::default(),
        };
        assert!(bonnesen_gap(2.0 * PI, PI, &circle).abs() < 1e-12);
        // Ellipse (2, 1): L = 9.688448220547676 (perimeter series), A = 2π.
        let ell = RadiiPair {
            r_in: 1.0,
            r_out: 2.0,
            ..circle
        };
        let l = 9.688448220547676f64;
        let gap = bonnesen_gap(l, 2.0 * PI, &ell);
        let expected = l * l - 8.0 * PI * PI - PI * PI;
        assert!((gap - expected).abs() < 1e-12);
        assert!((gap - 5.0396).abs() < 1e-4);
    }

    #[test]
    fn gage_gap_values() {
        let g = AngleGrid::new(256).unwrap();
        assert!(gage_gap(&circle_profile(1.0, &g).unwrap()).unwrap().abs() < 1e-12);
        let e = ellipse_profile(2.0, 1.0, &g).unwrap();
        let expected = 2.0 * PI * crate::curve::alpha_of(&e) - PI * 9.688448220547676 / (2.0 * PI);
        let gap = gage_gap(&e).unwrap();
        assert!(gap > 0.0);
        assert!((gap - expected).abs() < 1e-6);
        let r = crate::curve::random_convex_profile(3, 0.4, 5, &g).unwrap();
        assert!(gage_gap(&r).unwrap() >= -1e-8);
    }

    #[test]
    fn k_star_values() {
        let g = AngleGrid::new(512).unwrap();
        let c = CurvatureProfile::new(g, vec![2.5; 512]).unwrap();
        assert_eq!(k_star(&c, 1.0).unwrap(), 2.5);

        let p = CurvatureProfile::from_fn(g, |t| 1.0 + 0.5 * t.cos()).unwrap();
        // Brute force: slide a continuous window of length π over a fine
        // sampling and take the best window minimum.
        let fine = 20_000;
        let brute = (0..fine)
            .map(|s| {
                let a = 2.0 * PI * s as f64 / fine as f64;
                (0..=200)
                    .map(|o| 1.0 + 0.5 * (a + PI * o as f64 / 200.0).cos())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let ks = k_star(&p, PI).unwrap();
        assert!((ks - brute).abs() <= 2.0 * g.spacing());
        assert!((ks - 1.0).abs() <= 2.0 * g.spacing());

        let full = k_star(&p, 2.0 * PI - g.spacing()).unwrap();
        assert_eq!(full, p.min_k());

        assert!(k_star(&p, 0.5 * g.spacing()).is_err());
        assert!(k_star(&p, 2.0 * PI).is_err());
    }

    #[test]
    fn k_star_is_non_increasing_in_w() {
        let g = AngleGrid::new(128).unwrap();
        let p = crate::curve::random_convex_profile(2, 0.7, 6, &g).unwrap();
        let mut prev = f64::INFINITY;
        for i in 2..127 {
            let v = k_star(&p, i as f64 * g.spacing()).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn k_of_values() {
        assert!(K_of(PI).unwrap().abs() < 1e-15);
        assert!((K_of(PI / 2.0).unwrap() - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(K_of(1e-6).unwrap() > 1e12);
        assert!(K_of(0.0).is_err() && K_of(3.2).is_err());
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let v = K_of(PI * i as f64 / 100.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn gage_hamilton_on_circle_and_ellipse() {
        let g = AngleGrid::new(256).unwrap();
        let p = circle_profile(1.0, &g).unwrap();
        let c = reconstruct(&p, Point2::default()).unwrap();
        match gage_hamilton_bound_check(&p, &c, 1.0, 0).unwrap() {
            BoundCheck::Pass { lhs, rhs } => {
                assert!((lhs - 1.0).abs() < 1e-4 && (rhs - 1.0).abs() < 2e-3 && lhs <= rhs)
            }
            other => panic!("{other:?}"),
        }
        let e = ellipse_profile(3.0, 1.0, &g).unwrap();
        let ce = reconstruct(&e, Point2::default()).unwrap();
        // K(0.3)·(3 − 1) ≫ 1.
        assert!(matches!(
            gage_hamilton_bound_check(&e, &ce, 0.3, 0).unwrap(),
            BoundCheck::Inactive { .. }
        ));
    }

    #[test]
    fn hausdorff_values() {
        let a = regular(720, 1.0, 0.0, Point2::default());
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        let b = regular(720, 1.1, 0.0, Point2::default());
        assert!((hausdorff_distance(&a, &b) - 0.1).abs() < 1e-4);
        let shifted = regular(720, 1.0, 0.0, Point2::new(0.05, 0.0));
        // Brute-force pairwise vertex oracle on denser copies.
        let da = regular(4000, 1.0, 0.0, Point2::default());
        let ds = regular(4000, 1.0, 0.0, Point2::new(0.05, 0.0));
        let one_side = |u: &PolylineCurve, v: &PolylineCurve| {
            u.points()
                .iter()
                .map(|p| v.points().iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let brute = one_side(&da, &ds).max(one_side(&ds, &da));
        let h = hausdorff_distance(&a, &shifted);
        assert!((h - brute).abs() < 1e-4);
        assert!((h - 0.05).abs() < 1e-4);
    }
}
