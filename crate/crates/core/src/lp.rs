//! Seidel's randomized incremental linear programming for small dimension.
//!
//! Maximizes `c·x` subject to `a_i·x ≤ b_i` inside the box `|x_j| ≤ bound`.
//! The box keeps every sub-problem bounded; violated constraints trigger a
//! recursive solve on their boundary hyperplane with one variable eliminated.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HalfSpace {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Returns `None` when the constraints are infeasible inside the box.
pub(crate) fn maximize(constraints: &[HalfSpace], c: &[f64], bound: f64, seed: u64) -> Option<Vec<f64>> {
    let mut order: Vec<HalfSpace> = constraints.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    solve(&order, c, bound)
}

fn violates(h: &HalfSpace, x: &[f64], bound: f64) -> bool {
    let lhs: f64 = h.a.iter().zip(x).map(|(a, x)| a * x).sum();
    let scale = h.b.abs() + h.a.iter().map(|a| a.abs()).sum::<f64>() * bound;
    lhs > h.b + 1e-13 * scale.max(1.0)
}

fn solve(cons: &[HalfSpace], c: &[f64], bound: f64) -> Option<Vec<f64>> {
    let d = c.len();
    if d == 1 {
        return solve_1d(cons, c[0], bound);
    }
    let mut x: Vec<f64> = c.iter().map(|&cj| if cj >= 0.0 { bound } else { -bound }).collect();
    for i in 0..cons.len() {
        if !violates(&cons[i], &x, bound) {
            continue;
        }
        x = solve_on_boundary(&cons[..i], &cons[i], c, bound)?;
    }
    Some(x)
}

/// Optimum over `earlier ∩ {plane.a·x = plane.b}`.
fn solve_on_boundary(earlier: &[HalfSpace], plane: &HalfSpace, c: &[f64], bound: f64) -> Option<Vec<f64>> {
    let d = c.len();
    let (p, ap) = plane
        .a
        .iter()
        .copied()
        .enumerate()
        .max_by(|u, v| u.1.abs().total_cmp(&v.1.abs()))
        .expect("non-empty constraint");
    if ap.abs() < 1e-300 {
        // 0·x ≤ b violated: infeasible.
        return None;
    }
    // x_p = (b − Σ_{j≠p} a_j x_j) / a_p
    let keep: Vec<usize> = (0..d).filter(|&j| j != p).collect();
    let project = |h: &HalfSpace| HalfSpace {
        a: keep.iter().map(|&j| h.a[j] - h.a[p] * plane.a[j] / ap).collect(),
        b: h.b - h.a[p] * plane.b / ap,
    };
    let mut sub: Vec<HalfSpace> = Vec::with_capacity(earlier.len() + 2);
    // The eliminated variable keeps its box.
    for sign in [1.0, -1.0] {
        let mut a = vec![0.0; d];
        a[p] = sign;
        sub.push(project(&HalfSpace { a, b: bound }));
    }
    sub.extend(earlier.iter().map(project));
    let c_sub: Vec<f64> = keep.iter().map(|&j| c[j] - c[p] * plane.a[j] / ap).collect();

    let y = solve(&sub, &c_sub, bound)?;
    let mut x = vec![0.0; d];
    let mut rest = plane.b;
    for (yi, &j) in y.iter().zip(&keep) {
        x[j] = *yi;
        rest -= plane.a[j] * yi;
    }
    x[p] = rest / ap;
    Some(x)
}

fn solve_1d(cons: &[HalfSpace], c: f64, bound: f64) -> Option<Vec<f64>> {
    let (mut lo, mut hi) = (-bound, bound);
    for h in cons {
        let a = h.a[0];
        let tol = 1e-13 * (h.b.abs() + a.abs() * bound).max(1.0);
        if a.abs() <= 1e-300 {
            if h.b < -tol {
                return None;
            }
        } else if a > 0.0 {
            hi = hi.min(h.b / a);
        } else {
            lo = lo.max(h.b / a);
        }
    }
    if lo > hi + 1e-12 * bound.max(1.0) {
        return None;
    }
    let x = if c >= 0.0 { hi.max(lo) } else { lo.min(hi) };
    Some(vec![x])
}
