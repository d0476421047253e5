//! Time integration of `k_t = k²(∂²_θF + F)` for the supported normal speeds.

use std::f64::consts::PI;

use crate::curve::{self, CurvatureProfile};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{FlowError, Result};
use crate::geometry::DEFAULT_SHUFFLE_SEED;
use crate::grid;

/// Normal speed `F` and its nonlocal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowSpec {
    /// `F = k − α`, `α = (1/2π)∫k dθ`. Length is conserved.
    LengthPreserving,
    /// `F = k − 2π/L`. Area is conserved.
    AreaPreserving,
    /// `F = k`.
    Shortening,
    /// `F = L/2π − 1/k`. Length is conserved.
    PanYang,
}

impl FlowSpec {
    pub const ALL: [FlowSpec; 4] = [
        FlowSpec::LengthPreserving,
        FlowSpec::AreaPreserving,
        FlowSpec::Shortening,
        FlowSpec::PanYang,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowSpec::LengthPreserving => "length_preserving",
            FlowSpec::AreaPreserving => "area_preserving",
            FlowSpec::Shortening => "shortening",
            FlowSpec::PanYang => "pan_yang",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Nonlocal term for curvature samples with grid spacing `h`.
    fn nonlocal(self, k: &[f64], h: f64) -> f64 {
        match self {
            FlowSpec::LengthPreserving => k.iter().sum::<f64>() / k.len() as f64,
            FlowSpec::AreaPreserving => 2.0 * PI / (h * k.iter().map(|k| 1.0 / k).sum::<f64>()),
            FlowSpec::Shortening => 0.0,
            FlowSpec::PanYang => h * k.iter().map(|k| 1.0 / k).sum::<f64>() / (2.0 * PI),
        }
    }

    pub(crate) fn speed(self, k: f64, alpha: f64) -> f64 {
        match self {
            FlowSpec::PanYang => alpha - 1.0 / k,
            FlowSpec::Shortening => k,
            _ => k - alpha,
        }
    }

    /// `∂F/∂k`.
    fn speed_slope(self, k: f64) -> f64 {
        match self {
            FlowSpec::PanYang => 1.0 / (k * k),
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Classical RK4 with the nonlocal term recomputed at every stage.
    ExplicitRk4,
    /// Linearly implicit in the diffusion `k²F′(k)∂²_θ`, explicit elsewhere.
    Imex,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ExplicitRk4 => "explicit_rk4",
            Scheme::Imex => "imex",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Scheme::ExplicitRk4, Scheme::Imex].into_iter().find(|x| x.name() == s)
    }
}

/// Returns `(F, α)` on the grid. For [`FlowSpec::PanYang`] the second value
/// is `L/2π`; for [`FlowSpec::Shortening`] it is zero.
pub fn normal_speed(spec: FlowSpec, p: &CurvatureProfile) -> (Vec<f64>, f64) {
    let alpha = spec.nonlocal(p.k(), p.grid().spacing());
    (p.k().iter().map(|&k| spec.speed(k, alpha)).collect(), alpha)
}

/// `k²(∂²_θF + F)`.
pub fn rhs(spec: FlowSpec, p: &CurvatureProfile) -> Vec<f64> {
    let mut ws = Workspace::new(p.k().len());
    let mut out = vec![0.0; p.k().len()];
    ws.rho_rate(spec, &p.radius_of_curvature(), p.grid().spacing(), &mut out);
    out.iter().zip(p.k()).map(|(r, k)| -r * k * k).collect()
}

/// Explicit step size `cfl·Δθ²/max k²`.
pub fn cfl_dt(p: &CurvatureProfile, cfl: f64) -> f64 {
    let h = p.grid().spacing();
    cfl * h * h / p.max_k().powi(2)
}

/// IMEX step size `cfl·Δθ/max k²`.
pub fn imex_dt(p: &CurvatureProfile, cfl: f64) -> f64 {
    cfl * p.grid().spacing() / p.max_k().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Completed,
    ConvexityLost,
    Blowup,
    NumericalFailure,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::ConvexityLost => "convexity_lost",
            Termination::Blowup => "blowup",
            Termination::NumericalFailure => "numerical_failure",
        }
    }
}

/// A failed step together with the raw state it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub kind: Termination,
    pub state: Vec<f64>,
}

/// Admissible curvature range. Leaving it ends a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBounds {
    pub floor: f64,
    pub ceiling: f64,
}

impl CurvatureBounds {
    /// `[1e-4, 1e4]` times the mean curvature `2π/L` of `p`.
    pub fn for_profile(p: &CurvatureProfile) -> Self {
        let k_mean = 2.0 * PI / curve::length(p);
        Self {
            floor: 1e-4 * k_mean,
            ceiling: 1e4 * k_mean,
        }
    }

    fn classify(&self, k: &[f64]) -> Option<Termination> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in k {
            if !v.is_finite() {
                return Some(Termination::NumericalFailure);
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo < self.floor {
            Some(Termination::ConvexityLost)
        } else if hi > self.ceiling {
            Some(Termination::Blowup)
        } else {
            None
        }
    }
}

/// Scratch buffers shared by the steppers. The state is advanced in
/// `ρ = 1/k`, where `ρ_t = −(∂²_θF + F)`: length `∫ρ dθ` is then a linear
/// invariant and is kept to rounding by any Runge-Kutta method.
struct Workspace {
    k: Vec<f64>,
    f: Vec<f64>,
    d2: Vec<f64>,
    stage: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    r3: Vec<f64>,
    r4: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: vec![0.0; n],
            f: vec![0.0; n],
            d2: vec![0.0; n],
            stage: vec![0.0; n],
            r1: vec![0.0; n],
            r2: vec![0.0; n],
            r3: vec![0.0; n],
            r4: vec![0.0; n],
        }
    }

    /// `ρ_t` into `out`; leaves `k = 1/ρ` in `self.k`.
    fn rho_rate(&mut self, spec: FlowSpec, rho: &[f64], h: f64, out: &mut [f64]) {
        for (k, r) in self.k.iter_mut().zip(rho) {
            *k = 1.0 / r;
        }
        let alpha = spec.nonlocal(&self.k, h);
        for (f, &k) in self.f.iter_mut().zip(&self.k) {
            *f = spec.speed(k, alpha);
        }
        grid::d2_theta_into(&self.f, h, &mut self.d2);
        for i in 0..rho.len() {
            out[i] = -(self.d2[i] + self.f[i]);
        }
    }

    fn rk4(&mut self, spec: FlowSpec, rho: &[f64], h: f64, dt: f64) -> Vec<f64> {
        let n = rho.len();
        let mut r1 = std::mem::take(&mut self.r1);
        let mut r2 = std::mem::take(&mut self.r2);
        let mut r3 = std::mem::take(&mut self.r3);
        let mut r4 = std::mem::take(&mut self.r4);
        let mut stage = std::mem::take(&mut self.stage);
        self.rho_rate(spec, rho, h, &mut r1);
        for i in 0..n {
            stage[i] = rho[i] + 0.5 * dt * r1[i];
        }
        self.rho_rate(spec, &stage, h, &mut r2);
        for i in 0..n {
            stage[i] = rho[i] + 0.5 * dt * r2[i];
        }
        self.rho_rate(spec, &stage, h, &mut r3);
        for i in 0..n {
            stage[i] = rho[i] + dt * r3[i];
        }
        self.rho_rate(spec, &stage, h, &mut r4);
        let out = (0..n)
            .map(|i| rho[i] + dt / 6.0 * (r1[i] + 2.0 * (r2[i] + r3[i]) + r4[i]))
            .collect();
        (self.r1, self.r2, self.r3, self.r4, self.stage) = (r1, r2, r3, r4, stage);
        out
    }

    /// Linearly implicit Euler step. With `c = k²F′(k)` frozen, the
    /// increment `δ` solves `δ − dt∂²_θ(cδ) = dt·ρ_t`; in `u = cδ` this is the
    /// SPD system `(c⁻¹ − dt∂²_θ)u = dt·ρ_t`, solved by conjugate gradients.
    fn imex(&mut self, spec: FlowSpec, rho: &[f64], h: f64, dt: f64) -> Vec<f64> {
        let n = rho.len();
        let mut rate = std::mem::take(&mut self.r1);
        self.rho_rate(spec, rho, h, &mut rate);
        let cinv: Vec<f64> = self.k.iter().map(|&k| 1.0 / (k * k * spec.speed_slope(k))).collect();
        let b: Vec<f64> = rate.iter().map(|r| dt * r).collect();
        self.r1 = rate;

        let apply = |x: &[f64], d2: &mut [f64], out: &mut [f64]| {
            grid::d2_theta_into(x, h, d2);
            for i in 0..n {
                out[i] = cinv[i] * x[i] - dt * d2[i];
            }
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>();

        // Start from the explicit increment.
        let mut u: Vec<f64> = (0..n).map(|i| b[i] / cinv[i]).collect();
        let mut au = vec![0.0; n];
        apply(&u, &mut self.d2, &mut au);
        let mut r: Vec<f64> = (0..n).map(|i| b[i] - au[i]).collect();
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        let target = 1e-28 * dot(&b, &b).max(f64::MIN_POSITIVE);
        for _ in 0..4 * n {
            if rr <= target {
                break;
            }
            apply(&d, &mut self.d2, &mut au);
            let step = rr / dot(&d, &au);
            for i in 0..n {
                u[i] += step * d[i];
                r[i] -= step * au[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                d[i] = r[i] + beta * d[i];
            }
        }
        (0..n).map(|i| rho[i] + cinv[i] * u[i]).collect()
    }
}

/// Converts a stepped `ρ` back to curvature and applies the bounds.
fn finish(
    rho: Vec<f64>,
    p: &CurvatureProfile,
    bounds: &CurvatureBounds,
) -> std::result::Result<CurvatureProfile, StepFailure> {
    let raw: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
    if rho.iter().any(|r| *r <= 0.0) {
        return Err(StepFailure {
            kind: Termination::ConvexityLost,
            state: raw,
        });
    }
    if let Some(kind) = bounds.classify(&raw) {
        return Err(StepFailure { kind, state: raw });
    }
    CurvatureProfile::new(*p.grid(), raw).map_err(|_| StepFailure {
        kind: Termination::NumericalFailure,
        state: Vec::new(),
    })
}

/// One RK4 step. `dt` may be negative.
pub fn step_rk4(
    spec: FlowSpec,
    p: &CurvatureProfile,
    dt: f64,
    bounds: &CurvatureBounds,
) -> std::result::Result<CurvatureProfile, StepFailure> {
    let mut ws = Workspace::new(p.k().len());
    let raw = ws.rk4(spec, &p.radius_of_curvature(), p.grid().spacing(), dt);
    finish(raw, p, bounds)
}

/// One linearly implicit step; `dt > 0`.
pub fn step_imex(
    spec: FlowSpec,
    p: &CurvatureProfile,
    dt: f64,
    bounds: &CurvatureBounds,
) -> std::result::Result<CurvatureProfile, StepFailure> {
    let mut ws = Workspace::new(p.k().len());
    let raw = ws.imex(spec, &p.radius_of_curvature(), p.grid().spacing(), dt);
    finish(raw, p, bounds)
}

/// Removes the closure defect by subtracting its first Fourier mode from
/// `ρ = 1/k`. Returns `p` unchanged if that would make `ρ` non-positive.
pub fn project_closure(p: &CurvatureProfile) -> CurvatureProfile {
    let (dx, dy) = curve::closure_defect(p);
    let g = *p.grid();
    let rho: Vec<f64> = p
        .k()
        .iter()
        .zip(g.nodes())
        .map(|(k, th)| 1.0 / k - (dx * th.cos() + dy * th.sin()) / PI)
        .collect();
    if rho.iter().any(|r| !(*r > 0.0)) {
        return p.clone();
    }
    CurvatureProfile::new(g, rho.into_iter().map(|r| 1.0 / r).collect()).unwrap_or_else(|_| p.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub t_end: f64,
    /// Defaults to [`CurvatureBounds::for_profile`] on the initial profile.
    pub k_floor: Option<f64>,
    pub k_ceiling: Option<f64>,
    /// Record every this many steps, plus the first and final states.
    pub record_stride: usize,
    pub projection: bool,
    pub radii_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::ExplicitRk4,
            cfl: 0.25,
            t_end: 1.0,
            k_floor: None,
            k_ceiling: None,
            record_stride: 20,
            projection: false,
            radii_seed: DEFAULT_SHUFFLE_SEED,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(FlowError::Domain(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(FlowError::Domain(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(FlowError::Domain("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    fn dt(&self, p: &CurvatureProfile) -> f64 {
        match self.scheme {
            Scheme::ExplicitRk4 => cfl_dt(p, self.cfl),
            Scheme::Imex => imex_dt(p, self.cfl),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<CurvatureProfile>,
    pub records: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    /// State rejected by the step that ended the run, if any.
    pub failed_state: Option<Vec<f64>>,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &CurvatureProfile {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

/// Stepper that advances a profile one adaptive step at a time.
pub struct Integrator {
    spec: FlowSpec,
    cfg: SolverConfig,
    bounds: CurvatureBounds,
    ws: Workspace,
}

impl Integrator {
    pub fn new(spec: FlowSpec, cfg: SolverConfig, initial: &CurvatureProfile) -> Result<Self> {
        cfg.validate()?;
        let defaults = CurvatureBounds::for_profile(initial);
        let bounds = CurvatureBounds {
            floor: cfg.k_floor.unwrap_or(defaults.floor),
            ceiling: cfg.k_ceiling.unwrap_or(defaults.ceiling),
        };
        if !(bounds.floor < initial.min_k() && bounds.ceiling > initial.max_k()) {
            return Err(FlowError::Domain(format!(
                "curvature bounds [{}, {}] must strictly contain the initial range [{}, {}]",
                bounds.floor,
                bounds.ceiling,
                initial.min_k(),
                initial.max_k()
            )));
        }
        Ok(Self {
            spec,
            ws: Workspace::new(initial.k().len()),
            cfg,
            bounds,
        })
    }

    pub fn bounds(&self) -> &CurvatureBounds {
        &self.bounds
    }

    /// Step size the scheme would take from `p`.
    pub fn dt(&self, p: &CurvatureProfile) -> f64 {
        self.cfg.dt(p)
    }

    /// Advances by exactly `dt`.
    pub fn step(
        &mut self,
        p: &CurvatureProfile,
        dt: f64,
    ) -> std::result::Result<CurvatureProfile, StepFailure> {
        let h = p.grid().spacing();
        let rho = p.radius_of_curvature();
        let raw = match self.cfg.scheme {
            Scheme::ExplicitRk4 => self.ws.rk4(self.spec, &rho, h, dt),
            Scheme::Imex => self.ws.imex(self.spec, &rho, h, dt),
        };
        let next = finish(raw, p, &self.bounds)?;
        Ok(if self.cfg.projection { project_closure(&next) } else { next })
    }

    /// Advances to `t_target` with steps no larger than the scheme allows.
    pub fn advance(
        &mut self,
        p: &CurvatureProfile,
        t: f64,
        t_target: f64,
    ) -> std::result::Result<(CurvatureProfile, usize), StepFailure> {
        let mut cur = p.clone();
        let mut now = t;
        let mut steps = 0;
        while now < t_target {
            let dt = self.dt(&cur);
            let (dt, last) = if now + dt >= t_target * (1.0 - 1e-14) {
                (t_target - now, true)
            } else {
                (dt, false)
            };
            cur = self.step(&cur, dt)?;
            now = if last { t_target } else { now + dt };
            steps += 1;
        }
        Ok((cur, steps))
    }
}

/// Runs the flow to `cfg.t_end`, recording diagnostics and snapshots every
/// `cfg.record_stride` steps. `observer` sees each record as it is made.
pub fn evolve(
    initial: &CurvatureProfile,
    spec: FlowSpec,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&DiagnosticsRecord, &CurvatureProfile),
) -> Result<Trajectory> {
    let mut integ = Integrator::new(spec, cfg.clone(), initial)?;
    let first = diagnostics::snapshot_record(initial, 0.0, cfg.radii_seed)?;
    observer(&first, initial);
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![initial.clone()],
        records: vec![first],
        termination: Termination::Completed,
        failed_state: None,
        steps: 0,
    };
    let mut cur = initial.clone();
    let mut t = 0.0;
    let mut since_record = 0;
    while t < cfg.t_end {
        let dt = integ.dt(&cur);
        let (dt, last) = if t + dt >= cfg.t_end * (1.0 - 1e-14) {
            (cfg.t_end - t, true)
        } else {
            (dt, false)
        };
        match integ.step(&cur, dt) {
            Ok(next) => cur = next,
            Err(fail) => {
                traj.termination = fail.kind;
                traj.failed_state = Some(fail.state);
                break;
            }
        }
        t = if last { cfg.t_end } else { t + dt };
        traj.steps += 1;
        since_record += 1;
        if since_record == cfg.record_stride || last {
            since_record = 0;
            match diagnostics::snapshot_record(&cur, t, cfg.radii_seed) {
                Ok(rec) => {
                    observer(&rec, &cur);
                    traj.times.push(t);
                    traj.snapshots.push(cur.clone());
                    traj.records.push(rec);
                }
                Err(_) => {
                    traj.termination = Termination::NumericalFailure;
                    traj.failed_state = Some(cur.into_values());
                    break;
                }
            }
        }
    }
    Ok(traj)
}
