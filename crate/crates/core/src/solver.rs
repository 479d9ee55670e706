//! Time integration of the vorticity-temperature system with a marker
//! contour, plus the diagnostics computed from a stored run.
//!
//! Vorticity obeys `ω_t - Δω = -u·∇ω + g ∂₁θ` on the periodic box with
//! `u = ∇^⊥Δ^{-1}ω`. The temperature is the indicator of the patch bounded
//! by the contour; the grid only ever sees a mollified raster of it.

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::config::SimConfig;
use crate::geometry::{self, Contour, ContourQuery, GeometryError, RegularityStats};
use crate::par;
use crate::spectral::{
    self, biot_savart_coeffs, dealias_keep, fft_pair, ifft_pair, BSpline5, Grid, SpectralError, SpectralField,
};
use crate::Vec2;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("time step {dt} violates the CFL condition; admissible dt <= {max_dt:e}")]
    Cfl { dt: f64, max_dt: f64 },
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("raster width must be positive, got {0}")]
    BadWidth(f64),
    #[error("contour comes within {margin} of the box edge")]
    ContourOutsideBox { margin: f64 },
    #[error("no snapshot at t = {0}")]
    NotInHistory(f64),
    #[error("snapshot times must be strictly increasing")]
    NonMonotone,
    #[error("history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// The tanh ramp is clipped to exactly 0 or 1 beyond this many ramp widths.
pub const RAMP_CUTOFF: f64 = 18.0;

/// Resampling is triggered when max/min node spacing exceeds this.
pub const RESAMPLE_RATIO: f64 = 3.0;

/// Upper limit on marker count when resampling doubles the nodes.
pub const MAX_NODES: usize = 8192;

/// Distance the contour must keep from the box edges for
/// [`rasterize_patch`].
pub fn raster_margin(g: Grid, width: f64) -> f64 {
    RAMP_CUTOFF * width * g.spacing() / 2.0 + g.spacing()
}

/// Mollified indicator `½(1 + tanh(s/a))`, `a = width·h/2`, with `s` the
/// signed distance to the (spline-refined) contour, positive inside.
pub fn rasterize_patch(c: &Contour, g: Grid, width: f64) -> Result<SpectralField> {
    Ok(SpectralField::from_values(g, raster_values(c, g, width)?))
}

fn raster_values(c: &Contour, g: Grid, width: f64) -> Result<Vec<f64>> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(SolverError::BadWidth(width));
    }
    let q = ContourQuery::new(c);
    let n = g.n();
    let h = g.spacing();
    let a = width * h / 2.0;
    let band = RAMP_CUTOFF * a;
    let margin = raster_margin(g, width);
    let l = g.length();
    if q.poly.pts.iter().any(|p| p[0] < margin || p[1] < margin || p[0] > l - margin || p[1] > l - margin) {
        return Err(SolverError::ContourOutsideBox { margin });
    }
    // Coarse pass on the node polygon finds the nearest node interval; the
    // distance itself is then refined on the spline.
    let nodes = c.nodes();
    let m = nodes.len();
    let sag = node_sagitta(&q);
    let reach = band + sag;
    let prep: Vec<RasterSeg> = (0..m).map(|i| RasterSeg::new(nodes[i], nodes[(i + 1) % m], reach)).collect();
    let fine: Vec<(Vec2, Vec2)> = q.poly.segments().collect();
    let rows = par::map_range(n, |j| {
        let y = j as f64 * h;
        // inside/outside from crossings with the refined polyline
        let mut xs: Vec<f64> = fine
            .iter()
            .filter(|(p, r)| (p[1] <= y) != (r[1] <= y))
            .map(|(p, r)| p[0] + (y - p[1]) * (r[0] - p[0]) / (r[1] - p[1]))
            .collect();
        xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let mut best = vec![(f64::INFINITY, 0.0f64); n];
        for (si, sg) in prep.iter().enumerate() {
            if y < sg.y_lo || y > sg.y_hi {
                continue;
            }
            let i0 = (sg.x_lo / h).floor().max(0.0) as usize;
            let i1 = ((sg.x_hi / h).ceil() as usize).min(n - 1);
            let py = y - sg.a[1];
            for (i, b) in best[i0..=i1].iter_mut().enumerate() {
                let px = (i0 + i) as f64 * h - sg.a[0];
                let t = ((px * sg.d[0] + py * sg.d[1]) * sg.inv_l2).clamp(0.0, 1.0);
                let ex = px - t * sg.d[0];
                let ey = py - t * sg.d[1];
                let d2 = ex * ex + ey * ey;
                if d2 < b.0 {
                    *b = (d2, (si as f64 + t) / m as f64);
                }
            }
        }
        let mut k = 0;
        (0..n)
            .map(|i| {
                let x = i as f64 * h;
                while k < xs.len() && xs[k] < x {
                    k += 1;
                }
                let inside = k % 2 == 1;
                let (d2, alpha) = best[i];
                if d2 > reach * reach {
                    return if inside { 1.0 } else { 0.0 };
                }
                let d = spline_distance(&q.spline, [x, y], alpha, m);
                if d > band {
                    return if inside { 1.0 } else { 0.0 };
                }
                let s = if inside { d } else { -d };
                0.5 * (1.0 + (s / a).tanh())
            })
            .collect::<Vec<f64>>()
    });
    Ok(rows.concat())
}

// Largest gap between the spline and its node polygon.
fn node_sagitta(q: &ContourQuery) -> f64 {
    let nodes = q.contour.nodes();
    let m = nodes.len();
    (0..m)
        .map(|i| {
            let mid = q.spline.eval((i as f64 + 0.5) / m as f64).0;
            let a = nodes[i];
            let b = nodes[(i + 1) % m];
            (mid[0] - 0.5 * (a[0] + b[0])).hypot(mid[1] - 0.5 * (a[1] + b[1]))
        })
        .fold(0.0, f64::max)
        * 1.5
}

struct RasterSeg {
    a: Vec2,
    d: Vec2,
    inv_l2: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl RasterSeg {
    fn new(a: Vec2, b: Vec2, band: f64) -> RasterSeg {
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        RasterSeg {
            a,
            d,
            inv_l2: if l2 > 0.0 { 1.0 / l2 } else { 0.0 },
            x_lo: a[0].min(b[0]) - band,
            x_hi: a[0].max(b[0]) + band,
            y_lo: a[1].min(b[1]) - band,
            y_hi: a[1].max(b[1]) + band,
        }
    }
}

// Newton on (S(α) - x)·S'(α) = 0 from a nearby parameter.
fn spline_distance(s: &geometry::Spline, x: Vec2, mut alpha: f64, m: usize) -> f64 {
    let start = alpha;
    let cap = 1.0 / m as f64;
    for _ in 0..6 {
        let (p, d1, d2) = s.eval2(alpha);
        let e = [p[0] - x[0], p[1] - x[1]];
        let gval = e[0] * d1[0] + e[1] * d1[1];
        let gder = d1[0] * d1[0] + d1[1] * d1[1] + e[0] * d2[0] + e[1] * d2[1];
        if gder <= 0.0 {
            break;
        }
        let next = (alpha - gval / gder).clamp(start - cap, start + cap);
        let done = (next - alpha).abs() < 1e-14;
        alpha = next;
        if done {
            break;
        }
    }
    let p = s.eval(alpha).0;
    let p0 = s.eval(start).0;
    (p[0] - x[0]).hypot(p[1] - x[1]).min((p0[0] - x[0]).hypot(p0[1] - x[1]))
}

/// Parameters that stay fixed during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub gravity: f64,
    pub raster_width: f64,
    pub cfl_safety: f64,
    pub gamma: f64,
    pub track_tangents: bool,
}

impl StepParams {
    pub fn from_config(cfg: &SimConfig) -> StepParams {
        StepParams {
            gravity: cfg.gravity,
            raster_width: cfg.raster_width,
            cfl_safety: cfg.cfl_safety,
            gamma: cfg.gamma,
            track_tangents: cfg.track_tangents,
        }
    }
}

/// Solver state at one instant.
#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub omega: SpectralField,
    pub contour: Option<Contour>,
    /// Raster of `contour` (zero when there is none).
    pub theta: SpectralField,
    /// `sup |u|` of the current velocity.
    pub u_sup: f64,
    /// Running maximum of `sup |u|` since t = 0.
    pub u_sup_running: f64,
    /// Tangent field `W` carried by the markers, reset on resampling.
    pub tangents: Option<Vec<Vec2>>,
    /// `∫₀^t ‖∇u‖² dτ` by the trapezoid rule over steps.
    pub grad_energy_integral: f64,
    pub steps: usize,
    /// Whether the last step resampled the contour.
    pub resampled: bool,
    pub params: StepParams,
}

impl SimState {
    pub fn new(cfg: &SimConfig) -> Result<SimState> {
        let contour = cfg.build_contour()?;
        SimState::from_parts(cfg.build_omega(), contour, StepParams::from_config(cfg))
    }

    pub fn from_parts(omega: SpectralField, contour: Option<Contour>, params: StepParams) -> Result<SimState> {
        let g = omega.grid();
        let theta = match &contour {
            Some(c) => rasterize_patch(c, g, params.raster_width)?,
            None => SpectralField::zeros(g),
        };
        let tangents = match (&contour, params.track_tangents) {
            (Some(c), true) => Some(c.tangents()),
            _ => None,
        };
        let u_sup = velocity_sup(g, omega.coeffs());
        Ok(SimState {
            time: 0.0,
            omega,
            contour,
            theta,
            u_sup,
            u_sup_running: u_sup,
            tangents,
            grad_energy_integral: 0.0,
            steps: 0,
            resampled: false,
            params,
        })
    }

    pub fn grid(&self) -> Grid {
        self.omega.grid()
    }

    /// Largest step allowed by the CFL condition at the current velocity.
    pub fn max_dt(&self) -> f64 {
        self.params.cfl_safety * self.grid().spacing() / self.u_sup.max(1e-12)
    }
}

fn velocity_sup(g: Grid, w: &[Complex64]) -> f64 {
    let (a, b) = biot_savart_coeffs(g, w);
    let (u1, u2) = ifft_pair(&a, &b, g.n());
    u1.iter().zip(&u2).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max)
}

fn zero_coeffs(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); len]
}

// Dealiased advection -u·∇ω in coefficient space, together with û and the
// physical velocity.
struct Advection {
    tend: Vec<Complex64>,
    u_hat: (Vec<Complex64>, Vec<Complex64>),
    u_sup: f64,
}

fn advection(g: Grid, w: &[Complex64], theta_values: Option<&[f64]>) -> (Advection, Option<Vec<Complex64>>) {
    let n = g.n();
    let (a, b) = biot_savart_coeffs(g, w);
    let (u1, u2) = ifft_pair(&a, &b, n);
    let mut wx = zero_coeffs(n * n);
    let mut wy = zero_coeffs(n * n);
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            wx[idx] = Complex64::new(0.0, g.deriv_wavenumber(i)) * w[idx];
            wy[idx] = Complex64::new(0.0, g.deriv_wavenumber(j)) * w[idx];
        }
    }
    let (gx, gy) = ifft_pair(&wx, &wy, n);
    let prod: Vec<f64> = (0..n * n).map(|k| -(u1[k] * gx[k] + u2[k] * gy[k])).collect();
    let u_sup = u1.iter().zip(&u2).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
    let zeros;
    let other = match theta_values {
        Some(t) => t,
        None => {
            zeros = vec![0.0; n * n];
            &zeros
        }
    };
    let (mut tend, th) = fft_pair(&prod, other, n);
    for j in 0..n {
        for i in 0..n {
            if !dealias_keep(g, i, j) {
                tend[j * n + i] = Complex64::new(0.0, 0.0);
            }
        }
    }
    (Advection { tend, u_hat: (a, b), u_sup }, theta_values.map(|_| th))
}

fn add_buoyancy(g: Grid, tend: &mut [Complex64], theta_hat: &[Complex64], gravity: f64) {
    if gravity == 0.0 {
        return;
    }
    let n = g.n();
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            tend[idx] += Complex64::new(0.0, gravity * g.deriv_wavenumber(i)) * theta_hat[idx];
        }
    }
}

/// Coefficient-space tendency `dealias(-u·∇ω) + g ∂₁θ` of a state (viscosity
/// excluded).
pub fn rhs(state: &SimState) -> Vec<Complex64> {
    let g = state.grid();
    let (mut adv, _) = advection(g, state.omega.coeffs(), None);
    add_buoyancy(g, &mut adv.tend, state.theta.coeffs(), state.params.gravity);
    adv.tend
}

type Grad = [[f64; 2]; 2];

// One right-hand-side evaluation: vorticity tendency and marker velocity
// (with ∇u when tangents are tracked) at the given stage data.
struct StageOut {
    tend: Vec<Complex64>,
    vel: Vec<Vec2>,
    grad: Vec<Grad>,
    u_sup: f64,
}

fn stage(
    g: Grid,
    p: &StepParams,
    w: &[Complex64],
    nodes: Option<&[Vec2]>,
    want_grad: bool,
) -> Result<StageOut> {
    let raster = match nodes {
        Some(ns) if p.gravity != 0.0 => Some(raster_values(&Contour::from_raw(ns.to_vec()), g, p.raster_width)?),
        _ => None,
    };
    let (mut adv, theta_hat) = advection(g, w, raster.as_deref());
    if let Some(th) = theta_hat {
        add_buoyancy(g, &mut adv.tend, &th, p.gravity);
    }
    let (vel, grad) = match nodes {
        Some(ns) => {
            let (s1, s2) = BSpline5::pair(g, &adv.u_hat.0, &adv.u_hat.1);
            let out = par::map_slice(ns, |x| {
                let (v1, g1) = s1.value_and_gradient(*x);
                let (v2, g2) = s2.value_and_gradient(*x);
                ([v1, v2], [g1, g2])
            });
            let vel = out.iter().map(|o| o.0).collect();
            let grad = if want_grad { out.iter().map(|o| o.1).collect() } else { Vec::new() };
            (vel, grad)
        }
        None => (Vec::new(), Vec::new()),
    };
    Ok(StageOut { tend: adv.tend, vel, grad, u_sup: adv.u_sup })
}

fn axpy(x: &[Vec2], a: f64, v: &[Vec2]) -> Vec<Vec2> {
    x.iter().zip(v).map(|(p, q)| [p[0] + a * q[0], p[1] + a * q[1]]).collect()
}

fn mat_vec(m: &Grad, w: Vec2) -> Vec2 {
    [m[0][0] * w[0] + m[0][1] * w[1], m[1][0] * w[0] + m[1][1] * w[1]]
}

fn tangent_rate(grad: &[Grad], w: &[Vec2]) -> Vec<Vec2> {
    grad.iter().zip(w).map(|(m, v)| mat_vec(m, *v)).collect()
}

fn rk4_combine(x: &[Vec2], k: [&[Vec2]; 4], dt: f64) -> Vec<Vec2> {
    (0..x.len())
        .map(|i| {
            let mut out = x[i];
            for d in 0..2 {
                out[d] += dt / 6.0 * (k[0][i][d] + 2.0 * k[1][i][d] + 2.0 * k[2][i][d] + k[3][i][d]);
            }
            out
        })
        .collect()
}

/// Classical RK4 for markers (and optionally tangents) in a prescribed
/// velocity field `field(t, x) -> (u, ∇u)` with `∇u[i][j] = ∂_j u_i`.
pub fn advect_markers<F>(
    nodes: &[Vec2],
    tangents: Option<&[Vec2]>,
    t0: f64,
    dt: f64,
    steps: usize,
    field: F,
) -> (Vec<Vec2>, Option<Vec<Vec2>>)
where
    F: Fn(f64, Vec2) -> (Vec2, Grad),
{
    let eval = |t: f64, xs: &[Vec2]| -> (Vec<Vec2>, Vec<Grad>) { xs.iter().map(|x| field(t, *x)).unzip() };
    let mut x = nodes.to_vec();
    let mut w = tangents.map(|t| t.to_vec());
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        let (v1, g1) = eval(t, &x);
        let x2 = axpy(&x, dt / 2.0, &v1);
        let (v2, g2) = eval(t + dt / 2.0, &x2);
        let x3 = axpy(&x, dt / 2.0, &v2);
        let (v3, g3) = eval(t + dt / 2.0, &x3);
        let x4 = axpy(&x, dt, &v3);
        let (v4, g4) = eval(t + dt, &x4);
        if let Some(w0) = &w {
            let k1 = tangent_rate(&g1, w0);
            let k2 = tangent_rate(&g2, &axpy(w0, dt / 2.0, &k1));
            let k3 = tangent_rate(&g3, &axpy(w0, dt / 2.0, &k2));
            let k4 = tangent_rate(&g4, &axpy(w0, dt, &k3));
            w = Some(rk4_combine(w0, [&k1, &k2, &k3, &k4], dt));
        }
        x = rk4_combine(&x, [&v1, &v2, &v3, &v4], dt);
    }
    (x, w)
}

/// `φ₁, φ₂, φ₃` of the exponential integrators, `φ_k(z) = Σ zⁿ/(n+k)!`.
pub fn phi123(z: f64) -> [f64; 3] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = 1.0 / (1..=k + 1).map(|i| i as f64).product::<f64>();
            let mut sum = 0.0;
            for n in 0..30 {
                sum += term;
                term *= z / (n + k + 2) as f64;
            }
            *o = sum;
        }
        out
    } else {
        let em1 = z.exp_m1();
        let p1 = em1 / z;
        let p2 = (em1 - z) / (z * z);
        let p3 = (em1 - z - 0.5 * z * z) / (z * z * z);
        [p1, p2, p3]
    }
}

// Per-mode coefficients of one ETDRK4 step of length dt.
struct EtdTables {
    e: Vec<f64>,
    e_half: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

impl EtdTables {
    fn new(g: Grid, dt: f64) -> EtdTables {
        let n = g.n();
        let len = n * n;
        let mut t = EtdTables {
            e: vec![0.0; len],
            e_half: vec![0.0; len],
            q: vec![0.0; len],
            f1: vec![0.0; len],
            f2: vec![0.0; len],
            f3: vec![0.0; len],
        };
        for idx in 0..len {
            let z = -g.k2(idx % n, idx / n) * dt;
            let [p1, p2, p3] = phi123(z);
            t.e[idx] = z.exp();
            t.e_half[idx] = (0.5 * z).exp();
            t.q[idx] = 0.5 * dt * phi123(0.5 * z)[0];
            t.f1[idx] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
            t.f2[idx] = dt * 2.0 * (p2 - 2.0 * p3);
            t.f3[idx] = dt * (4.0 * p3 - p2);
        }
        t
    }
}

/// One step of exponential RK4 (ETDRK4). Viscosity is integrated exactly
/// through `e^{-|k|² dt}` and `e^{-|k|² dt/2}`, and the forcing is integrated
/// against them exactly for its stage polynomial. Markers and tangents have
/// no linear part, so for them the same stages reduce to classical RK4.
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::BadStep(dt));
    }
    let max_dt = state.max_dt();
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(SolverError::Cfl { dt, max_dt });
    }
    let g = state.grid();
    let n = g.n();
    let p = &state.params;
    let w0 = state.omega.coeffs();
    let tb = EtdTables::new(g, dt);
    let x0: Option<Vec<Vec2>> = state.contour.as_ref().map(|c| c.nodes().to_vec());
    let tan0 = state.tangents.as_deref();
    let want_grad = tan0.is_some();

    let s1 = stage(g, p, w0, x0.as_deref(), want_grad)?;
    let wa: Vec<Complex64> = (0..n * n).map(|i| tb.e_half[i] * w0[i] + tb.q[i] * s1.tend[i]).collect();
    let x2 = x0.as_ref().map(|x| axpy(x, dt / 2.0, &s1.vel));
    let s2 = stage(g, p, &wa, x2.as_deref(), want_grad)?;
    let wb: Vec<Complex64> = (0..n * n).map(|i| tb.e_half[i] * w0[i] + tb.q[i] * s2.tend[i]).collect();
    let x3 = x0.as_ref().map(|x| axpy(x, dt / 2.0, &s2.vel));
    let s3 = stage(g, p, &wb, x3.as_deref(), want_grad)?;
    let wc: Vec<Complex64> =
        (0..n * n).map(|i| tb.e_half[i] * wa[i] + tb.q[i] * (2.0 * s3.tend[i] - s1.tend[i])).collect();
    let x4 = x0.as_ref().map(|x| axpy(x, dt, &s3.vel));
    let s4 = stage(g, p, &wc, x4.as_deref(), want_grad)?;

    let w_new: Vec<Complex64> = (0..n * n)
        .map(|i| {
            tb.e[i] * w0[i] + tb.f1[i] * s1.tend[i] + tb.f2[i] * (s2.tend[i] + s3.tend[i]) + tb.f3[i] * s4.tend[i]
        })
        .collect();
    let omega = SpectralField::from_hermitian_coeffs(g, w_new);

    let mut tangents = match tan0 {
        Some(t) => {
            let k1 = tangent_rate(&s1.grad, t);
            let k2 = tangent_rate(&s2.grad, &axpy(t, dt / 2.0, &k1));
            let k3 = tangent_rate(&s3.grad, &axpy(t, dt / 2.0, &k2));
            let k4 = tangent_rate(&s4.grad, &axpy(t, dt, &k3));
            Some(rk4_combine(t, [&k1, &k2, &k3, &k4], dt))
        }
        None => None,
    };
    let mut resampled = false;
    let contour = match &x0 {
        Some(x) => {
            let moved = rk4_combine(x, [&s1.vel, &s2.vel, &s3.vel, &s4.vel], dt);
            let mut c = Contour::from_raw(moved);
            if geometry::spacing_ratio(&c) > RESAMPLE_RATIO {
                let len = c.len();
                let mean_gap = perimeter(&c) / len as f64;
                let target = if mean_gap > g.spacing() && len < MAX_NODES { 2 * len } else { len };
                c = geometry::resample_arclength(&c, target)?;
                resampled = true;
                if tangents.is_some() {
                    tangents = Some(c.tangents());
                }
            }
            Some(c)
        }
        None => None,
    };
    let theta = match &contour {
        Some(c) => rasterize_patch(c, g, p.raster_width)?,
        None => SpectralField::zeros(g),
    };
    let u_sup = velocity_sup(g, omega.coeffs());
    let grad_new = omega.l2_norm_sq_spectral();
    let grad_old = state.omega.l2_norm_sq_spectral();
    Ok(SimState {
        time: state.time + dt,
        omega,
        contour,
        theta,
        u_sup,
        u_sup_running: state.u_sup_running.max(s1.u_sup).max(u_sup),
        tangents,
        grad_energy_integral: state.grad_energy_integral + 0.5 * dt * (grad_old + grad_new),
        steps: state.steps + 1,
        resampled,
        params: state.params,
    })
}

fn perimeter(c: &Contour) -> f64 {
    let n = c.len();
    (0..n)
        .map(|m| {
            let a = c.nodes()[m];
            let b = c.nodes()[(m + 1) % n];
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .sum()
}

/// Scalar diagnostics stored with each snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotDiag {
    /// `‖u‖²_{L²}`.
    pub energy: f64,
    pub grad_energy_integral: f64,
    pub sup_u: f64,
    pub u_sup_running: f64,
    pub theta_l2: f64,
    pub theta_sup: f64,
    /// Contour statistics; absent for runs without a patch.
    pub regularity: Option<RegularityStats>,
    /// Running minimum of the cutoff distance `δ` over snapshots so far.
    pub delta_running_min: f64,
    pub resampled: bool,
}

/// One stored instant of a run. Fields are kept as node values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub grid: Grid,
    pub omega: Vec<f64>,
    pub theta: Vec<f64>,
    pub contour: Option<Contour>,
    pub tangents: Option<Vec<Vec2>>,
    pub diag: SnapshotDiag,
}

impl Snapshot {
    pub fn omega_field(&self) -> SpectralField {
        SpectralField::from_values(self.grid, self.omega.clone())
    }

    pub fn theta_field(&self) -> SpectralField {
        SpectralField::from_values(self.grid, self.theta.clone())
    }

    fn capture(s: &SimState, prev_delta: f64) -> Result<Snapshot> {
        let (a, b) = biot_savart_coeffs(s.grid(), s.omega.coeffs());
        let (u1, u2) = SpectralField::pair_from_coeffs(s.grid(), a, b);
        let regularity = match &s.contour {
            Some(c) => Some(geometry::regularity_stats(c, s.params.gamma)?),
            None => None,
        };
        let delta = regularity.map_or(f64::INFINITY, |r| r.delta);
        Ok(Snapshot {
            time: s.time,
            grid: s.grid(),
            omega: s.omega.values().to_vec(),
            theta: s.theta.values().to_vec(),
            contour: s.contour.clone(),
            tangents: s.tangents.clone(),
            diag: SnapshotDiag {
                energy: u1.l2_norm_sq_spectral() + u2.l2_norm_sq_spectral(),
                grad_energy_integral: s.grad_energy_integral,
                sup_u: s.u_sup,
                u_sup_running: s.u_sup_running,
                theta_l2: s.theta.l2_norm(),
                theta_sup: s.theta.max_abs(),
                regularity,
                delta_running_min: prev_delta.min(delta),
                resampled: s.resampled,
            },
        })
    }
}

/// Time-ordered snapshots of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory {
    pub config: SimConfig,
    pub snapshots: Vec<Snapshot>,
}

impl RunHistory {
    pub fn new(config: SimConfig, snapshots: Vec<Snapshot>) -> Result<RunHistory> {
        if snapshots.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(SolverError::NonMonotone);
        }
        Ok(RunHistory { config, snapshots })
    }

    /// History of a patch held fixed in time with zero vorticity, sampled at
    /// `times`. Used to exercise the time integrals against closed forms.
    pub fn frozen(config: SimConfig, contour: Contour, times: &[f64]) -> Result<RunHistory> {
        let mut params = StepParams::from_config(&config);
        params.track_tangents = false;
        let mut s = SimState::from_parts(SpectralField::zeros(config.grid), Some(contour), params)?;
        let mut snaps = Vec::with_capacity(times.len());
        let mut delta = f64::INFINITY;
        for &t in times {
            s.time = t;
            let snap = Snapshot::capture(&s, delta)?;
            delta = snap.diag.delta_running_min;
            snaps.push(snap);
        }
        RunHistory::new(config, snaps)
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Index of the snapshot at time `t` (to 1e-9 relative).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.snapshots
            .iter()
            .position(|s| (s.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(SolverError::NotInHistory(t))
    }

    /// Index of the last snapshot with time `<= t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        self.snapshots.iter().rposition(|s| s.time <= t + 1e-12)
    }

    pub fn last(&self) -> Result<&Snapshot> {
        self.snapshots.last().ok_or(SolverError::EmptyHistory)
    }
}

/// Number of steps and the uniform step used to reach `horizon`.
pub fn step_plan(dt: f64, horizon: f64) -> (usize, f64) {
    if horizon <= 0.0 {
        return (0, dt);
    }
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    (steps, horizon / steps as f64)
}

/// Steps from 0 to the horizon, storing every `snapshot_stride`-th state and
/// always the final one. The step is `dt` shrunk to divide the horizon.
pub fn run(config: &SimConfig) -> Result<RunHistory> {
    run_with(config, |_| {})
}

/// [`run`] with a callback after every step.
pub fn run_with<F: FnMut(&SimState)>(config: &SimConfig, mut on_step: F) -> Result<RunHistory> {
    let mut state = SimState::new(config)?;
    let (steps, dt) = step_plan(config.dt, config.horizon);
    let mut snaps = vec![Snapshot::capture(&state, f64::INFINITY)?];
    let mut resampled_since = false;
    for k in 1..=steps {
        state = step(&state, dt)?;
        if k == steps {
            // land exactly on the horizon
            state.time = config.horizon;
        }
        resampled_since |= state.resampled;
        on_step(&state);
        if k % config.snapshot_stride == 0 || k == steps {
            let mut snap = Snapshot::capture(&state, snaps.last().unwrap().diag.delta_running_min)?;
            snap.diag.resampled = resampled_since;
            resampled_since = false;
            snaps.push(snap);
        }
    }
    RunHistory::new(config.clone(), snaps)
}

/// The three pieces of the vorticity splitting at one snapshot.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub time: f64,
    /// `e^{tΔ}ω₀`.
    pub w1: SpectralField,
    /// Duhamel integral of the advection forcing.
    pub w2: SpectralField,
    /// Duhamel integral of the buoyancy forcing.
    pub w3: SpectralField,
    /// `‖ω - (w1 + w2 + w3)‖ / ‖ω‖` (absolute when `ω = 0`).
    pub residual: f64,
}

// ∫₀¹ σ e^{-zσ} dσ and ∫₀¹ (1-σ) e^{-zσ} dσ.
fn duhamel_weights(z: f64) -> (f64, f64) {
    if z < 0.5 {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut term = 1.0;
        for k in 0..24 {
            let kf = k as f64;
            a += term / (kf + 2.0);
            b += term / ((kf + 1.0) * (kf + 2.0));
            term *= -z / (kf + 1.0);
        }
        (a, b)
    } else {
        let e = (-z).exp();
        let phi1 = (1.0 - e) / z;
        let a = (1.0 - (1.0 + z) * e) / (z * z);
        (a, phi1 - a)
    }
}

fn split_forcing(h: &RunHistory, k: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let s = &h.snapshots[k];
    let g = s.grid;
    // separate transforms so that θ ≡ 0 gives an exactly zero forcing
    let theta_hat = SpectralField::from_values(g, s.theta.clone()).coeffs().to_vec();
    let omega_hat = SpectralField::from_values(g, s.omega.clone()).coeffs().to_vec();
    let (adv, _) = advection(g, &omega_hat, None);
    let mut f3 = zero_coeffs(g.len());
    add_buoyancy(g, &mut f3, &theta_hat, h.config.gravity);
    (adv.tend, f3)
}

/// Walks the history once, producing the splitting at every snapshot.
/// Between snapshots the forcings are interpolated linearly in time and
/// integrated exactly against the heat semigroup.
pub fn split_sweep<F: FnMut(usize, &Splitting)>(h: &RunHistory, mut visit: F) -> Result<()> {
    let first = h.snapshots.first().ok_or(SolverError::EmptyHistory)?;
    let g = first.grid;
    let n = g.n();
    let omega0 = first.omega_field();
    let k2: Vec<f64> = (0..n * n).map(|idx| g.k2(idx % n, idx / n)).collect();
    let mut w2 = zero_coeffs(n * n);
    let mut w3 = zero_coeffs(n * n);
    let (mut f2_prev, mut f3_prev) = split_forcing(h, 0);
    for (k, snap) in h.snapshots.iter().enumerate() {
        if k > 0 {
            let dt = snap.time - h.snapshots[k - 1].time;
            let (f2, f3) = split_forcing(h, k);
            let upd = |w: &mut Vec<Complex64>, fa: &[Complex64], fb: &[Complex64]| {
                par::for_each_mut(w, |idx, v| {
                    let z = k2[idx] * dt;
                    let (a, b) = duhamel_weights(z);
                    *v = (-z).exp() * *v + dt * (a * fa[idx] + b * fb[idx]);
                });
            };
            upd(&mut w2, &f2_prev, &f2);
            upd(&mut w3, &f3_prev, &f3);
            f2_prev = f2;
            f3_prev = f3;
        }
        let w1 = spectral::heat_semigroup(&omega0, snap.time - first.time)?;
        let w2f = SpectralField::from_hermitian_coeffs(g, w2.clone());
        let w3f = SpectralField::from_hermitian_coeffs(g, w3.clone());
        let omega = snap.omega_field();
        let diff = omega.sub(&w1).sub(&w2f).sub(&w3f).l2_norm();
        let norm = omega.l2_norm();
        let residual = if norm > 0.0 { diff / norm } else { diff };
        visit(k, &Splitting { time: snap.time, w1, w2: w2f, w3: w3f, residual });
    }
    Ok(())
}

/// Splitting `ω = w1 + w2 + w3` at snapshot time `t`.
pub fn vorticity_splitting(h: &RunHistory, t: f64) -> Result<Splitting> {
    let target = h.index_of(t)?;
    let trimmed = RunHistory { config: h.config.clone(), snapshots: h.snapshots[..=target].to_vec() };
    let mut out = None;
    split_sweep(&trimmed, |k, s| {
        if k == target {
            out = Some(s.clone());
        }
    })?;
    Ok(out.expect("target visited"))
}

/// Index pairs `(j, k)` of the second derivatives, in storage order.
pub const HESSIAN_PAIRS: [(u8, u8); 3] = [(1, 1), (1, 2), (2, 2)];

/// `∂_j∂_k v_i` for the velocity `v = ∇^⊥Δ^{-1}w`, ordered
/// `(i, (j,k))` with `i ∈ {1,2}` outer and [`HESSIAN_PAIRS`] inner.
pub fn velocity_hessian(w: &SpectralField) -> [SpectralField; 6] {
    let g = w.grid();
    let (a, b) = biot_savart_coeffs(g, w.coeffs());
    let apply = |u: &[Complex64], (j, k): (u8, u8)| -> Vec<Complex64> {
        let n = g.n();
        (0..n * n)
            .map(|idx| {
                let kk = |ax: u8| if ax == 1 { g.deriv_wavenumber(idx % n) } else { g.deriv_wavenumber(idx / n) };
                -kk(j) * kk(k) * u[idx]
            })
            .collect()
    };
    let [p0, p1, p2] = HESSIAN_PAIRS;
    let (f0, f1) = SpectralField::pair_from_coeffs(g, apply(&a, p0), apply(&a, p1));
    let (f2, f3) = SpectralField::pair_from_coeffs(g, apply(&a, p2), apply(&b, p0));
    let (f4, f5) = SpectralField::pair_from_coeffs(g, apply(&b, p1), apply(&b, p2));
    [f0, f1, f2, f3, f4, f5]
}

/// Second derivatives of the full velocity and of the three split pieces.
#[derive(Debug, Clone)]
pub struct SecondDerivs {
    pub full: [SpectralField; 6],
    pub split: [[SpectralField; 6]; 3],
}

impl SecondDerivs {
    pub fn from_splitting(omega: &SpectralField, s: &Splitting) -> SecondDerivs {
        SecondDerivs {
            full: velocity_hessian(omega),
            split: [velocity_hessian(&s.w1), velocity_hessian(&s.w2), velocity_hessian(&s.w3)],
        }
    }

    /// Largest `sup |·|` over the six components of each set:
    /// `[full, v1, v2, v3]`.
    pub fn sups(&self) -> [f64; 4] {
        let m = |fs: &[SpectralField; 6]| fs.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
        [m(&self.full), m(&self.split[0]), m(&self.split[1]), m(&self.split[2])]
    }
}

pub fn second_derivs_velocity(h: &RunHistory, t: f64) -> Result<SecondDerivs> {
    let k = h.index_of(t)?;
    let s = vorticity_splitting(h, t)?;
    Ok(SecondDerivs::from_splitting(&h.snapshots[k].omega_field(), &s))
}

/// Slack factor applied to every energy bound.
pub const ENERGY_SLACK: f64 = 1.01;

/// Per-snapshot outcome of [`energy_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub time: f64,
    pub energy: f64,
    pub energy_bound: f64,
    pub grad_integral: f64,
    pub grad_bound: f64,
    pub theta_l2: f64,
    pub theta_sup: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub passed: bool,
}

/// Checks `‖u(t)‖² ≤ (‖u₀‖² + ‖θ₀‖²)e^{|g|t} - ‖θ₀‖²`,
/// `∫₀^t ‖∇u‖² ≤ ½(‖u₀‖² + ‖θ₀‖²)e^{|g|t}` and the monotonicity of
/// `‖θ‖_{L²}`, `‖θ‖_∞`, each with [`ENERGY_SLACK`].
pub fn energy_check(h: &RunHistory) -> Result<EnergyReport> {
    let first = h.snapshots.first().ok_or(SolverError::EmptyHistory)?;
    let g = h.config.gravity.abs();
    let u0 = first.diag.energy;
    let th0 = first.diag.theta_l2.powi(2);
    let rows: Vec<EnergyRow> = h
        .snapshots
        .iter()
        .map(|s| {
            let t = s.time - first.time;
            let growth = (g * t).exp_m1();
            let energy_bound = u0 + (u0 + th0) * growth;
            let grad_bound = 0.5 * (u0 + th0) * (1.0 + growth);
            let ok = s.diag.energy <= ENERGY_SLACK * energy_bound
                && s.diag.grad_energy_integral <= ENERGY_SLACK * grad_bound
                && s.diag.theta_l2 <= ENERGY_SLACK * first.diag.theta_l2
                && s.diag.theta_sup <= ENERGY_SLACK * first.diag.theta_sup;
            EnergyRow {
                time: s.time,
                energy: s.diag.energy,
                energy_bound,
                grad_integral: s.diag.grad_energy_integral,
                grad_bound,
                theta_l2: s.diag.theta_l2,
                theta_sup: s.diag.theta_sup,
                ok,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| r.ok);
    Ok(EnergyReport { rows, passed })
}

/// Per-snapshot comparison of the carried tangent field with `∂_αz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentRow {
    pub time: f64,
    /// Largest angle between `W` and `∂_αz` over markers, in radians.
    pub max_angle: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentReport {
    pub rows: Vec<TangentRow>,
    pub max_angle: f64,
}

pub fn tangent_report(contour: &Contour, w: &[Vec2], time: f64) -> TangentRow {
    let geo = contour.tangents();
    let mut max_angle: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (a, b) in geo.iter().zip(w) {
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        max_angle = max_angle.max(cross.atan2(dot).abs());
        let r = b[0].hypot(b[1]) / a[0].hypot(a[1]);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    TangentRow { time, max_angle, min_ratio: lo, max_ratio: hi }
}

/// Compares the tangent field carried through the run with the geometric
/// tangent of the advected contour at every snapshot.
pub fn tangent_field_evolve(h: &RunHistory) -> TangentReport {
    let rows: Vec<TangentRow> = h
        .snapshots
        .iter()
        .filter_map(|s| match (&s.contour, &s.tangents) {
            (Some(c), Some(w)) if w.len() == c.len() => Some(tangent_report(c, w, s.time)),
            _ => None,
        })
        .collect();
    let max_angle = rows.iter().map(|r| r.max_angle).fold(0.0, f64::max);
    TangentReport { rows, max_angle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn duhamel_weights_branches_agree() {
        for z in [0.49999, 0.5, 0.50001] {
            let (a, b) = duhamel_weights(z);
            let (a2, b2) = duhamel_weights(z + 1e-12);
            assert!((a - a2).abs() < 1e-10 && (b - b2).abs() < 1e-10);
        }
        let (a, b) = duhamel_weights(0.0);
        assert_eq!((a, b), (0.5, 0.5));
    }

    #[test]
    fn phi_functions_continuous_and_exact_at_zero() {
        assert_eq!(phi123(0.0), [1.0, 0.5, 1.0 / 6.0]);
        for z in [-1.0, 1.0] {
            let a = phi123(z * (1.0 - 1e-12));
            let b = phi123(z * (1.0 + 1e-12));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-10);
            }
        }
        let [p1, _, _] = phi123(-30.0);
        assert!((p1 - (1.0 - (-30f64).exp()) / 30.0).abs() < 1e-16);
    }

    #[test]
    fn step_plan_divides_horizon() {
        assert_eq!(step_plan(0.005, 1.0), (200, 0.005));
        let (k, dt) = step_plan(0.3, 1.0);
        assert_eq!(k, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(step_plan(0.1, 0.0).0, 0);
    }

    #[test]
    fn raster_rejects_contour_near_edge() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let c = Contour::circle([0.3, PI], 0.2, 32).unwrap();
        assert!(matches!(rasterize_patch(&c, g, 2.0), Err(SolverError::ContourOutsideBox { .. })));
    }
}
