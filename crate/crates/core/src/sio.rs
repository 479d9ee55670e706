//! Principal-value evaluation of the buoyancy operators on a tracked patch,
//! and the case-by-case bound ledger.
//!
//! Quantities are space-time integrals `∫₀ᵗ ∫_{D(t-s)} k(y - x, s) dy ds` of
//! heat-type kernels `k` against the patch indicator, at lag `s`. Between
//! snapshots the indicator is interpolated linearly in time (the same model
//! the spectral splitting uses for its forcing), so each snapshot carries a
//! hat-shaped weight in `s` whose integrals against the kernel's radial basis
//! are closed-form ([`slab_integrals`], [`disk_mass_slab`]). In space, around
//! the probe:
//!
//! - inside the patch, the disk up to the boundary distance sees only the
//!   circle mean `c ∂_s K`, integrated exactly;
//! - beyond it each circle meets the patch in an arc set whose harmonic
//!   moments are contracted with the kernel's angular expansion, and the
//!   radius is integrated adaptively.
//!
//! Nothing here is singular for a probe off the contour; the time
//! principal value is carried by the closed-form disk term.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{self, ArcSet, ContourQuery, GeometryError};
use crate::kernels::{disk_mass_slab, slab_integrals, AxisPair, Harmonics, Kernel, KernelError, OseenIndex};
use crate::par;
use crate::quad::{integrate_vec, Tolerance};
use crate::solver::{RunHistory, SolverError};
use crate::Vec2;

#[derive(Debug, Error)]
pub enum SioError {
    #[error("run history is empty")]
    EmptyHistory,
    #[error("time {0} is not a snapshot time of the run")]
    NotInHistory(f64),
    #[error("axis must be 1 or 2, got {0}")]
    BadAxis(u8),
    #[error("gamma must lie in (0, 1), got {0}")]
    BadGamma(f64),
    #[error("histories have different snapshot times")]
    TimeMismatch,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, SioError>;

/// Number of kernels evaluated together by [`pv_all`].
pub const N_KERNELS: usize = 11;

/// Kernels in the order of [`PvReport::raw`]: `∂₁²K, ∂₁∂₂K, ∂₂²K`, then
/// the eight `K_{ijk}` in [`OseenIndex::all`] order.
pub fn kernel_list() -> [Kernel; N_KERNELS] {
    let o = OseenIndex::all();
    [
        Kernel::Heat(AxisPair::D11),
        Kernel::Heat(AxisPair::D12),
        Kernel::Heat(AxisPair::D22),
        Kernel::Oseen(o[0]),
        Kernel::Oseen(o[1]),
        Kernel::Oseen(o[2]),
        Kernel::Oseen(o[3]),
        Kernel::Oseen(o[4]),
        Kernel::Oseen(o[5]),
        Kernel::Oseen(o[6]),
        Kernel::Oseen(o[7]),
    ]
}

fn oseen_slot(idx: OseenIndex) -> usize {
    3 + 4 * (idx.i as usize - 1) + 2 * (idx.j as usize - 1) + (idx.k as usize - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvOptions {
    /// Include the eight nearest periodic images of the patch.
    pub images: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for PvOptions {
    fn default() -> Self {
        PvOptions { images: true, rel_tol: 1e-8, abs_tol: 1e-12 }
    }
}

impl PvOptions {
    fn tol(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol)
    }
}

/// Nearest-boundary data of a probe against one snapshot's patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub d: f64,
    pub inside: bool,
    pub inward_normal: Vec2,
}

/// Patch at one instant: one or more disjoint components.
#[derive(Debug, Clone)]
struct Patch {
    parts: Vec<ContourQuery>,
}

impl Patch {
    fn probe(&self, x: Vec2) -> Option<Probe> {
        let mut best: Option<Probe> = None;
        let mut inside = false;
        for q in &self.parts {
            let p = q.distance_probe(x);
            inside |= q.contains(x);
            if best.is_none_or(|b| p.d < b.d) {
                best = Some(Probe { d: p.d, inside: false, inward_normal: p.inward_normal });
            }
        }
        best.map(|b| Probe { inside, ..b })
    }

    fn arcs(&self, x: Vec2, r: f64) -> ArcSet {
        match self.parts.as_slice() {
            [q] => q.circle_arcs(x, r),
            parts => {
                let raw = parts.iter().flat_map(|q| q.circle_arcs(x, r).intervals().to_vec()).collect();
                ArcSet::from_intervals(raw)
            }
        }
    }

    fn critical_radii(&self, x: Vec2) -> Vec<f64> {
        let mut v: Vec<f64> = self.parts.iter().flat_map(|q| q.critical_radii(x)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn reach(&self, x: Vec2) -> f64 {
        self.parts.iter().map(|q| q.max_distance(x)).fold(0.0, f64::max)
    }
}

/// Read-only view of a run prepared for repeated probe evaluations.
#[derive(Debug, Clone)]
pub struct PvContext {
    times: Vec<f64>,
    patches: Vec<Patch>,
    length: f64,
    spacing: f64,
    raster_width: f64,
    gravity: f64,
    config_gamma: f64,
    u_running: Vec<f64>,
    delta_running: Vec<f64>,
}

impl PvContext {
    pub fn new(h: &RunHistory) -> Result<PvContext> {
        if h.is_empty() {
            return Err(SioError::EmptyHistory);
        }
        let patches = par::map_slice(&h.snapshots, |s| Patch {
            parts: s.contour.iter().map(ContourQuery::new).collect(),
        });
        Ok(PvContext {
            times: h.times(),
            patches,
            length: h.config.grid.length(),
            spacing: h.config.grid.spacing(),
            raster_width: h.config.raster_width,
            gravity: h.config.gravity,
            config_gamma: h.config.gamma,
            u_running: h.snapshots.iter().map(|s| s.diag.u_sup_running).collect(),
            delta_running: h.snapshots.iter().map(|s| s.diag.delta_running_min).collect(),
        })
    }

    /// Context whose patch at each time is the union of both runs' patches.
    /// The components must stay disjoint; velocities and cutoffs are taken
    /// as the worse of the two.
    pub fn union(a: &PvContext, b: &PvContext) -> Result<PvContext> {
        if a.times != b.times {
            return Err(SioError::TimeMismatch);
        }
        let mut out = a.clone();
        for (p, q) in out.patches.iter_mut().zip(&b.patches) {
            p.parts.extend(q.parts.iter().cloned());
        }
        for (u, v) in out.u_running.iter_mut().zip(&b.u_running) {
            *u = u.max(*v);
        }
        for (u, v) in out.delta_running.iter_mut().zip(&b.delta_running) {
            *u = u.min(*v);
        }
        Ok(out)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(SioError::NotInHistory(t))
    }

    /// Probe against every snapshot up to and including time `t`.
    pub fn distance_history(&self, x: Vec2, t: f64) -> Result<Vec<(f64, Option<Probe>)>> {
        let m = self.index_of(t)?;
        Ok((0..=m).map(|k| (self.times[k], self.patches[k].probe(x))).collect())
    }

    /// Probes closer to the contour than this are flagged as near-boundary.
    pub fn near_boundary_distance(&self) -> f64 {
        self.raster_width * self.spacing
    }

    fn images(&self, on: bool) -> Vec<Vec2> {
        let l = self.length;
        if !on {
            return vec![[0.0, 0.0]];
        }
        let mut v = vec![[0.0, 0.0]];
        for a in -1i32..=1 {
            for b in -1i32..=1 {
                if a != 0 || b != 0 {
                    v.push([a as f64 * l, b as f64 * l]);
                }
            }
        }
        v
    }
}

/// Linear weight `a + b s` on the lag interval `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

// Hat weights in lag s = t - τ for snapshots 0..=m (τ_m = t).
fn hat_pieces(times: &[f64], m: usize) -> Vec<Vec<Piece>> {
    let t = times[m];
    let lag: Vec<f64> = times[..=m].iter().map(|&tau| (t - tau).max(0.0)).collect();
    (0..=m)
        .map(|k| {
            let mut v = Vec::with_capacity(2);
            if k < m {
                // towards the newer snapshot (smaller lag)
                let (lo, hi) = (lag[k + 1], lag[k]);
                let w = hi - lo;
                v.push(Piece { lo, hi, a: -lo / w, b: 1.0 / w });
            }
            if k > 0 {
                let (lo, hi) = (lag[k], lag[k - 1]);
                let w = hi - lo;
                v.push(Piece { lo, hi, a: hi / w, b: -1.0 / w });
            }
            v
        })
        .collect()
}

fn lag_basis(r: f64, pieces: &[Piece]) -> [f64; 3] {
    let mut w = [0.0; 3];
    for p in pieces {
        let s = slab_integrals(r, p.lo, p.hi);
        for b in 0..3 {
            w[b] += p.a * s.m0[b] + p.b * s.m1[b];
        }
    }
    w
}

// ∫ φ(s) ∂_s(1 - e^{-ρ²/4s}) ds, the lag-weighted heat mass in B_ρ.
fn lag_disk(rho: f64, pieces: &[Piece]) -> f64 {
    if rho.is_infinite() {
        return 0.0;
    }
    pieces
        .iter()
        .map(|p| {
            let (m0, m1) = disk_mass_slab(rho, p.lo, p.hi);
            p.a * m0 + p.b * m1
        })
        .sum()
}

// ∫_a^b r Σ_k contract(h_k, W(r), moments(set(r))) dr. Arc lengths behave
// like square roots at tangency radii, so the range is split there and each
// piece gets a smoothstep substitution that flattens its endpoints.
fn radial<const K: usize, F>(a: f64, b: f64, breaks: &[f64], pieces: &[Piece], hs: &[Harmonics; K], set: F, tol: Tolerance) -> [f64; K]
where
    F: Fn(f64) -> ArcSet,
{
    let mut out = [0.0; K];
    if !(b > a) || pieces.is_empty() {
        return out;
    }
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&r| r > a && r < b));
    edges.push(b);
    for e in edges.windows(2) {
        let v = radial_piece(e[0], e[1], pieces, hs, &set, tol);
        for k in 0..K {
            out[k] += v[k];
        }
    }
    out
}

fn radial_piece<const K: usize, F>(a: f64, b: f64, pieces: &[Piece], hs: &[Harmonics; K], set: &F, tol: Tolerance) -> [f64; K]
where
    F: Fn(f64) -> ArcSet,
{
    if !(b > a) {
        return [0.0; K];
    }
    let w = b - a;
    let est = integrate_vec(
        |v| {
            let r = a + w * v * v * (3.0 - 2.0 * v);
            let jac = w * 6.0 * v * (1.0 - v);
            let mut out = [0.0; K];
            if jac == 0.0 || r <= 0.0 {
                return out;
            }
            let m = set(r).moments();
            if m.iter().all(|&x| x == 0.0) {
                return out;
            }
            let basis = lag_basis(r, pieces);
            for k in 0..K {
                out[k] = r * jac * hs[k].contract(&basis, &m);
            }
            out
        },
        0.0,
        1.0,
        &[],
        tol,
    );
    est.value
}

// Contribution of one snapshot to all kernels over radii [lo, hi] around x.
fn snapshot_terms(
    patch: &Patch,
    x: Vec2,
    pieces: &[Piece],
    window: (f64, f64),
    hs: &[Harmonics; N_KERNELS],
    iso: &[f64; N_KERNELS],
    tol: Tolerance,
) -> [f64; N_KERNELS] {
    let mut out = [0.0; N_KERNELS];
    let Some(p) = patch.probe(x) else { return out };
    let (lo, hi) = window;
    if p.inside {
        let top = hi.min(p.d);
        if top > lo {
            let w = lag_disk(top, pieces) - lag_disk(lo, pieces);
            for k in 0..N_KERNELS {
                out[k] += iso[k] * w;
            }
        }
    }
    let a = lo.max(p.d);
    let b = hi.min(patch.reach(x));
    let breaks = if b > a { patch.critical_radii(x) } else { Vec::new() };
    let outer = radial(a, b, &breaks, pieces, hs, |r| patch.arcs(x, r), tol);
    for k in 0..N_KERNELS {
        out[k] += outer[k];
    }
    out
}

// Σ over snapshots and images of the window integrals, without gravity.
fn window_integrals(ctx: &PvContext, x: Vec2, m: usize, window: (f64, f64), opts: &PvOptions) -> [f64; N_KERNELS] {
    let kernels = kernel_list();
    let hs: [Harmonics; N_KERNELS] = kernels.map(|k| k.harmonics());
    let iso: [f64; N_KERNELS] = kernels.map(|k| k.iso_coefficient());
    let pieces = hat_pieces(&ctx.times, m);
    let shifts = ctx.images(opts.images);
    let tol = opts.tol();
    let jobs: Vec<(usize, Vec2)> = (0..=m).flat_map(|k| shifts.iter().map(move |s| (k, *s))).collect();
    let parts = par::map_slice(&jobs, |&(k, s)| {
        snapshot_terms(&ctx.patches[k], [x[0] - s[0], x[1] - s[1]], &pieces[k], window, &hs, &iso, tol)
    });
    let mut total = [0.0; N_KERNELS];
    for p in parts {
        for k in 0..N_KERNELS {
            total[k] += p[k];
        }
    }
    total
}

/// All buoyancy-generated derivatives at one probe and snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvReport {
    pub x: Vec2,
    pub t: f64,
    /// Distance to the contour at time `t`.
    pub d: f64,
    /// Closer than one raster ramp to the contour; values there carry the
    /// spatial singularity of the kernels and are not reliable.
    pub near_boundary: bool,
    /// Space-time integrals of [`kernel_list`] against the patch.
    pub raw: [f64; N_KERNELS],
    pub gravity: f64,
}

impl PvReport {
    /// `∂_k ω₃`, `k ∈ {1, 2}`.
    pub fn grad_omega3(&self, axis: u8) -> Result<f64> {
        match axis {
            1 => Ok(self.gravity * self.raw[0]),
            2 => Ok(self.gravity * self.raw[1]),
            a => Err(SioError::BadAxis(a)),
        }
    }

    /// `∂_j ∂_k (v₃)_i` for `idx = (i, j, k)`.
    pub fn hessian_v3(&self, idx: OseenIndex) -> f64 {
        self.gravity * self.raw[oseen_slot(idx)]
    }
}

/// Evaluates every kernel at `x` and snapshot time `t`.
pub fn pv_all(ctx: &PvContext, x: Vec2, t: f64, opts: &PvOptions) -> Result<PvReport> {
    let m = ctx.index_of(t)?;
    let d = ctx.patches[m].probe(x).map_or(f64::INFINITY, |p| p.d);
    let raw = if ctx.gravity == 0.0 {
        [0.0; N_KERNELS]
    } else {
        window_integrals(ctx, x, m, (0.0, f64::INFINITY), opts)
    };
    Ok(PvReport { x, t, d, near_boundary: d < ctx.near_boundary_distance(), raw, gravity: ctx.gravity })
}

/// `∂_k ω₃(x, t)` by principal-value quadrature over the tracked patch.
pub fn grad_omega3_pv(x: Vec2, t: f64, h: &RunHistory, axis: u8) -> Result<f64> {
    if axis != 1 && axis != 2 {
        return Err(SioError::BadAxis(axis));
    }
    let ctx = PvContext::new(h)?;
    pv_all(&ctx, x, t, &PvOptions::default())?.grad_omega3(axis)
}

/// `∂_j ∂_k (v₃)_i(x, t)` for `idx = (i, j, k)`.
pub fn hessian_v3_pv(x: Vec2, t: f64, h: &RunHistory, idx: OseenIndex) -> Result<f64> {
    let ctx = PvContext::new(h)?;
    Ok(pv_all(&ctx, x, t, &PvOptions::default())?.hessian_v3(idx))
}

/// Which half of the case analysis a probe falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    One,
    Two,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::One => 1,
            Case::Two => 2,
        }
    }
}

/// Per-probe record of the near-field decomposition of `∂₁ω₃` (with unit
/// buoyancy) and the closed-form bounds of each piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundLedger {
    pub x: Vec2,
    pub t: f64,
    pub d_t: f64,
    /// Minimum distance over snapshots up to `t`.
    pub eps: f64,
    /// Running sup of `|u|` up to `t`.
    pub u: f64,
    pub delta: f64,
    /// `(d_t - ε) / 2U`, Case 2 only.
    pub t_star: Option<f64>,
    pub case: Case,
    pub j: [f64; 4],
    pub j_bound: [f64; 4],
    pub i1: f64,
    pub i1_bound: f64,
}

impl BoundLedger {
    pub fn j_pass(&self) -> [bool; 4] {
        [0, 1, 2, 3].map(|k| self.j[k] <= self.j_bound[k])
    }

    pub fn passed(&self) -> bool {
        self.j_pass().iter().all(|&p| p) && self.i1.abs() <= self.i1_bound
    }
}

/// Closed-form bounds on `J₁..J₄` for the given case.
///
/// The `J₄` bound is `54 (L₇ + L₈)` with the displayed bounds on `L₇`
/// (through `M₁, M₂` or `M₃, N₁, N₂`) and `L₈ ≤ 2^γ/4γ`.
pub fn j_bounds(case: Case, u: f64, t: f64, delta: f64, gamma: f64) -> [f64; 4] {
    let g2 = 2f64.powf(gamma);
    let sq = (2.0 * PI).sqrt();
    let m2 = u * PI.sqrt() / 4.0 * t.sqrt() + u * t / (4.0 * delta);
    let l8 = g2 / (4.0 * gamma);
    match case {
        Case::One => [
            4.0 + u * u * t / 4.0,
            2.0 + u * u * t / 8.0,
            36.0 + 6.0 * g2 / gamma + 4.5 * u * sq * t.sqrt(),
            54.0 * (1.5 + m2 + l8),
        ],
        Case::Two => [
            4.5 + u * delta + u * u * t / 4.0,
            2.5 + 0.5 * u * delta + u * u * t / 8.0,
            13.5 + 12.0 * g2 / gamma + 9.0 * u * delta + 4.5 * u * sq * t.sqrt(),
            54.0 * (4.5 + 1.5 * delta * u + m2 + l8),
        ],
    }
}

/// `(4t/δ² + 1/2) e^{-δ²/4t}`, the bound on the far part `|I₁|`.
pub fn i1_bound(t: f64, delta: f64) -> f64 {
    if delta.is_infinite() {
        return 0.0;
    }
    (4.0 * t / (delta * delta) + 0.5) * (-delta * delta / (4.0 * t)).exp()
}

// Largest radius at which the Gaussian kernels still matter over lags ≤ t.
fn gaussian_reach(t: f64) -> f64 {
    (4.0 * t * 80.0).sqrt()
}

/// Builds the ledger for probe `x` at snapshot time `t`.
///
/// `J₁` is the disk part up to `min(d, δ)` (present only while `x` is
/// inside), `J₂` the half circle `Σ` on `[d, δ]`, `J₃` and `J₄` the
/// `∂₁²K` and `K₁₁₂` G-part integrals over `R_r = S_r Δ Σ` on `[d, δ]`.
/// All pieces use the snapshot hat weights in time and no periodic images.
pub fn bound_ledger(ctx: &PvContext, x: Vec2, t: f64, gamma: f64) -> Result<BoundLedger> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SioError::BadGamma(gamma));
    }
    let m = ctx.index_of(t)?;
    let delta = if gamma == ctx.config_gamma {
        ctx.delta_running[m]
    } else {
        let mut d = f64::INFINITY;
        for q in ctx.patches[..=m].iter().flat_map(|p| &p.parts) {
            d = d.min(geometry::regularity_stats(&q.contour, gamma)?.delta);
        }
        d
    };
    let u = ctx.u_running[m];
    let probes: Vec<Option<Probe>> = (0..=m).map(|k| ctx.patches[k].probe(x)).collect();
    let dist = |k: usize| probes[k].map_or(f64::INFINITY, |p| p.d);
    let d_t = dist(m);
    let eps = (0..=m).map(dist).fold(f64::INFINITY, f64::min);
    let case = if u > 0.0 && d_t > 2.0 * eps { Case::Two } else { Case::One };
    let t_star = match case {
        Case::Two => Some((d_t - eps) / (2.0 * u)),
        Case::One => None,
    };

    let pieces = hat_pieces(&ctx.times, m);
    let tol = Tolerance::new(1e-12, 1e-8);
    let d11 = Kernel::Heat(AxisPair::D11);
    let c11 = d11.iso_coefficient();
    let mut k112o = Kernel::Oseen(OseenIndex { i: 1, j: 1, k: 2 }).harmonics();
    for row in k112o.coef.iter_mut() {
        row[1] = 0.0;
        row[2] = 0.0;
    }
    let hs = [d11.harmonics(), k112o];
    let parts = par::map_range(m + 1, |k| {
        let Some(p) = probes[k] else { return [0.0; 4] };
        let dk = p.d.min(delta);
        let disk = if p.inside { c11 * lag_disk(dk, &pieces[k]) } else { 0.0 };
        // half circle: only the circle mean survives, half of the annulus
        let half = 0.5 * c11 * (lag_disk(delta, &pieces[k]) - lag_disk(dk, &pieces[k]));
        let sigma = ArcSet::half_circle(p.inward_normal[1].atan2(p.inward_normal[0]));
        let patch = &ctx.patches[k];
        let reach = patch.reach(x);
        let r_hi = delta.min(reach.max(gaussian_reach(t)));
        let mut breaks = patch.critical_radii(x);
        breaks.push(reach);
        let rr = radial(dk, r_hi, &breaks, &pieces[k], &hs, |r| {
            if r > reach {
                sigma.clone()
            } else {
                patch.arcs(x, r).xor(&sigma)
            }
        }, tol);
        [disk, half, rr[0], rr[1]]
    });
    let mut sums = [0.0; 4];
    for p in parts {
        for k in 0..4 {
            sums[k] += p[k];
        }
    }
    let j = sums.map(f64::abs);

    let far = window_integrals(ctx, x, m, (delta, f64::INFINITY), &PvOptions::default())[0];
    Ok(BoundLedger {
        x,
        t,
        d_t,
        eps,
        u,
        delta,
        t_star,
        case,
        j,
        j_bound: j_bounds(case, u, t, delta, gamma),
        i1: far,
        i1_bound: i1_bound(t, delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_weights_partition_unity() {
        let times = [0.0, 0.1, 0.25, 0.3];
        let p = hat_pieces(&times, 3);
        // lags are 0.3, 0.2, 0.05, 0
        for s in [0.01, 0.03, 0.1, 0.17, 0.25, 0.29] {
            let total: f64 = p.iter().flatten().filter(|q| s > q.lo && s < q.hi).map(|q| q.a + q.b * s).sum();
            assert!((total - 1.0).abs() < 1e-12, "{s} {total}");
        }
        assert!((p[2][0].a + p[2][0].b * 0.05 - 1.0).abs() < 1e-12);
        assert!((p[3][0].a).abs() - 1.0 < 1e-12 && p[3].len() == 1);
    }

    #[test]
    fn oseen_slots_match_list() {
        let ks = kernel_list();
        for idx in OseenIndex::all() {
            assert_eq!(ks[oseen_slot(idx)], Kernel::Oseen(idx));
        }
    }

    #[test]
    fn bounds_reduce_without_motion() {
        let b = j_bounds(Case::One, 0.0, 1.0, 0.3, 0.5);
        assert_eq!(b[0], 4.0);
        assert_eq!(b[1], 2.0);
        assert!((b[2] - (36.0 + 6.0 * 2f64.sqrt() / 0.5)).abs() < 1e-12);
        assert!(i1_bound(1.0, f64::INFINITY) == 0.0);
        assert!((i1_bound(1.0, 2.0) - 1.5 * (-1f64).exp()).abs() < 1e-15);
    }
}
