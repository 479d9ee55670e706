//! Patch boundary: marker contour, regularity statistics, distance and
//! arc-set queries.
//!
//! A [`Contour`] stores `N` nodes `z(α_m)`, `α_m = m/N`, counterclockwise.
//! Derivatives, curvature and area use the trigonometric interpolant of the
//! nodes; distance, inside tests and circle intersections use the periodic
//! cubic spline through them, refined into a fine polyline.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::spectral::plans;
use crate::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("contour node count must be a power of two and at least 16, got {0}")]
    BadNodeCount(usize),
    #[error("contour has non-finite coordinates")]
    NonFinite,
    #[error("degenerate contour: min |dz/dα| = {0:e}")]
    Degenerate(f64),
    #[error("Hölder exponent must lie in (0,1), got {0}")]
    BadGamma(f64),
    #[error("contour polygon self-intersects (segments {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Spline segments are split into this many polyline pieces.
pub const REFINE: usize = 4;

/// Relative tolerance used to decide that two nearest points tie.
pub const TIE_TOLERANCE: f64 = 1e-8;

fn fft1(data: &mut [Complex64], inverse: bool) {
    let (f, i) = plans(data.len());
    if inverse {
        i.process(data);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    } else {
        f.process(data);
    }
}

fn mode(m: usize, n: usize) -> f64 {
    if m < n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Closed marker curve, counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    nodes: Vec<Vec2>,
}

impl Contour {
    /// Validates the nodes (count, finiteness, simple node polygon) and reverses them (keeping node 0) if they run
    /// clockwise.
    pub fn new(nodes: Vec<Vec2>) -> Result<Contour> {
        let n = nodes.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(GeometryError::BadNodeCount(n));
        }
        if nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if let Some((a, b)) = first_crossing(&nodes) {
            return Err(GeometryError::SelfIntersecting(a, b));
        }
        let mut c = Contour { nodes };
        if c.shoelace_area() < 0.0 {
            c.nodes = reverse_keep_first(&c.nodes);
        }
        Ok(c)
    }

    /// Nodes taken as given (no checks, no re-orientation); used for marker
    /// positions inside a time step.
    pub(crate) fn from_raw(nodes: Vec<Vec2>) -> Contour {
        Contour { nodes }
    }

    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Contour> {
        Self::from_fn(n, |a| [center[0] + radius * a.cos(), center[1] + radius * a.sin()])
    }

    /// Ellipse with the standard parametric angle.
    pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> Result<Contour> {
        Self::from_fn(n, |t| [center[0] + a * t.cos(), center[1] + b * t.sin()])
    }

    /// Ellipse parametrized by polar angle about its center.
    pub fn ellipse_polar(center: Vec2, a: f64, b: f64, n: usize) -> Result<Contour> {
        Self::from_fn(n, |t| {
            let (s, c) = t.sin_cos();
            let r = a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt();
            [center[0] + r * c, center[1] + r * s]
        })
    }

    /// Star `r(φ) = r0 (1 + amp cos(lobes φ))`.
    pub fn star(center: Vec2, r0: f64, amp: f64, lobes: u32, n: usize) -> Result<Contour> {
        Self::from_fn(n, |t| {
            let r = r0 * (1.0 + amp * (lobes as f64 * t).cos());
            [center[0] + r * t.cos(), center[1] + r * t.sin()]
        })
    }

    /// Nodes `f(2π m / n)`.
    pub fn from_fn<F: Fn(f64) -> Vec2>(n: usize, f: F) -> Result<Contour> {
        Contour::new((0..n).map(|m| f(2.0 * PI * m as f64 / n as f64)).collect())
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same curve traversed backwards, not re-oriented.
    pub fn reversed_nodes(&self) -> Vec<Vec2> {
        reverse_keep_first(&self.nodes)
    }

    pub fn translated(&self, d: Vec2) -> Contour {
        Contour { nodes: self.nodes.iter().map(|p| [p[0] + d[0], p[1] + d[1]]).collect() }
    }

    /// Area of the node polygon.
    pub fn shoelace_area(&self) -> f64 {
        let n = self.nodes.len();
        let mut s = 0.0;
        for m in 0..n {
            let p = self.nodes[m];
            let q = self.nodes[(m + 1) % n];
            s += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * s
    }

    /// Fourier coefficients `c_m` of `z = x + iy`, `z(α) = Σ c_m e^{2πimα}`.
    pub fn fourier(&self) -> Vec<Complex64> {
        let n = self.nodes.len();
        let mut z: Vec<Complex64> = self.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        fft1(&mut z, false);
        z.iter().map(|c| c / n as f64).collect()
    }

    /// Area enclosed by the trigonometric interpolant, `π Σ m |c_m|²`.
    pub fn area(&self) -> f64 {
        let c = self.fourier();
        let n = c.len();
        (0..n).filter(|&m| m != n / 2).map(|m| mode(m, n) * c[m].norm_sqr()).sum::<f64>() * PI
    }

    fn derivative_nodes(&self, order: u32) -> Vec<Vec2> {
        let n = self.nodes.len();
        let mut z: Vec<Complex64> = self.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        fft1(&mut z, false);
        for (m, v) in z.iter_mut().enumerate() {
            if m == n / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, 2.0 * PI * mode(m, n)).powu(order);
            }
        }
        fft1(&mut z, true);
        z.iter().map(|c| [c.re, c.im]).collect()
    }

    /// `∂_α z` at the nodes (spectral).
    pub fn tangents(&self) -> Vec<Vec2> {
        self.derivative_nodes(1)
    }

    /// Trigonometric interpolant and its derivative at arbitrary `α`.
    pub fn trig_eval(coeffs: &[Complex64], alpha: f64) -> (Vec2, Vec2) {
        let n = coeffs.len();
        let mut z = Complex64::new(0.0, 0.0);
        let mut dz = Complex64::new(0.0, 0.0);
        for (m, c) in coeffs.iter().enumerate() {
            let k = if m == n / 2 { 0.0 } else { mode(m, n) };
            let w = if m == n / 2 { (PI * n as f64 * alpha).cos() } else { 1.0 };
            let e = Complex64::from_polar(1.0, 2.0 * PI * k * alpha) * w;
            z += c * e;
            dz += c * e * Complex64::new(0.0, 2.0 * PI * k);
        }
        ([z.re, z.im], [dz.re, dz.im])
    }
}

// O(N²) scan of non-adjacent node-polygon segments for proper crossings.
fn first_crossing(nodes: &[Vec2]) -> Option<(usize, usize)> {
    let n = nodes.len();
    let seg = |i: usize| (nodes[i], nodes[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = seg(i);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = seg(j);
            let d1 = cross(sub(b, a), sub(c, a));
            let d2 = cross(sub(b, a), sub(d, a));
            let d3 = cross(sub(d, c), sub(a, c));
            let d4 = cross(sub(d, c), sub(b, c));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Some((i, j));
            }
        }
    }
    None
}

fn reverse_keep_first(nodes: &[Vec2]) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(nodes.len());
    out.push(nodes[0]);
    out.extend(nodes[1..].iter().rev().copied());
    out
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Spectral tangent `∂_α z` and curvature `κ = (z' × z'')/|z'|³` per node.
pub fn tangents_and_curvature(c: &Contour) -> Result<Vec<(Vec2, f64)>> {
    let d1 = c.derivative_nodes(1);
    let d2 = c.derivative_nodes(2);
    let inf = d1.iter().map(|v| norm(*v)).fold(f64::INFINITY, f64::min);
    if !(inf > 1e-12) {
        return Err(GeometryError::Degenerate(inf));
    }
    Ok(d1.iter().zip(&d2).map(|(a, b)| (*a, cross(*a, *b) / norm(*a).powi(3))).collect())
}

/// Regularity statistics of one contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityStats {
    pub inf_tangent: f64,
    pub holder_seminorm: f64,
    pub gamma: f64,
    pub max_curvature: f64,
    pub area: f64,
    pub delta: f64,
}

/// `inf |z'|`, the discrete Hölder seminorm of `z'` over all node pairs,
/// `δ = (inf|z'| / |z'|_γ)^{1/γ}`, max curvature and area.
pub fn regularity_stats(c: &Contour, gamma: f64) -> Result<RegularityStats> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GeometryError::BadGamma(gamma));
    }
    let tk = tangents_and_curvature(c)?;
    let n = tk.len();
    let inf_tangent = tk.iter().map(|(t, _)| norm(*t)).fold(f64::INFINITY, f64::min);
    let max_curvature = tk.iter().map(|(_, k)| k.abs()).fold(0.0, f64::max);
    // |α-β|_per^γ depends only on the index gap
    let weights: Vec<f64> = (0..n)
        .map(|g| {
            let d = g.min(n - g) as f64 / n as f64;
            if g == 0 {
                0.0
            } else {
                d.powf(-gamma)
            }
        })
        .collect();
    let mut holder: f64 = 0.0;
    for a in 0..n {
        let ta = tk[a].0;
        for b in (a + 1)..n {
            let tb = tk[b].0;
            let d = (ta[0] - tb[0]).hypot(ta[1] - tb[1]);
            holder = holder.max(d * weights[b - a]);
        }
    }
    let delta = if holder > 0.0 { (inf_tangent / holder).powf(1.0 / gamma) } else { f64::INFINITY };
    Ok(RegularityStats { inf_tangent, holder_seminorm: holder, gamma, max_curvature, area: c.area(), delta })
}

/// Periodic cubic spline through the nodes, in the parameter `u = α N`.
#[derive(Debug, Clone)]
pub struct Spline {
    pts: Vec<Vec2>,
    m: Vec<Vec2>,
}

impl Spline {
    pub fn new(c: &Contour) -> Spline {
        let n = c.len();
        // Second derivatives solve the circulant system M_{j-1} + 4M_j + M_{j+1} = 6 Δ² z_j.
        let mut z: Vec<Complex64> = c.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        fft1(&mut z, false);
        for (k, v) in z.iter_mut().enumerate() {
            let th = 2.0 * PI * k as f64 / n as f64;
            *v *= 6.0 * (2.0 * th.cos() - 2.0) / (4.0 + 2.0 * th.cos());
        }
        fft1(&mut z, true);
        Spline { pts: c.nodes.clone(), m: z.iter().map(|v| [v.re, v.im]).collect() }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Position, `d/dα` and `d²/dα²` at parameter `α`.
    pub fn eval2(&self, alpha: f64) -> (Vec2, Vec2, Vec2) {
        let n = self.pts.len();
        let u = (alpha * n as f64).rem_euclid(n as f64);
        let j = (u.floor() as usize).min(n - 1);
        let t = u - j as f64;
        let k = (j + 1) % n;
        let (pos, der) = self.eval(alpha);
        let nn = (n * n) as f64;
        let dd = [((1.0 - t) * self.m[j][0] + t * self.m[k][0]) * nn, ((1.0 - t) * self.m[j][1] + t * self.m[k][1]) * nn];
        (pos, der, dd)
    }

    /// Position and `d/dα` at parameter `α` (any real, wrapped).
    pub fn eval(&self, alpha: f64) -> (Vec2, Vec2) {
        let n = self.pts.len();
        let u = (alpha * n as f64).rem_euclid(n as f64);
        let j = (u.floor() as usize).min(n - 1);
        let t = u - j as f64;
        let k = (j + 1) % n;
        let (p0, p1, m0, m1) = (self.pts[j], self.pts[k], self.m[j], self.m[k]);
        let a = 1.0 - t;
        let mut pos = [0.0; 2];
        let mut der = [0.0; 2];
        for d in 0..2 {
            pos[d] = a * p0[d] + t * p1[d] + ((a * a * a - a) * m0[d] + (t * t * t - t) * m1[d]) / 6.0;
            let du = p1[d] - p0[d] + ((-3.0 * a * a + 1.0) * m0[d] + (3.0 * t * t - 1.0) * m1[d]) / 6.0;
            der[d] = du * n as f64;
        }
        (pos, der)
    }
}

/// Spline sampled `REFINE` times per node interval, with parameters.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub pts: Vec<Vec2>,
    pub alpha: Vec<f64>,
}

impl Polyline {
    pub fn new(s: &Spline) -> Polyline {
        let total = s.len() * REFINE;
        let alpha: Vec<f64> = (0..total).map(|i| i as f64 / total as f64).collect();
        let pts = alpha.iter().map(|&a| s.eval(a).0).collect();
        Polyline { pts, alpha }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.pts.len();
        (0..n).map(move |i| (self.pts[i], self.pts[(i + 1) % n]))
    }

    /// Winding number of the closed polyline around `x`.
    pub fn winding(&self, x: Vec2) -> i32 {
        let mut w = 0;
        for (a, b) in self.segments() {
            if a[1] <= x[1] {
                if b[1] > x[1] && cross(sub(b, a), sub(x, a)) > 0.0 {
                    w += 1;
                }
            } else if b[1] <= x[1] && cross(sub(b, a), sub(x, a)) < 0.0 {
                w -= 1;
            }
        }
        w
    }

    /// Distance from `x` to the polyline.
    pub fn distance(&self, x: Vec2) -> f64 {
        self.segments().map(|(a, b)| segment_distance(x, a, b).0).fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(x: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let d = sub(b, a);
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 > 0.0 { (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let p = [a[0] + t * d[0], a[1] + t * d[1]];
    (norm(sub(x, p)), t)
}

/// Contour plus its spline and refined polyline, for repeated queries.
#[derive(Debug, Clone)]
pub struct ContourQuery {
    pub contour: Contour,
    pub spline: Spline,
    pub poly: Polyline,
    sagitta: f64,
}

impl ContourQuery {
    pub fn new(c: &Contour) -> ContourQuery {
        let spline = Spline::new(c);
        let poly = Polyline::new(&spline);
        let total = poly.pts.len();
        let mut sagitta: f64 = 0.0;
        for i in 0..total {
            let mid = spline.eval((i as f64 + 0.5) / total as f64).0;
            let a = poly.pts[i];
            let b = poly.pts[(i + 1) % total];
            sagitta = sagitta.max(norm(sub(mid, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])));
        }
        ContourQuery { contour: c.clone(), spline, poly, sagitta }
    }

    /// Inside test: winding number on the refined polyline, points within
    /// 1e-12 of it count as inside.
    pub fn contains(&self, x: Vec2) -> bool {
        if self.poly.distance(x) > 2.0 * self.sagitta + 1e-12 {
            return self.poly.winding(x) != 0;
        }
        let p = self.distance_probe(x);
        if p.d <= 1e-12 {
            return true;
        }
        let v = sub(x, p.nearest);
        v[0] * p.inward_normal[0] + v[1] * p.inward_normal[1] > 0.0
    }

    /// Nearest point on the spline, ties broken by smallest `α`.
    pub fn distance_probe(&self, x: Vec2) -> DistanceProbe {
        let total = self.poly.pts.len();
        let seg: Vec<(f64, f64)> = self.poly.segments().map(|(a, b)| segment_distance(x, a, b)).collect();
        let dpoly = seg.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let slack = 4.0 * self.sagitta + 1e-12;
        let h = 1.0 / total as f64;
        let mut cands: Vec<(f64, f64)> = Vec::new();
        for (i, s) in seg.iter().enumerate() {
            if s.0 <= dpoly + slack {
                let a0 = self.poly.alpha[i] - h;
                let a1 = self.poly.alpha[i] + 2.0 * h;
                cands.push(self.refine(x, a0, a1));
            }
        }
        let n = self.contour.len();
        for m in 0..n {
            let a = m as f64 / n as f64;
            cands.push((norm(sub(self.contour.nodes[m], x)), a));
        }
        let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let limit = best * (1.0 + TIE_TOLERANCE) + 1e-15;
        let alpha = cands
            .iter()
            .filter(|c| c.0 <= limit)
            .map(|c| c.1.rem_euclid(1.0))
            .fold(f64::INFINITY, f64::min);
        let (p, d) = self.spline.eval(alpha);
        let l = norm(d);
        DistanceProbe { x, d: norm(sub(x, p)), nearest: p, inward_normal: [-d[1] / l, d[0] / l], alpha }
    }

    /// Radii of the local extrema of `|S(α) - x|`, where circles about `x`
    /// become tangent to the contour. Sorted, without duplicates.
    pub fn critical_radii(&self, x: Vec2) -> Vec<f64> {
        let pts = &self.poly.pts;
        let total = pts.len();
        let h = 1.0 / total as f64;
        let rho: Vec<f64> = pts.iter().map(|p| norm(sub(*p, x))).collect();
        let mut out = Vec::new();
        for i in 0..total {
            let (l, c, r) = (rho[(i + total - 1) % total], rho[i], rho[(i + 1) % total]);
            let a0 = self.poly.alpha[i] - h;
            let a1 = self.poly.alpha[i] + h;
            if c <= l && c < r {
                out.push(self.refine_signed(x, a0, a1, 1.0).0);
            } else if c >= l && c > r {
                out.push(-self.refine_signed(x, a0, a1, -1.0).0);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        out
    }

    fn refine(&self, x: Vec2, a0: f64, a1: f64) -> (f64, f64) {
        self.refine_signed(x, a0, a1, 1.0)
    }

    // Golden-section minimum of sign·|S(α) - x| on [a0, a1].
    fn refine_signed(&self, x: Vec2, mut a0: f64, mut a1: f64, sign: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |a: f64| sign * norm(sub(self.spline.eval(a).0, x));
        let mut c = a1 - g * (a1 - a0);
        let mut d = a0 + g * (a1 - a0);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc < fd {
                a1 = d;
                d = c;
                fd = fc;
                c = a1 - g * (a1 - a0);
                fc = f(c);
            } else {
                a0 = c;
                c = d;
                fc = fd;
                d = a0 + g * (a1 - a0);
                fd = f(d);
            }
            if (a1 - a0).abs() < 1e-15 {
                break;
            }
        }
        let a = 0.5 * (a0 + a1);
        (f(a), a.rem_euclid(1.0))
    }

    /// Largest distance from `x` to the polyline vertices.
    pub fn max_distance(&self, x: Vec2) -> f64 {
        self.poly.pts.iter().map(|p| norm(sub(*p, x))).fold(0.0, f64::max) + self.sagitta
    }

    // Newton on |S(α) - x|² = r² from a polyline crossing, returns S - x.
    fn snap_to_circle(&self, x: Vec2, r: f64, mut a: f64) -> Vec2 {
        let a0 = a;
        let step_cap = 2.0 / self.poly.pts.len() as f64;
        for _ in 0..8 {
            let (p, dp) = self.spline.eval(a);
            let y = sub(p, x);
            let f = y[0] * y[0] + y[1] * y[1] - r * r;
            let df = 2.0 * (y[0] * dp[0] + y[1] * dp[1]);
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if (a - step - a0).abs() > step_cap {
                return sub(self.spline.eval(a0).0, x);
            }
            a -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        sub(self.spline.eval(a).0, x)
    }

    /// Set of angles `θ` with `x + r e^{iθ}` inside the patch, with crossings
    /// located on the spline.
    pub fn circle_arcs(&self, x: Vec2, r: f64) -> ArcSet {
        let mut hits: Vec<(f64, bool)> = Vec::new();
        let h = 1.0 / self.poly.pts.len() as f64;
        for (i, (a, b)) in self.poly.segments().enumerate() {
            let d = sub(b, a);
            let p = sub(a, x);
            let qa = d[0] * d[0] + d[1] * d[1];
            let qb = 2.0 * (d[0] * p[0] + d[1] * p[1]);
            let qc = p[0] * p[0] + p[1] * p[1] - r * r;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc <= 0.0 || qa == 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for u in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                if (0.0..1.0).contains(&u) {
                    let y = self.snap_to_circle(x, r, self.poly.alpha[i] + u * h);
                    let th = y[1].atan2(y[0]).rem_euclid(2.0 * PI);
                    // circle tangent (-sin, cos) against the interior normal (-d_y, d_x)
                    let entering = -y[1] * (-d[1]) + y[0] * d[0] > 0.0;
                    hits.push((th, entering));
                }
            }
        }
        if hits.is_empty() {
            let inside = self.contains([x[0] + r, x[1]]);
            return if inside { ArcSet::full() } else { ArcSet::empty() };
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let k = hits.len();
        let alternates = k.is_multiple_of(2) && (0..k).all(|i| hits[i].1 != hits[(i + 1) % k].1);
        let mut arcs = Vec::new();
        for i in 0..k {
            let a = hits[i].0;
            let b = if i + 1 < k { hits[i + 1].0 } else { hits[0].0 + 2.0 * PI };
            let inside = if alternates {
                hits[i].1
            } else {
                let mid = 0.5 * (a + b);
                self.contains([x[0] + r * mid.cos(), x[1] + r * mid.sin()])
            };
            if inside && b > a {
                arcs.push((a, b));
            }
        }
        ArcSet::from_intervals(arcs)
    }
}

/// Result of [`distance_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceProbe {
    pub x: Vec2,
    pub d: f64,
    pub nearest: Vec2,
    pub inward_normal: Vec2,
    pub alpha: f64,
}

pub fn distance_probe(x: Vec2, c: &Contour) -> DistanceProbe {
    ContourQuery::new(c).distance_probe(x)
}

pub fn point_in_patch(x: Vec2, c: &Contour) -> bool {
    ContourQuery::new(c).contains(x)
}

/// Finite union of disjoint angular intervals within `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty() -> ArcSet {
        ArcSet { arcs: Vec::new() }
    }

    pub fn full() -> ArcSet {
        ArcSet { arcs: vec![(0.0, 2.0 * PI)] }
    }

    /// Normalizes intervals (which may extend past 2π) into `[0, 2π)`.
    pub fn from_intervals(raw: Vec<(f64, f64)>) -> ArcSet {
        let tau = 2.0 * PI;
        let mut parts: Vec<(f64, f64)> = Vec::new();
        for (a, b) in raw {
            if b - a >= tau {
                return ArcSet::full();
            }
            let a0 = a.rem_euclid(tau);
            let b0 = a0 + (b - a);
            if b0 > tau {
                parts.push((a0, tau));
                parts.push((0.0, b0 - tau));
            } else {
                parts.push((a0, b0));
            }
        }
        parts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for p in parts {
            if p.1 <= p.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
                _ => merged.push(p),
            }
        }
        ArcSet { arcs: merged }
    }

    /// Closed half circle `{θ : cos(θ - φ) ≥ 0}`.
    pub fn half_circle(phi: f64) -> ArcSet {
        ArcSet::from_intervals(vec![(phi - PI / 2.0, phi + PI / 2.0)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, th: f64) -> bool {
        let t = th.rem_euclid(2.0 * PI);
        self.arcs.iter().any(|&(a, b)| t >= a && t < b)
    }

    /// Symmetric difference.
    pub fn xor(&self, other: &ArcSet) -> ArcSet {
        let mut cuts: Vec<f64> = vec![0.0, 2.0 * PI];
        for (a, b) in self.arcs.iter().chain(&other.arcs) {
            cuts.push(*a);
            cuts.push(*b);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if self.contains(mid) != other.contains(mid) {
                out.push((w[0], w[1]));
            }
        }
        ArcSet::from_intervals(out)
    }

    /// `[∫1, ∫cos2θ, ∫sin2θ, ∫cos4θ, ∫sin4θ]` over the set.
    pub fn moments(&self) -> [f64; 5] {
        let mut m = [0.0; 5];
        for &(a, b) in &self.arcs {
            m[0] += b - a;
            m[1] += ((2.0 * b).sin() - (2.0 * a).sin()) / 2.0;
            m[2] += ((2.0 * a).cos() - (2.0 * b).cos()) / 2.0;
            m[3] += ((4.0 * b).sin() - (4.0 * a).sin()) / 4.0;
            m[4] += ((4.0 * a).cos() - (4.0 * b).cos()) / 4.0;
        }
        m
    }
}

/// Angular samples used by [`rr_measure`].
pub const RR_SAMPLES: usize = 4096;

/// Result of [`rr_measure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrMeasure {
    pub measure: f64,
    pub bound: f64,
    pub gamma: f64,
    pub d: f64,
    pub delta: f64,
}

/// Angular measure of `R_r = S_r Δ Σ` and the
/// lemma bound `2π((1 + 2^γ) d/r + 2^γ (r/δ)^γ)` with the contour's `δ`.
///
/// `S_r` is sampled at `M = 4096` cell midpoints, each cell counted whole, and
/// `Σ` is the exact half circle facing the inward normal at `x*`. Each `S_r`
/// endpoint is off by at most half a cell.
pub fn rr_measure(x: Vec2, r: f64, c: &Contour, gamma: f64) -> Result<RrMeasure> {
    if !(r > 0.0) {
        return Err(GeometryError::BadRadius(r));
    }
    let stats = regularity_stats(c, gamma)?;
    let q = ContourQuery::new(c);
    Ok(rr_measure_with(&q, x, r, gamma, stats.delta))
}

/// [`rr_measure`] with a prebuilt query and a given cutoff `δ`.
pub fn rr_measure_with(q: &ContourQuery, x: Vec2, r: f64, gamma: f64, delta: f64) -> RrMeasure {
    let probe = q.distance_probe(x);
    let s = q.circle_arcs(x, r);
    let n = probe.inward_normal;
    let cell = 2.0 * PI / RR_SAMPLES as f64;
    let sampled = ArcSet::from_intervals(
        (0..RR_SAMPLES)
            .filter(|&k| s.contains((k as f64 + 0.5) * cell))
            .map(|k| (k as f64 * cell, (k + 1) as f64 * cell))
            .collect(),
    );
    let measure = sampled.xor(&ArcSet::half_circle(n[1].atan2(n[0]))).measure();
    let g2 = 2f64.powf(gamma);
    let d = probe.d;
    let bound = 2.0 * PI * ((1.0 + g2) * d / r + g2 * (r / delta).powf(gamma));
    RrMeasure { measure, bound, gamma, d, delta }
}

/// Redistributes nodes to equal arclength of the trigonometric interpolant.
/// Node 0 is kept.
pub fn resample_arclength(c: &Contour, n_new: usize) -> Result<Contour> {
    if n_new < 16 || !n_new.is_power_of_two() {
        return Err(GeometryError::BadNodeCount(n_new));
    }
    let tk = tangents_and_curvature(c)?;
    let n = c.len();
    let coeffs = c.fourier();
    // speed |z'| and its periodic antiderivative
    let mut g: Vec<Complex64> = tk.iter().map(|(t, _)| Complex64::new(norm(*t), 0.0)).collect();
    fft1(&mut g, false);
    let g: Vec<Complex64> = g.iter().map(|v| v / n as f64).collect();
    let total = g[0].re;
    let arclen = |a: f64| -> f64 {
        let mut s = total * a;
        for (m, gm) in g.iter().enumerate() {
            if m == 0 || m == n / 2 {
                continue;
            }
            let k = mode(m, n);
            let e = Complex64::from_polar(1.0, 2.0 * PI * k * a) - 1.0;
            s += (gm * e / Complex64::new(0.0, 2.0 * PI * k)).re;
        }
        s
    };
    let mut nodes = Vec::with_capacity(n_new);
    let mut a = 0.0;
    for k in 0..n_new {
        let target = total * k as f64 / n_new as f64;
        for _ in 0..50 {
            let f = arclen(a) - target;
            let speed = norm(Contour::trig_eval(&coeffs, a).1);
            let step = f / speed;
            a -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(Contour::trig_eval(&coeffs, a).0);
    }
    Contour::new(nodes)
}

/// Ratio of largest to smallest node spacing.
pub fn spacing_ratio(c: &Contour) -> f64 {
    let n = c.len();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for m in 0..n {
        let d = norm(sub(c.nodes[(m + 1) % n], c.nodes[m]));
        lo = lo.min(d);
        hi = hi.max(d);
    }
    hi / lo
}

/// Writes `alpha,x,y` rows.
pub fn write_contour_csv<W: std::io::Write>(c: &Contour, mut w: W) -> std::io::Result<()> {
    writeln!(w, "alpha,x,y")?;
    let n = c.len();
    for (m, p) in c.nodes.iter().enumerate() {
        writeln!(w, "{},{},{}", m as f64 / n as f64, p[0], p[1])?;
    }
    Ok(())
}

/// Reads the format of [`write_contour_csv`].
pub fn read_contour_csv<R: std::io::BufRead>(r: R) -> std::result::Result<Contour, String> {
    let mut nodes = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(format!("line {}: expected 3 fields", i + 1));
        }
        let x = f[1].trim().parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1))?;
        let y = f[2].trim().parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1))?;
        nodes.push([x, y]);
    }
    Contour::new(nodes).map_err(|e| e.to_string())
}
