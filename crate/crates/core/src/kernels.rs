//! Heat-type kernels of the linearized vorticity equation.
//!
//! `K(x,t) = e^{-|x|²/4t}/(4πt)` is the heat kernel; the Oseen-type kernels
//! `K_{ijk} = ∂_1 ∂_j ∂_i^⊥ ∂_k Δ^{-1} K` (with `∂^⊥ = (-∂_2, ∂_1)`) give the
//! velocity Hessian generated by buoyancy. Besides point values the module
//! exposes the angular-harmonic form of every kernel and its closed-form time
//! integrals, which the principal-value quadrature in [`crate::sio`] builds on.

use std::f64::consts::PI;

use thiserror::Error;

use crate::special::{e1, e1_diff, exp_diff, lower_gamma2};
use crate::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("kernel is singular at x = 0")]
    SingularPoint,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("axis index must be 1 or 2, got {0}")]
    BadAxis(u8),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Argument `(x, t)` of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub x: Vec2,
    pub t: f64,
}

impl KernelPoint {
    pub fn new(x: Vec2, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(KernelError::NonPositiveTime(t));
        }
        Ok(KernelPoint { x, t })
    }

    fn r2(&self) -> f64 {
        self.x[0] * self.x[0] + self.x[1] * self.x[1]
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(KernelError::NonPositiveTime(t))
    }
}

/// `e^{-|x|²/4t} / (4πt)`.
pub fn heat_kernel(p: KernelPoint) -> Result<f64> {
    check_t(p.t)?;
    Ok((-p.r2() / (4.0 * p.t)).exp() / (4.0 * PI * p.t))
}

/// Second derivatives of the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisPair {
    D11,
    D12,
    D22,
}

/// `∂_1²K`, `∂_1∂_2K` or `∂_2²K` at `p`. The last is `∂_1²K` with the axes
/// swapped, so `∂_1²K + ∂_2²K = ∂_t K` holds identically.
pub fn heat_kernel_second(pair: AxisPair, p: KernelPoint) -> Result<f64> {
    check_t(p.t)?;
    let t = p.t;
    let e = (-p.r2() / (4.0 * t)).exp();
    let [x1, x2] = p.x;
    Ok(match pair {
        AxisPair::D11 => (x1 * x1 / (2.0 * t) - 1.0) * e / (8.0 * PI * t * t),
        AxisPair::D22 => (x2 * x2 / (2.0 * t) - 1.0) * e / (8.0 * PI * t * t),
        AxisPair::D12 => x1 * x2 * e / (16.0 * PI * t * t * t),
    })
}

/// `lim_{ε→0} ∫_ε^t ∫_{B_R} ∂_1²K dy dτ = -½ e^{-R²/4t}`.
pub fn ball_integral_d11(radius: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(radius > 0.0) {
        return Err(KernelError::NonPositiveRadius(radius));
    }
    Ok(-0.5 * (-radius * radius / (4.0 * t)).exp())
}

/// `Δ^{-1}K = (1/2π)(log|x| + ½ E1(|x|²/4t))`.
pub fn inv_laplace_heat(p: KernelPoint) -> Result<f64> {
    check_t(p.t)?;
    let r2 = p.r2();
    if r2 == 0.0 {
        return Err(KernelError::SingularPoint);
    }
    Ok((0.5 * r2.ln() + 0.5 * e1(r2 / (4.0 * p.t))) / (2.0 * PI))
}

/// Below this value of `r²/4t` the auxiliary function `G` switches to its
/// Taylor series.
pub const G_SERIES_THRESHOLD: f64 = 1e-4;

/// `G(r,t) = (1 - e^{-r²/4t})/r³ - e^{-r²/4t}/(4tr)`, which is `γ(2, r²/4t)/r³`.
pub fn g_function(r: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if r < 0.0 {
        return Err(KernelError::NonPositiveRadius(r));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let w = r * r / (4.0 * t);
    if w < G_SERIES_THRESHOLD {
        let q = r * r / t;
        Ok(r / (32.0 * t * t) * (1.0 - q / 6.0 + q * q / 64.0))
    } else {
        Ok(lower_gamma2(w) / (r * r * r))
    }
}

/// Index triple `(i, j, k)` of an Oseen-type kernel, each in {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OseenIndex {
    pub i: u8,
    pub j: u8,
    pub k: u8,
}

/// The four distinct kernels the eight index triples reduce to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Canonical {
    K111,
    K112,
    K122,
    K211,
}

impl OseenIndex {
    pub fn new(i: u8, j: u8, k: u8) -> Result<Self> {
        for a in [i, j, k] {
            if a != 1 && a != 2 {
                return Err(KernelError::BadAxis(a));
            }
        }
        Ok(OseenIndex { i, j, k })
    }

    /// All eight triples in lexicographic order.
    pub fn all() -> [OseenIndex; 8] {
        let mut out = [OseenIndex { i: 1, j: 1, k: 1 }; 8];
        for (n, o) in out.iter_mut().enumerate() {
            *o = OseenIndex { i: 1 + (n >> 2) as u8, j: 1 + ((n >> 1) & 1) as u8, k: 1 + (n & 1) as u8 };
        }
        out
    }

    /// Canonical kernel and sign: `K_{ijk} = sign · K_canonical`.
    pub fn canonical(self) -> (Canonical, f64) {
        match (self.i, self.j, self.k) {
            (1, 1, 1) => (Canonical::K111, 1.0),
            (1, 1, 2) | (1, 2, 1) => (Canonical::K112, 1.0),
            (1, 2, 2) => (Canonical::K122, 1.0),
            (2, 1, 1) => (Canonical::K211, 1.0),
            (2, 1, 2) | (2, 2, 1) => (Canonical::K111, -1.0),
            _ => (Canonical::K112, -1.0),
        }
    }
}

impl std::fmt::Display for OseenIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "K{}{}{}", self.i, self.j, self.k)
    }
}

/// Closed-form value of `K_{ijk}(x, t)`.
pub fn oseen_kernel(idx: OseenIndex, p: KernelPoint) -> Result<f64> {
    check_t(p.t)?;
    let r2 = p.r2();
    if r2 == 0.0 {
        return Err(KernelError::SingularPoint);
    }
    let (which, sign) = idx.canonical();
    Ok(sign * canonical_value(which, p.x, p.t))
}

fn canonical_value(which: Canonical, x: Vec2, t: f64) -> f64 {
    let [x1, x2] = x;
    let r2 = x1 * x1 + x2 * x2;
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r4 = r2 * r2;
    let r5 = r4 * r;
    let g = g_function(r, t).unwrap_or(0.0);
    let e = (-r2 / (4.0 * t)).exp() / (PI * 16.0 * t * t);
    let it = 1.0 / (4.0 * t);
    match which {
        Canonical::K111 => {
            (24.0 * x1.powi(3) * x2 / (PI * r5) - 12.0 * x1 * x2 / (PI * r3)) * g
                - e * (12.0 * x1.powi(3) * x2 / r4 - 6.0 * x1 * x2 / r2 + 4.0 * x1.powi(3) * x2 / r2 * it)
        }
        Canonical::K112 => {
            let q = x1 * x1 * x2 * x2;
            (24.0 * q / (PI * r5) - 3.0 / (PI * r)) * g - e * (-2.0 + 4.0 * it * q / r2 + 12.0 * q / r4)
        }
        Canonical::K122 => {
            (-12.0 * x1 * x2 / (PI * r3) + 24.0 * x1 * x2.powi(3) / (PI * r5)) * g
                - e * (-6.0 * x1 * x2 / r2 + 12.0 * x1 * x2.powi(3) / r4 + 4.0 * x1 * x2.powi(3) / r2 * it)
        }
        Canonical::K211 => {
            let c = x1 * x1;
            (-24.0 * c * c / (PI * r5) + 24.0 * c / (PI * r3) - 3.0 / (PI * r)) * g
                - e * (12.0 * c / r2 - 12.0 * c * c / r4 - 4.0 * c * c / r2 * it)
        }
    }
}

/// Splits `K_{ijk}` at polar point `(r, α)` into the exponential part
/// `K*` and the `G` part `K^o`, whose mean on every circle (indeed on every
/// half circle) is zero.
pub fn oseen_split(idx: OseenIndex, r: f64, angle: f64, t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    if !(r > 0.0) {
        return Err(KernelError::SingularPoint);
    }
    let h = Harmonics::of(Kernel::Oseen(idx));
    let basis = point_basis(r, t);
    let trig = trig_row(angle);
    let mut star = 0.0;
    let mut odd = 0.0;
    for (hi, tv) in trig.iter().enumerate() {
        odd += h.coef[hi][0] * basis[0] * tv;
        star += (h.coef[hi][1] * basis[1] + h.coef[hi][2] * basis[2]) * tv;
    }
    Ok((star, odd))
}

/// `lim_{ε→0} ∫_ε^t ∫_{B_R} K_{ijk} dy dτ`. Only the circle mean of the
/// kernel survives; it equals `c ∂_t K` with `c = -1/8` for `K_{112}` and
/// `3/8` for `K_{211}`, giving `-c e^{-R²/4t}`.
pub fn oseen_ball_integral(idx: OseenIndex, radius: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if !(radius > 0.0) {
        return Err(KernelError::NonPositiveRadius(radius));
    }
    let c = Kernel::Oseen(idx).iso_coefficient();
    Ok(-c * (-radius * radius / (4.0 * t)).exp())
}

/// Kernels handled by the harmonic machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Heat(AxisPair),
    Oseen(OseenIndex),
}

/// Angular harmonics in the order used by [`Harmonics::coef`].
pub const HARMONICS: [&str; 5] = ["1", "cos2a", "sin2a", "cos4a", "sin4a"];

/// `trig_row(α) = [1, cos 2α, sin 2α, cos 4α, sin 4α]`.
pub fn trig_row(a: f64) -> [f64; 5] {
    let (s2, c2) = (2.0 * a).sin_cos();
    let (s4, c4) = (4.0 * a).sin_cos();
    [1.0, c2, s2, c4, s4]
}

/// Radial-temporal basis `[G/r, E/s², r²E/s³]` with `E = e^{-r²/4s}`.
pub fn point_basis(r: f64, s: f64) -> [f64; 3] {
    let e = (-r * r / (4.0 * s)).exp();
    let g = g_function(r, s).unwrap_or(0.0);
    [g / r, e / (s * s), r * r * e / (s * s * s)]
}

/// Kernel written as `Σ_h Σ_b coef[h][b] · basis_b(r,s) · harmonic_h(α)` with
/// `α` the polar angle of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonics {
    pub coef: [[f64; 3]; 5],
}

impl Harmonics {
    pub fn of(kernel: Kernel) -> Harmonics {
        let p = PI;
        let mut c = [[0.0; 3]; 5];
        let sign = match kernel {
            Kernel::Heat(AxisPair::D11) => {
                c[0] = [0.0, -1.0 / (8.0 * p), 1.0 / (32.0 * p)];
                c[1][2] = 1.0 / (32.0 * p);
                1.0
            }
            Kernel::Heat(AxisPair::D22) => {
                c[0] = [0.0, -1.0 / (8.0 * p), 1.0 / (32.0 * p)];
                c[1][2] = -1.0 / (32.0 * p);
                1.0
            }
            Kernel::Heat(AxisPair::D12) => {
                c[2][2] = 1.0 / (32.0 * p);
                1.0
            }
            Kernel::Oseen(idx) => {
                let (which, sign) = idx.canonical();
                match which {
                    Canonical::K111 => {
                        c[2][2] = -1.0 / (64.0 * p);
                        c[4] = [3.0 / p, -3.0 / (32.0 * p), -1.0 / (128.0 * p)];
                    }
                    Canonical::K112 => {
                        c[0] = [0.0, 1.0 / (32.0 * p), -1.0 / (128.0 * p)];
                        c[3] = [-3.0 / p, 3.0 / (32.0 * p), 1.0 / (128.0 * p)];
                    }
                    Canonical::K122 => {
                        c[2][2] = -1.0 / (64.0 * p);
                        c[4] = [-3.0 / p, 3.0 / (32.0 * p), 1.0 / (128.0 * p)];
                    }
                    Canonical::K211 => {
                        c[0] = [0.0, -3.0 / (32.0 * p), 3.0 / (128.0 * p)];
                        c[1][2] = 1.0 / (32.0 * p);
                        c[3] = [-3.0 / p, 3.0 / (32.0 * p), 1.0 / (128.0 * p)];
                    }
                }
                sign
            }
        };
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v *= sign;
            }
        }
        Harmonics { coef: c }
    }

    /// Evaluates the kernel at polar point `(r, α)` and time `s`.
    pub fn eval(&self, r: f64, angle: f64, s: f64) -> f64 {
        let b = point_basis(r, s);
        let t = trig_row(angle);
        let mut v = 0.0;
        for h in 0..5 {
            v += t[h] * (self.coef[h][0] * b[0] + self.coef[h][1] * b[1] + self.coef[h][2] * b[2]);
        }
        v
    }

    /// Contracts basis integrals with harmonic moments:
    /// `Σ_h Σ_b coef[h][b] basis[b] moments[h]`.
    pub fn contract(&self, basis: &[f64; 3], moments: &[f64; 5]) -> f64 {
        let mut v = 0.0;
        for h in 0..5 {
            if moments[h] == 0.0 {
                continue;
            }
            v += moments[h] * (self.coef[h][0] * basis[0] + self.coef[h][1] * basis[1] + self.coef[h][2] * basis[2]);
        }
        v
    }
}

impl Kernel {
    /// Constant `c` with circle mean of the kernel equal to `c ∂_t K`.
    pub fn iso_coefficient(self) -> f64 {
        let h = Harmonics::of(self);
        // ∂_t K = -E/(4π s²) + r²E/(16π s³)
        h.coef[0][1] / (-1.0 / (4.0 * PI))
    }

    pub fn harmonics(self) -> Harmonics {
        Harmonics::of(self)
    }
}

/// Integrals of the basis over a lag interval `[s_lo, s_hi]`:
/// `m0[b] = ∫ basis_b ds`, `m1[b] = ∫ s basis_b ds`. `s_lo` may be 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabIntegrals {
    pub m0: [f64; 3],
    pub m1: [f64; 3],
}

fn wvar(r: f64, s: f64) -> f64 {
    if s == 0.0 {
        f64::INFINITY
    } else {
        r * r / (4.0 * s)
    }
}

// F2(w) + 1 with F2 = -γ(2,w)/w - e^{-w}, the antiderivative of γ(2,w)/w².
fn f2p1(w: f64) -> f64 {
    if w.is_infinite() {
        return 1.0;
    }
    if w < 0.1 {
        -lower_gamma2(w) / w - (-w).exp_m1()
    } else {
        -lower_gamma2(w) / w - (-w).exp() + 1.0
    }
}

// F3(w) = -γ(2,w)/(2w²) - E1(w)/2, antiderivative of γ(2,w)/w³; F3(∞) = 0.
fn f3(w: f64) -> f64 {
    if w.is_infinite() {
        return 0.0;
    }
    -lower_gamma2(w) / (2.0 * w * w) - 0.5 * e1(w)
}

// F3(wa) - F3(wb) for wa ≥ wb, keeping the logarithms together.
fn f3_diff(wa: f64, wb: f64) -> f64 {
    if wa.is_infinite() {
        return -f3(wb);
    }
    -lower_gamma2(wa) / (2.0 * wa * wa) + lower_gamma2(wb) / (2.0 * wb * wb) + 0.5 * e1_diff(wb, wa)
}

/// Closed-form slab integrals of [`point_basis`] at radius `r > 0`.
pub fn slab_integrals(r: f64, s_lo: f64, s_hi: f64) -> SlabIntegrals {
    let wa = wvar(r, s_lo);
    let wb = wvar(r, s_hi);
    let r2 = r * r;
    let ed = exp_diff(wb, wa); // e^{-wb} - e^{-wa}
    let g2 = if wa.is_infinite() { 1.0 - lower_gamma2(wb) } else { lower_gamma2(wa) - lower_gamma2(wb) };
    let m0 = [(f2p1(wa) - f2p1(wb)) / (4.0 * r2), 4.0 * ed / r2, 16.0 * g2 / r2];
    let m1 = [f3_diff(wa, wb) / 16.0, e1_diff(wb, wa), 4.0 * ed];
    SlabIntegrals { m0, m1 }
}

/// Time integrals of `d/ds` of the heat-kernel mass in a disk of radius
/// `rho`, `M(s) = 1 - e^{-ρ²/4s}` (with `M(0) = 1`): returns
/// `(∫ M' ds, ∫ s M' ds)` over `[s_lo, s_hi]`.
pub fn disk_mass_slab(rho: f64, s_lo: f64, s_hi: f64) -> (f64, f64) {
    if rho == 0.0 {
        return (0.0, 0.0);
    }
    let wa = wvar(rho, s_lo);
    let wb = wvar(rho, s_hi);
    let m0 = -exp_diff(wb, wa);
    let m1 = -(rho * rho / 4.0) * e1_diff(wb, wa);
    (m0, m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    fn kp(x: f64, y: f64, t: f64) -> KernelPoint {
        KernelPoint::new([x, y], t).unwrap()
    }

    #[test]
    fn heat_kernel_examples() {
        assert!((heat_kernel(kp(0.0, 0.0, 1.0)).unwrap() - 0.079_577_471_545_947_67).abs() < 1e-15);
        let v = heat_kernel(kp(2.0, 0.0, 1.0)).unwrap();
        assert!((v - (-1f64).exp() / (4.0 * PI)).abs() < 1e-17);
        assert!((v - 0.029_276_4).abs() < 3e-6);
        assert!(matches!(KernelPoint::new([0.0, 0.0], 0.0), Err(KernelError::NonPositiveTime(_))));
        for t in [0.1f64, 1.0, 7.0] {
            let mass = integrate(
                |r| 2.0 * PI * r * heat_kernel(kp(r, 0.0, t)).unwrap(),
                0.0,
                60.0 * t.sqrt(),
                &[2.0 * t.sqrt(), 8.0 * t.sqrt()],
                Tolerance::new(1e-13, 1e-13),
            );
            assert!((mass - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_examples() {
        assert_eq!(heat_kernel_second(AxisPair::D12, kp(1.3, 0.0, 0.7)).unwrap(), 0.0);
        assert!(heat_kernel_second(AxisPair::D11, kp(2f64.sqrt(), 0.0, 1.0)).unwrap().abs() < 1e-16);
        let v = heat_kernel_second(AxisPair::D11, kp(2.0, 0.0, 1.0)).unwrap();
        assert!((v - (-1f64).exp() / (8.0 * PI)).abs() < 1e-17);
        assert!((v - 0.014_638_2).abs() < 1e-6);
        let p = kp(0.4, -0.9, 0.6);
        let sum = heat_kernel_second(AxisPair::D11, p).unwrap() + heat_kernel_second(AxisPair::D22, p).unwrap();
        let h = 1e-5;
        let dt = (heat_kernel(kp(0.4, -0.9, 0.6 + h)).unwrap() - heat_kernel(kp(0.4, -0.9, 0.6 - h)).unwrap()) / (2.0 * h);
        assert!((sum - dt).abs() < 1e-9);
    }

    #[test]
    fn ball_integral_examples() {
        assert!((ball_integral_d11(1.0, 1.0).unwrap() + 0.389_400_391_535_702_5).abs() < 1e-12);
        assert!(ball_integral_d11(1.0, 1e-4).unwrap().abs() < 1e-300);
    }

    #[test]
    fn inv_laplace_examples() {
        let p = kp(3.0, 4.0, 0.625); // |x|²/4t = 10
        let v = inv_laplace_heat(p).unwrap();
        assert!((v - 5f64.ln() / (2.0 * PI)).abs() < 1e-6);
        let t = 0.390_625; // |x|² = 4t for |x| = 1.25
        let v = inv_laplace_heat(kp(0.75, 1.0, t)).unwrap();
        let want = (1.25f64.ln() + 0.5 * 0.219_383_934_395_520_3) / (2.0 * PI);
        assert!((v - want).abs() < 1e-14);
        assert_eq!(inv_laplace_heat(kp(0.0, 0.0, 1.0)), Err(KernelError::SingularPoint));
    }

    #[test]
    fn inv_laplace_fd_laplacian() {
        let (x, y, t, h) = (1.0, 0.5, 1.0, 1e-3);
        let f = |a: f64, b: f64| inv_laplace_heat(kp(a, b, t)).unwrap();
        let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
        let k = heat_kernel(kp(x, y, t)).unwrap();
        assert!(((lap - k) / k).abs() < 1e-4);
    }

    #[test]
    fn g_function_branches() {
        let r = 1e-5;
        let g = g_function(r, 1.0).unwrap();
        assert!(((g - r / 32.0) / (r / 32.0)).abs() < 1e-6);
        assert!((g_function(50.0, 1.0).unwrap() * 50f64.powi(3) - 1.0).abs() < 1e-12);
        // continuity at the branch point
        let t = 0.7;
        let rb = (4.0 * t * G_SERIES_THRESHOLD).sqrt();
        let lo = g_function(rb * (1.0 - 1e-12), t).unwrap();
        let hi = g_function(rb * (1.0 + 1e-12), t).unwrap();
        assert!(((lo - hi) / hi).abs() < 1e-10);
        assert_eq!(g_function(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn oseen_symmetry_and_index() {
        let all = OseenIndex::all();
        assert_eq!(all.len(), 8);
        assert_eq!(all[3], OseenIndex::new(1, 2, 2).unwrap());
        assert!(OseenIndex::new(3, 1, 1).is_err());
        let p = kp(0.3, 0.8, 0.4);
        let k112 = oseen_kernel(OseenIndex::new(1, 1, 2).unwrap(), p).unwrap();
        let k121 = oseen_kernel(OseenIndex::new(1, 2, 1).unwrap(), p).unwrap();
        assert_eq!(k112, k121);
    }

    #[test]
    fn harmonics_reproduce_closed_forms() {
        let pts: [(f64, f64, f64); 4] = [(0.3, 0.8, 0.4), (-1.2, 0.5, 2.0), (0.05, -0.02, 0.01), (2.0, -3.0, 0.3)];
        for idx in OseenIndex::all() {
            let h = Harmonics::of(Kernel::Oseen(idx));
            for &(x, y, t) in &pts {
                let direct = oseen_kernel(idx, kp(x, y, t)).unwrap();
                let r = (x * x + y * y).sqrt();
                let via = h.eval(r, y.atan2(x), t);
                assert!((direct - via).abs() < 1e-12 * (1.0 + direct.abs()), "{idx} at ({x},{y},{t})");
            }
        }
        for pair in [AxisPair::D11, AxisPair::D12, AxisPair::D22] {
            let h = Harmonics::of(Kernel::Heat(pair));
            let (x, y, t): (f64, f64, f64) = (0.7, -0.3, 0.2);
            let direct = heat_kernel_second(pair, kp(x, y, t)).unwrap();
            let via = h.eval((x * x + y * y).sqrt(), y.atan2(x), t);
            assert!((direct - via).abs() < 1e-13);
        }
    }

    #[test]
    fn iso_coefficients() {
        let c = |i, j, k| Kernel::Oseen(OseenIndex::new(i, j, k).unwrap()).iso_coefficient();
        assert!((Kernel::Heat(AxisPair::D11).iso_coefficient() - 0.5).abs() < 1e-15);
        assert!((c(1, 1, 2) + 0.125).abs() < 1e-15);
        assert!((c(2, 1, 1) - 0.375).abs() < 1e-15);
        assert_eq!(c(1, 1, 1), 0.0);
        assert_eq!(c(1, 2, 2), 0.0);
    }

    #[test]
    fn split_reconstructs_and_odd_part_has_zero_mean() {
        let idx = OseenIndex::new(1, 1, 2).unwrap();
        let (s, o) = oseen_split(idx, 0.5, 1.1, 0.3).unwrap();
        let k = oseen_kernel(idx, kp(0.5 * 1.1f64.cos(), 0.5 * 1.1f64.sin(), 0.3)).unwrap();
        assert!((s + o - k).abs() < 1e-12);
        let n = 512;
        let mean: f64 = (0..n)
            .map(|m| oseen_split(idx, 1.0, 2.0 * PI * m as f64 / n as f64, 1.0).unwrap().1)
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn slab_integrals_match_quadrature() {
        for &(r, lo, hi) in &[(0.3, 0.0, 0.05), (0.3, 0.05, 0.2), (1e-3, 0.0, 0.01), (1e-3, 0.2, 0.25), (2.0, 0.5, 3.0)] {
            let si = slab_integrals(r, lo, hi);
            for b in 0..3 {
                let f0 = |s: f64| if s == 0.0 { 0.0 } else { point_basis(r, s)[b] };
                let q0 = integrate(f0, lo, hi, &[], Tolerance::new(1e-14, 1e-12));
                let q1 = integrate(|s| s * f0(s), lo, hi, &[], Tolerance::new(1e-14, 1e-12));
                let s0 = q0.abs().max(1e-300);
                assert!(((si.m0[b] - q0) / s0).abs() < 1e-8, "m0 b={b} r={r} [{lo},{hi}] {} vs {q0}", si.m0[b]);
                let s1 = q1.abs().max(1e-300);
                assert!(((si.m1[b] - q1) / s1).abs() < 1e-8, "m1 b={b} r={r} [{lo},{hi}] {} vs {q1}", si.m1[b]);
            }
        }
    }

    #[test]
    fn disk_mass_slab_matches_quadrature() {
        let rho = 0.4;
        let dm = |s: f64| if s == 0.0 { 0.0 } else { -(rho * rho / (4.0 * s * s)) * (-rho * rho / (4.0 * s)).exp() };
        for &(lo, hi) in &[(0.0, 0.1), (0.1, 0.7)] {
            let (m0, m1) = disk_mass_slab(rho, lo, hi);
            let q0 = integrate(dm, lo, hi, &[], Tolerance::new(1e-15, 1e-13));
            let q1 = integrate(|s| s * dm(s), lo, hi, &[], Tolerance::new(1e-15, 1e-13));
            assert!((m0 - q0).abs() < 1e-11);
            assert!((m1 - q1).abs() < 1e-11);
        }
    }
}
