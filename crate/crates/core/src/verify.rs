//! Self-checks of the kernel formulas against independent numerics:
//! space-time quadrature of ball integrals, finite differences of the
//! defining expressions, circle means and special-function quadrature.

use std::f64::consts::PI;

use crate::kernels::{
    ball_integral_d11, g_function, heat_kernel, heat_kernel_second, oseen_ball_integral, oseen_kernel, oseen_split,
    AxisPair, KernelPoint, OseenIndex, G_SERIES_THRESHOLD,
};
use crate::quad::{integrate, Tolerance};
use crate::special::e1;

/// One identity of the suite with its measured error.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub identity: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(identity: impl Into<String>, error: f64, tolerance: f64) -> Check {
        Check { identity: identity.into(), error, tolerance }
    }

    /// NaN errors fail.
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

/// Grid used for the ball-integral identities.
pub const BALL_GRID: [f64; 3] = [0.5, 1.0, 2.0];

// Running maximum that keeps a NaN once seen.
fn worse(acc: f64, e: f64) -> f64 {
    if acc.is_nan() || e.is_nan() {
        f64::NAN
    } else {
        acc.max(e)
    }
}

fn kp(x: f64, y: f64, t: f64) -> KernelPoint {
    KernelPoint::new([x, y], t).expect("finite point, positive time")
}

/// `∫_ε^t ∫_{B_R} k(y, s) dy ds` with `ε = 1e-6 t`, Richardson over `ε, ε/2`.
/// Angles by the trapezoid rule (exact for the trigonometric polynomials in
/// the kernels), radius and time by adaptive Gauss-Kronrod.
pub fn ball_oracle(kernel: &dyn Fn(f64, f64, f64) -> f64, radius: f64, t: f64) -> f64 {
    let angles = 64;
    let shell = |r: f64, s: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let sum: f64 = (0..angles)
            .map(|m| {
                let a = 2.0 * PI * m as f64 / angles as f64;
                kernel(r * a.cos(), r * a.sin(), s)
            })
            .sum();
        r * sum * 2.0 * PI / angles as f64
    };
    let in_time = |s: f64| -> f64 {
        let q = s.sqrt();
        let breaks = [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0].map(|c| c * q);
        integrate(|r| shell(r, s), 0.0, radius, &breaks, Tolerance::new(1e-13 / s.min(1.0), 1e-12))
    };
    let over = |eps: f64| -> f64 {
        let mut breaks = Vec::new();
        let mut b = t;
        while b > eps {
            breaks.push(b);
            b *= 0.25;
        }
        integrate(in_time, eps, t, &breaks, Tolerance::new(1e-12, 1e-12))
    };
    let eps = 1e-6 * t;
    2.0 * over(eps / 2.0) - over(eps)
}

// Deterministic scatter of probe points away from the axes.
fn sample_points(count: usize) -> Vec<(f64, f64, f64)> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|k| {
            let u = (k as f64 * golden).fract();
            let v = (k as f64 * golden * golden + 0.3).fract();
            let r = 0.4 + 1.6 * u;
            let a = 0.2 + 2.0 * PI * v;
            let t = 0.2 + 1.8 * ((k as f64 + 0.5) / count as f64);
            (r * a.cos(), r * a.sin(), t)
        })
        .collect()
}

fn ball_checks(out: &mut Vec<Check>) {
    let d11 = |x: f64, y: f64, s: f64| heat_kernel_second(AxisPair::D11, kp(x, y, s)).unwrap_or(f64::NAN);
    for &r in &BALL_GRID {
        for &t in &BALL_GRID {
            let exact = ball_integral_d11(r, t).unwrap_or(f64::NAN);
            let q = ball_oracle(&d11, r, t);
            out.push(Check::new(format!("ball d11 R={r} t={t}"), (q - exact).abs(), 1e-8));
        }
    }
    for (i, j, k) in [(1, 1, 1), (1, 2, 2), (1, 1, 2), (2, 1, 1)] {
        let idx = OseenIndex { i, j, k };
        let f = |x: f64, y: f64, s: f64| oseen_kernel(idx, kp(x, y, s)).unwrap_or(f64::NAN);
        for &r in &BALL_GRID {
            for &t in &BALL_GRID {
                let exact = oseen_ball_integral(idx, r, t).unwrap_or(f64::NAN);
                let q = ball_oracle(&f, r, t);
                out.push(Check::new(format!("ball {idx} R={r} t={t}"), (q - exact).abs(), 1e-8));
            }
        }
    }
}

fn circle_mean_checks(out: &mut Vec<Check>) {
    let n = 512;
    let mean = |f: &dyn Fn(f64) -> f64| (0..n).map(|m| f(2.0 * PI * m as f64 / n as f64)).sum::<f64>() / n as f64;
    let mut full: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for &(r, t) in &[(1.0, 1.0), (0.3, 0.05), (2.0, 0.7), (0.05, 1.0)] {
        for idx in [OseenIndex { i: 1, j: 1, k: 1 }, OseenIndex { i: 1, j: 2, k: 2 }] {
            full = worse(full, mean(&|a| oseen_kernel(idx, kp(r * a.cos(), r * a.sin(), t)).unwrap_or(f64::NAN)).abs());
        }
        for idx in OseenIndex::all() {
            odd = worse(odd, mean(&|a| oseen_split(idx, r, a, t).map_or(f64::NAN, |v| v.1)).abs());
        }
    }
    out.push(Check::new("circle mean K111, K122", full, 1e-12));
    out.push(Check::new("circle mean of odd parts", odd, 1e-12));
}

fn finite_difference_checks(out: &mut Vec<Check>) {
    let mut heat: f64 = 0.0;
    for (x, y, t) in sample_points(40) {
        // relative error is meaningless near the prefactor zeros
        if (x * x / (2.0 * t) - 1.0).abs() < 0.05 || x.abs() < 0.05 || y.abs() < 0.05 {
            continue;
        }
        let h = 1e-4 * x.hypot(y).max(1.0);
        let k = |a: f64, b: f64| heat_kernel(kp(a, b, t)).unwrap_or(f64::NAN);
        let d11 = (k(x + h, y) - 2.0 * k(x, y) + k(x - h, y)) / (h * h);
        let d12 = (k(x + h, y + h) - k(x + h, y - h) - k(x - h, y + h) + k(x - h, y - h)) / (4.0 * h * h);
        let a11 = heat_kernel_second(AxisPair::D11, kp(x, y, t)).unwrap_or(f64::NAN);
        let a12 = heat_kernel_second(AxisPair::D12, kp(x, y, t)).unwrap_or(f64::NAN);
        heat = worse(worse(heat, ((d11 - a11) / a11).abs()), ((d12 - a12) / a12).abs());
    }
    out.push(Check::new("heat second derivatives vs differences", heat, 1e-5));

    let mut oseen: f64 = 0.0;
    for (x, y, t) in sample_points(20) {
        let scale = OseenIndex::all()
            .iter()
            .map(|&i| oseen_kernel(i, kp(x, y, t)).map_or(f64::NAN, f64::abs))
            .fold(0.0, worse);
        for idx in OseenIndex::all() {
            let table = oseen_kernel(idx, kp(x, y, t)).unwrap_or(f64::NAN);
            let fd = fd_oseen(idx, x, y, t);
            oseen = worse(oseen, (fd - table).abs() / table.abs().max(1e-2 * scale));
        }
    }
    out.push(Check::new("Oseen table vs nested differences", oseen, 1e-3));
}

// x₁/|x|² (1 - e^{-|x|²/4t}) / 2π, i.e. ∂₁Δ⁻¹ of the time-integrated kernel.
fn phi(x: f64, y: f64, t: f64) -> f64 {
    let r2 = x * x + y * y;
    x / r2 * (-(-r2 / (4.0 * t)).exp_m1()) / (2.0 * PI)
}

// Nested central differences ∂_j ∂_i^⊥ ∂_k φ with ∂^⊥ = (-∂₂, ∂₁).
fn fd_oseen(idx: OseenIndex, x: f64, y: f64, t: f64) -> f64 {
    let h = 1e-3;
    let d = |axis: u8, f: &dyn Fn(f64, f64) -> f64, a: f64, b: f64| -> f64 {
        if axis == 1 {
            (f(a + h, b) - f(a - h, b)) / (2.0 * h)
        } else {
            (f(a, b + h) - f(a, b - h)) / (2.0 * h)
        }
    };
    let (perp_axis, perp_sign) = if idx.i == 1 { (2u8, -1.0) } else { (1u8, 1.0) };
    let f0 = |a: f64, b: f64| phi(a, b, t);
    let f1 = |a: f64, b: f64| d(idx.k, &f0, a, b);
    let f2 = |a: f64, b: f64| perp_sign * d(perp_axis, &f1, a, b);
    d(idx.j, &f2, x, y)
}

fn g_checks(out: &mut Vec<Check>) {
    let mut worst: f64 = 0.0;
    for a in 0..100 {
        let r = 10f64.powf(-3.0 + 4.0 * a as f64 / 99.0);
        for b in 0..100 {
            let t = 10f64.powf(-3.0 + 4.0 * b as f64 / 99.0);
            worst = worse(worst, -g_function(r, t).unwrap_or(f64::NAN));
        }
    }
    out.push(Check::new("G >= 0 on log grid", worse(worst, 0.0), 0.0));

    let mut jump: f64 = 0.0;
    for t in [0.01, 1.0, 10.0] {
        let r = (4.0 * t * G_SERIES_THRESHOLD).sqrt();
        let lo = g_function(r * (1.0 - 1e-13), t).unwrap_or(f64::NAN);
        let hi = g_function(r * (1.0 + 1e-13), t).unwrap_or(f64::NAN);
        jump = worse(jump, (hi - lo).abs() / hi.abs());
    }
    out.push(Check::new("G series branch continuity", jump, 1e-10));
}

fn e1_checks(out: &mut Vec<Check>) {
    let mut worst: f64 = 0.0;
    for z in [0.01, 0.3, 0.999, 1.0, 1.001, 2.5, 10.0, 40.0] {
        // E₁(z) = ∫₀¹ e^{-z/v} dv / v
        let breaks: Vec<f64> = [0.1, 0.3, 1.0, 3.0, 10.0].iter().map(|c| c * z).filter(|&b| b < 1.0).collect();
        let q = integrate(|v| if v == 0.0 { 0.0 } else { (-z / v).exp() / v }, 0.0, 1.0, &breaks, Tolerance::new(0.0, 1e-14));
        worst = worse(worst, ((e1(z) - q) / q).abs());
    }
    out.push(Check::new("E1 vs quadrature", worst, 1e-12));
}

/// Runs every identity. Ball integrals dominate the cost.
pub fn kernel_suite() -> Vec<Check> {
    let mut out = Vec::new();
    ball_checks(&mut out);
    circle_mean_checks(&mut out);
    finite_difference_checks(&mut out);
    g_checks(&mut out);
    e1_checks(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        let mut out = Vec::new();
        circle_mean_checks(&mut out);
        finite_difference_checks(&mut out);
        g_checks(&mut out);
        e1_checks(&mut out);
        for c in &out {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::new("x", f64::NAN, 1.0).passed());
        assert!(worse(worse(0.0, f64::NAN), 1.0).is_nan());
    }
}
