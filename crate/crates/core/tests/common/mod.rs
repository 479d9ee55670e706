//! Oracles shared by the kernel tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use bpatch::kernels::OseenIndex;
use bpatch::quad::{integrate, Tolerance};

// (1/2π) x1/|x|² (1 - e^{-|x|²/4t}), i.e. ∂_1 Δ^{-1} K.
fn phi(x: f64, y: f64, t: f64) -> f64 {
    let r2 = x * x + y * y;
    x / r2 * (-(-r2 / (4.0 * t)).exp_m1()) / (2.0 * PI)
}

// Nested central differences: ∂_j ∂_i^⊥ ∂_k applied to phi, ∂^⊥ = (-∂_2, ∂_1).
pub fn fd_oseen(idx: OseenIndex, x: f64, y: f64, t: f64) -> f64 {
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

/// Space-time quadrature of a kernel over `(ε, t) × B_R`: trapezoid in angle
/// (exact for the trigonometric polynomials involved), adaptive
/// Gauss-Kronrod in radius and time, Richardson over `ε, ε/2`.
pub fn ball_oracle(kernel: &dyn Fn(f64, f64, f64) -> f64, radius: f64, t: f64) -> f64 {
    let angles = 64;
    let shell = |r: f64, tau: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let s: f64 = (0..angles)
            .map(|m| {
                let a = 2.0 * PI * m as f64 / angles as f64;
                kernel(r * a.cos(), r * a.sin(), tau)
            })
            .sum();
        r * s * 2.0 * PI / angles as f64
    };
    let in_time = |tau: f64| -> f64 {
        let sq = tau.sqrt();
        let breaks = [0.5 * sq, sq, 2.0 * sq, 4.0 * sq, 6.0 * sq, 8.0 * sq, 12.0 * sq, 16.0 * sq, 24.0 * sq];
        integrate(|r| shell(r, tau), 0.0, radius, &breaks, Tolerance::new(1e-13 / tau.min(1.0), 1e-12))
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
    let a = over(eps);
    let b = over(eps / 2.0);
    2.0 * b - a
}

