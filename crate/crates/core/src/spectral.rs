//! Periodic grid fields with FFT-backed spectral operators.
//!
//! Node `(i, j)` sits at `(i h, j h)` with `h = L/n`; values and Fourier
//! coefficients are stored row-major with the x1 index fastest. Forward
//! transforms are unnormalized, so `f(x) = n^{-2} Σ_k f̂_k e^{ik·x}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::par;
use crate::Vec2;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size must be a power of two and at least 32, got {0}")]
    BadSize(usize),
    #[error("box length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("heat semigroup time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("grid mismatch: {0:?} vs {1:?}")]
    GridMismatch(Grid, Grid),
    #[error("bad snapshot: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Square periodic grid `[0, L)²` with `n` nodes per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 32 || !n.is_power_of_two() {
            return Err(SpectralError::BadSize(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SpectralError::BadLength(length));
        }
        Ok(Grid { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    /// Signed integer mode of storage index `idx` (Nyquist maps to `-n/2`).
    pub fn mode(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let m = idx as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Wavenumber `2π m / L` of storage index `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI / self.length * self.mode(idx) as f64
    }

    /// Wavenumber used for odd multipliers (`i k`): zero at Nyquist.
    pub fn deriv_wavenumber(&self, idx: usize) -> f64 {
        if idx == self.n / 2 {
            0.0
        } else {
            self.wavenumber(idx)
        }
    }

    /// `|k|²` at storage position `(i, j)`.
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        let a = self.wavenumber(i);
        let b = self.wavenumber(j);
        a * a + b * b
    }

    /// Cell area `h²`, the quadrature weight of a node.
    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }
}

type Plan = Arc<dyn Fft<f64>>;

pub(crate) fn plans(n: usize) -> (Plan, Plan) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in (j + 1)..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

fn rows(data: &mut [Complex64], n: usize, plan: &Plan) {
    par::for_each_chunk_mut(data, n * 8, |_, chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for row in chunk.chunks_mut(n) {
            plan.process_with_scratch(row, &mut scratch);
        }
    });
}

/// In-place unnormalized forward 2D FFT of an `n × n` array.
pub fn fft2(data: &mut [Complex64], n: usize) {
    let (fwd, _) = plans(n);
    rows(data, n, &fwd);
    transpose(data, n);
    rows(data, n, &fwd);
    transpose(data, n);
}

/// In-place inverse 2D FFT, normalized by `1/n²`.
pub fn ifft2(data: &mut [Complex64], n: usize) {
    let (_, inv) = plans(n);
    rows(data, n, &inv);
    transpose(data, n);
    rows(data, n, &inv);
    transpose(data, n);
    let s = 1.0 / (n * n) as f64;
    par::for_each_mut(data, |_, v| *v *= s);
}

/// Forward transforms of two real arrays with one complex FFT.
pub fn fft_pair(a: &[f64], b: &[f64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    fft2(&mut z, n);
    let mut fa = vec![Complex64::new(0.0, 0.0); n * n];
    let mut fb = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let jm = (n - j) % n;
        for i in 0..n {
            let im = (n - i) % n;
            let zk = z[j * n + i];
            let zm = z[jm * n + im].conj();
            fa[j * n + i] = (zk + zm) * 0.5;
            fb[j * n + i] = (zk - zm) * Complex64::new(0.0, -0.5);
        }
    }
    (fa, fb)
}

/// Inverse transforms of two Hermitian coefficient arrays with one
/// complex FFT. Returns the two real node arrays.
pub fn ifft_pair(fa: &[Complex64], fb: &[Complex64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut z: Vec<Complex64> = fa.iter().zip(fb).map(|(&x, &y)| x + Complex64::new(0.0, 1.0) * y).collect();
    ifft2(&mut z, n);
    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
}

/// Real periodic field with synchronized node values and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> SpectralField {
        SpectralField { grid, values: vec![0.0; grid.len()], coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> SpectralField {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut coeffs, grid.n);
        SpectralField { grid, values, coeffs }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync + Send>(grid: Grid, f: F) -> SpectralField {
        let n = grid.n;
        let values = par::map_range(grid.len(), |idx| {
            let [x, y] = grid.node(idx % n, idx / n);
            f(x, y)
        });
        SpectralField::from_values(grid, values)
    }

    /// Builds a field from coefficients, discarding any anti-Hermitian part.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> SpectralField {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count does not match grid");
        let mut z = coeffs;
        ifft2(&mut z, grid.n);
        let values: Vec<f64> = z.iter().map(|c| c.re).collect();
        SpectralField::from_values(grid, values)
    }

    /// Builds a field from coefficients already known to be Hermitian.
    pub fn from_hermitian_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> SpectralField {
        let mut z = coeffs.clone();
        ifft2(&mut z, grid.n);
        SpectralField { grid, values: z.iter().map(|c| c.re).collect(), coeffs }
    }

    /// Two fields from Hermitian coefficient arrays with a single inverse FFT.
    pub fn pair_from_coeffs(grid: Grid, a: Vec<Complex64>, b: Vec<Complex64>) -> (SpectralField, SpectralField) {
        let (va, vb) = ifft_pair(&a, &b, grid.n);
        (SpectralField { grid, values: va, coeffs: a }, SpectralField { grid, values: vb, coeffs: b })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n + i]
    }

    fn map_coeffs<F: Fn(usize, usize, Complex64) -> Complex64 + Sync + Send>(&self, f: F) -> Vec<Complex64> {
        let n = self.grid.n;
        let c = &self.coeffs;
        par::map_range(n * n, |idx| f(idx % n, idx / n, c[idx]))
    }

    /// Applies a Fourier multiplier `m(i, j)` that preserves real fields.
    pub fn apply_multiplier<F: Fn(usize, usize) -> Complex64 + Sync + Send>(&self, m: F) -> SpectralField {
        let c = self.map_coeffs(|i, j, v| v * m(i, j));
        SpectralField::from_hermitian_coeffs(self.grid, c)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `∫ f² dx` from node values.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// `∫ f² dx` from coefficients (Parseval).
    pub fn l2_norm_sq_spectral(&self) -> f64 {
        let n2 = self.grid.len() as f64;
        self.grid.cell_area() / n2 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `∫ f dx`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().sum::<f64>()
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SpectralField, s: f64) -> SpectralField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        SpectralField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * s).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }
}

/// `∂f/∂x_axis` (axis 1 or 2); the Nyquist mode of that axis is zeroed.
pub fn derivative(f: &SpectralField, axis: u8) -> SpectralField {
    let g = f.grid;
    f.apply_multiplier(|i, j| {
        let k = if axis == 1 { g.deriv_wavenumber(i) } else { g.deriv_wavenumber(j) };
        Complex64::new(0.0, k)
    })
}

/// Velocity `u = ∇^⊥ Δ^{-1} ω = (-∂_2 ψ, ∂_1 ψ)` with the mean mode set to 0.
pub fn biot_savart(omega: &SpectralField) -> (SpectralField, SpectralField) {
    let g = omega.grid;
    let (a, b) = biot_savart_coeffs(g, omega.coeffs());
    SpectralField::pair_from_coeffs(g, a, b)
}

/// Coefficient-space Biot-Savart: `û = i (k2, -k1) ω̂ / |k|²`.
pub fn biot_savart_coeffs(g: Grid, w: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = g.n;
    let mut u1 = vec![Complex64::new(0.0, 0.0); n * n];
    let mut u2 = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            let k2 = g.k2(i, j);
            if k2 == 0.0 {
                continue;
            }
            let s = w[idx] / k2;
            u1[idx] = Complex64::new(0.0, g.deriv_wavenumber(j)) * s;
            u2[idx] = Complex64::new(0.0, -g.deriv_wavenumber(i)) * s;
        }
    }
    (u1, u2)
}

/// `e^{tΔ} f`.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(SpectralError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    Ok(f.apply_multiplier(|i, j| Complex64::new((-t * g.k2(i, j)).exp(), 0.0)))
}

/// True if storage position `(i, j)` survives the 2/3 rule.
pub fn dealias_keep(g: Grid, i: usize, j: usize) -> bool {
    let cut = g.n as i64 / 3;
    g.mode(i).abs() <= cut && g.mode(j).abs() <= cut
}

/// 2/3-rule projection: zeroes modes with `max(|m1|, |m2|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    f.apply_multiplier(|i, j| Complex64::new(if dealias_keep(g, i, j) { 1.0 } else { 0.0 }, 0.0))
}

/// How [`evaluate_at_points`] computed its result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    DirectSum,
    BSpline,
}

impl EvalMethod {
    /// Direct Fourier sums up to 4096 points, B-spline beyond.
    pub fn for_count(count: usize) -> EvalMethod {
        if count <= 4096 {
            EvalMethod::DirectSum
        } else {
            EvalMethod::BSpline
        }
    }
}

/// Values of `f` at arbitrary points (periodically wrapped).
pub fn evaluate_at_points(f: &SpectralField, pts: &[Vec2]) -> Vec<f64> {
    evaluate_with(f, pts, EvalMethod::for_count(pts.len()))
}

pub fn evaluate_with(f: &SpectralField, pts: &[Vec2], method: EvalMethod) -> Vec<f64> {
    match method {
        EvalMethod::DirectSum => par::map_slice(pts, |p| direct_sum(f, *p)),
        EvalMethod::BSpline => {
            let s = BSpline5::new(f);
            par::map_slice(pts, |p| s.value(*p))
        }
    }
}

fn direct_sum(f: &SpectralField, p: Vec2) -> f64 {
    let g = f.grid;
    let n = g.n;
    let ex: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, g.wavenumber(i) * p[0])).collect();
    let mut total = 0.0;
    for j in 0..n {
        let row = &f.coeffs[j * n..(j + 1) * n];
        let mut s = Complex64::new(0.0, 0.0);
        for (c, e) in row.iter().zip(&ex) {
            s += c * e;
        }
        total += (s * Complex64::from_polar(1.0, g.wavenumber(j) * p[1])).re;
    }
    total / (n * n) as f64
}

fn bspline_symbol(m: usize, n: usize) -> f64 {
    let th = 2.0 * PI * m as f64 / n as f64;
    (66.0 + 52.0 * th.cos() + 2.0 * (2.0 * th).cos()) / 120.0
}

fn quintic_weights(t: f64) -> ([f64; 6], [f64; 6]) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let s = 1.0 / 120.0;
    let u = 1.0 - t;
    let w = [
        u.powi(5) * s,
        (26.0 - 50.0 * t + 20.0 * t2 + 20.0 * t3 - 20.0 * t4 + 5.0 * t5) * s,
        (66.0 - 60.0 * t2 + 30.0 * t4 - 10.0 * t5) * s,
        (26.0 + 50.0 * t + 20.0 * t2 - 20.0 * t3 - 20.0 * t4 + 10.0 * t5) * s,
        (1.0 + 5.0 * t + 10.0 * t2 + 10.0 * t3 + 5.0 * t4 - 5.0 * t5) * s,
        t5 * s,
    ];
    let d = [
        -5.0 * u.powi(4) * s,
        (-50.0 + 40.0 * t + 60.0 * t2 - 80.0 * t3 + 25.0 * t4) * s,
        (-120.0 * t + 120.0 * t3 - 50.0 * t4) * s,
        (50.0 + 40.0 * t - 60.0 * t2 - 80.0 * t3 + 50.0 * t4) * s,
        (5.0 + 20.0 * t + 30.0 * t2 + 20.0 * t3 - 25.0 * t4) * s,
        5.0 * t4 * s,
    ];
    (w, d)
}

/// Periodic quintic B-spline interpolant of a grid field (sixth order).
#[derive(Debug, Clone)]
pub struct BSpline5 {
    grid: Grid,
    coef: Vec<f64>,
}

impl BSpline5 {
    pub fn new(f: &SpectralField) -> BSpline5 {
        let g = f.grid;
        let mut c = Self::prefilter(g, f.coeffs());
        ifft2(&mut c, g.n);
        BSpline5 { grid: g, coef: c.iter().map(|v| v.re).collect() }
    }

    /// Two interpolants from Hermitian coefficient arrays, one FFT.
    pub fn pair(g: Grid, a: &[Complex64], b: &[Complex64]) -> (BSpline5, BSpline5) {
        let (ca, cb) = ifft_pair(&Self::prefilter(g, a), &Self::prefilter(g, b), g.n);
        (BSpline5 { grid: g, coef: ca }, BSpline5 { grid: g, coef: cb })
    }

    fn prefilter(g: Grid, c: &[Complex64]) -> Vec<Complex64> {
        let n = g.n;
        let sym: Vec<f64> = (0..n).map(|m| bspline_symbol(m, n)).collect();
        c.iter().enumerate().map(|(idx, v)| v / (sym[idx % n] * sym[idx / n])).collect()
    }

    fn locate(&self, x: f64) -> (i64, f64) {
        let h = self.grid.spacing();
        let u = (x / h).rem_euclid(self.grid.n as f64);
        let i0 = u.floor();
        (i0 as i64, u - i0)
    }

    pub fn value(&self, p: Vec2) -> f64 {
        self.value_and_gradient(p).0
    }

    /// Interpolated value and gradient at `p`.
    pub fn value_and_gradient(&self, p: Vec2) -> (f64, Vec2) {
        let n = self.grid.n as i64;
        let (i0, tx) = self.locate(p[0]);
        let (j0, ty) = self.locate(p[1]);
        let (wx, dx) = quintic_weights(tx);
        let (wy, dy) = quintic_weights(ty);
        let mut v = 0.0;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for b in 0..6 {
            let j = (j0 - 2 + b as i64).rem_euclid(n) as usize;
            let row = &self.coef[j * n as usize..(j + 1) * n as usize];
            let mut rv = 0.0;
            let mut rd = 0.0;
            for a in 0..6 {
                let i = (i0 - 2 + a as i64).rem_euclid(n) as usize;
                rv += wx[a] * row[i];
                rd += dx[a] * row[i];
            }
            v += wy[b] * rv;
            gx += wy[b] * rd;
            gy += dy[b] * rv;
        }
        let h = self.grid.spacing();
        (v, [gx / h, gy / h])
    }
}

/// Writes `f` in the binary snapshot format: magic `BPL1`, `n` (u64),
/// `L` (f64), time (f64), then row-major f64 node values, little-endian.
pub fn write_snapshot<W: Write>(f: &SpectralField, time: f64, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(28 + 8 * f.values.len());
    buf.extend_from_slice(b"BPL1");
    buf.extend_from_slice(&(f.grid.n as u64).to_le_bytes());
    buf.extend_from_slice(&f.grid.length.to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for v in &f.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]; returns the field and time.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 28 || &buf[0..4] != b"BPL1" {
        return Err(SpectralError::BadSnapshot("missing BPL1 header".into()));
    }
    let word = |k: usize| -> [u8; 8] { buf[k..k + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(4)) as usize;
    let length = f64::from_le_bytes(word(12));
    let time = f64::from_le_bytes(word(20));
    let grid = Grid::new(n, length)?;
    if buf.len() != 28 + 8 * n * n {
        return Err(SpectralError::BadSnapshot(format!("expected {} value bytes, found {}", 8 * n * n, buf.len() - 28)));
    }
    let values = (0..n * n).map(|k| f64::from_le_bytes(word(28 + 8 * k))).collect();
    Ok((SpectralField::from_values(grid, values), time))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tg_grid() -> Grid {
        Grid::new(64, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(48, 1.0).is_err());
        assert!(Grid::new(16, 1.0).is_err());
        assert!(Grid::new(32, 0.0).is_err());
        let g = Grid::new(32, 8.0).unwrap();
        assert_eq!(g.mode(16), -16);
        assert_eq!(g.deriv_wavenumber(16), 0.0);
        assert_eq!(g.mode(31), -1);
    }

    #[test]
    fn derivative_of_cosine() {
        let g = Grid::new(64, 8.0).unwrap();
        let k = 2.0 * PI / 8.0;
        let f = SpectralField::from_fn(g, |x, _| (k * x).cos());
        let d = derivative(&f, 1);
        let want = SpectralField::from_fn(g, |x, _| -k * (k * x).sin());
        assert!(d.sub(&want).max_abs() < 1e-12);
        let c = SpectralField::from_fn(g, |_, _| 3.5);
        assert!(derivative(&c, 2).max_abs() < 1e-12);
    }

    #[test]
    fn taylor_green_velocity() {
        let g = tg_grid();
        let w = SpectralField::from_fn(g, |x, y| 2.0 * x.sin() * y.sin());
        let (u1, u2) = biot_savart(&w);
        let e1 = SpectralField::from_fn(g, |x, y| x.sin() * y.cos());
        let e2 = SpectralField::from_fn(g, |x, y| -x.cos() * y.sin());
        assert!(u1.sub(&e1).max_abs() < 1e-13);
        assert!(u2.sub(&e2).max_abs() < 1e-13);
        let (z1, z2) = biot_savart(&SpectralField::zeros(g));
        assert_eq!(z1.max_abs() + z2.max_abs(), 0.0);
    }

    #[test]
    fn heat_semigroup_examples() {
        let g = tg_grid();
        let f = SpectralField::from_fn(g, |x, y| (2.0 * x + 3.0 * y).cos());
        let h = heat_semigroup(&f, 0.1).unwrap();
        let want = SpectralField::from_fn(g, |x, y| (-1.3f64).exp() * (2.0 * x + 3.0 * y).cos());
        assert!(h.sub(&want).max_abs() < 1e-13);
        assert_eq!(heat_semigroup(&f, 0.0).unwrap(), f);
        assert!(heat_semigroup(&f, -1.0).is_err());
    }

    #[test]
    fn dealias_examples() {
        let g = Grid::new(32, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(g, |x, y| x.sin() + (10.0 * y).cos());
        assert!(dealias(&f).sub(&f).max_abs() < 1e-13);
        let nyq = SpectralField::from_fn(g, |x, _| (16.0 * x).cos());
        assert!(dealias(&nyq).max_abs() < 1e-13);
    }

    #[test]
    fn point_evaluation() {
        let g = Grid::new(64, 8.0).unwrap();
        let k = 2.0 * PI / 8.0;
        let f = SpectralField::from_fn(g, |x, y| (k * x).cos() + 0.3 * (2.0 * k * y).sin());
        let v = evaluate_with(&f, &[[1.0, 0.0]], EvalMethod::DirectSum)[0];
        assert!((v - (PI / 4.0).cos()).abs() < 1e-12);
        let node = g.node(5, 9);
        let v = evaluate_with(&f, &[node], EvalMethod::DirectSum)[0];
        assert!((v - f.value(5, 9)).abs() < 1e-12);
        let v = evaluate_with(&f, &[node], EvalMethod::BSpline)[0];
        assert!((v - f.value(5, 9)).abs() < 1e-12);
    }

    #[test]
    fn bspline_gradient_matches_derivative() {
        let g = Grid::new(64, 8.0).unwrap();
        let k = 2.0 * PI / 8.0;
        let f = SpectralField::from_fn(g, |x, y| (k * x + 2.0 * k * y).sin());
        let s = BSpline5::new(&f);
        let p = [1.234, 5.678];
        let (v, gr) = s.value_and_gradient(p);
        let arg = k * p[0] + 2.0 * k * p[1];
        assert!((v - arg.sin()).abs() < 1e-8);
        assert!((gr[0] - k * arg.cos()).abs() < 1e-6);
        assert!((gr[1] - 2.0 * k * arg.cos()).abs() < 1e-6);
    }

    #[test]
    fn pair_transforms() {
        let g = Grid::new(32, 3.0).unwrap();
        let a = SpectralField::from_fn(g, |x, y| (x * 2.0).sin() * y.cos() + 0.1);
        let b = SpectralField::from_fn(g, |x, y| (x + y).cos());
        let (fa, fb) = fft_pair(a.values(), b.values(), 32);
        for (p, q) in fa.iter().zip(a.coeffs()) {
            assert!((p - q).norm() < 1e-12);
        }
        for (p, q) in fb.iter().zip(b.coeffs()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let g = Grid::new(32, 8.0).unwrap();
        let f = SpectralField::from_fn(g, |x, y| x * 0.1 - y.sin());
        let mut buf = Vec::new();
        write_snapshot(&f, 0.25, &mut buf).unwrap();
        assert_eq!(&buf[0..4], b"BPL1");
        let (h, t) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(t, 0.25);
        assert_eq!(h.values(), f.values());
        assert!(read_snapshot(&buf[..20]).is_err());
    }
}
