//! Run configuration.
//!
//! Files are TOML with the sections `[grid]`, `[time]`, `[physics]`,
//! `[initial_velocity]`, `[initial_contour]` and `[diagnostics]`. Every key is
//! optional; omitted keys take the defaults of [`SimConfig::default`], which
//! describe the reference ellipse run. Unknown keys are errors.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::geometry::{Contour, GeometryError};
use crate::spectral::{Grid, SpectralField};
use crate::Vec2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{}{key}: {message}", location_prefix(*.location))]
    Invalid { key: String, message: String, location: Option<(usize, usize)> },
}

fn location_prefix(loc: Option<(usize, usize)>) -> String {
    match loc {
        Some((l, c)) => format!("line {l}, column {c}: "),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Initial vorticity profile.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    Zero,
    /// `ω₀ = A sin(k x₁) sin(k x₂)`, `k = 2π/L`.
    TaylorGreen { amplitude: f64 },
    /// Gaussian `A exp(-|x - c|²/r²)` minus its box mean.
    GaussianVortex { amplitude: f64, center: Vec2, radius: f64 },
}

/// Initial patch boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum ContourShape {
    None,
    Circle { center: Vec2, radius: f64, nodes: usize },
    Ellipse { center: Vec2, semi_axes: Vec2, nodes: usize },
    Star { center: Vec2, radius: f64, amplitude: f64, lobes: u32, nodes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub dt: f64,
    pub horizon: f64,
    pub cfl_safety: f64,
    pub snapshot_stride: usize,
    /// Buoyancy coefficient in front of `∂₁θ`; 1 is the normalized system.
    pub gravity: f64,
    pub initial_velocity: VelocityProfile,
    pub initial_contour: ContourShape,
    pub raster_width: f64,
    pub gamma: f64,
    pub track_tangents: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            grid: Grid::new(256, 8.0).expect("default grid"),
            dt: 0.005,
            horizon: 1.0,
            cfl_safety: 0.5,
            snapshot_stride: 1,
            gravity: 1.0,
            initial_velocity: VelocityProfile::Zero,
            initial_contour: ContourShape::Ellipse { center: [4.0, 4.0], semi_axes: [1.0, 0.5], nodes: 512 },
            raster_width: 2.0,
            gamma: 0.5,
            track_tangents: true,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    time: Option<RawTime>,
    physics: Option<RawPhysics>,
    initial_velocity: Option<RawVelocity>,
    initial_contour: Option<RawContour>,
    diagnostics: Option<RawDiagnostics>,
}

type Leaf<T> = Option<Spanned<T>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Leaf<i64>,
    length: Leaf<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Leaf<f64>,
    horizon: Leaf<f64>,
    cfl_safety: Leaf<f64>,
    snapshot_stride: Leaf<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    gravity: Leaf<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVelocity {
    profile: Leaf<String>,
    amplitude: Leaf<f64>,
    center: Leaf<Vec2>,
    radius: Leaf<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContour {
    shape: Leaf<String>,
    center: Leaf<Vec2>,
    semi_axes: Leaf<Vec2>,
    radius: Leaf<f64>,
    amplitude: Leaf<f64>,
    lobes: Leaf<i64>,
    nodes: Leaf<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnostics {
    raster_width: Leaf<f64>,
    gamma: Leaf<f64>,
    track_tangents: Leaf<bool>,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn invalid(&self, key: &str, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
            location: span.map(|s| line_col(self.src, s.start)),
        }
    }

    fn get<T: Clone>(&self, leaf: &Leaf<T>, default: T) -> (T, Option<Range<usize>>) {
        match leaf {
            Some(s) => (s.get_ref().clone(), Some(s.span())),
            None => (default, None),
        }
    }

    fn positive(&self, key: &str, leaf: &Leaf<f64>, default: f64) -> Result<f64> {
        let (v, span) = self.get(leaf, default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid(key, span, format!("must be positive and finite, got {v}")))
        }
    }

    fn count(&self, key: &str, leaf: &Leaf<i64>, default: usize, pow2_min: Option<usize>) -> Result<usize> {
        let (v, span) = self.get(leaf, default as i64);
        if v < 1 {
            return Err(self.invalid(key, span, format!("must be at least 1, got {v}")));
        }
        let v = v as usize;
        if let Some(min) = pow2_min {
            if v < min || !v.is_power_of_two() {
                return Err(self.invalid(key, span, format!("must be a power of two and at least {min}, got {v}")));
            }
        }
        Ok(v)
    }

    fn point(&self, key: &str, leaf: &Leaf<Vec2>, default: Vec2) -> Result<Vec2> {
        let (v, span) = self.get(leaf, default);
        if v.iter().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(self.invalid(key, span, "coordinates must be finite"))
        }
    }

    fn reject_extra(&self, key: &str, leaf_span: Option<Range<usize>>, what: &str) -> Result<()> {
        match leaf_span {
            Some(s) => Err(self.invalid(key, Some(s), format!("not used by {what}"))),
            None => Ok(()),
        }
    }
}

fn span_of<T>(leaf: &Leaf<T>) -> Option<Range<usize>> {
    leaf.as_ref().map(|s| s.span())
}

impl SimConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<SimConfig> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        SimConfig::parse(&src)
    }

    pub fn parse(src: &str) -> Result<SimConfig> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            ConfigError::Parse { line, column, message: e.message().trim().to_string() }
        })?;
        let cx = Ctx { src };
        let d = SimConfig::default();

        let g = raw.grid.unwrap_or_default();
        let n = cx.count("grid.n", &g.n, d.grid.n(), Some(32))?;
        let length = cx.positive("grid.length", &g.length, d.grid.length())?;
        let grid = Grid::new(n, length).map_err(|e| cx.invalid("grid", None, e.to_string()))?;

        let t = raw.time.unwrap_or_default();
        let dt = cx.positive("time.dt", &t.dt, d.dt)?;
        let (horizon, hspan) = cx.get(&t.horizon, d.horizon);
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(cx.invalid("time.horizon", hspan, format!("must be non-negative and finite, got {horizon}")));
        }
        let (cfl_safety, cspan) = cx.get(&t.cfl_safety, d.cfl_safety);
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(cx.invalid("time.cfl_safety", cspan, format!("must lie in (0, 1], got {cfl_safety}")));
        }
        let snapshot_stride = cx.count("time.snapshot_stride", &t.snapshot_stride, d.snapshot_stride, None)?;

        let p = raw.physics.unwrap_or_default();
        let (gravity, gspan) = cx.get(&p.gravity, d.gravity);
        if !gravity.is_finite() {
            return Err(cx.invalid("physics.gravity", gspan, "must be finite"));
        }

        let v = raw.initial_velocity.unwrap_or_default();
        let (profile, pspan) = cx.get(&v.profile, "zero".to_string());
        let initial_velocity = match profile.as_str() {
            "zero" => {
                for (k, s) in [("amplitude", span_of(&v.amplitude)), ("center", span_of(&v.center)), ("radius", span_of(&v.radius))] {
                    cx.reject_extra(&format!("initial_velocity.{k}"), s, "profile \"zero\"")?;
                }
                VelocityProfile::Zero
            }
            "taylor_green" => {
                cx.reject_extra("initial_velocity.center", span_of(&v.center), "profile \"taylor_green\"")?;
                cx.reject_extra("initial_velocity.radius", span_of(&v.radius), "profile \"taylor_green\"")?;
                let (amplitude, _) = cx.get(&v.amplitude, 2.0);
                VelocityProfile::TaylorGreen { amplitude }
            }
            "gaussian_vortex" => {
                let (amplitude, _) = cx.get(&v.amplitude, 1.0);
                let center = cx.point("initial_velocity.center", &v.center, [length / 2.0; 2])?;
                let radius = cx.positive("initial_velocity.radius", &v.radius, length / 8.0)?;
                VelocityProfile::GaussianVortex { amplitude, center, radius }
            }
            other => {
                return Err(cx.invalid(
                    "initial_velocity.profile",
                    pspan,
                    format!("unknown profile {other:?} (expected zero, taylor_green, gaussian_vortex)"),
                ))
            }
        };
        if let (VelocityProfile::TaylorGreen { amplitude } | VelocityProfile::GaussianVortex { amplitude, .. }, Some(s)) =
            (&initial_velocity, &v.amplitude)
        {
            if !amplitude.is_finite() {
                return Err(cx.invalid("initial_velocity.amplitude", Some(s.span()), "must be finite"));
            }
        }

        let c = raw.initial_contour.unwrap_or_default();
        let (shape, sspan) = cx.get(&c.shape, "ellipse".to_string());
        let center_default = [length / 2.0; 2];
        let nodes = || cx.count("initial_contour.nodes", &c.nodes, 512, Some(16));
        let initial_contour = match shape.as_str() {
            "none" => {
                for (k, s) in [
                    ("center", span_of(&c.center)),
                    ("semi_axes", span_of(&c.semi_axes)),
                    ("radius", span_of(&c.radius)),
                    ("amplitude", span_of(&c.amplitude)),
                    ("lobes", span_of(&c.lobes)),
                    ("nodes", span_of(&c.nodes)),
                ] {
                    cx.reject_extra(&format!("initial_contour.{k}"), s, "shape \"none\"")?;
                }
                ContourShape::None
            }
            "circle" => {
                cx.reject_extra("initial_contour.semi_axes", span_of(&c.semi_axes), "shape \"circle\"")?;
                cx.reject_extra("initial_contour.amplitude", span_of(&c.amplitude), "shape \"circle\"")?;
                cx.reject_extra("initial_contour.lobes", span_of(&c.lobes), "shape \"circle\"")?;
                ContourShape::Circle {
                    center: cx.point("initial_contour.center", &c.center, center_default)?,
                    radius: cx.positive("initial_contour.radius", &c.radius, 1.0)?,
                    nodes: nodes()?,
                }
            }
            "ellipse" => {
                cx.reject_extra("initial_contour.radius", span_of(&c.radius), "shape \"ellipse\"")?;
                cx.reject_extra("initial_contour.amplitude", span_of(&c.amplitude), "shape \"ellipse\"")?;
                cx.reject_extra("initial_contour.lobes", span_of(&c.lobes), "shape \"ellipse\"")?;
                let (ax, aspan) = cx.get(&c.semi_axes, [1.0, 0.5]);
                if !(ax[0] > 0.0 && ax[1] > 0.0 && ax[0].is_finite() && ax[1].is_finite()) {
                    return Err(cx.invalid("initial_contour.semi_axes", aspan, "semi-axes must be positive and finite"));
                }
                ContourShape::Ellipse {
                    center: cx.point("initial_contour.center", &c.center, center_default)?,
                    semi_axes: ax,
                    nodes: nodes()?,
                }
            }
            "star" => {
                cx.reject_extra("initial_contour.semi_axes", span_of(&c.semi_axes), "shape \"star\"")?;
                let (amplitude, aspan) = cx.get(&c.amplitude, 0.2);
                if !(0.0..1.0).contains(&amplitude) {
                    return Err(cx.invalid("initial_contour.amplitude", aspan, format!("must lie in [0, 1), got {amplitude}")));
                }
                let (lobes, lspan) = cx.get(&c.lobes, 5);
                if !(2..=64).contains(&lobes) {
                    return Err(cx.invalid("initial_contour.lobes", lspan, format!("must lie in 2..=64, got {lobes}")));
                }
                ContourShape::Star {
                    center: cx.point("initial_contour.center", &c.center, center_default)?,
                    radius: cx.positive("initial_contour.radius", &c.radius, 1.0)?,
                    amplitude,
                    lobes: lobes as u32,
                    nodes: nodes()?,
                }
            }
            other => {
                return Err(cx.invalid(
                    "initial_contour.shape",
                    sspan,
                    format!("unknown shape {other:?} (expected circle, ellipse, star, none)"),
                ))
            }
        };

        let dg = raw.diagnostics.unwrap_or_default();
        let (raster_width, rspan) = cx.get(&dg.raster_width, d.raster_width);
        if !(raster_width >= 1.0 && raster_width.is_finite()) {
            return Err(cx.invalid("diagnostics.raster_width", rspan, format!("must be at least 1, got {raster_width}")));
        }
        let (gamma, gmspan) = cx.get(&dg.gamma, d.gamma);
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(cx.invalid("diagnostics.gamma", gmspan, format!("must lie in (0, 1), got {gamma}")));
        }
        let (track_tangents, _) = cx.get(&dg.track_tangents, d.track_tangents);

        let cfg = SimConfig {
            grid,
            dt,
            horizon,
            cfl_safety,
            snapshot_stride,
            gravity,
            initial_velocity,
            initial_contour,
            raster_width,
            gamma,
            track_tangents,
        };
        cfg.check_contour_fits().map_err(|m| cx.invalid("initial_contour", sspan, m))?;
        Ok(cfg)
    }

    /// Checks that the initial contour keeps [`raster_margin`] away from the
    /// box edges.
    ///
    /// [`raster_margin`]: crate::solver::raster_margin
    pub fn check_contour_fits(&self) -> std::result::Result<(), String> {
        let c = match self.build_contour() {
            Ok(Some(c)) => c,
            Ok(None) => return Ok(()),
            Err(e) => return Err(e.to_string()),
        };
        let margin = crate::solver::raster_margin(self.grid, self.raster_width);
        let l = self.grid.length();
        for p in c.nodes() {
            if p[0] < margin || p[1] < margin || p[0] > l - margin || p[1] > l - margin {
                return Err(format!("contour must stay {margin} away from the box edges, node at ({}, {})", p[0], p[1]));
            }
        }
        Ok(())
    }

    pub fn build_contour(&self) -> std::result::Result<Option<Contour>, GeometryError> {
        Ok(Some(match self.initial_contour {
            ContourShape::None => return Ok(None),
            ContourShape::Circle { center, radius, nodes } => Contour::circle(center, radius, nodes)?,
            ContourShape::Ellipse { center, semi_axes, nodes } => Contour::ellipse(center, semi_axes[0], semi_axes[1], nodes)?,
            ContourShape::Star { center, radius, amplitude, lobes, nodes } => {
                Contour::star(center, radius, amplitude, lobes, nodes)?
            }
        }))
    }

    /// Initial vorticity on the grid.
    pub fn build_omega(&self) -> SpectralField {
        let g = self.grid;
        let k = 2.0 * std::f64::consts::PI / g.length();
        match self.initial_velocity {
            VelocityProfile::Zero => SpectralField::zeros(g),
            VelocityProfile::TaylorGreen { amplitude } => {
                SpectralField::from_fn(g, move |x, y| amplitude * (k * x).sin() * (k * y).sin())
            }
            VelocityProfile::GaussianVortex { amplitude, center, radius } => {
                let l = g.length();
                let f = SpectralField::from_fn(g, move |x, y| {
                    // nearest periodic image of the center
                    let dx = (x - center[0] + l / 2.0).rem_euclid(l) - l / 2.0;
                    let dy = (y - center[1] + l / 2.0).rem_euclid(l) - l / 2.0;
                    amplitude * (-(dx * dx + dy * dy) / (radius * radius)).exp()
                });
                let mean = f.integral() / (l * l);
                SpectralField::from_values(g, f.values().iter().map(|v| v - mean).collect())
            }
        }
    }

    /// Canonical TOML text; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let f = |v: f64| format!("{v:?}");
        let pt = |p: Vec2| format!("[{:?}, {:?}]", p[0], p[1]);
        let _ = writeln!(s, "[grid]\nn = {}\nlength = {}\n", self.grid.n(), f(self.grid.length()));
        let _ = writeln!(
            s,
            "[time]\ndt = {}\nhorizon = {}\ncfl_safety = {}\nsnapshot_stride = {}\n",
            f(self.dt),
            f(self.horizon),
            f(self.cfl_safety),
            self.snapshot_stride
        );
        let _ = writeln!(s, "[physics]\ngravity = {}\n", f(self.gravity));
        let _ = writeln!(s, "[initial_velocity]");
        match self.initial_velocity {
            VelocityProfile::Zero => {
                let _ = writeln!(s, "profile = \"zero\"\n");
            }
            VelocityProfile::TaylorGreen { amplitude } => {
                let _ = writeln!(s, "profile = \"taylor_green\"\namplitude = {}\n", f(amplitude));
            }
            VelocityProfile::GaussianVortex { amplitude, center, radius } => {
                let _ = writeln!(
                    s,
                    "profile = \"gaussian_vortex\"\namplitude = {}\ncenter = {}\nradius = {}\n",
                    f(amplitude),
                    pt(center),
                    f(radius)
                );
            }
        }
        let _ = writeln!(s, "[initial_contour]");
        match self.initial_contour {
            ContourShape::None => {
                let _ = writeln!(s, "shape = \"none\"\n");
            }
            ContourShape::Circle { center, radius, nodes } => {
                let _ = writeln!(s, "shape = \"circle\"\ncenter = {}\nradius = {}\nnodes = {nodes}\n", pt(center), f(radius));
            }
            ContourShape::Ellipse { center, semi_axes, nodes } => {
                let _ =
                    writeln!(s, "shape = \"ellipse\"\ncenter = {}\nsemi_axes = {}\nnodes = {nodes}\n", pt(center), pt(semi_axes));
            }
            ContourShape::Star { center, radius, amplitude, lobes, nodes } => {
                let _ = writeln!(
                    s,
                    "shape = \"star\"\ncenter = {}\nradius = {}\namplitude = {}\nlobes = {lobes}\nnodes = {nodes}\n",
                    pt(center),
                    f(radius),
                    f(amplitude)
                );
            }
        }
        let _ = write!(
            s,
            "[diagnostics]\nraster_width = {}\ngamma = {}\ntrack_tangents = {}\n",
            f(self.raster_width),
            f(self.gamma),
            self.track_tangents
        );
        s
    }
}
