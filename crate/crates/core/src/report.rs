//! Run directories and CSV reports.
//!
//! A run directory holds `config.toml`, `index.csv` (per-snapshot scalars)
//! and `snapshots/` with `omega_KKKKK.bin`, `theta_KKKKK.bin` (binary
//! snapshot format), `contour_KKKKK.csv` and `tangents_KKKKK.csv`.
//! [`load_run`] rebuilds the history exactly; contour statistics are
//! recomputed from the stored nodes.
//!
//! Reports written by [`emit_reports`]:
//! - `diag.csv`: [`DIAG_COLUMNS`], one row per snapshot.
//! - `ledger.csv`: [`LEDGER_COLUMNS`], one row per probe.
//! - `kernel-report.csv`: [`KERNEL_COLUMNS`], one row per identity.
//! - `summary.txt`: one `PASS`/`FAIL`/`SKIP` line per check.
//!
//! Numbers are written in shortest round-trip form; files carry no
//! timestamps, so a fixed run gives identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::geometry::{read_contour_csv, regularity_stats, write_contour_csv};
use crate::sio::BoundLedger;
use crate::solver::{split_sweep, RunHistory, SecondDerivs, Snapshot, SnapshotDiag, SolverError};
use crate::spectral::{read_snapshot, write_snapshot, SpectralError};
use crate::verify::Check;
use crate::Vec2;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{}: {source}", path.display())]
    Snapshot { path: PathBuf, source: SpectralError },
}

pub type Result<T> = std::result::Result<T, ReportError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> ReportError {
    ReportError::Format { path: path.to_path_buf(), line, message: message.into() }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Columns of `diag.csv`.
pub const DIAG_COLUMNS: [&str; 14] = [
    "time",
    "energy",
    "grad_energy_integral",
    "sup_u",
    "max_curvature",
    "inf_tangent",
    "holder_seminorm",
    "delta",
    "area",
    "splitting_residual",
    "sup_hess_u",
    "sup_hess_v1",
    "sup_hess_v2",
    "sup_hess_v3",
];

/// One row of `diag.csv`. Contour columns are NaN for runs without a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRow {
    pub time: f64,
    pub energy: f64,
    pub grad_energy_integral: f64,
    pub sup_u: f64,
    pub max_curvature: f64,
    pub inf_tangent: f64,
    pub holder_seminorm: f64,
    pub delta: f64,
    pub area: f64,
    pub splitting_residual: f64,
    /// `sup|∇²u|` for the full velocity and the three split pieces.
    pub sup_hess: [f64; 4],
}

impl DiagRow {
    pub fn values(&self) -> [f64; 14] {
        let h = self.sup_hess;
        [
            self.time,
            self.energy,
            self.grad_energy_integral,
            self.sup_u,
            self.max_curvature,
            self.inf_tangent,
            self.holder_seminorm,
            self.delta,
            self.area,
            self.splitting_residual,
            h[0],
            h[1],
            h[2],
            h[3],
        ]
    }
}

/// Diagnostics of every snapshot; walks the splitting once.
pub fn diag_rows(h: &RunHistory) -> Result<Vec<DiagRow>> {
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(h.len());
    split_sweep(h, |k, s| {
        let snap = &h.snapshots[k];
        let d = &snap.diag;
        let reg = d.regularity;
        let field = |f: fn(&crate::geometry::RegularityStats) -> f64| reg.as_ref().map_or(f64::NAN, f);
        rows.push(DiagRow {
            time: snap.time,
            energy: d.energy,
            grad_energy_integral: d.grad_energy_integral,
            sup_u: d.sup_u,
            max_curvature: field(|r| r.max_curvature),
            inf_tangent: field(|r| r.inf_tangent),
            holder_seminorm: field(|r| r.holder_seminorm),
            delta: field(|r| r.delta),
            area: field(|r| r.area),
            splitting_residual: s.residual,
            sup_hess: SecondDerivs::from_splitting(&snap.omega_field(), s).sups(),
        });
    })?;
    Ok(rows)
}

fn csv_line(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn diag_csv(rows: &[DiagRow]) -> String {
    let mut s = DIAG_COLUMNS.join(",") + "\n";
    for r in rows {
        csv_line(&mut s, r.values());
    }
    s
}

/// Columns of `ledger.csv`, the fields of [`BoundLedger`] with the probe
/// split into `x1, x2`. `t_star` is empty in Case 1.
pub const LEDGER_COLUMNS: [&str; 19] = [
    "x1", "x2", "t", "d_t", "eps", "U", "delta", "t_star", "case", "J1", "J2", "J3", "J4", "J1_bound", "J2_bound",
    "J3_bound", "J4_bound", "I1", "I1_bound",
];

pub fn ledger_csv(ledgers: &[BoundLedger]) -> String {
    let mut s = LEDGER_COLUMNS.join(",") + "\n";
    for l in ledgers {
        let t_star = l.t_star.map_or(String::new(), |v| v.to_string());
        let _ = write!(s, "{},{},{},{},{},{},{},{},{}", l.x[0], l.x[1], l.t, l.d_t, l.eps, l.u, l.delta, t_star, l.case.number());
        for v in l.j.iter().chain(&l.j_bound).chain([&l.i1, &l.i1_bound]) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Columns of `kernel-report.csv`.
pub const KERNEL_COLUMNS: [&str; 3] = ["identity", "measured_error", "tolerance"];

pub fn kernel_csv(checks: &[Check]) -> String {
    let mut s = KERNEL_COLUMNS.join(",") + "\n";
    for c in checks {
        let _ = writeln!(s, "{},{},{}", c.identity.replace(',', ";"), c.error, c.tolerance);
    }
    s
}

/// Reads probe points, one `x,y` pair per line. Blank lines, `#` comments
/// and a non-numeric header line are skipped.
pub fn read_probes(path: &Path) -> Result<Vec<Vec2>> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let nums: Vec<Option<f64>> = parts.iter().map(|p| p.parse().ok()).collect();
        match nums.as_slice() {
            [Some(x), Some(y)] => out.push([*x, *y]),
            _ if i == 0 && nums.iter().all(Option::is_none) => continue,
            _ => return Err(format_err(path, i + 1, "expected two numbers x,y")),
        }
    }
    Ok(out)
}

const INDEX_COLUMNS: [&str; 11] = [
    "index",
    "time",
    "energy",
    "grad_energy_integral",
    "sup_u",
    "u_sup_running",
    "theta_l2",
    "theta_sup",
    "delta_running_min",
    "resampled",
    "contour_nodes",
];

fn snap_path(dir: &Path, kind: &str, k: usize, ext: &str) -> PathBuf {
    dir.join("snapshots").join(format!("{kind}_{k:05}.{ext}"))
}

/// Writes the run directory for `h` (created if missing).
pub fn save_run(h: &RunHistory, dir: &Path) -> Result<()> {
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(io_err(&snaps))?;
    write_file(&dir.join("config.toml"), h.config.to_toml().as_bytes())?;
    let mut index = INDEX_COLUMNS.join(",") + "\n";
    for (k, s) in h.snapshots.iter().enumerate() {
        let d = &s.diag;
        let nodes = s.contour.as_ref().map_or(0, |c| c.len());
        let _ = writeln!(
            index,
            "{k},{},{},{},{},{},{},{},{},{},{nodes}",
            s.time,
            d.energy,
            d.grad_energy_integral,
            d.sup_u,
            d.u_sup_running,
            d.theta_l2,
            d.theta_sup,
            d.delta_running_min,
            d.resampled as u8
        );
        for (kind, values) in [("omega", &s.omega), ("theta", &s.theta)] {
            let path = snap_path(dir, kind, k, "bin");
            let mut buf = Vec::new();
            let field = crate::spectral::SpectralField::from_values(s.grid, values.clone());
            write_snapshot(&field, s.time, &mut buf).map_err(|source| ReportError::Snapshot { path: path.clone(), source })?;
            write_file(&path, &buf)?;
        }
        if let Some(c) = &s.contour {
            let path = snap_path(dir, "contour", k, "csv");
            let mut buf = Vec::new();
            write_contour_csv(c, &mut buf).map_err(io_err(&path))?;
            write_file(&path, &buf)?;
        }
        if let Some(w) = &s.tangents {
            let mut buf = String::from("wx,wy\n");
            for v in w {
                csv_line(&mut buf, *v);
            }
            write_file(&snap_path(dir, "tangents", k, "csv"), buf.as_bytes())?;
        }
    }
    write_file(&dir.join("index.csv"), index.as_bytes())
}

fn read_field(path: &Path, grid: crate::Grid, time: f64) -> Result<Vec<f64>> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let (field, t) =
        read_snapshot(BufReader::new(f)).map_err(|source| ReportError::Snapshot { path: path.to_path_buf(), source })?;
    if field.grid() != grid {
        return Err(format_err(path, 0, "grid differs from config.toml"));
    }
    if t != time {
        return Err(format_err(path, 0, format!("time {t} differs from index.csv ({time})")));
    }
    Ok(field.values().to_vec())
}

fn read_tangents(path: &Path) -> Result<Vec<Vec2>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let v: Vec<f64> = line.split(',').map(|p| p.trim().parse()).collect::<std::result::Result<_, _>>().map_err(
            |e: std::num::ParseFloatError| format_err(path, i + 1, e.to_string()),
        )?;
        match v.as_slice() {
            [a, b] => out.push([*a, *b]),
            _ => return Err(format_err(path, i + 1, "expected wx,wy")),
        }
    }
    Ok(out)
}

/// Reads a directory written by [`save_run`].
pub fn load_run(dir: &Path) -> Result<RunHistory> {
    let config = SimConfig::from_path(dir.join("config.toml"))?;
    let index_path = dir.join("index.csv");
    let text = fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
    let mut lines = text.lines();
    if lines.next() != Some(INDEX_COLUMNS.join(",").as_str()) {
        return Err(format_err(&index_path, 1, "unexpected header"));
    }
    let mut snapshots = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != INDEX_COLUMNS.len() {
            return Err(format_err(&index_path, lineno, format!("expected {} fields", INDEX_COLUMNS.len())));
        }
        let num = |j: usize| -> Result<f64> {
            f[j].parse().map_err(|_| format_err(&index_path, lineno, format!("bad {}: {}", INDEX_COLUMNS[j], f[j])))
        };
        let k = num(0)? as usize;
        let time = num(1)?;
        let omega = read_field(&snap_path(dir, "omega", k, "bin"), config.grid, time)?;
        let theta = read_field(&snap_path(dir, "theta", k, "bin"), config.grid, time)?;
        let contour = if num(10)? > 0.0 {
            let path = snap_path(dir, "contour", k, "csv");
            let file = fs::File::open(&path).map_err(io_err(&path))?;
            Some(read_contour_csv(BufReader::new(file)).map_err(|m| format_err(&path, 0, m))?)
        } else {
            None
        };
        let tpath = snap_path(dir, "tangents", k, "csv");
        let tangents = if tpath.exists() { Some(read_tangents(&tpath)?) } else { None };
        let regularity = match &contour {
            Some(c) => Some(regularity_stats(c, config.gamma).map_err(SolverError::from)?),
            None => None,
        };
        snapshots.push(Snapshot {
            time,
            grid: config.grid,
            omega,
            theta,
            contour,
            tangents,
            diag: SnapshotDiag {
                energy: num(2)?,
                grad_energy_integral: num(3)?,
                sup_u: num(4)?,
                u_sup_running: num(5)?,
                theta_l2: num(6)?,
                theta_sup: num(7)?,
                regularity,
                delta_running_min: num(8)?,
                resampled: num(9)? != 0.0,
            },
        });
    }
    Ok(RunHistory::new(config, snapshots)?)
}

/// Outcome of one summary check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub entries: Vec<SummaryEntry>,
}

impl Summary {
    /// True when no check failed; skipped checks do not count.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = writeln!(s, "{} {}: {}", e.status.label(), e.name, e.detail);
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    fn push(&mut self, name: &'static str, status: Status, detail: String) {
        self.entries.push(SummaryEntry { name, status, detail });
    }
}

/// Relative area drift allowed over a run.
pub const AREA_DRIFT_LIMIT: f64 = 1e-3;
/// Splitting residual allowed at every snapshot.
pub const SPLITTING_LIMIT: f64 = 1e-3;

/// Invariant checks of a run: energy inequalities, raster range, area
/// drift and splitting residual.
pub fn run_checks(h: &RunHistory, rows: &[DiagRow]) -> Result<Summary> {
    let mut s = Summary::default();
    if h.is_empty() {
        for name in ["energy inequalities", "theta range", "area drift", "splitting residual"] {
            s.push(name, Status::Skip, "no snapshots".into());
        }
        return Ok(s);
    }
    let energy = crate::solver::energy_check(h)?;
    let bad = energy.rows.iter().filter(|r| !r.ok).count();
    s.push("energy inequalities", Status::from_bool(energy.passed), format!("{bad} of {} snapshots violate", energy.rows.len()));

    let (lo, hi) = h
        .snapshots
        .iter()
        .flat_map(|s| s.theta.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    s.push("theta range", Status::from_bool(lo >= 0.0 && hi <= 1.0), format!("min {lo}, max {hi}"));

    let areas: Vec<f64> = rows.iter().map(|r| r.area).filter(|a| a.is_finite()).collect();
    match areas.first() {
        Some(&a0) => {
            let drift = areas.iter().map(|a| ((a - a0) / a0).abs()).fold(0.0, f64::max);
            s.push("area drift", Status::from_bool(drift < AREA_DRIFT_LIMIT), format!("max relative drift {drift:e}"));
        }
        None => s.push("area drift", Status::Skip, "no contour".into()),
    }

    let worst = rows.iter().map(|r| r.splitting_residual).fold(0.0, f64::max);
    s.push(
        "splitting residual",
        Status::from_bool(worst < SPLITTING_LIMIT),
        format!("max {worst:e} over {} snapshots", rows.len()),
    );
    Ok(s)
}

/// Writes `diag.csv`, `ledger.csv`, `kernel-report.csv` and `summary.txt`
/// into `out_dir`. `checks` is `None` when the kernel suite was not run.
pub fn emit_reports(
    h: &RunHistory,
    ledgers: &[BoundLedger],
    checks: Option<&[Check]>,
    out_dir: &Path,
) -> Result<Summary> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let rows = diag_rows(h)?;
    let mut summary = run_checks(h, &rows)?;
    match checks {
        Some(c) => {
            let failed = c.iter().filter(|c| !c.passed()).count();
            summary.push("kernel identities", Status::from_bool(failed == 0), format!("{failed} of {} failed", c.len()));
        }
        None => summary.push("kernel identities", Status::Skip, "not run".into()),
    }
    if ledgers.is_empty() {
        summary.push("bound ledger", Status::Skip, "no probes".into());
    } else {
        let failed = ledgers.iter().filter(|l| !l.passed()).count();
        summary.push("bound ledger", Status::from_bool(failed == 0), format!("{failed} of {} probes exceed a bound", ledgers.len()));
    }
    let files = [
        ("diag.csv", diag_csv(&rows)),
        ("ledger.csv", ledger_csv(ledgers)),
        ("kernel-report.csv", kernel_csv(checks.unwrap_or(&[]))),
        ("summary.txt", summary.text()),
    ];
    for (name, body) in files {
        let path = out_dir.join(name);
        let f = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(f);
        w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(io_err(&path))?;
    }
    Ok(summary)
}
