//! Command-line front end: simulation runs, kernel self-checks, bound
//! ledgers and throughput timings.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! usage or I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bpatch::config::{ContourShape, SimConfig};
use bpatch::geometry::Contour;
use bpatch::report::{self, emit_reports, ledger_csv, load_run, read_probes, save_run};
use bpatch::sio::{bound_ledger, pv_all, PvContext, PvOptions};
use bpatch::solver::{self, RunHistory, SimState};
use bpatch::spectral::{Grid, SpectralField};
use bpatch::verify::kernel_suite;

#[derive(Parser)]
#[command(name = "bpatch", version, about = "Boussinesq temperature patch solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write the run directory and reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Optional probe CSV; adds a bound ledger at the final time.
        #[arg(long)]
        probes: Option<PathBuf>,
    },
    /// Check the kernel formulas against independent numerics.
    VerifyKernels {
        /// Where to write the (identity, measured error, tolerance) CSV.
        #[arg(long, default_value = "kernel-report.csv")]
        csv: PathBuf,
    },
    /// Bound ledger for probe points of a stored run.
    Diagnose {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        probes: PathBuf,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        gamma: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time FFT, solver step and PV probe throughput.
    Bench {
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Minimum wall time per measurement, in seconds.
        #[arg(long, default_value_t = 1.0)]
        seconds: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, probes } => cmd_run(&config, &out, probes.as_deref()),
        Command::VerifyKernels { csv } => cmd_verify(&csv),
        Command::Diagnose { run, probes, time, gamma, out } => cmd_diagnose(&run, &probes, time, gamma, out.as_deref()),
        Command::Bench { n, seconds } => cmd_bench(n, seconds).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(config: &Path, out: &Path, probes: Option<&Path>) -> Result<bool> {
    let cfg = SimConfig::from_path(config)?;
    let (steps, _) = solver::step_plan(cfg.dt, cfg.horizon);
    eprintln!("running {steps} steps on {}^2", cfg.grid.n());
    let mut done = 0usize;
    let h = solver::run_with(&cfg, |_| {
        done += 1;
        if steps >= 10 && done.is_multiple_of(steps / 10) {
            eprintln!("  step {done}/{steps}");
        }
    })?;
    save_run(&h, out)?;
    let ledgers = match probes {
        Some(p) => {
            let t = h.last()?.time;
            ledgers_for(&h, &read_probes(p)?, t, cfg.gamma)?
        }
        None => Vec::new(),
    };
    let summary = emit_reports(&h, &ledgers, None, out)?;
    print!("{}", summary.text());
    Ok(summary.passed())
}

fn ledgers_for(h: &RunHistory, probes: &[[f64; 2]], t: f64, gamma: f64) -> Result<Vec<bpatch::sio::BoundLedger>> {
    let ctx = PvContext::new(h)?;
    probes
        .iter()
        .map(|&x| bound_ledger(&ctx, x, t, gamma).with_context(|| format!("probe ({}, {})", x[0], x[1])))
        .collect()
}

fn cmd_verify(csv: &Path) -> Result<bool> {
    let checks = kernel_suite();
    for c in &checks {
        println!("{} {}: error {:e} (tolerance {:e})", if c.passed() { "PASS" } else { "FAIL" }, c.identity, c.error, c.tolerance);
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    println!("{} of {} identities passed", checks.len() - failed, checks.len());
    fs::write(csv, report::kernel_csv(&checks)).with_context(|| format!("writing {}", csv.display()))?;
    Ok(failed == 0)
}

fn cmd_diagnose(run: &Path, probes: &Path, time: f64, gamma: f64, out: Option<&Path>) -> Result<bool> {
    if !(gamma > 0.0 && gamma < 1.0) {
        bail!("gamma must lie in (0, 1), got {gamma}");
    }
    let h = load_run(run).with_context(|| format!("loading run {}", run.display()))?;
    let ledgers = ledgers_for(&h, &read_probes(probes)?, time, gamma)?;
    let csv = ledger_csv(&ledgers);
    match out {
        Some(p) => fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    let failed = ledgers.iter().filter(|l| !l.passed()).count();
    if failed > 0 {
        eprintln!("{failed} of {} probes exceed a bound", ledgers.len());
    }
    Ok(failed == 0)
}

// Repeats `f` until `seconds` have passed; returns calls per second.
fn rate<F: FnMut()>(seconds: f64, mut f: F) -> f64 {
    f();
    let start = Instant::now();
    let mut calls = 0u64;
    while calls == 0 || start.elapsed().as_secs_f64() < seconds {
        f();
        calls += 1;
    }
    calls as f64 / start.elapsed().as_secs_f64()
}

fn cmd_bench(n: usize, seconds: f64) -> Result<()> {
    let grid = Grid::new(n, 8.0)?;
    println!("threads: {}", bpatch::par::threads());

    let values: Vec<f64> = (0..grid.len()).map(|k| ((k * 7919) % 1013) as f64 / 1013.0).collect();
    let r = rate(seconds, || {
        std::hint::black_box(SpectralField::from_values(grid, values.clone()));
    });
    println!("fft {n}x{n}: {r:.1} ops/sec");

    let cfg = SimConfig { grid, ..SimConfig::default() };
    let mut state = SimState::new(&cfg)?;
    let dt = cfg.dt.min(state.max_dt());
    let r = rate(seconds, || {
        state = solver::step(&state, dt).expect("step");
    });
    println!("step {n}x{n}: {r:.2} ops/sec");

    let small = SimConfig { grid, initial_contour: ContourShape::None, ..SimConfig::default() };
    let times: Vec<f64> = (0..=20).map(|k| 0.01 * k as f64).collect();
    let h = RunHistory::frozen(small, Contour::ellipse([4.0, 4.0], 1.0, 0.5, 512)?, &times)?;
    let ctx = PvContext::new(&h)?;
    let opts = PvOptions::default();
    let r = rate(seconds, || {
        std::hint::black_box(pv_all(&ctx, [4.3, 3.9], 0.2, &opts).expect("pv"));
    });
    println!("pv-probe (21 snapshots, 9 images): {r:.2} ops/sec");
    Ok(())
}
