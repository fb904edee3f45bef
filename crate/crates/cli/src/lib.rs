//! Command-line front end for udw-core: config-driven sweeps, the
//! validation suite and CSV/JSON output.

pub mod config;
pub mod error;
pub mod output;

use clap::Parser;
use config::{Format, Mode, RunConfig};
use error::CliError;
use output::{write_table, Cell, Table};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;
use udw_core::acceptance::run_suite;
use udw_core::coherence::g2_curve;
use udw_core::response::{
    adiabatic_response, planck_response, planck_with_correction, response_general, single_axis_response,
    thermal_static_response, Method, Response, Truncation,
};

#[derive(Debug, Clone, Parser)]
#[command(name = "udw", version, about = "Unruh-DeWitt detector spectra and g2 sweeps")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the mode in the config.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Resolves flags and config into the config that will actually run.
pub fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match (&args.config, args.mode) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(Mode::Validate)) => RunConfig::for_mode(Mode::Validate),
        (None, _) => return Err(CliError::config("--config is required except for --mode validate")),
    };
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(path) = &args.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(format) = args.format {
        cfg.output.format = format;
    }
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the tool and returns the process exit code.
pub fn run(args: &Args) -> u8 {
    match resolve(args).and_then(|cfg| execute(&cfg, args.jobs)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("udw: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cfg: &RunConfig, jobs: Option<usize>) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::config("--jobs: must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::config(format!("--jobs: {e}")))?;
    let (table, failed) = pool.install(|| run_mode(cfg))?;
    emit(&table, cfg)?;
    if failed > 0 {
        return Err(CliError::PointsFailed { failed, total: table.rows.len() });
    }
    Ok(())
}

fn emit(table: &Table, cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_table(table, cfg, cfg.output.format, &mut file)?;
            file.flush()?;
        }
        None => {
            if cfg.mode != Mode::Validate {
                write_table(table, cfg, cfg.output.format, &mut std::io::stdout().lock())?;
            }
        }
    }
    Ok(())
}

/// Builds the output table; the count is the number of failed grid points.
pub fn run_mode(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    match cfg.mode {
        Mode::Spectrum => run_spectrum(cfg),
        Mode::CompareThermal => run_compare_thermal(cfg),
        Mode::TrajectoryScan => run_trajectory_scan(cfg),
        Mode::G2 => run_g2(cfg).map(|t| (t, 0)),
        Mode::Validate => run_validate(cfg).map(|t| (t, 0)),
    }
}

fn status(r: &Result<Response, udw_core::Error>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string().into(),
    }
}

fn failures<T>(rs: &[Result<T, udw_core::Error>]) -> usize {
    rs.iter().filter(|r| r.is_err()).count()
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let det = cfg.detector()?;
    let grid = cfg.scan()?.grid();
    let traj = cfg.trajectory()?;
    let spec = &cfg.quadrature;
    let tau = cfg.tau;
    let method = cfg.method();
    let reach = spec.window_sigmas * det.sigma;
    let point: Box<dyn Fn(f64) -> Result<Response, udw_core::Error> + Sync> = match method {
        Method::Quadrature => {
            let w = traj.worldline((tau, tau), reach)?;
            Box::new(move |e| response_general(&w, e, tau, &det, spec))
        }
        Method::Planck | Method::PlanckEta => {
            let a = traj.acceleration()(tau);
            let det = det.clone();
            Box::new(move |e| {
                let v = if method == Method::Planck {
                    planck_response(e, a, &det)?
                } else {
                    planck_with_correction(e, a, &det)?
                };
                Ok(Response::exact(v))
            })
        }
        Method::Thermal => {
            let beta = cfg.beta()?;
            Box::new(move |e| thermal_static_response(e, beta, &det, spec))
        }
        Method::Residue => {
            let (path, km) = traj.single_axis()?;
            let trunc = Truncation { km, km_prime: km };
            Box::new(move |e| Ok(Response::exact(single_axis_response(&path, e, tau, &det, trunc)?)))
        }
        Method::Adiabatic => {
            let accel = traj.acceleration();
            Box::new(move |e| Ok(Response::exact(adiabatic_response(e, tau, &*accel, &det)?)))
        }
    };
    let results: Vec<_> = grid.par_iter().map(|&e| point(e)).collect();
    let mut table = Table::new(&["energy", "p", "error", "imag_residual", "method", "status"]);
    for (e, r) in grid.iter().zip(&results) {
        let v = r.as_ref().copied().unwrap_or(Response { value: f64::NAN, error: f64::NAN, imag_residual: f64::NAN });
        table.rows.push(vec![
            (*e).into(),
            v.value.into(),
            v.error.into(),
            v.imag_residual.into(),
            method.as_str().into(),
            status(r),
        ]);
    }
    Ok((table, failures(&results)))
}

pub fn run_compare_thermal(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let det = cfg.detector()?;
    let grid = cfg.scan()?.grid();
    let spec = &cfg.quadrature;
    let beta = cfg.beta()?;
    let w = cfg.trajectory()?.worldline((cfg.tau, cfg.tau), spec.window_sigmas * det.sigma)?;
    let results: Vec<_> = grid
        .par_iter()
        .map(|&e| {
            let acc = response_general(&w, e, cfg.tau, &det, spec)?;
            let th = thermal_static_response(e, beta, &det, spec)?;
            Ok::<_, udw_core::Error>((acc.value, th.value))
        })
        .collect();
    let mut table = Table::new(&["energy", "accelerated", "thermal", "rel_diff", "status"]);
    for (e, r) in grid.iter().zip(&results) {
        let (acc, th) = *r.as_ref().unwrap_or(&(f64::NAN, f64::NAN));
        let st: Cell = match r {
            Ok(_) => "ok".into(),
            Err(err) => err.to_string().into(),
        };
        table.rows.push(vec![(*e).into(), acc.into(), th.into(), ((th - acc) / acc).into(), st]);
    }
    Ok((table, failures(&results)))
}

pub fn run_trajectory_scan(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let det = cfg.detector()?;
    let grid = cfg.scan()?.grid();
    let spec = &cfg.quadrature;
    let e = cfg.energy.ok_or_else(|| CliError::config("energy: required for trajectory-scan"))?;
    let traj = cfg.trajectory()?;
    let accel = traj.acceleration();
    let w = traj.worldline((grid[0], grid[grid.len() - 1]), spec.window_sigmas * det.sigma)?;
    let results: Vec<_> = grid.par_iter().map(|&tau| response_general(&w, e, tau, &det, spec)).collect();
    let mut table = Table::new(&["tau", "acceleration", "p", "error", "planck_local", "status"]);
    for (tau, r) in grid.iter().zip(&results) {
        let a = accel(*tau);
        let planck = if a > 0.0 { planck_response(e, a, &det).unwrap_or(f64::NAN) } else { 0.0 };
        let v = r.as_ref().copied().unwrap_or(Response { value: f64::NAN, error: f64::NAN, imag_residual: f64::NAN });
        table.rows.push(vec![(*tau).into(), a.into(), v.value.into(), v.error.into(), planck.into(), status(r)]);
    }
    Ok((table, failures(&results)))
}

pub fn run_g2(cfg: &RunConfig) -> Result<Table, CliError> {
    let det = cfg.detector()?;
    let scan = cfg.scan()?;
    let source = cfg.source.ok_or_else(|| CliError::config("source: required for g2"))?;
    let r = source.r();
    let mut grid = scan.grid();
    if r > 0.0 {
        grid.extend([-r, r].into_iter().filter(|t| *t > scan.min && *t < scan.max));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let curve = g2_curve(&grid, source, &det, cfg.regime, &cfg.quadrature)?;
    let mut table = Table::new(&["dtau", "g2", "regime", "source", "marker"]);
    for (t, g) in curve.dtau.iter().zip(&curve.g2) {
        let marker = if r > 0.0 && t.abs() == r { 1.0 } else { 0.0 };
        table.rows.push(vec![
            (*t).into(),
            (*g).into(),
            curve.regime.as_str().into(),
            curve.source.label().into(),
            marker.into(),
        ]);
    }
    Ok(table)
}

pub fn run_validate(cfg: &RunConfig) -> Result<Table, CliError> {
    let reports = run_suite(&cfg.validate);
    let mut table = Table::new(&[
        "id", "name", "passed", "check", "kind", "measured", "expected", "tolerance", "wall_seconds", "note",
    ]);
    for r in &reports {
        println!("{r}");
        for c in &r.checks {
            let kind = format!("{:?}", c.kind).to_lowercase();
            table.rows.push(vec![
                f64::from(r.id).into(),
                r.name.as_str().into(),
                (if c.passed { "pass" } else { "fail" }).into(),
                c.label.as_str().into(),
                kind.into(),
                c.measured.into(),
                c.expected.into(),
                c.tolerance.into(),
                r.wall_seconds.into(),
                c.error.clone().unwrap_or_else(|| r.note.clone()).into(),
            ]);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed", reports.len() - failed);
    if failed > 0 {
        emit(&table, cfg)?;
        return Err(CliError::ValidationFailed { failed, total: reports.len() });
    }
    Ok(table)
}
