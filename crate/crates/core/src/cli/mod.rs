//! Command-line front end.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{Format, RunConfig};
use output::{emit, sig10};

use crate::bounds::{c0_estimate, sandwich, upper_bound, zfk_lower};
use crate::error::{Error, Result};
use crate::pdesim::{self, SimConfig};
use crate::phaseplane::{self, ShootingOptions};
use crate::reaction::{MediaParams, ReactionTerm};
use crate::variational::{self, OptimizeOptions};

#[derive(Debug, Parser)]
#[command(name = "wavespeed", version, about = "Minimal front speeds for doubly nonlinear reaction-diffusion")]
struct Cli {
    /// INI file with [media], [reaction], [solver] and [output] sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default, Clone)]
struct CaseArgs {
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// kpp, scaled-kpp, sine, power-kpp or table
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// exponent of power-kpp
    #[arg(long)]
    s: Option<f64>,
    /// CSV of u,f rows for the table family
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    fprime0: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
    /// write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal speed by phase-plane shooting
    Speed {
        #[command(flatten)]
        case: CaseArgs,
        /// write the trajectory at the minimal speed as u,w,q CSV
        #[arg(long)]
        dump_trajectory: Option<PathBuf>,
    },
    /// Closed-form lower and upper bounds
    Bounds {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Evaluate or optimize a trial function
    Variational {
        #[command(flatten)]
        case: CaseArgs,
        /// galpha, zfk or param
        #[arg(long, default_value = "param")]
        family: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        optimize: bool,
    },
    /// Rebuild the maximizing trial function (gamma > 0)
    Maximizer {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        u0: Option<f64>,
        /// write u,g,h samples of the normalized maximizer
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Direct simulation of the front
    Simulate {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        /// time between x,u snapshots
        #[arg(long)]
        snapshot_every: Option<f64>,
        #[arg(long, default_value = ".")]
        snapshot_dir: PathBuf,
        /// write t,front_position CSV
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Bounds and speeds over an (m, p) grid, as CSV
    Sweep {
        #[command(flatten)]
        case: CaseArgs,
        /// comma-separated m values
        #[arg(long = "m-values", value_delimiter = ',', num_args = 0..)]
        m_values: Vec<f64>,
        /// comma-separated p values
        #[arg(long = "p-values", value_delimiter = ',', num_args = 0..)]
        p_values: Vec<f64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// add a simulated speed column (slow)
        #[arg(long)]
        pde: bool,
    },
}

impl CaseArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.media.m = self.m;
        cfg.media.p = self.p;
        cfg.reaction.family = self.reaction.clone();
        cfg.reaction.lambda = self.lambda;
        cfg.reaction.s = self.s;
        cfg.reaction.table = self.table.clone();
        cfg.reaction.fprime0 = self.fprime0;
        cfg.solver.tol = self.tol;
        cfg.solver.budget = self.budget;
        cfg.output.format = self.format.as_deref().map(Format::parse).transpose()?;
        cfg.output.path = self.output.clone();
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("WAVESPEED_LOG")).try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, O, E>(args: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = OsString>,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn merged(config: &Option<PathBuf>, case: &CaseArgs) -> Result<RunConfig> {
    let flags = case.to_config()?;
    Ok(match config {
        Some(path) => RunConfig::load(path)?.overlay(&flags),
        None => flags,
    })
}

fn shooting_options(cfg: &RunConfig) -> ShootingOptions {
    ShootingOptions { tol: cfg.solver.tol.unwrap_or(1e-6), ..ShootingOptions::default() }
}

#[derive(Serialize)]
struct SpeedReport {
    c_star: f64,
    method: &'static str,
    tol: f64,
    gamma: f64,
    m: f64,
    p: f64,
    reaction: String,
}

#[derive(Serialize)]
struct BoundsReport {
    m: f64,
    p: f64,
    gamma: f64,
    reaction: String,
    zfk_lower: f64,
    upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c0: Option<f64>,
}

#[derive(Serialize)]
struct VariationalReport {
    family: String,
    params: Vec<f64>,
    #[serde(rename = "J")]
    j: f64,
    lower_bound_certificate: bool,
}

#[derive(Serialize)]
struct MaximizerReport {
    c_star: f64,
    #[serde(rename = "J")]
    j: f64,
    relative_gap: f64,
    u0: f64,
    g0: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    speed: f64,
    residual: f64,
    displacement: f64,
    compact_edge: bool,
    cells: usize,
    length: f64,
    dx: f64,
    dt: f64,
    t_max: f64,
}

fn execute<O: Write>(cli: Cli, out: &mut O) -> Result<i32> {
    match &cli.command {
        Command::Speed { case, dump_trajectory } => {
            let cfg = merged(&cli.config, case)?;
            let (mp, r) = (cfg.media_params()?, cfg.reaction_term()?);
            let opts = shooting_options(&cfg);
            let shot = phaseplane::shoot(&mp, &r, &opts)?;
            let c = shot.estimate.value;
            // the shooting speed must sit between the closed-form bounds
            let (lo, hi) = (zfk_lower(&mp, &r)?.value, upper_bound(&mp, &r)?.value);
            let slack = shot.estimate.tolerance + 1e-9 * c;
            if c < lo - slack || c > hi + slack {
                return Err(Error::Sandwich(format!("shooting speed {c} outside [{lo}, {hi}]")));
            }
            if let Some(path) = dump_trajectory {
                shot.trajectory.write_csv(create(path)?)?;
            }
            let report = SpeedReport {
                c_star: c,
                method: "shooting",
                tol: shot.estimate.tolerance,
                gamma: mp.gamma(),
                m: mp.m(),
                p: mp.p(),
                reaction: r.describe(),
            };
            emit(&cfg, &report, out)?;
        }
        Command::Bounds { case } => {
            let cfg = merged(&cli.config, case)?;
            let (mp, r) = (cfg.media_params()?, cfg.reaction_term()?);
            let report = BoundsReport {
                m: mp.m(),
                p: mp.p(),
                gamma: mp.gamma(),
                reaction: r.describe(),
                zfk_lower: zfk_lower(&mp, &r)?.value,
                upper: upper_bound(&mp, &r)?.value,
                c0: if mp.is_critical() { Some(c0_estimate(&mp, &r)?.value) } else { None },
            };
            emit(&cfg, &report, out)?;
        }
        Command::Variational { case, family, alpha, a, b, optimize } => {
            let cfg = merged(&cli.config, case)?;
            let (mp, r) = (cfg.media_params()?, cfg.reaction_term()?);
            let report = match family.as_str() {
                "param" if *optimize => {
                    let opts = OptimizeOptions { budget: cfg.solver.budget.unwrap_or(80), ..Default::default() };
                    let best = variational::optimize_family(&mp, &r, &opts)?;
                    VariationalReport { family: "param".into(), params: best.params, j: best.value, lower_bound_certificate: true }
                }
                "param" => {
                    let (a, b) = (a.unwrap_or(1.0), b.unwrap_or(0.5));
                    let g = variational::trial_param(a, b)?;
                    let j = variational::j_functional(&g, &mp, &r)?;
                    VariationalReport { family: "param".into(), params: vec![a, b], j, lower_bound_certificate: true }
                }
                "galpha" => {
                    let alpha = alpha.ok_or_else(|| Error::Config("--alpha is required for the galpha family".into()))?;
                    let g = variational::trial_galpha(alpha)?;
                    let j = variational::j_functional(&g, &mp, &r)?;
                    VariationalReport { family: "galpha".into(), params: vec![alpha], j, lower_bound_certificate: true }
                }
                "zfk" => {
                    let g = variational::trial_zfk(&mp, &r)?;
                    let j = variational::j_functional(&g, &mp, &r)?;
                    VariationalReport { family: "zfk".into(), params: vec![], j, lower_bound_certificate: true }
                }
                other => return Err(Error::Config(format!("unknown trial family '{other}' (galpha|zfk|param)"))),
            };
            emit(&cfg, &report, out)?;
        }
        Command::Maximizer { case, u0, profile } => {
            let mut cfg = merged(&cli.config, case)?;
            if u0.is_some() {
                cfg.solver.u0 = *u0;
            }
            let (mp, r) = (cfg.media_params()?, cfg.reaction_term()?);
            let u0 = cfg.solver.u0.unwrap_or(0.5);
            let opts = ShootingOptions { tol: cfg.solver.tol.unwrap_or(1e-10), ..ShootingOptions::default() };
            let shot = phaseplane::shoot(&mp, &r, &opts)?;
            let g = phaseplane::reconstruct_maximizer(&shot.trajectory, u0)?;
            let j = variational::j_functional(&g, &mp, &r)?;
            let c = shot.estimate.value;
            if let Some(path) = profile {
                let mut w = create(path)?;
                writeln!(w, "u,g,h")?;
                for i in 1..1000 {
                    let u = i as f64 / 1000.0;
                    writeln!(w, "{u:.10e},{:.10e},{:.10e}", g.g(u), g.h(u))?;
                }
            }
            let report = MaximizerReport { c_star: c, j, relative_gap: (j - c) / c, u0, g0: g.g(1e-300) };
            emit(&cfg, &report, out)?;
        }
        Command::Simulate { case, cells, length, tmax, snapshot_every, snapshot_dir, history } => {
            let mut cfg = merged(&cli.config, case)?;
            cfg.solver.cells = cells.or(cfg.solver.cells);
            cfg.solver.length = length.or(cfg.solver.length);
            cfg.solver.tmax = tmax.or(cfg.solver.tmax);
            let (mp, r) = (cfg.media_params()?, cfg.reaction_term()?);
            let sim = sim_config(&cfg);
            let mut next_snapshot = 0.0;
            let mut index = 0usize;
            let mut snapshot_error = None;
            let hist = pdesim::measure_speed_with(&mp, &r, &sim, |t, u| {
                let Some(every) = snapshot_every else { return };
                if t + 1e-9 < next_snapshot || snapshot_error.is_some() {
                    return;
                }
                let path = snapshot_dir.join(format!("snapshot_{index:04}.csv"));
                if let Err(e) = create(&path).and_then(|w| pdesim::write_snapshot(w, u, sim.dx())) {
                    snapshot_error = Some(e);
                }
                index += 1;
                next_snapshot += every;
            })?;
            if let Some(e) = snapshot_error {
                return Err(e);
            }
            if let Some(path) = history {
                hist.write_csv(create(path)?)?;
            }
            let report = SimulationReport {
                speed: hist.speed,
                residual: hist.residual,
                displacement: hist.displacement,
                compact_edge: hist.compact_edge,
                cells: hist.cells,
                length: hist.length,
                dx: hist.dx,
                dt: hist.dt,
                t_max: sim.t_max,
            };
            emit(&cfg, &report, out)?;
        }
        Command::Sweep { case, m_values, p_values, jobs, pde } => {
            let mut cfg = merged(&cli.config, case)?;
            cfg.solver.jobs = jobs.or(cfg.solver.jobs);
            return sweep(&cfg, m_values, p_values, *pde, out);
        }
    }
    Ok(0)
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    let d = SimConfig::default();
    SimConfig {
        cells: cfg.solver.cells.unwrap_or(d.cells),
        length: cfg.solver.length.unwrap_or(d.length),
        t_max: cfg.solver.tmax.unwrap_or(d.t_max),
        ..d
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// One sweep row: every column but the status is numeric.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub m: f64,
    pub p: f64,
    pub gamma: f64,
    pub zfk_lower: Option<f64>,
    pub best_variational: Option<f64>,
    pub c_shoot: Option<f64>,
    pub upper: Option<f64>,
    pub pde_speed: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn record(&self, with_pde: bool) -> Vec<String> {
        let num = |v: Option<f64>| v.map(|x| format!("{}", sig10(x))).unwrap_or_default();
        let mut row = vec![
            num(Some(self.m)),
            num(Some(self.p)),
            num(Some(self.gamma)),
            num(self.zfk_lower),
            num(self.best_variational),
            num(self.c_shoot),
            num(self.upper),
        ];
        if with_pde {
            row.push(num(self.pde_speed));
        }
        row.push(self.status.clone());
        row
    }
}

/// Grid points with `γ ≥ 0`, in row-major `(m, p)` order.
pub fn sweep_grid(m_values: &[f64], p_values: &[f64]) -> Vec<(f64, f64)> {
    m_values
        .iter()
        .flat_map(|&m| p_values.iter().map(move |&p| (m, p)))
        .filter(|&(m, p)| m > 0.0 && p > 1.0 && m * (p - 1.0) - 1.0 >= -1e-12)
        .collect()
}

fn sweep_row(m: f64, p: f64, r: &ReactionTerm, tol: f64, budget: usize, with_pde: bool, sim: &SimConfig) -> SweepRow {
    let gamma = m * (p - 1.0) - 1.0;
    let mut row = SweepRow {
        m,
        p,
        gamma,
        zfk_lower: None,
        best_variational: None,
        c_shoot: None,
        upper: None,
        pde_speed: None,
        status: "ok".into(),
    };
    let result = MediaParams::new(m, p).and_then(|mp| {
        row.zfk_lower = Some(zfk_lower(&mp, r)?.value);
        row.upper = Some(upper_bound(&mp, r)?.value);
        let report = sandwich(&mp, r, tol, budget);
        if let Err(Error::Sandwich(_)) = &report {
            log::warn!("sandwich violated at m={m}, p={p}");
        }
        let report = report?;
        row.best_variational = Some(report.variational_lower.value);
        row.c_shoot = Some(report.shooting.value);
        if with_pde {
            row.pde_speed = Some(pdesim::measure_speed(&mp, r, sim)?.speed);
        }
        Ok(())
    });
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    row
}

/// Runs the whole grid, returning rows in grid order.
pub fn sweep_rows(cfg: &RunConfig, m_values: &[f64], p_values: &[f64], with_pde: bool) -> Result<Vec<SweepRow>> {
    let r = cfg.reaction_term()?;
    let tol = cfg.solver.tol.unwrap_or(1e-6);
    let budget = cfg.solver.budget.unwrap_or(40);
    let sim = sim_config(cfg);
    let grid = sweep_grid(m_values, p_values);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.solver.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|&(m, p)| sweep_row(m, p, &r, tol, budget, with_pde, &sim)).collect()))
}

fn sweep<O: Write>(cfg: &RunConfig, m_values: &[f64], p_values: &[f64], with_pde: bool, out: &mut O) -> Result<i32> {
    let rows = sweep_rows(cfg, m_values, p_values, with_pde)?;
    let mut header = vec!["m", "p", "gamma", "zfk_lower", "best_variational", "c_shoot", "upper"];
    if with_pde {
        header.push("pde_speed");
    }
    header.push("status");
    let sink: Box<dyn Write + '_> = match &cfg.output.path {
        Some(path) => Box::new(create(path)?),
        None => Box::new(&mut *out),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(&header).map_err(csv_err)?;
    for row in &rows {
        writer.write_record(row.record(with_pde)).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(if rows.iter().any(|r| r.status != "ok") { 2 } else { 0 })
}
