//! The `selftest` command line: statistics tables, the Result 1 checker, swap
//! fidelities, SDP sweeps and SDPA export.
//!
//! Every flag can also come from a `key=value` config file (`--config`), with the
//! flag name without dashes as key. Flags given on the command line win.
//!
//! Exit codes: 0 when every check or bound meets its threshold, 1 on a failed check,
//! 2 on a solver failure or any other error.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analytic;
use crate::error::{Error, Result};
use crate::npa::{self, GeneralConfig, Level, MomentProblem, NoiseModel, Result1Config};
use crate::qcore::{self, result1};
use crate::sdp::{self, ClarabelBackend, ExternalBackend, SdpBackend, SolveOptions};
use crate::swapiso;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Headline threshold for the noiseless θ sweep.
pub const THETA_SWEEP_THRESHOLD: f64 = 0.9996;
/// Slack allowed when checking that bounds do not increase with ε.
pub const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "selftest", version, about = "Self-testing of cosθ|W⟩ + sinθ|GHZ⟩")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulated vs closed-form three-body correlators.
    IdealStats(Flags),
    /// Evaluate the 24 Result 1 conditions on the ideal behavior.
    CheckResult1(Flags),
    /// Swap-isometry fidelity of the ideal realizations.
    SwapFidelity(Flags),
    /// Certified fidelity lower bound over a θ grid.
    SweepTheta(Flags),
    /// Certified fidelity lower bound over an ε grid.
    SweepNoise(Flags),
    /// Write the reduced SDP in SDPA sparse format.
    ExportSdpa(Flags),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// key=value file providing defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Angle θ of the target state.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Noise level; for sweep-noise the largest ε of the grid (default 0.1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of uniform grid points, or an explicit comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Pass/fail tolerance for the checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Moment basis: q1 or q1+aug.
    #[arg(long)]
    pub level: Option<String>,
    /// white-noise or interval.
    #[arg(long = "noise-model")]
    pub noise_model: Option<String>,
    /// clarabel, cvxopt, or a command line taking `input.dat-s output.txt`.
    #[arg(long)]
    pub backend: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// sweep-noise/export-sdpa: general, result1 or all.
    #[arg(long)]
    pub target: Option<String>,
    /// check-result1: replace a measured value, e.g. C1=0.21 (repeatable).
    #[arg(long, value_name = "ID=VALUE")]
    pub perturb: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Points(usize),
    Values(Vec<f64>),
}

impl std::str::FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |e: String| Error::InvalidArgument(format!("grid {s:?}: {e}"));
        if let Ok(n) = s.parse::<usize>() {
            if n == 0 {
                return Err(bad("needs at least one point".into()));
            }
            return Ok(Grid::Points(n));
        }
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("values must be strictly ascending".into()));
        }
        Ok(Grid::Values(v))
    }
}

impl Grid {
    /// Points(n) becomes n uniform points on [lo, hi].
    pub fn values(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Points(1) => vec![lo],
            Grid::Points(n) => (0..*n).map(|i| lo + (hi - lo) * i as f64 / (*n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BackendChoice {
    Clarabel,
    Cvxopt,
    Command(Vec<String>),
}

impl BackendChoice {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "clarabel" => BackendChoice::Clarabel,
            "cvxopt" => BackendChoice::Cvxopt,
            other => BackendChoice::Command(ExternalBackend::new(other.split_whitespace().map(String::from).collect())?.command),
        })
    }

    pub fn build(&self) -> Box<dyn SdpBackend> {
        match self {
            BackendChoice::Clarabel => Box::new(ClarabelBackend),
            BackendChoice::Cvxopt => Box::new(ExternalBackend::cvxopt()),
            BackendChoice::Command(c) => Box::new(ExternalBackend { command: c.clone(), concurrent: false }),
        }
    }
}

/// Flags merged with the config file.
#[derive(Clone, Debug)]
pub struct Settings {
    pub theta: Option<f64>,
    pub epsilon: Option<f64>,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    pub level: Level,
    pub noise_model: Option<NoiseModel>,
    pub backend: BackendChoice,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub target: Option<String>,
    pub perturb: Vec<(String, f64)>,
}

const CONFIG_KEYS: &[&str] = &[
    "theta", "epsilon", "grid", "tol", "level", "noise-model", "backend", "out", "jobs", "target", "perturb",
];

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::Config(format!("{key} = {v:?}: {e}")))
}

fn parse_perturb(s: &str) -> Result<(String, f64)> {
    let (id, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("--perturb {s:?}: expected ID=VALUE")))?;
    Ok((id.trim().to_string(), parse_num("perturb", v.trim())?))
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => parse_config(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str, flag: Option<String>| flag.or_else(|| file.get(key).cloned());
        let theta = get("theta", flags.theta.map(|v| v.to_string()))
            .map(|v| parse_num::<f64>("theta", &v))
            .transpose()?;
        let epsilon = get("epsilon", flags.epsilon.map(|v| v.to_string()))
            .map(|v| parse_num::<f64>("epsilon", &v))
            .transpose()?;
        if let Some(e) = epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidArgument(format!("epsilon = {e} outside [0, 1]")));
            }
        }
        let grid = get("grid", flags.grid.clone()).map(|v| v.parse()).transpose()?;
        let tol = get("tol", flags.tol.map(|v| v.to_string()))
            .map(|v| parse_num::<f64>("tol", &v))
            .transpose()?;
        let level = get("level", flags.level.clone())
            .map(|v| v.parse())
            .transpose()?
            .unwrap_or(Level::Q1Aug);
        let noise_model = get("noise-model", flags.noise_model.clone())
            .map(|v| v.parse())
            .transpose()?;
        let backend = BackendChoice::parse(&get("backend", flags.backend.clone()).unwrap_or_else(|| "clarabel".into()))?;
        let out = flags.out.clone().or_else(|| file.get("out").map(PathBuf::from));
        let jobs = get("jobs", flags.jobs.map(|v| v.to_string()))
            .map(|v| parse_num::<usize>("jobs", &v))
            .transpose()?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1);
        let target = get("target", flags.target.clone());
        let mut perturb = Vec::new();
        if let Some(v) = file.get("perturb") {
            for p in v.split(',').filter(|s| !s.trim().is_empty()) {
                perturb.push(parse_perturb(p)?);
            }
        }
        for p in &flags.perturb {
            perturb.push(parse_perturb(p)?);
        }
        Ok(Settings {
            theta,
            epsilon,
            grid,
            tol,
            level,
            noise_model,
            backend,
            out,
            jobs,
            target,
            perturb,
        })
    }

    /// --theta alone gives one point; otherwise the grid on [0, π/2] (25 points).
    pub fn theta_grid(&self) -> Vec<f64> {
        match (&self.grid, self.theta) {
            (None, Some(t)) => vec![t],
            (g, _) => g.clone().unwrap_or(Grid::Points(25)).values(0.0, FRAC_PI_2),
        }
    }

    /// The grid on [0, ε_max] with ε_max = --epsilon or 0.1 (11 points by default).
    pub fn epsilon_grid(&self) -> Vec<f64> {
        self.grid
            .clone()
            .unwrap_or(Grid::Points(11))
            .values(0.0, self.epsilon.unwrap_or(0.1))
    }
}

/// Grids and solver settings of one sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub theta_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub level: Level,
    pub noise_model: Option<NoiseModel>,
    pub backend: BackendChoice,
    pub output_path: Option<PathBuf>,
    pub jobs: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("theta", &self.theta_grid), ("epsilon", &self.epsilon_grid)] {
            if g.is_empty() {
                return Err(Error::InvalidArgument(format!("{name} grid is empty")));
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("{name} grid is not ascending")));
            }
        }
        for &e in &self.epsilon_grid {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidArgument(format!("epsilon {e} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One solved grid point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub bound: Option<f64>,
    pub status: String,
    pub gap: f64,
    pub basis_size: usize,
    pub runtime_s: f64,
    pub error: Option<String>,
}

impl PointResult {
    fn bound_field(&self) -> String {
        self.bound.map_or_else(String::new, |b| format!("{b:.10}"))
    }
}

/// Which moment problem a sweep solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    General(f64),
    Result1,
}

impl Target {
    pub fn name(&self) -> String {
        match self {
            Target::General(t) => format!("general_theta_{t:.6}"),
            Target::Result1 => "result1".into(),
        }
    }

    pub fn assemble(&self, epsilon: f64, level: Level, noise: Option<NoiseModel>) -> Result<MomentProblem> {
        match *self {
            Target::General(theta) => {
                let mut cfg = GeneralConfig { level, ..Default::default() };
                if let Some(n) = noise {
                    cfg.noise = n;
                }
                npa::assemble_general_sdp(theta, epsilon, &cfg)
            }
            Target::Result1 => {
                let mut cfg = Result1Config::default();
                if let Some(n) = noise {
                    cfg.noise = n;
                }
                npa::assemble_result1_sdp(epsilon, &cfg)
            }
        }
    }
}

/// The four curves of the noise plot: W, θ = π/4, GHZ and θ = arccos√(3/5).
pub fn noise_targets() -> [f64; 4] {
    [0.0, std::f64::consts::FRAC_PI_4, FRAC_PI_2, (0.6f64).sqrt().acos()]
}

pub fn solve_point(target: Target, epsilon: f64, level: Level, noise: Option<NoiseModel>, backend: &dyn SdpBackend) -> PointResult {
    let t0 = Instant::now();
    let res = target.assemble(epsilon, level, noise).and_then(|p| {
        let basis = p.basis.len();
        sdp::solve(&p, backend, &SolveOptions::default()).map(|s| (s, basis))
    });
    let runtime_s = t0.elapsed().as_secs_f64();
    match res {
        Ok((s, basis_size)) => PointResult {
            bound: sdp::lower_bound_from_solution(&s).ok(),
            status: s.status.to_string(),
            gap: s.gap,
            basis_size,
            runtime_s,
            error: None,
        },
        Err(e) => PointResult {
            bound: None,
            status: "error".into(),
            gap: f64::NAN,
            basis_size: 0,
            runtime_s,
            error: Some(e.to_string()),
        },
    }
}

/// Runs `f` over the items on a bounded pool; results keep the input order.
fn run_pool<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

fn effective_jobs(jobs: usize, backend: &dyn SdpBackend) -> usize {
    if backend.concurrent_safe() {
        jobs
    } else {
        1
    }
}

pub const THETA_HEADER: &str = "theta,fidelity_lower_bound,solver_status,gap,basis_size,runtime_s";
pub const NOISE_HEADER: &str = "epsilon,fidelity_lower_bound,solver_status,gap,runtime_s";

pub fn sweep_theta(cfg: &SweepConfig, epsilon: f64) -> Result<Vec<(f64, PointResult)>> {
    cfg.validate()?;
    let backend = cfg.backend.build();
    let jobs = effective_jobs(cfg.jobs, backend.as_ref());
    let rows = run_pool(jobs, &cfg.theta_grid, |&t| {
        solve_point(Target::General(t), epsilon, cfg.level, cfg.noise_model, backend.as_ref())
    })?;
    Ok(cfg.theta_grid.iter().copied().zip(rows).collect())
}

pub fn sweep_noise(cfg: &SweepConfig, target: Target) -> Result<Vec<(f64, PointResult)>> {
    cfg.validate()?;
    let backend = cfg.backend.build();
    let jobs = effective_jobs(cfg.jobs, backend.as_ref());
    let rows = run_pool(jobs, &cfg.epsilon_grid, |&e| {
        solve_point(target, e, cfg.level, cfg.noise_model, backend.as_ref())
    })?;
    Ok(cfg.epsilon_grid.iter().copied().zip(rows).collect())
}

pub fn theta_csv(rows: &[(f64, PointResult)]) -> String {
    let mut s = format!("{THETA_HEADER}\n");
    for (t, r) in rows {
        let _ = writeln!(
            s,
            "{t},{},{},{:.3e},{},{:.3}",
            r.bound_field(),
            r.status,
            r.gap,
            r.basis_size,
            r.runtime_s
        );
    }
    s
}

pub fn noise_csv(rows: &[(f64, PointResult)]) -> String {
    let mut s = format!("{NOISE_HEADER}\n");
    for (e, r) in rows {
        let _ = writeln!(s, "{e},{},{},{:.3e},{:.3}", r.bound_field(), r.status, r.gap, r.runtime_s);
    }
    s
}

/// Whether the certified bounds never increase along the grid (beyond `slack`).
pub fn is_nonincreasing(rows: &[(f64, PointResult)], slack: f64) -> bool {
    let b: Vec<f64> = rows.iter().filter_map(|(_, r)| r.bound).collect();
    b.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Error::io("stdout", e))
        }
    }
}

fn report_errors(rows: &[(f64, PointResult)]) -> bool {
    let mut failed = false;
    for (x, r) in rows {
        if let Some(e) = &r.error {
            eprintln!("error at {x}: {e}");
        }
        if r.bound.is_none() {
            failed = true;
        }
    }
    failed
}

pub fn cmd_ideal_stats(s: &Settings) -> Result<i32> {
    let tol = s.tol.unwrap_or(1e-10);
    let mut text = String::from("theta,statistic,simulated,formula,deviation\n");
    let mut ok = true;
    for theta in s.theta_grid() {
        let real = qcore::ideal_realization_general(theta)?;
        for st in qcore::closed_form_statistics(theta) {
            let sim = qcore::correlator(&real, st.choice)?;
            let dev = (sim - st.value).abs();
            ok &= dev < tol;
            let _ = writeln!(text, "{theta},{},{sim:.15},{:.15},{dev:.3e}", st.label, st.value);
        }
    }
    emit(s.out.as_deref(), &text)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_check_result1(s: &Settings) -> Result<i32> {
    let tol = s.tol.unwrap_or(1e-9);
    let real = qcore::ideal_realization_result1()?;
    let behavior = qcore::behavior_full(&real);
    let report = analytic::result1_check_with_overrides(&behavior, tol, &s.perturb)?;
    let mut text = format!(
        "{:<4} {:>19} {:>19} {:>10}  {:<4}  {}\n",
        "id", "observed", "required", "deviation", "ok", "condition"
    );
    for c in &report.conditions {
        let _ = writeln!(
            text,
            "{:<4} {:>19.15} {:>19.15} {:>10.2e}  {:<4}  {}",
            c.id,
            c.lhs,
            c.rhs,
            c.deviation,
            if c.pass { "pass" } else { "FAIL" },
            c.description
        );
    }
    let tilted = 0.6 * analytic::tilted_quantum_max(result1::alpha());
    let _ = writeln!(text, "\nprojected tilted value (3/5)·12/√13 ≈ {tilted:.5}");
    let _ = writeln!(
        text,
        "projected XOR value 8/(5 sin2μ) ≈ {:.5} with tanμ = 2/3",
        8.0 / (5.0 * (2.0 * result1::mu()).sin())
    );
    let failed: Vec<&str> = report.conditions.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    if failed.is_empty() {
        let _ = writeln!(text, "all {} conditions hold at tol {tol:e}", report.conditions.len());
    } else {
        let _ = writeln!(text, "failed at tol {tol:e}: {}", failed.join(", "));
    }
    emit(s.out.as_deref(), &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_swap_fidelity(s: &Settings) -> Result<i32> {
    let tol = s.tol.unwrap_or(1e-9);
    let mut text = String::from("realization,theta,fidelity,deviation,ancilla_011,ancilla_101,ancilla_110\n");
    let mut ok = true;
    let mut row = |name: &str, theta: f64, real: &qcore::Realization| -> Result<()> {
        let f = swapiso::fidelity(real, theta)?;
        let out = swapiso::apply_isometry(real)?;
        let leak: Vec<f64> = [0b011, 0b101, 0b110].iter().map(|&p| out.ancilla_component(p).norm()).collect();
        let dev = (1.0 - f).abs();
        ok &= dev < tol && leak.iter().all(|&l| l < tol);
        let _ = writeln!(
            text,
            "{name},{theta},{f:.15},{dev:.3e},{:.3e},{:.3e},{:.3e}",
            leak[0], leak[1], leak[2]
        );
        Ok(())
    };
    for theta in s.theta_grid() {
        row("general", theta, &qcore::ideal_realization_general(theta)?)?;
    }
    row("result1", result1::theta(), &qcore::ideal_realization_result1()?)?;
    emit(s.out.as_deref(), &text)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn sweep_config(s: &Settings) -> SweepConfig {
    SweepConfig {
        theta_grid: s.theta_grid(),
        epsilon_grid: s.epsilon_grid(),
        level: s.level,
        noise_model: s.noise_model,
        backend: s.backend.clone(),
        output_path: s.out.clone(),
        jobs: s.jobs,
    }
}

pub fn cmd_sweep_theta(s: &Settings) -> Result<i32> {
    let epsilon = s.epsilon.unwrap_or(0.0);
    let cfg = sweep_config(s);
    let rows = sweep_theta(&cfg, epsilon)?;
    emit(cfg.output_path.as_deref(), &theta_csv(&rows))?;
    if report_errors(&rows) {
        return Ok(EXIT_SOLVER);
    }
    let ok = epsilon > 0.0 || rows.iter().all(|(_, r)| r.bound.is_some_and(|b| b > THETA_SWEEP_THRESHOLD));
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn targets(s: &Settings) -> Result<Vec<Target>> {
    let general = || match s.theta {
        Some(t) => vec![Target::General(t)],
        None => noise_targets().into_iter().map(Target::General).collect(),
    };
    match s.target.as_deref().unwrap_or("general") {
        "general" => Ok(general()),
        "result1" => Ok(vec![Target::Result1]),
        "all" => Ok(general().into_iter().chain([Target::Result1]).collect()),
        other => Err(Error::InvalidArgument(format!(
            "unknown target {other:?} (expected general, result1 or all)"
        ))),
    }
}

/// `out.csv` becomes `out_<target>.csv` when several targets are written.
fn target_path(out: &Path, target: &Target) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}_{}{ext}", target.name()))
}

pub fn cmd_sweep_noise(s: &Settings) -> Result<i32> {
    let cfg = sweep_config(s);
    let ts = targets(s)?;
    let mut code = EXIT_OK;
    let mut stdout_text = String::new();
    for t in &ts {
        let rows = sweep_noise(&cfg, *t)?;
        let csv = noise_csv(&rows);
        match (&cfg.output_path, ts.len()) {
            (Some(p), 1) => emit(Some(p), &csv)?,
            (Some(p), _) => emit(Some(&target_path(p, t)), &csv)?,
            (None, 1) => stdout_text.push_str(&csv),
            (None, _) => {
                let _ = writeln!(stdout_text, "# target {}", t.name());
                stdout_text.push_str(&csv);
            }
        }
        if report_errors(&rows) {
            code = EXIT_SOLVER;
        } else if !is_nonincreasing(&rows, MONOTONE_SLACK) && code == EXIT_OK {
            eprintln!("bounds for {} increase with epsilon", t.name());
            code = EXIT_CHECK_FAILED;
        }
    }
    if cfg.output_path.is_none() {
        emit(None, &stdout_text)?;
    }
    Ok(code)
}

/// SDPA text of the reduced problem, led by comment lines carrying the target and the
/// objective constant that the SDP value must be shifted by.
pub fn export_text(target: Target, epsilon: f64, level: Level, noise: Option<NoiseModel>) -> Result<String> {
    let p = target.assemble(epsilon, level, noise)?;
    let sf = sdp::to_standard_form(&p, &sdp::ReduceOptions::default())?;
    let mut text = String::new();
    let _ = writeln!(text, "\"selftest target={} epsilon={epsilon} level={level}", target.name());
    let _ = writeln!(text, "\"objective_constant={:.16e}", sf.objective_constant);
    text.push_str(&sdp::export_sdpa(&sf.sdp));
    Ok(text)
}

/// Reads back the `objective_constant=` comment written by [`export_text`].
pub fn objective_constant_of(text: &str) -> Option<f64> {
    text.lines()
        .take_while(|l| l.starts_with('"') || l.starts_with('*'))
        .find_map(|l| l[1..].trim().strip_prefix("objective_constant=")?.parse().ok())
}

pub fn cmd_export_sdpa(s: &Settings) -> Result<i32> {
    let target = match s.target.as_deref().unwrap_or("general") {
        "general" => Target::General(s.theta.ok_or_else(|| {
            Error::InvalidArgument("export-sdpa needs --theta for the general target".into())
        })?),
        "result1" => Target::Result1,
        other => return Err(Error::InvalidArgument(format!("unknown target {other:?}"))),
    };
    let text = export_text(target, s.epsilon.unwrap_or(0.0), s.level, s.noise_model)?;
    emit(s.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<i32> {
    let flags = match &cli.command {
        Command::IdealStats(f)
        | Command::CheckResult1(f)
        | Command::SwapFidelity(f)
        | Command::SweepTheta(f)
        | Command::SweepNoise(f)
        | Command::ExportSdpa(f) => f,
    };
    let s = Settings::resolve(flags)?;
    match &cli.command {
        Command::IdealStats(_) => cmd_ideal_stats(&s),
        Command::CheckResult1(_) => cmd_check_result1(&s),
        Command::SwapFidelity(_) => cmd_swap_fidelity(&s),
        Command::SweepTheta(_) => cmd_sweep_theta(&s),
        Command::SweepNoise(_) => cmd_sweep_noise(&s),
        Command::ExportSdpa(_) => cmd_export_sdpa(&s),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SOLVER } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}
