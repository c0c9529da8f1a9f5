//! Solver backends: Clarabel in process, or any external program speaking SDPA.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use super::{sdpa, BlockKind, StandardForm, StandardSdp};
use crate::error::{Error, Result};
use crate::npa::Monomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    SolverError,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::SolverError => "solver-error",
        }
    }

    pub fn has_certificate(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "optimal" => Self::Optimal,
            "near-optimal" => Self::NearOptimal,
            "infeasible" => Self::Infeasible,
            "unbounded" => Self::Unbounded,
            "solver-error" => Self::SolverError,
            _ => return Err(Error::InvalidArgument(format!("unknown solver status {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Primal/dual gap accepted for `Optimal`.
    pub gap_tolerance: f64,
    /// Gap accepted when the solver stopped early but a dual certificate exists.
    pub near_optimal_gap: f64,
    pub verbose: bool,
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-6,
            near_optimal_gap: 1e-3,
            verbose: false,
            max_iter: 200,
        }
    }
}

/// What a backend reports for cᵀx (without the objective constant).
#[derive(Clone, Debug, PartialEq)]
pub struct RawSolution {
    pub status: SolveStatus,
    pub primal_objective: f64,
    /// A value every feasible x is at least (when the status has a certificate).
    pub dual_objective: f64,
    pub x: Vec<f64>,
    pub detail: String,
}

pub trait SdpBackend: Send + Sync {
    fn name(&self) -> &str;
    /// Whether several solves may run at once.
    fn concurrent_safe(&self) -> bool;
    /// `var_bound`: every feasible xᵢ satisfies |xᵢ| ≤ bound (used for certificates).
    fn solve_sdp(&self, sdp: &StandardSdp, var_bound: Option<f64>, opts: &SolveOptions) -> Result<RawSolution>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub gap_tolerance: f64,
    pub moment_values: BTreeMap<Monomial, f64>,
    pub backend: String,
    pub detail: String,
}

/// dual − gap tolerance, the value the minimum is guaranteed to exceed.
pub fn lower_bound_from_solution(sol: &SdpSolution) -> Result<f64> {
    if sol.status.has_certificate() {
        Ok(sol.dual_value - sol.gap_tolerance)
    } else {
        Err(Error::NoCertificate(sol.status.to_string()))
    }
}

pub(super) fn solve_standard_form(sf: &StandardForm, backend: &dyn SdpBackend, opts: &SolveOptions) -> Result<SdpSolution> {
    let sdp = &sf.sdp;
    let raw = if sdp.num_vars() == 0 {
        // Everything fixed by the equalities: only feasibility is left.
        let feasible = sdp.min_slack_eigenvalue(&[]) >= -1e-8;
        RawSolution {
            status: if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible },
            primal_objective: 0.0,
            dual_objective: 0.0,
            x: Vec::new(),
            detail: "all variables fixed".into(),
        }
    } else {
        backend.solve_sdp(sdp, sf.var_bound, opts)?
    };
    let gap = (raw.primal_objective - raw.dual_objective).abs();
    let mut status = raw.status;
    if status == SolveStatus::Optimal && gap > opts.gap_tolerance {
        status = SolveStatus::NearOptimal;
    }
    let moment_values = if raw.x.len() == sdp.num_vars() {
        sf.moment_values(&raw.x)
    } else {
        BTreeMap::new()
    };
    Ok(SdpSolution {
        status,
        primal_value: raw.primal_objective + sf.objective_constant,
        dual_value: raw.dual_objective + sf.objective_constant,
        gap,
        gap_tolerance: opts.gap_tolerance,
        moment_values,
        backend: backend.name().to_string(),
        detail: raw.detail,
    })
}

/// Column-major upper-triangle offset used by Clarabel's scaled svec.
fn svec_index(row: usize, col: usize) -> usize {
    col * (col + 1) / 2 + row
}

/// Clarabel data: minimize cᵀx s.t. b − Ax ∈ K.
struct ClarabelData {
    a: CscMatrix<f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
    offsets: Vec<usize>,
}

fn to_clarabel(sdp: &StandardSdp) -> ClarabelData {
    let mut offsets = Vec::with_capacity(sdp.blocks.len());
    let mut cones = Vec::with_capacity(sdp.blocks.len());
    let mut rows = 0;
    for b in &sdp.blocks {
        offsets.push(rows);
        match b.kind {
            BlockKind::Psd => {
                cones.push(SupportedConeT::PSDTriangleConeT(b.dim));
                rows += b.dim * (b.dim + 1) / 2;
            }
            BlockKind::Diagonal => {
                cones.push(SupportedConeT::NonnegativeConeT(b.dim));
                rows += b.dim;
            }
        }
    }
    let mut bvec = vec![0.0; rows];
    let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
    for e in &sdp.entries {
        let blk = sdp.blocks[e.block];
        let (r, scale) = match blk.kind {
            BlockKind::Psd => (
                offsets[e.block] + svec_index(e.row, e.col),
                if e.row == e.col { 1.0 } else { std::f64::consts::SQRT_2 },
            ),
            BlockKind::Diagonal => (offsets[e.block] + e.row, 1.0),
        };
        if e.var == 0 {
            bvec[r] -= scale * e.value;
        } else {
            ii.push(r);
            jj.push(e.var - 1);
            vv.push(-scale * e.value);
        }
    }
    let a = CscMatrix::new_from_triplets(rows, sdp.num_vars(), ii, jj, vv);
    ClarabelData { a, b: bvec, cones, offsets }
}

/// Projects z onto the dual cone (self-dual here) block by block.
fn project_dual(sdp: &StandardSdp, data: &ClarabelData, z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    for (k, b) in sdp.blocks.iter().enumerate() {
        let off = data.offsets[k];
        match b.kind {
            BlockKind::Diagonal => {
                for v in &mut out[off..off + b.dim] {
                    *v = v.max(0.0);
                }
            }
            BlockKind::Psd => {
                let n = b.dim;
                let s2 = std::f64::consts::SQRT_2;
                let m = DMatrix::from_fn(n, n, |i, j| {
                    let (r, c) = if i <= j { (i, j) } else { (j, i) };
                    let v = z[off + svec_index(r, c)];
                    if r == c { v } else { v / s2 }
                });
                let eig = m.symmetric_eigen();
                let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0)));
                let p = &eig.eigenvectors * d * eig.eigenvectors.transpose();
                for c in 0..n {
                    for r in 0..=c {
                        out[off + svec_index(r, c)] = if r == c { p[(r, c)] } else { s2 * p[(r, c)] };
                    }
                }
            }
        }
    }
    out
}

/// Weak-duality bound from any dual-cone z: cᵀx ≥ −bᵀz − Σ|Aᵀz + c|ᵢ·bound.
fn certified_bound(sdp: &StandardSdp, data: &ClarabelData, z: &[f64], bound: f64) -> f64 {
    let z = project_dual(sdp, data, z);
    let mut r = sdp.c.clone();
    let a = &data.a;
    for (j, rj) in r.iter_mut().enumerate() {
        for k in a.colptr[j]..a.colptr[j + 1] {
            *rj += a.nzval[k] * z[a.rowval[k]];
        }
    }
    let bz: f64 = data.b.iter().zip(&z).map(|(b, z)| b * z).sum();
    -bz - bound * r.iter().map(|v| v.abs()).sum::<f64>()
}

/// Interior-point solve with Clarabel. With a variable bound the dual value is the
/// certified bound of the projected dual iterate, so it is valid even when the solver
/// stops early.
#[derive(Clone, Debug, Default)]
pub struct ClarabelBackend;

impl SdpBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn concurrent_safe(&self) -> bool {
        true
    }

    fn solve_sdp(&self, sdp: &StandardSdp, var_bound: Option<f64>, opts: &SolveOptions) -> Result<RawSolution> {
        let n = sdp.num_vars();
        let data = to_clarabel(sdp);
        let p = CscMatrix::zeros((n, n));
        let settings = DefaultSettingsBuilder::default()
            .verbose(opts.verbose)
            .max_iter(opts.max_iter)
            .build()
            .map_err(|e| Error::Solver(format!("clarabel settings: {e}")))?;
        let mut solver = DefaultSolver::new(&p, &sdp.c, &data.a, &data.b, &data.cones, settings)
            .map_err(|e| Error::Solver(format!("clarabel setup: {e}")))?;
        solver.solve();
        let sol = &solver.solution;
        let dual = match var_bound {
            Some(bound) => certified_bound(sdp, &data, &sol.z, bound),
            None => sol.obj_val_dual,
        };
        let primal = sol.obj_val;
        let close = (primal - dual).abs() <= opts.near_optimal_gap;
        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
            SolverStatus::NumericalError
            | SolverStatus::InsufficientProgress
            | SolverStatus::MaxIterations
            | SolverStatus::MaxTime
                if var_bound.is_some() && dual.is_finite() && close =>
            {
                SolveStatus::NearOptimal
            }
            _ => SolveStatus::SolverError,
        };
        Ok(RawSolution {
            status,
            primal_objective: primal,
            dual_objective: dual,
            x: sol.x.clone(),
            detail: format!("{:?} after {} iterations", sol.status, sol.iterations),
        })
    }
}

/// Runs `command… input.dat-s output.txt` and reads back
///
/// ```text
/// status optimal
/// primal <cᵀx>
/// dual <bound>
/// x <x1> <x2> …
/// ```
#[derive(Clone, Debug)]
pub struct ExternalBackend {
    pub command: Vec<String>,
    pub concurrent: bool,
}

impl ExternalBackend {
    pub fn new(command: Vec<String>) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::Config("external backend needs a command".into()));
        }
        Ok(Self { command, concurrent: false })
    }

    /// The bundled CVXOPT driver.
    pub fn cvxopt() -> Self {
        let script = std::env::var_os("SELFTEST_CVXOPT_SCRIPT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/sdpa_cvxopt.py")));
        let python = std::env::var("SELFTEST_PYTHON").unwrap_or_else(|_| "python3".into());
        Self {
            command: vec![python, script.to_string_lossy().into_owned()],
            concurrent: true,
        }
    }
}

pub(crate) fn parse_result(text: &str, n: usize) -> Result<RawSolution> {
    let mut status = None;
    let (mut primal, mut dual) = (f64::NAN, f64::NAN);
    let mut x = Vec::new();
    let mut detail = String::new();
    for (i, line) in text.lines().enumerate() {
        let perr = |msg: String| Error::Parse { line: i + 1, msg };
        let mut it = line.split_whitespace();
        let Some(key) = it.next() else { continue };
        let num = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| perr(format!("{key} needs a value")))?
                .parse::<f64>()
                .map_err(|e| perr(format!("{key}: {e}")))
        };
        match key {
            "status" => status = Some(it.next().ok_or_else(|| perr("missing status".into()))?.parse()?),
            "primal" => primal = num(it.next())?,
            "dual" => dual = num(it.next())?,
            "x" => {
                x = it
                    .map(|s| s.parse::<f64>().map_err(|e| perr(format!("x: {e}"))))
                    .collect::<Result<_>>()?
            }
            "detail" => detail = it.collect::<Vec<_>>().join(" "),
            _ => {}
        }
    }
    let status: SolveStatus = status.ok_or_else(|| Error::Parse { line: 0, msg: "no status line".into() })?;
    if status.has_certificate() && (x.len() != n || !primal.is_finite() || !dual.is_finite()) {
        return Err(Error::Solver(format!(
            "external result incomplete: {} of {n} values, primal {primal}, dual {dual}",
            x.len()
        )));
    }
    Ok(RawSolution { status, primal_objective: primal, dual_objective: dual, x, detail })
}

impl SdpBackend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn concurrent_safe(&self) -> bool {
        self.concurrent
    }

    fn solve_sdp(&self, sdp: &StandardSdp, _var_bound: Option<f64>, _opts: &SolveOptions) -> Result<RawSolution> {
        let dir = tempfile::tempdir().map_err(|e| Error::io("temporary directory", e))?;
        let input = dir.path().join("problem.dat-s");
        let output = dir.path().join("result.txt");
        sdpa::write_sdpa_file(sdp, &input)?;
        let out = Command::new(&self.command[0])
            .args(&self.command[1..])
            .arg(&input)
            .arg(&output)
            .output()
            .map_err(|e| Error::io(&self.command[0], e))?;
        if !out.status.success() {
            return Err(Error::Solver(format!(
                "{} exited with {}: {}",
                self.command.join(" "),
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&output).map_err(|e| Error::io(&output, e))?;
        parse_result(&text, sdp.num_vars())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_file_round_trip() {
        let r = parse_result("status optimal\nprimal -1.5\ndual -1.5000001\nx 0.5 -1\n", 2).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.x, vec![0.5, -1.0]);
        assert!(parse_result("status optimal\nprimal 1\ndual 1\nx 1\n", 2).is_err());
        assert_eq!(parse_result("status infeasible\n", 3).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn svec_layout() {
        assert_eq!(svec_index(0, 0), 0);
        assert_eq!(svec_index(0, 1), 1);
        assert_eq!(svec_index(1, 1), 2);
        assert_eq!(svec_index(2, 2), 5);
    }
}
