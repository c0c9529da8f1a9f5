//! Standard-form SDPs, SDPA files and solver backends.
//!
//! Convention (SDPA primal): minimize cᵀx subject to Σᵢ Fᵢxᵢ − F₀ ⪰ 0, where every
//! block is either a symmetric PSD block or a diagonal (elementwise ≥ 0) block.

mod backend;
mod reduce;
mod sdpa;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::npa::{LinExpr, Monomial, MomentProblem};

pub use backend::{
    lower_bound_from_solution, ClarabelBackend, ExternalBackend, RawSolution, SdpBackend, SdpSolution,
    SolveOptions, SolveStatus,
};
pub use reduce::{facial_reduction, Affine, Elimination, FacialReductionOptions};
pub use sdpa::{export_sdpa, import_sdpa, read_sdpa_file, write_sdpa_file};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Psd,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub dim: usize,
}

/// One nonzero of Fᵢ. `var` 0 is F₀; `block`, `row`, `col` are 0-based with row ≤ col.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpEntry {
    pub var: usize,
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl SdpEntry {
    fn key(&self) -> (usize, usize, usize, usize) {
        (self.var, self.block, self.row, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardSdp {
    pub c: Vec<f64>,
    pub blocks: Vec<BlockSpec>,
    /// Sorted by (var, block, row, col), no duplicates, no zeros.
    pub entries: Vec<SdpEntry>,
}

impl StandardSdp {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// Sorts, merges duplicates and drops zeros; checks index ranges.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.c.len();
        for e in &mut self.entries {
            if e.row > e.col {
                std::mem::swap(&mut e.row, &mut e.col);
            }
            let b = self.blocks.get(e.block).ok_or_else(|| {
                Error::InvalidArgument(format!("entry refers to block {} of {}", e.block + 1, self.blocks.len()))
            })?;
            if e.var > m || e.col >= b.dim || (b.kind == BlockKind::Diagonal && e.row != e.col) {
                return Err(Error::InvalidArgument(format!(
                    "entry (var {}, block {}, {}, {}) out of range",
                    e.var,
                    e.block + 1,
                    e.row + 1,
                    e.col + 1
                )));
            }
        }
        self.entries.sort_by_key(|e| e.key());
        let mut out: Vec<SdpEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries {
            match out.last_mut() {
                Some(last) if last.key() == e.key() => last.value += e.value,
                _ => out.push(e),
            }
        }
        out.retain(|e| e.value != 0.0);
        self.entries = out;
        Ok(self)
    }

    /// Σ Fᵢxᵢ − F₀ per block as dense matrices (diagonal blocks as diagonal matrices).
    pub fn slack(&self, x: &[f64]) -> Vec<nalgebra::DMatrix<f64>> {
        let mut out: Vec<_> = self
            .blocks
            .iter()
            .map(|b| nalgebra::DMatrix::zeros(b.dim, b.dim))
            .collect();
        for e in &self.entries {
            let v = if e.var == 0 { -e.value } else { e.value * x[e.var - 1] };
            out[e.block][(e.row, e.col)] += v;
            if e.row != e.col {
                out[e.block][(e.col, e.row)] += v;
            }
        }
        out
    }

    /// Smallest eigenvalue over all blocks of the slack at x.
    pub fn min_slack_eigenvalue(&self, x: &[f64]) -> f64 {
        self.slack(x)
            .into_iter()
            .map(|s| {
                if s.nrows() == 0 {
                    f64::INFINITY
                } else {
                    s.symmetric_eigenvalues().min()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// How a moment variable is recovered from the standard-form solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub monomial: Monomial,
    pub constant: f64,
    /// (standard-form variable, 0-based; coefficient)
    pub terms: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionStats {
    pub moment_variables: usize,
    pub pinned: usize,
    pub free: usize,
    pub moment_matrix_dim: usize,
    pub reduced_dim: usize,
}

#[derive(Clone, Debug)]
pub struct StandardForm {
    pub sdp: StandardSdp,
    /// Added to cᵀx to give the moment-problem objective.
    pub objective_constant: f64,
    pub recover: Vec<Recovery>,
    /// Every free variable is a moment of ±1-valued operators, so |xᵢ| ≤ bound.
    pub var_bound: Option<f64>,
    pub stats: ReductionStats,
}

impl StandardForm {
    pub fn moment_values(&self, x: &[f64]) -> BTreeMap<Monomial, f64> {
        self.recover
            .iter()
            .map(|r| {
                let v = r.constant + r.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>();
                (r.monomial.clone(), v)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReduceOptions {
    pub facial_reduction: bool,
    /// Tolerance for redundant user equalities.
    pub equality_tol: f64,
    pub fr: FacialReductionOptions,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            facial_reduction: true,
            equality_tol: 1e-10,
            fr: FacialReductionOptions::default(),
        }
    }
}

/// Eliminates equalities, optionally reduces the moment matrix face, and writes the
/// rest in SDPA form. Inequalities become one diagonal block.
pub fn to_standard_form(problem: &MomentProblem, opts: &ReduceOptions) -> Result<StandardForm> {
    let mut elim = Elimination::new();
    for eq in &problem.equalities {
        elim.add(-eq.rhs, &eq.expr.0, opts.equality_tol).map_err(|e| match e {
            Error::Inconsistent(d) => Error::Scenario(format!(
                "equality {:?} contradicts the others (residual {d:.3e})",
                eq.label
            )),
            other => other,
        })?;
    }
    let gamma = &problem.psd_blocks[0];
    let kept: Vec<usize> = if opts.facial_reduction {
        facial_reduction(&gamma.entries, &mut elim, &opts.fr)?
    } else {
        (0..gamma.dim()).collect()
    };

    // Affine blocks over the original ids of the remaining free variables.
    let reduce = |e: &LinExpr| elim.reduce_expr(e);
    let mut blocks: Vec<(BlockKind, Vec<Vec<Affine>>)> = Vec::new();
    blocks.push((
        BlockKind::Psd,
        kept.iter()
            .map(|&i| kept.iter().map(|&j| reduce(&gamma.entries[i][j])).collect())
            .collect(),
    ));
    for b in &problem.psd_blocks[1..] {
        blocks.push((
            BlockKind::Psd,
            b.entries.iter().map(|r| r.iter().map(reduce).collect()).collect(),
        ));
    }
    if !problem.inequalities.is_empty() {
        let n = problem.inequalities.len();
        let mut diag = vec![vec![Affine::default(); n]; n];
        for (k, c) in problem.inequalities.iter().enumerate() {
            diag[k][k] = elim.reduce(-c.rhs, &c.expr.0);
        }
        blocks.push((BlockKind::Diagonal, diag));
    }
    blocks.retain(|(_, m)| !m.is_empty());

    let objective = reduce(&problem.objective);
    let mut used: std::collections::BTreeSet<usize> = objective.lin.keys().copied().collect();
    for (_, m) in &blocks {
        for row in m {
            for a in row {
                used.extend(a.lin.keys().copied());
            }
        }
    }
    let free: Vec<usize> = used.into_iter().collect();
    let col: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut entries = Vec::new();
    for (bi, (kind, m)) in blocks.iter().enumerate() {
        for (r, row) in m.iter().enumerate() {
            for (cidx, a) in row.iter().enumerate() {
                if cidx < r || (*kind == BlockKind::Diagonal && cidx != r) {
                    continue;
                }
                if a.constant != 0.0 {
                    entries.push(SdpEntry { var: 0, block: bi, row: r, col: cidx, value: -a.constant });
                }
                for (&v, &coef) in &a.lin {
                    entries.push(SdpEntry { var: col[&v] + 1, block: bi, row: r, col: cidx, value: coef });
                }
            }
        }
    }
    let mut c = vec![0.0; free.len()];
    for (&v, &coef) in &objective.lin {
        c[col[&v]] = coef;
    }
    let sdp = StandardSdp {
        c,
        blocks: blocks.iter().map(|(k, m)| BlockSpec { kind: *k, dim: m.len() }).collect(),
        entries,
    }
    .normalized()?;

    let recover = problem
        .index
        .monomials()
        .iter()
        .enumerate()
        .map(|(id, m)| {
            let a = elim.reduce(0.0, &LinExpr::var(id).0);
            Recovery {
                monomial: m.clone(),
                constant: a.constant,
                terms: a.lin.iter().filter_map(|(v, &k)| col.get(v).map(|&i| (i, k))).collect(),
            }
        })
        .collect();

    Ok(StandardForm {
        stats: ReductionStats {
            moment_variables: problem.index.len(),
            pinned: elim.num_pinned(),
            free: free.len(),
            moment_matrix_dim: gamma.dim(),
            reduced_dim: kept.len(),
        },
        sdp,
        objective_constant: problem.objective_constant + objective.constant,
        recover,
        var_bound: Some(1.0),
    })
}

/// Reduces and solves a moment problem.
pub fn solve(problem: &MomentProblem, backend: &dyn SdpBackend, opts: &SolveOptions) -> Result<SdpSolution> {
    let sf = to_standard_form(problem, &ReduceOptions::default())?;
    solve_standard(&sf, backend, opts)
}

pub fn solve_standard(sf: &StandardForm, backend: &dyn SdpBackend, opts: &SolveOptions) -> Result<SdpSolution> {
    backend::solve_standard_form(sf, backend, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::npa::{self, GeneralConfig, Scenario};

    fn bell_max(expr: &crate::npa::Poly) -> SdpSolution {
        let sc = Scenario::bipartite(2, 2);
        let basis = npa::bipartite_level_1ab(&sc);
        let p = npa::assemble_bell_max(sc, basis, expr).unwrap();
        solve(&p, &ClarabelBackend, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn tsirelson_bound() {
        let s = bell_max(&npa::chsh_poly());
        assert!(s.status.has_certificate(), "{s:?}");
        assert!((-s.primal_value - 2.0 * 2f64.sqrt()).abs() < 1e-6, "{}", s.primal_value);
        assert!((-s.dual_value - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn tilted_maximum() {
        for alpha in [0.3, 1.0, 1.7] {
            let s = bell_max(&npa::tilted_chsh_poly(alpha));
            let q = analytic::tilted_quantum_max(alpha);
            assert!((-s.primal_value - q).abs() < 1e-6, "alpha {alpha}: {} vs {q}", -s.primal_value);
        }
    }

    #[test]
    fn general_fidelity_is_one_without_noise() {
        let p = npa::assemble_general_sdp(0.4, 0.0, &GeneralConfig::default()).unwrap();
        let sf = to_standard_form(&p, &ReduceOptions::default()).unwrap();
        let s = solve_standard(&sf, &ClarabelBackend, &SolveOptions::default()).unwrap();
        let lb = lower_bound_from_solution(&s).unwrap();
        assert!(lb > 0.99 && lb <= 1.0 + 1e-6, "{s:?} {:?}", sf.stats);
    }
}
