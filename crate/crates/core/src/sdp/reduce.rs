//! Equality elimination and facial reduction of the moment matrix.
//!
//! Equalities are eliminated by substitution: every pinned variable is rewritten as an
//! affine form in the variables that stay free. Facial reduction then looks for
//! fully determined principal submatrices of Γ that are singular. A kernel vector z
//! of such a block satisfies Γz = 0 for every PSD completion, which gives the linear
//! equalities Σ_t z_t Γ_{w,t} = 0 for every row w and lets one index of the block be
//! dropped from the cone.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::npa::LinExpr;

/// c + Σ a_k y_k over free variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub lin: BTreeMap<usize, f64>,
}

impl Affine {
    pub fn is_constant(&self) -> bool {
        self.lin.is_empty()
    }
}

const DROP: f64 = 1e-12;

/// Substitution map var → affine form in variables that are never pinned.
#[derive(Clone, Debug, Default)]
pub struct Elimination {
    sub: BTreeMap<usize, Affine>,
}

impl Elimination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_pinned(&self, var: usize) -> bool {
        self.sub.contains_key(&var)
    }

    pub fn num_pinned(&self) -> usize {
        self.sub.len()
    }

    /// Rewrites c + Σ a_k y_k in terms of free variables only.
    pub fn reduce(&self, constant: f64, lin: &BTreeMap<usize, f64>) -> Affine {
        let mut c = constant;
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (&k, &a) in lin {
            match self.sub.get(&k) {
                Some(s) => {
                    c += a * s.constant;
                    for (&k2, &a2) in &s.lin {
                        *out.entry(k2).or_insert(0.0) += a * a2;
                    }
                }
                None => *out.entry(k).or_insert(0.0) += a,
            }
        }
        out.retain(|_, v| v.abs() > DROP);
        Affine { constant: c, lin: out }
    }

    pub fn reduce_expr(&self, e: &LinExpr) -> Affine {
        self.reduce(0.0, &e.0)
    }

    /// Adds c + Σ a_k y_k = 0. Returns Ok(false) when the equation is already implied
    /// (within `tol`), and an error when it contradicts the existing ones.
    pub fn add(&mut self, constant: f64, lin: &BTreeMap<usize, f64>, tol: f64) -> Result<bool> {
        let r = self.reduce(constant, lin);
        if r.lin.is_empty() {
            if r.constant.abs() > tol {
                return Err(Error::Inconsistent(r.constant.abs()));
            }
            return Ok(false);
        }
        // Pivot on the largest coefficient; ties go to the smallest variable id.
        let (&p, &a) = r
            .lin
            .iter()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(y.0.cmp(x.0)))
            .expect("non-empty");
        let mut lin = r.lin;
        lin.remove(&p);
        let expr = Affine {
            constant: -r.constant / a,
            lin: lin.into_iter().map(|(k, v)| (k, -v / a)).collect(),
        };
        for s in self.sub.values_mut() {
            if let Some(b) = s.lin.remove(&p) {
                s.constant += b * expr.constant;
                for (&k, &v) in &expr.lin {
                    *s.lin.entry(k).or_insert(0.0) += b * v;
                }
                s.lin.retain(|_, v| v.abs() > DROP);
            }
        }
        self.sub.insert(p, expr);
        Ok(true)
    }
}

/// Row-reduced echelon form with partial pivoting; returns rows and pivot columns.
fn rref(mut k: DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let (rows, cols) = k.shape();
    let mut r = 0;
    let mut piv = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (mut best, mut bv) = (r, k[(r, c)].abs());
        for i in r + 1..rows {
            if k[(i, c)].abs() > bv {
                best = i;
                bv = k[(i, c)].abs();
            }
        }
        if bv < 1e-8 {
            continue;
        }
        k.swap_rows(r, best);
        let d = k[(r, c)];
        for j in 0..cols {
            k[(r, j)] /= d;
        }
        for i in 0..rows {
            if i != r {
                let f = k[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        k[(i, j)] -= f * k[(r, j)];
                    }
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    let mut out = k.rows(0, r).into_owned();
    out.apply(|x| {
        if x.abs() < 1e-10 {
            *x = 0.0
        }
    });
    (out, piv)
}

#[derive(Clone, Copy, Debug)]
pub struct FacialReductionOptions {
    /// Eigenvalues below this count as kernel.
    pub kernel_tol: f64,
    /// Allowed residual of an implied equation.
    pub consistency_tol: f64,
    pub max_rounds: usize,
}

impl Default for FacialReductionOptions {
    fn default() -> Self {
        Self {
            kernel_tol: 1e-9,
            consistency_tol: 1e-7,
            max_rounds: 500,
        }
    }
}

/// Shrinks the index set of a PSD block of linear forms; returns the kept indices.
pub fn facial_reduction(
    entries: &[Vec<LinExpr>],
    elim: &mut Elimination,
    opts: &FacialReductionOptions,
) -> Result<Vec<usize>> {
    let n = entries.len();
    let mut kept: Vec<usize> = (0..n).collect();
    for _ in 0..opts.max_rounds {
        let m = kept.len();
        let red: Vec<Vec<Affine>> = kept
            .iter()
            .map(|&i| kept.iter().map(|&j| elim.reduce_expr(&entries[i][j])).collect())
            .collect();
        let det = |a: usize, b: usize| red[a][b].is_constant();
        // Greedy cliques of determined entries, one per seed, deduplicated.
        let mut cliques: Vec<Vec<usize>> = Vec::new();
        for seed in 0..m {
            if !det(seed, seed) {
                continue;
            }
            let mut s = vec![seed];
            for j in 0..m {
                if j != seed && det(j, j) && s.iter().all(|&t| det(j, t)) {
                    s.push(j);
                }
            }
            s.sort_unstable();
            if !cliques.contains(&s) {
                cliques.push(s);
            }
        }
        cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        let mut reduced = false;
        for s in &cliques {
            let g = DMatrix::from_fn(s.len(), s.len(), |a, b| red[s[a]][s[b]].constant);
            let eig = g.symmetric_eigen();
            let ker: Vec<usize> = (0..s.len())
                .filter(|&i| eig.eigenvalues[i] < opts.kernel_tol)
                .collect();
            if ker.is_empty() {
                continue;
            }
            let kt = DMatrix::from_fn(ker.len(), s.len(), |r, c| eig.eigenvectors[(c, ker[r])]);
            let (z, piv) = rref(kt);
            let mut drop_idx = Vec::new();
            for (row, &pc) in piv.iter().enumerate() {
                for w in 0..n {
                    let mut lin: BTreeMap<usize, f64> = BTreeMap::new();
                    for (col, &local) in s.iter().enumerate() {
                        let zt = z[(row, col)];
                        if zt == 0.0 {
                            continue;
                        }
                        for (&k, &v) in &entries[w][kept[local]].0 {
                            *lin.entry(k).or_insert(0.0) += zt * v;
                        }
                    }
                    elim.add(0.0, &lin, opts.consistency_tol)?;
                }
                drop_idx.push(kept[s[pc]]);
            }
            kept.retain(|k| !drop_idx.contains(k));
            reduced = true;
            break;
        }
        if !reduced {
            return Ok(kept);
        }
    }
    Ok(kept)
}
