//! Moment matrices, localizing matrices, statistics and the two fidelity problems.

use std::collections::{BTreeMap, HashMap};

use crate::analytic;
use crate::error::{Error, Result};
use crate::qcore::{self, result1, Slot, PARTIES};
use crate::swapiso::{self, MomentFunctional, SwapGenerators};

use super::basis::{augment, build_basis, level1_basis, q1_basis, Level};
use super::monomial::{Gen, Monomial, Poly};
use super::scenario::{OperatorTable, Scenario};

/// Sparse real linear form over moment variable ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr(pub BTreeMap<usize, f64>);

impl LinExpr {
    pub fn var(id: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(id, 1.0);
        Self(m)
    }

    pub fn add_term(&mut self, id: usize, c: f64) {
        *self.0.entry(id).or_insert(0.0) += c;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|(&k, &v)| (k, v * s)).collect())
    }

    pub fn pruned(mut self, tol: f64) -> Self {
        self.0.retain(|_, v| v.abs() > tol);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.0.iter().map(|(&k, &c)| c * values[k]).sum()
    }
}

/// Keyed monomial ↔ real variable. The identity is always variable 0.
#[derive(Clone, Debug)]
pub struct MomentIndex {
    ids: HashMap<Monomial, usize>,
    vars: Vec<Monomial>,
}

impl Default for MomentIndex {
    fn default() -> Self {
        let mut idx = Self {
            ids: HashMap::new(),
            vars: Vec::new(),
        };
        idx.var(&Monomial::identity());
        idx
    }
}

impl MomentIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of the variable shared by `m` and its adjoint, allocating on first use.
    pub fn var(&mut self, m: &Monomial) -> usize {
        let k = m.key();
        if let Some(&id) = self.ids.get(&k) {
            return id;
        }
        let id = self.vars.len();
        self.ids.insert(k.clone(), id);
        self.vars.push(k);
        id
    }

    pub fn get(&self, m: &Monomial) -> Option<usize> {
        self.ids.get(&m.key()).copied()
    }

    pub fn monomial(&self, id: usize) -> &Monomial {
        &self.vars[id]
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.vars
    }

    /// Linear form of a polynomial; every word must already have a variable.
    pub fn lin_existing(&self, p: &Poly) -> Result<LinExpr> {
        let mut e = LinExpr::default();
        for (m, c) in p.terms() {
            let id = self
                .get(m)
                .ok_or_else(|| Error::Coverage(m.to_string()))?;
            e.add_term(id, c);
        }
        Ok(e.pruned(1e-14))
    }

    /// Linear form of a polynomial, allocating variables as needed.
    pub fn lin(&mut self, p: &Poly) -> LinExpr {
        let mut e = LinExpr::default();
        for (m, c) in p.terms() {
            let id = self.var(m);
            e.add_term(id, c);
        }
        e.pruned(1e-14)
    }
}

/// Symmetric matrix of linear forms, constrained PSD.
#[derive(Clone, Debug)]
pub struct PsdBlock {
    pub name: String,
    pub entries: Vec<Vec<LinExpr>>,
}

impl PsdBlock {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Numerical matrix at the given variable values.
    pub fn evaluate(&self, values: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.entries[i][j].evaluate(values))
    }
}

/// expr = rhs (equality) or expr ≥ rhs (inequality).
#[derive(Clone, Debug)]
pub struct LinConstraint {
    pub label: String,
    pub expr: LinExpr,
    pub rhs: f64,
}

/// Minimize objective·y + objective_constant subject to the blocks and constraints.
/// Variable 0 (the identity word) is pinned to 1 among the equalities.
#[derive(Clone, Debug)]
pub struct MomentProblem {
    pub scenario: Scenario,
    pub basis: Vec<Monomial>,
    pub index: MomentIndex,
    /// The moment matrix is block 0.
    pub psd_blocks: Vec<PsdBlock>,
    pub equalities: Vec<LinConstraint>,
    pub inequalities: Vec<LinConstraint>,
    pub objective: LinExpr,
    pub objective_constant: f64,
}

impl MomentProblem {
    pub fn moment_matrix(&self) -> &PsdBlock {
        &self.psd_blocks[0]
    }

    pub fn num_localizing(&self) -> usize {
        self.psd_blocks.len() - 1
    }

    /// Moment values of an explicit realization, indexed by variable id.
    pub fn moments_of(&self, table: &OperatorTable, state: &qcore::StateVector) -> Result<Vec<f64>> {
        self.index
            .monomials()
            .iter()
            .map(|m| Ok(table.moment(m, state)?.re))
            .collect()
    }

    /// Largest violation of the equalities and inequalities at the given values.
    pub fn constraint_violation(&self, values: &[f64]) -> f64 {
        let eq = self
            .equalities
            .iter()
            .map(|c| (c.expr.evaluate(values) - c.rhs).abs());
        let ineq = self
            .inequalities
            .iter()
            .map(|c| (c.rhs - c.expr.evaluate(values)).max(0.0));
        eq.chain(ineq).fold(0.0, f64::max)
    }
}

/// Γ_{u,v} = y[key(adjoint(u)·v)].
pub fn build_moment_matrix(basis: &[Monomial], index: &mut MomentIndex) -> PsdBlock {
    let n = basis.len();
    let mut entries = vec![vec![LinExpr::default(); n]; n];
    for i in 0..n {
        for j in 0..n {
            entries[i][j] = LinExpr::var(index.var(&basis[i].adj_mul(&basis[j])));
        }
    }
    PsdBlock {
        name: "moment matrix".into(),
        entries,
    }
}

/// L_{u,v} = Σ_k c_k y[key(adjoint(u)·g_k·v)] for a Hermitian polynomial Σ c_k g_k.
pub fn localizing_matrix(
    name: &str,
    poly: &Poly,
    loc_basis: &[Monomial],
    index: &mut MomentIndex,
) -> Result<PsdBlock> {
    if !poly.is_hermitian(1e-12) {
        return Err(Error::InvalidArgument(format!(
            "localizing polynomial for {name} is not Hermitian"
        )));
    }
    let n = loc_basis.len();
    let mut entries = vec![vec![LinExpr::default(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut e = LinExpr::default();
            for (g, c) in poly.terms() {
                let w = loc_basis[i].adj_mul(&g.mul(&loc_basis[j]));
                e.add_term(index.var(&w), c);
            }
            entries[i][j] = e.pruned(1e-14);
        }
    }
    Ok(PsdBlock {
        name: name.into(),
        entries,
    })
}

/// Which measured statistics of the W/GHZ family are imposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatisticsSet {
    /// The twelve three-body correlators with closed forms.
    ThreeBody,
    /// Every correlator of the ideal behavior: all 35 non-empty input subsets.
    Full,
}

impl std::str::FromStr for StatisticsSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three-body" | "12" => Ok(Self::ThreeBody),
            "full" | "35" => Ok(Self::Full),
            _ => Err(Error::InvalidArgument(format!(
                "unknown statistics set {s:?} (expected full or three-body)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    /// Every correlator multiplied by (1−ε).
    WhiteNoise,
    /// Every observed value allowed to deviate by at most ε.
    Interval,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white-noise" | "white-noise-scaling" | "white" => Ok(Self::WhiteNoise),
            "interval" | "interval-deviation" => Ok(Self::Interval),
            _ => Err(Error::InvalidArgument(format!(
                "unknown noise model {s:?} (expected white-noise or interval)"
            ))),
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::WhiteNoise => "white-noise",
            NoiseModel::Interval => "interval",
        })
    }
}

/// One imposed statistic: ⟨word⟩ = value.
#[derive(Clone, Debug, PartialEq)]
pub struct Statistic {
    pub label: String,
    pub monomial: Monomial,
    pub value: f64,
}

fn choice_monomial(choice: qcore::Choice) -> Monomial {
    let w: Vec<Gen> = (0..PARTIES)
        .filter_map(|p| choice[p].map(|x| Gen::new(p as u8, x as u8)))
        .collect();
    Monomial::from_gens(&w)
}

/// Statistics of the ideal W/GHZ behavior, each value scaled by (1−ε).
pub fn statistics_constraints(theta: f64, epsilon: f64, set: StatisticsSet) -> Result<Vec<Statistic>> {
    qcore::check_theta(theta)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} outside [0, 1]"
        )));
    }
    let scale = 1.0 - epsilon;
    let closed = qcore::closed_form_statistics(theta);
    let mut out: Vec<Statistic> = closed
        .iter()
        .map(|s| Statistic {
            label: s.label.clone(),
            monomial: choice_monomial(s.choice),
            value: scale * s.value,
        })
        .collect();
    if set == StatisticsSet::Full {
        let real = qcore::ideal_realization_general(theta)?;
        let names = ["Z", "X", "D"];
        for a in [None, Some(0), Some(1)] {
            for b in [None, Some(0), Some(1)] {
                for cc in [None, Some(0), Some(1), Some(2)] {
                    let choice = [a, b, cc];
                    let m = choice_monomial(choice);
                    if m.is_identity() || out.iter().any(|s| s.monomial == m) {
                        continue;
                    }
                    let label: String = choice
                        .iter()
                        .map(|c| c.map_or("I", |x| names[x]))
                        .collect();
                    out.push(Statistic {
                        label,
                        monomial: m,
                        value: scale * qcore::correlator(&real, choice)?,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn impose(
    problem: &mut MomentProblem,
    label: &str,
    expr: LinExpr,
    ideal: f64,
    epsilon: f64,
    model: NoiseModel,
) {
    match model {
        NoiseModel::Interval if epsilon > 0.0 => {
            problem.inequalities.push(LinConstraint {
                label: format!("{label} >= ideal - eps"),
                expr: expr.clone(),
                rhs: ideal - epsilon,
            });
            problem.inequalities.push(LinConstraint {
                label: format!("{label} <= ideal + eps"),
                expr: expr.scaled(-1.0),
                rhs: -ideal - epsilon,
            });
        }
        _ => problem.equalities.push(LinConstraint {
            label: label.into(),
            expr,
            rhs: ideal,
        }),
    }
}

fn new_problem(scenario: Scenario, basis: Vec<Monomial>) -> MomentProblem {
    let mut index = MomentIndex::new();
    let gamma = build_moment_matrix(&basis, &mut index);
    MomentProblem {
        scenario,
        basis,
        index,
        psd_blocks: vec![gamma],
        equalities: vec![LinConstraint {
            label: "identity".into(),
            expr: LinExpr::var(0),
            rhs: 1.0,
        }],
        inequalities: Vec::new(),
        objective: LinExpr::default(),
        objective_constant: 0.0,
    }
}

fn set_objective(problem: &mut MomentProblem, f: &MomentFunctional) -> Result<()> {
    let mut e = LinExpr::default();
    for (m, c) in &f.terms {
        let id = problem
            .index
            .get(m)
            .ok_or_else(|| Error::Coverage(problem.scenario.format(m)))?;
        e.add_term(id, *c);
    }
    problem.objective = e.pruned(1e-14);
    problem.objective_constant = f.constant;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralConfig {
    pub level: Level,
    pub noise: NoiseModel,
    pub statistics: StatisticsSet,
}

impl Default for GeneralConfig {
    fn default() -> Self {
        Self {
            level: Level::Q1Aug,
            noise: NoiseModel::WhiteNoise,
            statistics: StatisticsSet::Full,
        }
    }
}

/// Minimize the swap fidelity with cosθ|W⟩+sinθ|GHZ⟩ over all moment matrices that
/// reproduce the (noisy) statistics.
pub fn assemble_general_sdp(theta: f64, epsilon: f64, cfg: &GeneralConfig) -> Result<MomentProblem> {
    let scenario = Scenario::general();
    let objective = swapiso::fidelity_functional(theta, &SwapGenerators::uniform(1))?;
    // Interval noise is centred on the ideal values.
    let scale_eps = if cfg.noise == NoiseModel::WhiteNoise { epsilon } else { 0.0 };
    let stats = statistics_constraints(theta, scale_eps, cfg.statistics)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    let targets: Vec<Monomial> = objective
        .monomials()
        .cloned()
        .chain(stats.iter().map(|s| s.monomial.clone()))
        .collect();
    let basis = build_basis(&scenario, cfg.level, &targets)?;
    let mut problem = new_problem(scenario, basis);
    set_objective(&mut problem, &objective)?;
    for s in stats {
        let id = problem
            .index
            .get(&s.monomial)
            .ok_or_else(|| Error::Coverage(problem.scenario.format(&s.monomial)))?;
        impose(&mut problem, &s.label, LinExpr::var(id), s.value, epsilon, cfg.noise);
    }
    Ok(problem)
}

/// Basis for the localizing matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalizingBasis {
    /// {1} ∪ single generators.
    Level1,
    /// Every product of at most one generator per party.
    Q1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Result1Config {
    pub noise: NoiseModel,
    pub localizing_basis: LocalizingBasis,
    /// Impose [X̃_p, X_p] = 0 inside ⟨u†·v⟩ for u, v in the localizing basis.
    pub commutation: bool,
    /// At ε = 0 also impose the three projector patterns that positivity forces to zero.
    pub derived_zero_patterns: bool,
}

impl Default for Result1Config {
    fn default() -> Self {
        Self {
            noise: NoiseModel::Interval,
            localizing_basis: LocalizingBasis::Level1,
            commutation: true,
            derived_zero_patterns: true,
        }
    }
}

/// Generator op id of X̃ in [`Scenario::result1`].
pub const XTILDE: u8 = 3;

fn slot_poly(party: usize, slot: Slot) -> Poly {
    let p = party as u8;
    match slot {
        Slot::Id => Poly::constant(1.0),
        Slot::P0 => Poly::constant(0.5).add(&Poly::gen(p, 0).scale(0.5)),
        Slot::P1 => Poly::constant(0.5).add(&Poly::gen(p, 0).scale(-0.5)),
        Slot::Obs(x) => Poly::gen(p, x as u8),
    }
}

/// Σ coeff·pattern as a keyed polynomial in the three-input scenario.
pub fn condition_poly(terms: &[(f64, [Slot; 3])]) -> Poly {
    let mut acc = Poly::zero();
    for (c, pat) in terms {
        let prod = Poly::product(&[slot_poly(0, pat[0]), slot_poly(1, pat[1]), slot_poly(2, pat[2])]);
        acc = acc.add(&prod.scale(*c));
    }
    acc.keyed()
}

/// X_p of the swap circuit as a combination of party p's measured inputs.
pub fn result1_x_combination(party: usize) -> Poly {
    let (cw, sw) = (result1::cos_omega(), result1::sin_omega());
    let (w, mu) = (result1::omega(), result1::mu());
    let s2m = (2.0 * mu).sin();
    let p = party as u8;
    if party == 1 {
        Poly::gen(p, 1)
            .scale((w - mu).cos() / s2m)
            .add(&Poly::gen(p, 2).scale(-(w + mu).cos() / s2m))
    } else {
        Poly::gen(p, 1).scale(sw).add(&Poly::gen(p, 2).scale(-cw))
    }
}

/// Z_p rebuilt from the primed measurements (inputs 1 and 2).
pub fn result1_z_combination(party: usize) -> Poly {
    let (cw, sw) = (result1::cos_omega(), result1::sin_omega());
    let (w, mu) = (result1::omega(), result1::mu());
    let s2m = (2.0 * mu).sin();
    let p = party as u8;
    if party == 1 {
        Poly::gen(p, 2)
            .scale((w + mu).sin() / s2m)
            .add(&Poly::gen(p, 1).scale(-(w - mu).sin() / s2m))
    } else {
        Poly::gen(p, 1).scale(cw).add(&Poly::gen(p, 2).scale(sw))
    }
}

/// Minimize the swap fidelity with the five-term state given the Result 1 statistics,
/// with X̃_p standing in for the swap X of each party.
pub fn assemble_result1_sdp(epsilon: f64, cfg: &Result1Config) -> Result<MomentProblem> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    let scenario = Scenario::result1();
    let target = qcore::make_target_state(result1::theta())?;
    let objective = swapiso::fidelity_functional_for(&target, &SwapGenerators::uniform(XTILDE))?;
    let conds = analytic::result1_conditions();
    let polys: Vec<(String, Poly, f64)> = conds
        .iter()
        .map(|c| (c.id.clone(), condition_poly(&c.terms), c.target))
        .collect();

    // Measured-input part of q1, augmented for the objective and the conditions.
    let measured = Scenario {
        name: "result1-measured".into(),
        op_names: std::array::from_fn(|p| scenario.op_names[p][..3].to_vec()),
    };
    let targets: Vec<Monomial> = objective
        .monomials()
        .cloned()
        .chain(polys.iter().flat_map(|(_, p, _)| p.terms().map(|(m, _)| m.clone())))
        .collect();
    let basis = augment(&scenario, q1_basis(&measured), &targets)?;
    let mut problem = new_problem(scenario.clone(), basis);
    set_objective(&mut problem, &objective)?;

    let ideal = result1_ideal_table()?;
    for (id, p, target) in &polys {
        let expr = problem.index.lin(p);
        let value = match cfg.noise {
            NoiseModel::Interval => *target,
            NoiseModel::WhiteNoise => white_noise_value(p, epsilon, &ideal)?,
        };
        impose(&mut problem, id, expr, value, epsilon, cfg.noise);
    }
    if cfg.derived_zero_patterns && epsilon == 0.0 {
        for pat in [[0usize, 1, 1], [1, 0, 1], [1, 1, 0]] {
            let s = |i: usize| if i == 0 { Slot::P0 } else { Slot::P1 };
            let p = condition_poly(&[(1.0, [s(pat[0]), s(pat[1]), s(pat[2])])]);
            let expr = problem.index.lin(&p);
            problem.equalities.push(LinConstraint {
                label: format!("<P{}_A P{}_B P{}_C> = 0", pat[0], pat[1], pat[2]),
                expr,
                rhs: 0.0,
            });
        }
    }
    let loc_basis = match cfg.localizing_basis {
        LocalizingBasis::Level1 => level1_basis(&scenario),
        LocalizingBasis::Q1 => q1_basis(&scenario),
    };
    for party in 0..PARTIES {
        let xt = Poly::gen(party as u8, XTILDE);
        let xc = result1_x_combination(party);
        if cfg.commutation {
            let comm = xt.mul(&xc).add(&xc.mul(&xt).scale(-1.0));
            for u in &loc_basis {
                for v in &loc_basis {
                    let w = Poly::term(u.adjoint(), 1.0)
                        .mul(&comm)
                        .mul(&Poly::term(v.clone(), 1.0))
                        .keyed();
                    let expr = problem.index.lin(&w);
                    if !expr.is_empty() {
                        problem.equalities.push(LinConstraint {
                            label: format!("[X~_{}, X_{}] in <{u}|.|{v}>", qcore::party_name(party), qcore::party_name(party)),
                            expr,
                            rhs: 0.0,
                        });
                    }
                }
            }
        }
        let name = qcore::party_name(party);
        let lx = localizing_matrix(
            &format!("X~_{name} X_{name} >= 0"),
            &xt.mul(&xc).hermitian_part(),
            &loc_basis,
            &mut problem.index,
        )?;
        let lz = localizing_matrix(
            &format!("Z_{name} Z(1,2)_{name} >= 0"),
            &Poly::gen(party as u8, 0).mul(&result1_z_combination(party)).hermitian_part(),
            &loc_basis,
            &mut problem.index,
        )?;
        problem.psd_blocks.push(lx);
        problem.psd_blocks.push(lz);
    }
    Ok(problem)
}

/// Ideal operators of the three-setting realization with X̃ set to the swap X.
pub fn result1_ideal_table() -> Result<(OperatorTable, qcore::StateVector)> {
    let real = qcore::ideal_realization_result1()?;
    let ops = swapiso::SwapOperators::result1(&real)?;
    let table = OperatorTable::from_realization(&real).with_extra(ops.x);
    Ok((table, real.state))
}

/// Value of a condition polynomial when every non-identity moment is scaled by (1−ε).
fn white_noise_value(p: &Poly, epsilon: f64, ideal: &(OperatorTable, qcore::StateVector)) -> Result<f64> {
    let mut s = 0.0;
    for (m, c) in p.terms() {
        let v = ideal.0.moment(m, &ideal.1)?.re;
        s += c * if m.is_identity() { v } else { (1.0 - epsilon) * v };
    }
    Ok(s)
}

/// Moment problem maximizing a Bell expression: the objective holds −expression, so
/// the SDP minimum is minus the maximal quantum value at this level.
pub fn assemble_bell_max(scenario: Scenario, basis: Vec<Monomial>, expression: &Poly) -> Result<MomentProblem> {
    let mut problem = new_problem(scenario, basis);
    let keyed = expression.keyed();
    let mut e = LinExpr::default();
    for (m, c) in keyed.terms() {
        if m.is_identity() {
            problem.objective_constant -= c;
            continue;
        }
        let id = problem
            .index
            .get(m)
            .ok_or_else(|| Error::Coverage(problem.scenario.format(m)))?;
        e.add_term(id, -c);
    }
    problem.objective = e.pruned(1e-14);
    Ok(problem)
}

/// Level "1+AB": {1, A_x, B_y, A_xB_y}.
pub fn bipartite_level_1ab(scenario: &Scenario) -> Vec<Monomial> {
    let mut out = vec![Monomial::identity()];
    out.extend(scenario.gens(0).map(|g| Monomial::from_gens(&[g])));
    out.extend(scenario.gens(1).map(|g| Monomial::from_gens(&[g])));
    for a in scenario.gens(0) {
        for b in scenario.gens(1) {
            out.push(Monomial::from_gens(&[a, b]));
        }
    }
    out
}

/// ⟨A₁B₁⟩+⟨A₁B₂⟩+⟨A₂B₁⟩−⟨A₂B₂⟩ plus α⟨A₁⟩.
pub fn tilted_chsh_poly(alpha: f64) -> Poly {
    let ab = |x: u8, y: u8| Poly::term(Monomial::from_gens(&[Gen::new(0, x), Gen::new(1, y)]), 1.0);
    Poly::gen(0, 0)
        .scale(alpha)
        .add(&ab(0, 0))
        .add(&ab(0, 1))
        .add(&ab(1, 0))
        .add(&ab(1, 1).scale(-1.0))
}

pub fn chsh_poly() -> Poly {
    tilted_chsh_poly(0.0)
}
