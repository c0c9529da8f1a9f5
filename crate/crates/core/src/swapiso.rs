//! The local swap isometry: per party an ancilla in |0⟩, Hadamard, controlled-Z,
//! Hadamard, controlled-X. On the system it acts through the Kraus pair
//! K₀ = (I+Z)/2 and K₁ = X(I−Z)/2, so
//!
//! Φ|ψ⟩|000⟩ = Σ_{a′b′c′} K_{a′}⊗K_{b′}⊗K_{c′}|ψ⟩ ⊗ |a′b′c′⟩.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::npa::{Gen, Monomial, OperatorTable, Poly};
use crate::qcore::{
    self, make_target_state, result1, Mat2, Realization, StateVector, C64, PARTIES,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// The controlled operators of the circuit, one Z and one X per party.
#[derive(Clone, Debug)]
pub struct SwapOperators {
    pub z: [Mat2; PARTIES],
    pub x: [Mat2; PARTIES],
}

impl SwapOperators {
    /// Z = input 0 and X = input 1 of every party.
    pub fn direct(real: &Realization) -> Result<Self> {
        let mut z = [qcore::identity2(); PARTIES];
        let mut x = [qcore::identity2(); PARTIES];
        for p in 0..PARTIES {
            z[p] = *real.observable(p, 0)?.matrix();
            x[p] = *real.observable(p, 1)?.matrix();
        }
        Ok(Self { z, x })
    }

    /// Z = input 0; X_A = sinω A₁ − cosω A₂, X_C likewise, and
    /// X_B = [cos(ω−μ)B₁ − cos(ω+μ)B₂]/sin 2μ. These X need not be unitary.
    pub fn result1(real: &Realization) -> Result<Self> {
        if real.inputs() != [3, 3, 3] {
            return Err(Error::Scenario(
                "the three-setting swap operators need three inputs per party".into(),
            ));
        }
        let (cw, sw) = (result1::cos_omega(), result1::sin_omega());
        let (w, mu) = (result1::omega(), result1::mu());
        let s2m = (2.0 * mu).sin();
        let m = |p: usize, x: usize| *real.observables[p][x].matrix();
        let xa = m(0, 1) * c(sw) - m(0, 2) * c(cw);
        let xb = m(1, 1) * c((w - mu).cos() / s2m) - m(1, 2) * c((w + mu).cos() / s2m);
        let xc = m(2, 1) * c(sw) - m(2, 2) * c(cw);
        Ok(Self {
            z: [m(0, 0), m(1, 0), m(2, 0)],
            x: [xa, xb, xc],
        })
    }

    /// Three inputs per party selects [`SwapOperators::result1`], otherwise
    /// [`SwapOperators::direct`].
    pub fn for_realization(real: &Realization) -> Result<Self> {
        if real.inputs() == [3, 3, 3] {
            Self::result1(real)
        } else {
            Self::direct(real)
        }
    }

    /// K₀ = (I+Z)/2, K₁ = X(I−Z)/2 for one party.
    pub fn kraus(&self, party: usize) -> [Mat2; 2] {
        let id = qcore::identity2();
        let z = self.z[party];
        [
            (id + z) * c(0.5),
            self.x[party] * (id - z) * c(0.5),
        ]
    }
}

/// Six-qubit output vector in |abc⟩⊗|a′b′c′⟩ order. Unnormalized when X is not unitary.
#[derive(Clone, Debug)]
pub struct IsometryOutput {
    pub amplitudes: DVector<C64>,
}

impl IsometryOutput {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// The system vector attached to ancilla pattern a′b′c′ (given as a 3-bit index).
    pub fn ancilla_component(&self, pattern: usize) -> DVector<C64> {
        DVector::from_iterator(8, (0..8).map(|s| self.amplitudes[s * 8 + pattern]))
    }

    /// Normalizes into a [`StateVector`]; fails on a zero output.
    pub fn to_state(&self) -> Result<StateVector> {
        StateVector::normalized(self.amplitudes.iter().copied().collect())
    }

    /// tr_ABC of the output projector.
    pub fn reduced_ancilla(&self) -> DMatrix<C64> {
        let mut rho = DMatrix::zeros(8, 8);
        for s in 0..8 {
            for a in 0..8 {
                for b in 0..8 {
                    rho[(a, b)] += self.amplitudes[s * 8 + a] * self.amplitudes[s * 8 + b].conj();
                }
            }
        }
        rho
    }
}

pub fn apply_isometry(real: &Realization) -> Result<IsometryOutput> {
    apply_isometry_with(&real.state, &SwapOperators::for_realization(real)?)
}

pub fn apply_isometry_with(state: &StateVector, ops: &SwapOperators) -> Result<IsometryOutput> {
    if state.num_qubits() != PARTIES {
        return Err(Error::Scenario("isometry acts on three qubits".into()));
    }
    let k: [[Mat2; 2]; PARTIES] = std::array::from_fn(|p| ops.kraus(p));
    let mut out = DVector::zeros(64);
    for anc in 0..8 {
        let bits = [anc >> 2 & 1, anc >> 1 & 1, anc & 1];
        let op = qcore::lift3(&k[0][bits[0]], &k[1][bits[1]], &k[2][bits[2]]);
        let v = op * state.amplitudes();
        for s in 0..8 {
            out[s * 8 + anc] = v[s];
        }
    }
    Ok(IsometryOutput { amplitudes: out })
}

/// ρ_swap by partial trace of the isometry output.
pub fn rho_swap(real: &Realization) -> Result<DMatrix<C64>> {
    Ok(apply_isometry(real)?.reduced_ancilla())
}

/// The per-party words M_{j,i} = 4·K_j†K_i:
/// M₀₀ = (I+Z)², M₀₁ = (I+Z)X(I−Z), M₁₀ = (I−Z)X(I+Z), M₁₁ = (I−Z)X²(I−Z).
pub fn m_word_matrix(z: &Mat2, x: &Mat2, j: usize, i: usize) -> Mat2 {
    let id = qcore::identity2();
    let (p, m) = (id + z, id - z);
    match (j, i) {
        (0, 0) => p * p,
        (0, 1) => p * x * m,
        (1, 0) => m * x.adjoint() * p,
        _ => m * x.adjoint() * x * m,
    }
}

/// ρ_swap from the coefficient formula
/// ρ[(i,k,s),(j,l,t)] = (1/64)·tr[M^A_{j,i}⊗M^B_{l,k}⊗M^C_{t,s} ρ_ABC].
pub fn rho_swap_coefficients(state: &StateVector, ops: &SwapOperators) -> DMatrix<C64> {
    let m: [[[Mat2; 2]; 2]; PARTIES] = std::array::from_fn(|p| {
        std::array::from_fn(|j| std::array::from_fn(|i| m_word_matrix(&ops.z[p], &ops.x[p], j, i)))
    });
    let mut rho = DMatrix::zeros(8, 8);
    for ket in 0..8usize {
        for bra in 0..8usize {
            let kb = [ket >> 2 & 1, ket >> 1 & 1, ket & 1];
            let bb = [bra >> 2 & 1, bra >> 1 & 1, bra & 1];
            let op = qcore::lift3(
                &m[0][bb[0]][kb[0]],
                &m[1][bb[1]][kb[1]],
                &m[2][bb[2]][kb[2]],
            );
            rho[(ket, bra)] = state.expectation(&op) / c(64.0);
        }
    }
    rho
}

/// ⟨t|ρ_swap|t⟩.
pub fn fidelity_with_target(rho: &DMatrix<C64>, target: &StateVector) -> f64 {
    let t = target.amplitudes();
    t.dotc(&(rho * t)).re
}

/// Fidelity of the swapped-out state with cosθ|W⟩+sinθ|GHZ⟩.
pub fn fidelity(real: &Realization, theta: f64) -> Result<f64> {
    let target = make_target_state(theta)?;
    Ok(fidelity_with_target(&rho_swap(real)?, &target))
}

/// Which generators play Z and X in the circuit, per party.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapGenerators {
    pub z: [Gen; PARTIES],
    pub x: [Gen; PARTIES],
}

impl SwapGenerators {
    /// Z = op 0 and X = op `x_op` for every party.
    pub fn uniform(x_op: u8) -> Self {
        Self {
            z: [Gen::new(0, 0), Gen::new(1, 0), Gen::new(2, 0)],
            x: [Gen::new(0, x_op), Gen::new(1, x_op), Gen::new(2, x_op)],
        }
    }
}

/// Fidelity as a linear functional of real moments: Σ coeff·Re⟨w⟩ + constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentFunctional {
    pub terms: Vec<(Monomial, f64)>,
    pub constant: f64,
}

impl MomentFunctional {
    pub fn from_poly(p: &Poly) -> Self {
        Self {
            terms: p.terms().map(|(m, c)| (m.clone(), c)).collect(),
            constant: 0.0,
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms
            .iter()
            .filter(|(t, _)| t == m)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter().map(|(m, _)| m)
    }

    pub fn evaluate(&self, table: &OperatorTable, state: &StateVector) -> Result<f64> {
        let mut s = self.constant;
        for (m, c) in &self.terms {
            s += c * table.moment(m, state)?.re;
        }
        Ok(s)
    }
}

fn m_word_poly(g: &SwapGenerators, party: usize, j: usize, i: usize) -> Poly {
    let one = Poly::constant(1.0);
    let z = Poly::term(Monomial::from_gens(&[g.z[party]]), 1.0);
    let x = Poly::term(Monomial::from_gens(&[g.x[party]]), 1.0);
    let (p, m) = (one.add(&z), one.add(&z.scale(-1.0)));
    match (j, i) {
        (0, 0) => Poly::product(&[p.clone(), p]),
        (0, 1) => Poly::product(&[p, x, m]),
        (1, 0) => Poly::product(&[m, x, p]),
        _ => Poly::product(&[m.clone(), x.clone(), x, m]),
    }
}

/// Expands ⟨t|ρ_swap|t⟩ into keyed words for a real target state.
pub fn fidelity_functional_for(target: &StateVector, gens: &SwapGenerators) -> Result<MomentFunctional> {
    if target.num_qubits() != PARTIES {
        return Err(Error::InvalidArgument("target must be a 3-qubit state".into()));
    }
    let t: Vec<f64> = target
        .amplitudes()
        .iter()
        .map(|a| {
            if a.im.abs() > 1e-12 {
                Err(Error::InvalidArgument(
                    "fidelity functional needs a real target state".into(),
                ))
            } else {
                Ok(a.re)
            }
        })
        .collect::<Result<_>>()?;
    let words: [[[Poly; 2]; 2]; PARTIES] = std::array::from_fn(|p| {
        std::array::from_fn(|j| std::array::from_fn(|i| m_word_poly(gens, p, j, i)))
    });
    let mut acc = Poly::zero();
    for bra in 0..8usize {
        for ket in 0..8usize {
            let w = t[bra] * t[ket] / 64.0;
            if w.abs() < 1e-15 {
                continue;
            }
            let bb = [bra >> 2 & 1, bra >> 1 & 1, bra & 1];
            let kb = [ket >> 2 & 1, ket >> 1 & 1, ket & 1];
            let prod = Poly::product(&[
                words[0][bb[0]][kb[0]].clone(),
                words[1][bb[1]][kb[1]].clone(),
                words[2][bb[2]][kb[2]].clone(),
            ]);
            acc = acc.add(&prod.scale(w));
        }
    }
    Ok(MomentFunctional::from_poly(&acc.keyed().pruned(1e-14)))
}

/// The functional for cosθ|W⟩+sinθ|GHZ⟩ with the given circuit generators.
pub fn fidelity_functional(theta: f64, gens: &SwapGenerators) -> Result<MomentFunctional> {
    fidelity_functional_for(&make_target_state(theta)?, gens)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationRecord {
    pub id: String,
    pub description: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub relations: Vec<RelationRecord>,
    pub pass: bool,
    pub tol: f64,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Checks the vector identities used in the self-testing argument for the five-term
/// state. Each residual is ‖LHS − RHS‖₂ on the 8-dimensional system vectors, or
/// |⟨u|v⟩| for an orthogonality statement.
///
/// Primed operators: Z′ = O₁, X′ = O₂ for Alice and Charlie, Z′_B = (B₁+B₂)/(2cosμ),
/// X′_B = (B₁−B₂)/(2sinμ). Unprimed X are the swap operators. β is the Schmidt
/// angle of the projected two-qubit state, tan β = (3−√5)/2.
pub fn verify_subspace_relations(real: &Realization, tol: f64) -> Result<RelationReport> {
    let ops = SwapOperators::result1(real)?;
    let mu = result1::mu();
    let (cw, sw) = (result1::cos_omega(), result1::sin_omega());
    let id = qcore::identity2();
    let m = |p: usize, x: usize| *real.observables[p][x].matrix();
    let zp = [m(0, 1), (m(1, 1) + m(1, 2)) * c(1.0 / (2.0 * mu.cos())), m(2, 1)];
    let xp = [m(0, 2), (m(1, 1) - m(1, 2)) * c(1.0 / (2.0 * mu.sin())), m(2, 2)];
    let zs = ops.z;
    let xs = ops.x;
    let proj = |p: usize, i: usize| real.observables[p][0].projector(i);
    let tan_b = {
        let phi0 = StateVector::from_real(&[1.0, 1.0, 1.0, 0.0])?;
        let sd = crate::analytic::schmidt_decompose_2q(&phi0)?;
        sd.sin_beta / sd.cos_beta
    };
    let psi = real.state.amplitudes().clone();
    // Apply a single-party operator (or a product of them) to ψ.
    let on = |p: usize, op: &Mat2| -> DMatrix<C64> {
        let mut f = [id; PARTIES];
        f[p] = *op;
        qcore::lift3(&f[0], &f[1], &f[2])
    };
    let vec_of = |ops_list: &[(usize, Mat2)]| -> DVector<C64> {
        // Rightmost factor acts first.
        let mut v = psi.clone();
        for (p, op) in ops_list.iter().rev() {
            v = on(*p, op) * v;
        }
        v
    };
    let (a, b, cc) = (0usize, 1usize, 2usize);
    let mut rels: Vec<(String, String, f64)> = Vec::new();
    let mut eq = |id: &str, desc: &str, lhs: DVector<C64>, rhs: DVector<C64>| {
        rels.push((id.into(), desc.into(), (lhs - rhs).norm()));
    };

    for i in 0..2 {
        let pc = proj(cc, i);
        eq(
            &format!("R{}.1", i),
            &format!("P{i}_C Z'_A psi = P{i}_C Z'_B psi"),
            vec_of(&[(cc, pc), (a, zp[a])]),
            vec_of(&[(cc, pc), (b, zp[b])]),
        );
        eq(
            &format!("R{}.2", i),
            &format!("P{i}_C Z'_A X'_A psi = -P{i}_C X'_A Z'_A psi"),
            vec_of(&[(cc, pc), (a, zp[a] * xp[a])]),
            -vec_of(&[(cc, pc), (a, xp[a] * zp[a])]),
        );
        eq(
            &format!("R{}.3", i),
            &format!("P{i}_C Z'_B X'_B psi = -P{i}_C X'_B Z'_B psi"),
            vec_of(&[(cc, pc), (b, zp[b] * xp[b])]),
            -vec_of(&[(cc, pc), (b, xp[b] * zp[b])]),
        );
        let ortho = vec_of(&[(cc, pc), (a, xp[a])])
            .dotc(&vec_of(&[(cc, pc), (b, zp[b])]))
            .norm();
        eq(
            &format!("R{}.4", i),
            &format!("P{i}_C X'_A psi is orthogonal to P{i}_C Z'_B psi"),
            DVector::from_element(1, c(ortho)),
            DVector::zeros(1),
        );
        eq(
            &format!("R{}.5", i),
            &format!("P{i}_C Z_A psi = cos w P{i}_C Z'_A psi + sin w P{i}_C X'_A psi"),
            vec_of(&[(cc, pc), (a, zs[a])]),
            vec_of(&[(cc, pc), (a, zp[a])]) * c(cw) + vec_of(&[(cc, pc), (a, xp[a])]) * c(sw),
        );
        eq(
            &format!("R{}.6", i),
            &format!("P{i}_C X_A psi = sin w P{i}_C Z'_A psi - cos w P{i}_C X'_A psi"),
            vec_of(&[(cc, pc), (a, xs[a])]),
            vec_of(&[(cc, pc), (a, zp[a])]) * c(sw) - vec_of(&[(cc, pc), (a, xp[a])]) * c(cw),
        );
        eq(
            &format!("R{}.7", i),
            &format!("P{i}_C Z_A X_A psi = -P{i}_C X_A Z_A psi"),
            vec_of(&[(cc, pc), (a, zs[a] * xs[a])]),
            -vec_of(&[(cc, pc), (a, xs[a] * zs[a])]),
        );
        eq(
            &format!("R{}.8", i),
            &format!("P{i}_C Z_B X_B psi = -P{i}_C X_B Z_B psi"),
            vec_of(&[(cc, pc), (b, zs[b] * xs[b])]),
            -vec_of(&[(cc, pc), (b, xs[b] * zs[b])]),
        );
        let pa = proj(a, i);
        eq(
            &format!("R{}.9", i),
            &format!("P{i}_A Z_C X_C psi = -P{i}_A X_C Z_C psi"),
            vec_of(&[(a, pa), (cc, zs[cc] * xs[cc])]),
            -vec_of(&[(a, pa), (cc, xs[cc] * zs[cc])]),
        );
    }
    let p0c = proj(cc, 0);
    let p1c = proj(cc, 1);
    // The tilted-CHSH relations with the Schmidt angle β of the projected state.
    eq(
        "T3",
        "P0_C X'_A (I + Z'_B) psi = cot(beta) P0_C X'_B (I - Z'_A) psi",
        vec_of(&[(cc, p0c), (a, xp[a]), (b, id + zp[b])]),
        vec_of(&[(cc, p0c), (b, xp[b]), (a, id - zp[a])]) * c(1.0 / tan_b),
    );
    eq(
        "T3.2",
        "P0_C X'_B (I - Z'_B) psi = tan(beta) P0_C X'_A (I + Z'_A) psi",
        vec_of(&[(cc, p0c), (b, xp[b] * (id - zp[b]))]),
        vec_of(&[(cc, p0c), (a, xp[a] * (id + zp[a]))]) * c(tan_b),
    );
    eq(
        "S1",
        "P1_C Z'_A psi = P1_C Z'_B psi",
        vec_of(&[(cc, p1c), (a, zp[a])]),
        vec_of(&[(cc, p1c), (b, zp[b])]),
    );
    eq(
        "S2",
        "P1_C X_A psi = P1_C X_B psi",
        vec_of(&[(cc, p1c), (a, xs[a])]),
        vec_of(&[(cc, p1c), (b, xs[b])]),
    );
    eq(
        "S3",
        "P1_C Z_A psi = P1_C Z_B psi",
        vec_of(&[(cc, p1c), (a, zs[a])]),
        vec_of(&[(cc, p1c), (b, zs[b])]),
    );
    eq(
        "S4",
        "P1_C X'_A psi = -P1_C X'_B psi",
        vec_of(&[(cc, p1c), (a, xp[a])]),
        -vec_of(&[(cc, p1c), (b, xp[b])]),
    );
    // X'_B carries the opposite sign to X'_A in the ideal realization (see S4).
    eq(
        "B1",
        "Z_B psi = cos w Z'_B psi - sin w X'_B psi",
        vec_of(&[(b, zs[b])]),
        vec_of(&[(b, zp[b])]) * c(cw) - vec_of(&[(b, xp[b])]) * c(sw),
    );
    eq(
        "B2",
        "X_B psi = sin w Z'_B psi + cos w X'_B psi",
        vec_of(&[(b, xs[b])]),
        vec_of(&[(b, zp[b])]) * c(sw) + vec_of(&[(b, xp[b])]) * c(cw),
    );
    eq(
        "B3",
        "X_C psi = sin w Z'_C psi - cos w X'_C psi",
        vec_of(&[(cc, xs[cc])]),
        vec_of(&[(cc, zp[cc])]) * c(sw) - vec_of(&[(cc, xp[cc])]) * c(cw),
    );
    let pa0 = proj(a, 0);
    let pb0 = proj(b, 0);
    eq(
        "X1",
        "P0_A P0_B psi = P0_A P0_B X_C psi",
        vec_of(&[(a, pa0), (b, pb0)]),
        vec_of(&[(a, pa0), (b, pb0), (cc, xs[cc])]),
    );
    eq(
        "X2",
        "P0_B P0_C psi = P0_B P0_C X_A psi",
        vec_of(&[(b, pb0), (cc, p0c)]),
        vec_of(&[(b, pb0), (cc, p0c), (a, xs[a])]),
    );
    eq(
        "X3",
        "P0_A P0_C psi = P0_A P0_C X_B psi",
        vec_of(&[(a, pa0), (cc, p0c)]),
        vec_of(&[(a, pa0), (cc, p0c), (b, xs[b])]),
    );
    for (pat, name) in [(0b011usize, "011"), (0b101, "101"), (0b110, "110")] {
        let bits = [pat >> 2 & 1, pat >> 1 & 1, pat & 1];
        let zero = vec_of(&[]) * c(0.0);
        let mut f = [id; PARTIES];
        for p in 0..PARTIES {
            f[p] = ops.kraus(p)[bits[p]];
        }
        let v = qcore::lift3(&f[0], &f[1], &f[2]) * &psi;
        eq(
            &format!("Z{name}"),
            &format!("isometry output on ancilla pattern {name} vanishes"),
            v,
            zero,
        );
    }
    let relations: Vec<RelationRecord> = rels
        .into_iter()
        .map(|(id, description, residual)| RelationRecord {
            pass: residual < tol,
            id,
            description,
            residual,
        })
        .collect();
    let pass = relations.iter().all(|r| r.pass);
    Ok(RelationReport {
        relations,
        pass,
        tol,
    })
}
