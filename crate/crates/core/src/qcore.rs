//! Exact simulation of the small systems used throughout: three qubits, two-outcome
//! observables, correlators and full behaviors.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::analytic;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

pub const PARTIES: usize = 3;
const PARTY_NAMES: [char; PARTIES] = ['A', 'B', 'C'];

pub fn party_name(p: usize) -> char {
    PARTY_NAMES[p]
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0))
}

/// cos(φ)σz + sin(φ)σx.
pub fn xz_plane(phi: f64) -> Mat2 {
    pauli_z() * c(phi.cos()) + pauli_x() * c(phi.sin())
}

/// Kronecker product of an arbitrary list of square matrices.
pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn lift3(a: &Mat2, b: &Mat2, cc: &Mat2) -> DMatrix<C64> {
    let d = |m: &Mat2| DMatrix::from_iterator(2, 2, m.iter().copied());
    kron_all(&[d(a), d(b), d(cc)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Takes ownership of the amplitudes; the squared norm must be 1 within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state length {len} is not a power of two"
            )));
        }
        let v = DVector::from_vec(amplitudes);
        let dev = (v.norm_squared() - 1.0).abs();
        if dev > 1e-12 {
            return Err(Error::NotPhysical {
                what: "state vector".into(),
                property: "normalized",
                deviation: dev,
            });
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes: v,
        })
    }

    /// Normalizes `amplitudes` first; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let n = v.norm();
        if n < 1e-300 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Self::new((v / c(n)).iter().copied().collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| c(a)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis_index: usize) -> C64 {
        self.amplitudes[basis_index]
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// cosθ|W⟩ + sinθ|GHZ⟩ for θ ∈ [0, π/2].
pub fn make_target_state(theta: f64) -> Result<StateVector> {
    check_theta(theta)?;
    let w = theta.cos() / 3f64.sqrt();
    let g = theta.sin() / SQRT_2;
    let mut amps = vec![0.0; 8];
    amps[0b001] = w;
    amps[0b010] = w;
    amps[0b100] = w;
    amps[0b000] = g;
    amps[0b111] = g;
    // cos²θ + sin²θ is 1 only up to rounding; renormalize so the 1e-12 contract holds exactly.
    StateVector::from_real(&amps)
}

/// θ must lie in [0, π/2].
pub fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside [0, pi/2]"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObsLabel {
    pub party: usize,
    pub input: usize,
}

impl std::fmt::Display for ObsLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", party_name(self.party), self.input)
    }
}

/// A single-qubit ±1-valued observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: Mat2,
    label: ObsLabel,
}

impl Observable {
    pub fn new(matrix: Mat2, label: ObsLabel) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).norm();
        if herm > 1e-12 {
            return Err(Error::NotPhysical {
                what: format!("observable {label}"),
                property: "Hermitian",
                deviation: herm,
            });
        }
        let inv = (matrix * matrix - identity2()).norm();
        if inv > 1e-10 {
            return Err(Error::NotPhysical {
                what: format!("observable {label}"),
                property: "an involution",
                deviation: inv,
            });
        }
        Ok(Self { matrix, label })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn label(&self) -> ObsLabel {
        self.label
    }

    /// Projector onto the +1 (outcome 0) or −1 (outcome 1) eigenspace.
    pub fn projector(&self, outcome: usize) -> Mat2 {
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        (identity2() + self.matrix * c(s)) * c(0.5)
    }
}

/// Shared three-qubit state plus each party's ordered list of observables.
#[derive(Clone, Debug)]
pub struct Realization {
    pub state: StateVector,
    pub observables: [Vec<Observable>; PARTIES],
    pub party_dims: [usize; PARTIES],
}

impl Realization {
    pub fn new(state: StateVector, observables: [Vec<Observable>; PARTIES]) -> Result<Self> {
        if state.num_qubits() != PARTIES {
            return Err(Error::Scenario(format!(
                "expected a {PARTIES}-qubit state, got {}",
                state.num_qubits()
            )));
        }
        for (p, list) in observables.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Scenario(format!(
                    "party {} has no observables",
                    party_name(p)
                )));
            }
        }
        Ok(Self {
            state,
            observables,
            party_dims: [2; PARTIES],
        })
    }

    /// Builds observables from raw matrices, labelling them by party and position.
    pub fn from_matrices(state: StateVector, mats: [Vec<Mat2>; PARTIES]) -> Result<Self> {
        let mut obs: [Vec<Observable>; PARTIES] = Default::default();
        for (p, list) in mats.into_iter().enumerate() {
            for (x, m) in list.into_iter().enumerate() {
                obs[p].push(Observable::new(m, ObsLabel { party: p, input: x })?);
            }
        }
        Self::new(state, obs)
    }

    pub fn inputs(&self) -> [usize; PARTIES] {
        [
            self.observables[0].len(),
            self.observables[1].len(),
            self.observables[2].len(),
        ]
    }

    pub fn observable(&self, party: usize, input: usize) -> Result<&Observable> {
        self.observables[party].get(input).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "party {} has no input {input}",
                party_name(party)
            ))
        })
    }

    /// ⟨ψ|M_A⊗M_B⊗M_C|ψ⟩ for arbitrary local 2×2 matrices, complex.
    pub fn expect_local(&self, ops: [&Mat2; PARTIES]) -> C64 {
        self.state.expectation(&lift3(ops[0], ops[1], ops[2]))
    }
}

/// The ideal measurements of the W/GHZ family: Z and X for Alice and Bob, Z, X and
/// D = (X+Z)/√2 for Charlie.
pub fn ideal_realization_general(theta: f64) -> Result<Realization> {
    let state = make_target_state(theta)?;
    let d = (pauli_x() + pauli_z()) * c(1.0 / SQRT_2);
    Realization::from_matrices(
        state,
        [
            vec![pauli_z(), pauli_x()],
            vec![pauli_z(), pauli_x()],
            vec![pauli_z(), pauli_x(), d],
        ],
    )
}

/// Constants of the five-term state (|000⟩+|001⟩+|010⟩+|100⟩+|111⟩)/√5.
pub mod result1 {
    /// θ with cos²θ = 3/5.
    pub fn theta() -> f64 {
        (3.0f64 / 5.0).sqrt().acos()
    }
    pub fn cos_omega() -> f64 {
        1.0 / 5f64.sqrt()
    }
    pub fn sin_omega() -> f64 {
        2.0 / 5f64.sqrt()
    }
    pub fn omega() -> f64 {
        2f64.atan()
    }
    /// tan μ = sin 2β = 2/3.
    pub fn mu() -> f64 {
        (2.0f64 / 3.0).atan()
    }
    /// α = 2√(5/13).
    pub fn alpha() -> f64 {
        2.0 * (5.0f64 / 13.0).sqrt()
    }
}

/// The three-setting realization of the five-term state.
///
/// The primed bases come from the Schmidt decomposition of
/// |φ₀⟩ = (|00⟩+|01⟩+|10⟩)/√3. The Schmidt basis fixes Z′ but only fixes X′ up to sign
/// per party, so the eight sign choices are tried in order and the first one whose
/// behavior passes the checker at 1e-9 is returned.
pub fn ideal_realization_result1() -> Result<Realization> {
    let phi0 = StateVector::from_real(&[1.0, 1.0, 1.0, 0.0])?;
    let sd = analytic::schmidt_decompose_2q(&phi0)?;
    let primed = |basis: &Mat2| -> (Mat2, Mat2) {
        let u0 = basis.column(0).into_owned();
        let u1 = basis.column(1).into_owned();
        let z = u0 * u0.adjoint() - u1 * u1.adjoint();
        let x = u0 * u1.adjoint() + u1 * u0.adjoint();
        (z, x)
    };
    let (za, xa) = primed(&sd.basis_a);
    let (zb, xb) = primed(&sd.basis_b);
    let (cm, sm) = (result1::mu().cos(), result1::mu().sin());
    let state = make_target_state(result1::theta())?;

    let mut last_err = None;
    for signs in 0..8u32 {
        let s = |bit: u32| if signs >> bit & 1 == 0 { 1.0 } else { -1.0 };
        let (xa_s, xb_s, xc_s) = (xa * c(s(0)), xb * c(s(1)), xa * c(s(2)));
        let real = Realization::from_matrices(
            state.clone(),
            [
                vec![pauli_z(), za, xa_s],
                vec![pauli_z(), zb * c(cm) + xb_s * c(sm), zb * c(cm) - xb_s * c(sm)],
                vec![pauli_z(), za, xc_s],
            ],
        )?;
        match analytic::result1_check(&behavior_full(&real), 1e-9) {
            Ok(rep) if rep.pass => return Ok(real),
            Ok(rep) => last_err = Some(rep.worst().map(|r| r.id.clone()).unwrap_or_default()),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Internal(format!(
        "no sign choice of the primed X operators reproduces the Result 1 statistics (last failing condition {})",
        last_err.unwrap_or_default()
    )))
}

/// Per-party selection in a correlator: an observable index or the identity.
pub type Choice = [Option<usize>; PARTIES];

fn real_part_checked(v: C64, what: &str) -> Result<f64> {
    if v.im.abs() > 1e-10 {
        return Err(Error::NotPhysical {
            what: what.to_string(),
            property: "real",
            deviation: v.im.abs(),
        });
    }
    Ok(v.re)
}

/// ⟨ψ|O_A⊗O_B⊗O_C|ψ⟩ with `None` standing for the identity.
pub fn correlator(real: &Realization, choice: Choice) -> Result<f64> {
    let id = identity2();
    let mut mats = [id; PARTIES];
    for p in 0..PARTIES {
        if let Some(x) = choice[p] {
            mats[p] = *real.observable(p, x)?.matrix();
        }
    }
    real_part_checked(real.expect_local([&mats[0], &mats[1], &mats[2]]), "correlator")
}

/// One tensor factor of a mixed projector/observable expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Id,
    /// (I + O₀)/2 of the party's input-0 observable.
    P0,
    /// (I − O₀)/2 of the party's input-0 observable.
    P1,
    Obs(usize),
}

impl Slot {
    /// (input measured, weight as a function of the outcome bit).
    fn as_outcome_weight(self) -> (usize, [f64; 2]) {
        match self {
            Slot::Id => (0, [1.0, 1.0]),
            Slot::P0 => (0, [1.0, 0.0]),
            Slot::P1 => (0, [0.0, 1.0]),
            Slot::Obs(x) => (x, [1.0, -1.0]),
        }
    }
}

pub fn projector_correlator(real: &Realization, pattern: [Slot; PARTIES]) -> Result<f64> {
    let mut mats = [identity2(); PARTIES];
    for p in 0..PARTIES {
        mats[p] = match pattern[p] {
            Slot::Id => identity2(),
            Slot::P0 => real.observable(p, 0)?.projector(0),
            Slot::P1 => real.observable(p, 0)?.projector(1),
            Slot::Obs(x) => *real.observable(p, x)?.matrix(),
        };
    }
    real_part_checked(
        real.expect_local([&mats[0], &mats[1], &mats[2]]),
        "projector correlator",
    )
}

/// Full table p(a,b,c|x,y,z) for two outcomes per input; outcome 0 ↔ eigenvalue +1.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    inputs: [usize; PARTIES],
    probs: Vec<f64>,
}

impl Behavior {
    pub const OUTCOMES: usize = 2;

    /// `probs` is indexed by [`Behavior::index`]; validated for normalization, range and
    /// no-signaling at 1e-10.
    pub fn new(inputs: [usize; PARTIES], probs: Vec<f64>) -> Result<Self> {
        let expect = inputs.iter().product::<usize>() * 8;
        if probs.len() != expect || inputs.contains(&0) {
            return Err(Error::Scenario(format!(
                "behavior table has {} entries, expected {expect}",
                probs.len()
            )));
        }
        let b = Self { inputs, probs };
        b.validate(1e-10)?;
        Ok(b)
    }

    pub fn inputs(&self) -> [usize; PARTIES] {
        self.inputs
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn index(&self, x: [usize; PARTIES], a: [usize; PARTIES]) -> usize {
        let [nx, ny, nz] = self.inputs;
        debug_assert!(x[0] < nx && x[1] < ny && x[2] < nz);
        ((((x[0] * ny + x[1]) * nz + x[2]) * 2 + a[0]) * 2 + a[1]) * 2 + a[2]
    }

    pub fn prob(&self, x: [usize; PARTIES], a: [usize; PARTIES]) -> f64 {
        self.probs[self.index(x, a)]
    }

    fn validate(&self, tol: f64) -> Result<()> {
        for (i, &p) in self.probs.iter().enumerate() {
            if !(-tol..=1.0 + tol).contains(&p) {
                return Err(Error::NotPhysical {
                    what: format!("probability entry {i}"),
                    property: "in [0,1]",
                    deviation: if p < 0.0 { -p } else { p - 1.0 },
                });
            }
        }
        for x in self.input_triples() {
            let s: f64 = outcome_triples().map(|a| self.prob(x, a)).sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::NotPhysical {
                    what: format!("distribution for inputs {x:?}"),
                    property: "normalized",
                    deviation: (s - 1.0).abs(),
                });
            }
        }
        // Each party's marginal over the others' outcomes must not depend on their inputs.
        for p in 0..PARTIES {
            for x in self.input_triples() {
                let mut base = x;
                for q in 0..PARTIES {
                    if q != p {
                        base[q] = 0;
                    }
                }
                for part in 0..2 {
                    let m = |inp: [usize; PARTIES]| -> f64 {
                        outcome_triples()
                            .filter(|o| o[p] == part)
                            .map(|o| self.prob(inp, o))
                            .sum()
                    };
                    let dev = (m(x) - m(base)).abs();
                    if dev > tol {
                        return Err(Error::NotPhysical {
                            what: format!("marginal of party {}", party_name(p)),
                            property: "no-signaling",
                            deviation: dev,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn input_triples(&self) -> impl Iterator<Item = [usize; PARTIES]> {
        let [nx, ny, nz] = self.inputs;
        (0..nx).flat_map(move |x| (0..ny).flat_map(move |y| (0..nz).map(move |z| [x, y, z])))
    }

    /// Expectation of a projector/observable pattern reconstructed from the table.
    pub fn projector_correlator(&self, pattern: [Slot; PARTIES]) -> Result<f64> {
        let mut x = [0; PARTIES];
        let mut w = [[0.0; 2]; PARTIES];
        for p in 0..PARTIES {
            let (inp, wt) = pattern[p].as_outcome_weight();
            if inp >= self.inputs[p] {
                return Err(Error::InvalidArgument(format!(
                    "party {} has no input {inp}",
                    party_name(p)
                )));
            }
            x[p] = inp;
            w[p] = wt;
        }
        Ok(outcome_triples()
            .map(|a| self.prob(x, a) * w[0][a[0]] * w[1][a[1]] * w[2][a[2]])
            .sum())
    }

    /// Correlator via the ±1 expansion of the table.
    pub fn correlator(&self, choice: Choice) -> Result<f64> {
        self.projector_correlator(choice.map(|c| c.map_or(Slot::Id, Slot::Obs)))
    }
}

pub fn outcome_triples() -> impl Iterator<Item = [usize; PARTIES]> {
    (0..8).map(|k| [k >> 2 & 1, k >> 1 & 1, k & 1])
}

/// p(a,b,c|x,y,z) = ⟨ψ|Π_x^a⊗Π_y^b⊗Π_z^c|ψ⟩ for every input and outcome triple.
pub fn behavior_full(real: &Realization) -> Behavior {
    let inputs = real.inputs();
    let n = inputs.iter().product::<usize>() * 8;
    let mut probs = vec![0.0; n];
    let tmp = Behavior {
        inputs,
        probs: Vec::new(),
    };
    let proj: [Vec<[Mat2; 2]>; PARTIES] = std::array::from_fn(|p| {
        real.observables[p]
            .iter()
            .map(|o| [o.projector(0), o.projector(1)])
            .collect()
    });
    for x in tmp.input_triples() {
        for a in outcome_triples() {
            let v = real.expect_local([
                &proj[0][x[0]][a[0]],
                &proj[1][x[1]][a[1]],
                &proj[2][x[2]][a[2]],
            ]);
            // Clamp rounding noise so the table stays inside [0,1].
            probs[tmp.index(x, a)] = v.re.clamp(0.0, 1.0);
        }
    }
    Behavior { inputs, probs }
}

/// Names of the three correlator families measured on the general realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormStat {
    pub label: String,
    pub choice: Choice,
    pub value: f64,
}

/// The closed-form three-body correlators of the ideal realization, one per
/// permutation instance: ZZZ, ZXX×3, ZZX×3, XXX, ZZD, ZXD, XZD, XXD.
///
/// ⟨ZZZ⟩ is −cos²θ (the square applies to the cosine, which matches both endpoints).
pub fn closed_form_statistics(theta: f64) -> Vec<ClosedFormStat> {
    let (cs, sn) = (theta.cos(), theta.sin());
    let s2 = (2.0 * theta).sin();
    let (z, x, d) = (Some(0), Some(1), Some(2));
    let sq3 = 3f64.sqrt();
    let sq6 = 6f64.sqrt();
    let mut out = Vec::with_capacity(12);
    let mut push = |label: &str, choice: Choice, value: f64| {
        out.push(ClosedFormStat {
            label: label.to_string(),
            choice,
            value,
        })
    };
    push("ZZZ", [z, z, z], -cs * cs);
    push("ZXX", [z, x, x], 2.0 * cs * cs / 3.0 - s2 / sq6);
    push("XZX", [x, z, x], 2.0 * cs * cs / 3.0 - s2 / sq6);
    push("XXZ", [x, x, z], 2.0 * cs * cs / 3.0 - s2 / sq6);
    push("XZZ", [x, z, z], s2 / sq6);
    push("ZXZ", [z, x, z], s2 / sq6);
    push("ZZX", [z, z, x], s2 / sq6);
    push("XXX", [x, x, x], sn * sn);
    push("ZZD", [z, z, d], -cs * cs / SQRT_2 + s2 / (2.0 * sq3));
    push("ZXD", [z, x, d], SQRT_2 * cs * cs / 3.0);
    push("XZD", [x, z, d], SQRT_2 * cs * cs / 3.0);
    push(
        "XXD",
        [x, x, d],
        (5.0 * SQRT_2 - SQRT_2 * (2.0 * theta).cos() - 2.0 * sq3 * s2) / 12.0,
    );
    out
}
