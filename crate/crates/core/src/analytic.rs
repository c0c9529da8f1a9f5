//! Closed-form self-testing criteria: singlet correlations, the XOR game built from
//! planar angles, the tilted CHSH expression, two-qubit Schmidt decomposition and the
//! checker for the five-term state's statistics.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::qcore::{self, result1, Behavior, Mat2, Slot, StateVector, C64};

/// Two-input, two-output correlators E_xy = cos α_xy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationAngles {
    pub e: [[f64; 2]; 2],
    pub alpha: [[f64; 2]; 2],
}

impl CorrelationAngles {
    pub fn from_correlators(e: [[f64; 2]; 2]) -> Result<Self> {
        for row in &e {
            for &v in row {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "correlator {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            e,
            alpha: e.map(|r| r.map(f64::acos)),
        })
    }

    /// Angles may be given on any branch; only cos α is kept.
    pub fn from_angles(alpha: [[f64; 2]; 2]) -> Self {
        let e = alpha.map(|r| r.map(|a| a.cos().clamp(-1.0, 1.0)));
        Self {
            e,
            alpha: e.map(|r| r.map(f64::acos)),
        }
    }
}

/// Which of the eight relabelled singlet conditions holds: the odd entry (i, j) and
/// the sign ξ of the right-hand side ξπ. Indices are 1-based as in the usual notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingletVariant {
    pub i: usize,
    pub j: usize,
    pub xi: i8,
}

/// Σ_{(x,y)≠(i,j)} arcsin E_xy − arcsin E_ij = ξπ for some (i, j, ξ).
pub fn singlet_criterion_check(angles: &CorrelationAngles, tol: f64) -> Option<SingletVariant> {
    let s = angles.e.map(|r| r.map(f64::asin));
    let total: f64 = s.iter().flatten().sum();
    for i in 0..2 {
        for j in 0..2 {
            let lhs = total - 2.0 * s[i][j];
            for xi in [1i8, -1] {
                if (lhs - f64::from(xi) * PI).abs() <= tol {
                    return Some(SingletVariant {
                        i: i + 1,
                        j: j + 1,
                        xi,
                    });
                }
            }
        }
    }
    None
}

/// Ideal singlet angles for the measurement offset μ.
pub fn ideal_singlet_angles(mu: f64) -> CorrelationAngles {
    CorrelationAngles::from_angles([[mu, -mu], [FRAC_PI_2 - mu, -FRAC_PI_2 - mu]])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XorGameSpec {
    /// f[x][y], rows indexed by Alice's input.
    pub f: [[f64; 2]; 2],
    pub game_value_max: f64,
}

impl XorGameSpec {
    pub fn value(&self, e: &[[f64; 2]; 2]) -> f64 {
        (0..2)
            .flat_map(|x| (0..2).map(move |y| (x, y)))
            .map(|(x, y)| self.f[x][y] * e[x][y])
            .sum()
    }
}

/// f₁₁ = 1/sin α₁₁, f₁₂ = −1/sin(α₁₁+α₂₁+α₂₂), f₂₁ = 1/sin α₂₁, f₂₂ = 1/sin α₂₂.
///
/// The maximal value is evaluated on the planar assignment α₁₂ = α₁₁+α₂₁+α₂₂.
pub fn xor_game_coefficients(alpha11: f64, alpha21: f64, alpha22: f64) -> Result<XorGameSpec> {
    let alpha12 = alpha11 + alpha21 + alpha22;
    let inv = |a: f64, name: &str| -> Result<f64> {
        let s = a.sin();
        if s.abs() < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "sin({name}) = 0, XOR coefficients undefined"
            )));
        }
        Ok(1.0 / s)
    };
    let f = [
        [inv(alpha11, "alpha11")?, -inv(alpha12, "alpha11+alpha21+alpha22")?],
        [inv(alpha21, "alpha21")?, inv(alpha22, "alpha22")?],
    ];
    let e = [
        [alpha11.cos(), alpha12.cos()],
        [alpha21.cos(), alpha22.cos()],
    ];
    let mut spec = XorGameSpec {
        f,
        game_value_max: 0.0,
    };
    spec.game_value_max = spec.value(&e);
    Ok(spec)
}

/// The XOR game that self-tests the singlet with offset μ, value 4/sin 2μ.
pub fn xor_game_for_mu(mu: f64) -> Result<XorGameSpec> {
    xor_game_coefficients(mu, -(FRAC_PI_2 + mu), FRAC_PI_2 - mu)
}

/// α = 2√((1−sin²2θ)/(1+sin²2θ)) for θ ∈ (0, π/4].
pub fn tilted_alpha_from_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_4 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside (0, pi/4]"
        )));
    }
    let s2 = (2.0 * theta).sin().powi(2);
    Ok(2.0 * ((1.0 - s2) / (1.0 + s2)).max(0.0).sqrt())
}

/// Inverse of [`tilted_alpha_from_theta`]: sin 2θ = √((4−α²)/(4+α²)).
pub fn sin2theta_from_tilted_alpha(alpha: f64) -> f64 {
    ((4.0 - alpha * alpha) / (4.0 + alpha * alpha)).sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TiltedCorrelators {
    pub a1: f64,
    pub a1b1: f64,
    pub a1b2: f64,
    pub a2b1: f64,
    pub a2b2: f64,
}

pub fn tilted_chsh_value(alpha: f64, c: &TiltedCorrelators) -> f64 {
    alpha * c.a1 + c.a1b1 + c.a1b2 + c.a2b1 - c.a2b2
}

pub fn tilted_classical_bound(alpha: f64) -> f64 {
    2.0 + alpha
}

pub fn tilted_quantum_max(alpha: f64) -> f64 {
    (8.0 + 2.0 * alpha * alpha).sqrt()
}

/// Correlators of cosθ|00⟩+sinθ|11⟩ with A₁=σz, A₂=σx, B₁,₂ = cosμ σz ± sinμ σx and
/// tan μ = sin 2θ.
pub fn tilted_optimal_correlators(theta: f64) -> TiltedCorrelators {
    let mu = (2.0 * theta).sin().atan();
    let psi = nalgebra::DVector::from_vec(vec![
        C64::new(theta.cos(), 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(theta.sin(), 0.0),
    ]);
    let d = |m: &Mat2| DMatrix::from_iterator(2, 2, m.iter().copied());
    let ev = |a: &Mat2, b: &Mat2| psi.dotc(&(d(a).kronecker(&d(b)) * &psi)).re;
    let (a1, a2) = (qcore::pauli_z(), qcore::pauli_x());
    let b1 = qcore::xz_plane(mu);
    let b2 = qcore::xz_plane(-mu);
    let id = qcore::identity2();
    TiltedCorrelators {
        a1: ev(&a1, &id),
        a1b1: ev(&a1, &b1),
        a1b2: ev(&a1, &b2),
        a2b1: ev(&a2, &b1),
        a2b2: ev(&a2, &b2),
    }
}

/// state = cosβ|0′0′⟩ + sinβ|1′1′⟩ with |i′⟩_A the i-th column of `basis_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schmidt {
    pub cos_beta: f64,
    pub sin_beta: f64,
    pub basis_a: Mat2,
    pub basis_b: Mat2,
}

/// Schmidt decomposition through the SVD of the coefficient matrix C[a][b].
///
/// Each column of `basis_a` is rephased so that its largest entry (first on ties) is
/// real and positive; the conjugate phase goes into `basis_b`.
pub fn schmidt_decompose_2q(state: &StateVector) -> Result<Schmidt> {
    if state.num_qubits() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a 2-qubit state, got {} qubits",
            state.num_qubits()
        )));
    }
    let a = state.amplitudes();
    let cm = Matrix2::new(a[0], a[1], a[2], a[3]);
    let svd = cm.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order = [0usize, 1];
    if svd.singular_values[1] > svd.singular_values[0] {
        order = [1, 0];
    }
    let mut basis_a = Mat2::zeros();
    let mut basis_b = Mat2::zeros();
    for (k, &i) in order.iter().enumerate() {
        let mut ua = u.column(i).into_owned();
        // (V†)_{i,b} = conj(V_{b,i}) is the B-side vector paired with u_i.
        let mut vb = vt.row(i).transpose();
        let lead = if ua[1].norm() > ua[0].norm() + 1e-14 { 1 } else { 0 };
        let phase = ua[lead] / C64::new(ua[lead].norm(), 0.0);
        ua /= phase;
        vb *= phase;
        basis_a.set_column(k, &ua);
        basis_b.set_column(k, &vb);
    }
    let s = [svd.singular_values[order[0]], svd.singular_values[order[1]]];
    Ok(Schmidt {
        cos_beta: s[0],
        sin_beta: s[1],
        basis_a,
        basis_b,
    })
}

impl Schmidt {
    /// Σ λ_i |i′⟩|i′⟩ as four amplitudes in |ab⟩ order.
    pub fn reconstruct(&self) -> [C64; 4] {
        let lam = [self.cos_beta, self.sin_beta];
        let mut out = [C64::new(0.0, 0.0); 4];
        for (i, &l) in lam.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    out[2 * a + b] += self.basis_a[(a, i)] * self.basis_b[(b, i)] * l;
                }
            }
        }
        out
    }
}

/// One scalar equation of the five-term state's statistics: Σ coeff·⟨pattern⟩ = target.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub id: String,
    pub description: String,
    pub terms: Vec<(f64, [Slot; 3])>,
    pub target: f64,
}

impl Condition {
    pub fn evaluate(&self, b: &Behavior) -> Result<f64> {
        let mut s = 0.0;
        for (c, pat) in &self.terms {
            s += c * b.projector_correlator(*pat)?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRecord {
    pub id: String,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Result1Report {
    pub conditions: Vec<ConditionRecord>,
    pub pass: bool,
    pub tol: f64,
}

impl Result1Report {
    pub fn worst(&self) -> Option<&ConditionRecord> {
        self.conditions
            .iter()
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
    }

    pub fn get(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

/// The 24 displayed conditions as C1…C24, in display order.
///
/// Conventions: input 0 is each party's Z; P⁰/P¹ are its projectors; the X-alignment
/// conditions use X_T = sinω T₁ − cosω T₂; the XOR game uses the planar angles
/// (μ, −π/2−μ, π/2−μ) and lets Charlie play Alice's role in the second partition.
pub fn result1_conditions() -> Vec<Condition> {
    use Slot::{Id, Obs, P0, P1};
    let (cw, sw) = (result1::cos_omega(), result1::sin_omega());
    let (w, mu) = (result1::omega(), result1::mu());
    let s2m = (2.0 * mu).sin();
    let alpha = result1::alpha();
    let mut out = Vec::with_capacity(24);
    let mut push = |desc: String, terms: Vec<(f64, [Slot; 3])>, target: f64| {
        out.push(Condition {
            id: format!("C{}", out.len() + 1),
            description: desc,
            terms,
            target,
        })
    };
    let proj = |i: usize| if i == 0 { P0 } else { P1 };

    for pat in [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]] {
        push(
            format!("<P{}_A P{}_B P{}_C> = 1/5", pat[0], pat[1], pat[2]),
            vec![(1.0, [proj(pat[0]), proj(pat[1]), proj(pat[2])])],
            0.2,
        );
    }
    for i in 0..2 {
        let p = proj(i);
        push(
            format!("<P{i}_C A1 (B2 - B1)> = 0"),
            vec![(1.0, [Obs(1), Obs(2), p]), (-1.0, [Obs(1), Obs(1), p])],
            0.0,
        );
        push(
            format!("cos w <P{i}_C A1> + sin w <P{i}_C A2> = <P{i}_C A0>"),
            vec![
                (cw, [Obs(1), Id, p]),
                (sw, [Obs(2), Id, p]),
                (-1.0, [Obs(0), Id, p]),
            ],
            0.0,
        );
        push(
            format!("<P{i}_A (B1 - B2) C1> = 0"),
            vec![(1.0, [p, Obs(1), Obs(1)]), (-1.0, [p, Obs(2), Obs(1)])],
            0.0,
        );
        push(
            format!("cos w <P{i}_A C1> + sin w <P{i}_A C2> = <P{i}_A C0>"),
            vec![
                (cw, [p, Id, Obs(1)]),
                (sw, [p, Id, Obs(2)]),
                (-1.0, [p, Id, Obs(0)]),
            ],
            0.0,
        );
        push(
            format!("<P{i}_C A1 (B1 - B2)> = 0"),
            vec![(1.0, [Obs(1), Obs(1), p]), (-1.0, [Obs(1), Obs(2), p])],
            0.0,
        );
        push(
            format!("[sin(w+mu) <P{i}_C B2> - sin(w-mu) <P{i}_C B1>] / sin 2mu = <P{i}_C B0>"),
            vec![
                ((w + mu).sin() / s2m, [Id, Obs(2), p]),
                (-(w - mu).sin() / s2m, [Id, Obs(1), p]),
                (-1.0, [Id, Obs(0), p]),
            ],
            0.0,
        );
    }
    push(
        "sin w <P0_A P0_B C1> - cos w <P0_A P0_B C2> = 2/5".into(),
        vec![(sw, [P0, P0, Obs(1)]), (-cw, [P0, P0, Obs(2)])],
        0.4,
    );
    push(
        "sin w <P0_B P0_C A1> - cos w <P0_B P0_C A2> = 2/5".into(),
        vec![(sw, [Obs(1), P0, P0]), (-cw, [Obs(2), P0, P0])],
        0.4,
    );
    push(
        "[cos(w-mu) <P0_A P0_C B1> - cos(w+mu) <P0_A P0_C B2>] / sin 2mu = 2/5".into(),
        vec![
            ((w - mu).cos() / s2m, [P0, Obs(1), P0]),
            (-(w + mu).cos() / s2m, [P0, Obs(2), P0]),
        ],
        0.4,
    );
    let iq = tilted_quantum_max(alpha);
    push(
        "<P0_C I^alpha(A1, A2, B1, B2)> = (3/5) sqrt(8 + 2 alpha^2)".into(),
        vec![
            (alpha, [Obs(1), Id, P0]),
            (1.0, [Obs(1), Obs(1), P0]),
            (1.0, [Obs(1), Obs(2), P0]),
            (1.0, [Obs(2), Obs(1), P0]),
            (-1.0, [Obs(2), Obs(2), P0]),
        ],
        0.6 * iq,
    );
    push(
        "<P0_A I^alpha(C1, C2, B1, B2)> = (3/5) sqrt(8 + 2 alpha^2)".into(),
        vec![
            (alpha, [P0, Id, Obs(1)]),
            (1.0, [P0, Obs(1), Obs(1)]),
            (1.0, [P0, Obs(2), Obs(1)]),
            (1.0, [P0, Obs(1), Obs(2)]),
            (-1.0, [P0, Obs(2), Obs(2)]),
        ],
        0.6 * iq,
    );
    let f = xor_game_for_mu(mu).expect("mu is not a multiple of pi").f;
    let xor_target = 8.0 / (5.0 * s2m);
    push(
        "sum f_ij <P1_C A_i B_j> = 8 / (5 sin 2mu)".into(),
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (f[i][j], [Obs(i + 1), Obs(j + 1), P1]))
            .collect(),
        xor_target,
    );
    push(
        "sum f_ij <P1_A C_i B_j> = 8 / (5 sin 2mu)".into(),
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (f[i][j], [P1, Obs(j + 1), Obs(i + 1)]))
            .collect(),
        xor_target,
    );
    out
}

/// Evaluates C1…C24 on a three-input behavior.
pub fn result1_check(behavior: &Behavior, tol: f64) -> Result<Result1Report> {
    result1_check_with_overrides(behavior, tol, &[])
}

/// As [`result1_check`], but the measured left-hand side of each listed condition id
/// is replaced by the given value (fault injection).
pub fn result1_check_with_overrides(
    behavior: &Behavior,
    tol: f64,
    overrides: &[(String, f64)],
) -> Result<Result1Report> {
    if behavior.inputs() != [3, 3, 3] {
        return Err(Error::Scenario(format!(
            "Result 1 needs three inputs per party, behavior has {:?}",
            behavior.inputs()
        )));
    }
    let conds = result1_conditions();
    for (id, _) in overrides {
        if !conds.iter().any(|c| &c.id == id) {
            return Err(Error::InvalidArgument(format!("unknown condition id {id}")));
        }
    }
    let mut records = Vec::with_capacity(conds.len());
    for c in conds {
        let lhs = match overrides.iter().rev().find(|(id, _)| *id == c.id) {
            Some(&(_, v)) => v,
            None => c.evaluate(behavior)?,
        };
        let deviation = (lhs - c.target).abs();
        records.push(ConditionRecord {
            id: c.id,
            description: c.description,
            lhs,
            rhs: c.target,
            deviation,
            pass: deviation <= tol,
        });
    }
    let pass = records.iter().all(|r| r.pass);
    Ok(Result1Report {
        conditions: records,
        pass,
        tol,
    })
}
