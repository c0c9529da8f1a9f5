//! Generator alphabets and numerical evaluation of words on explicit operators.

use crate::error::{Error, Result};
use crate::qcore::{self, party_name, Mat2, Realization, StateVector, C64, PARTIES};

use super::monomial::{Gen, Monomial, Poly};

/// Per-party generator names; the op id of a generator is its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub op_names: [Vec<String>; PARTIES],
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Scenario {
    /// Z, X for Alice and Bob; Z, X, D for Charlie.
    pub fn general() -> Self {
        Self {
            name: "general".into(),
            op_names: [names(&["Z", "X"]), names(&["Z", "X"]), names(&["Z", "X", "D"])],
        }
    }

    /// Three measured inputs per party plus the auxiliary dichotomic X̃ (op 3).
    pub fn result1() -> Self {
        let l = names(&["0", "1", "2", "X~"]);
        Self {
            name: "result1".into(),
            op_names: [l.clone(), l.clone(), l],
        }
    }

    /// Two parties with `na` and `nb` inputs; Charlie has no generators.
    pub fn bipartite(na: usize, nb: usize) -> Self {
        let l = |n: usize| (1..=n).map(|i| i.to_string()).collect::<Vec<_>>();
        Self {
            name: format!("bipartite-{na}{nb}"),
            op_names: [l(na), l(nb), Vec::new()],
        }
    }

    pub fn num_ops(&self, party: usize) -> usize {
        self.op_names[party].len()
    }

    pub fn gens(&self, party: usize) -> impl Iterator<Item = Gen> + '_ {
        (0..self.num_ops(party)).map(move |o| Gen::new(party as u8, o as u8))
    }

    pub fn gen_name(&self, g: Gen) -> String {
        format!(
            "{}_{}",
            self.op_names[g.party as usize][g.op as usize],
            party_name(g.party as usize)
        )
    }

    /// Human-readable word such as "Z_A X_A Z_A X_B".
    pub fn format(&self, m: &Monomial) -> String {
        if m.is_identity() {
            return "1".into();
        }
        m.word()
            .iter()
            .map(|&g| self.gen_name(g))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        m.word()
            .iter()
            .all(|g| (g.op as usize) < self.num_ops(g.party as usize))
    }
}

/// Concrete 2×2 matrices for every generator of a scenario.
#[derive(Clone, Debug)]
pub struct OperatorTable {
    pub mats: [Vec<Mat2>; PARTIES],
}

impl OperatorTable {
    pub fn from_realization(real: &Realization) -> Self {
        Self {
            mats: std::array::from_fn(|p| {
                real.observables[p].iter().map(|o| *o.matrix()).collect()
            }),
        }
    }

    pub fn with_extra(mut self, extra: [Mat2; PARTIES]) -> Self {
        for (p, m) in extra.into_iter().enumerate() {
            self.mats[p].push(m);
        }
        self
    }

    fn gen(&self, g: Gen) -> Result<&Mat2> {
        self.mats[g.party as usize].get(g.op as usize).ok_or_else(|| {
            Error::InvalidArgument(format!("no operator assigned to generator {g}"))
        })
    }

    pub fn party_product(&self, m: &Monomial, party: usize) -> Result<Mat2> {
        let mut out = qcore::identity2();
        for g in m.party_word(party) {
            out *= self.gen(g)?;
        }
        Ok(out)
    }

    /// ⟨ψ|w|ψ⟩ as a complex number.
    pub fn moment(&self, m: &Monomial, state: &StateVector) -> Result<C64> {
        let f: Vec<Mat2> = (0..PARTIES)
            .map(|p| self.party_product(m, p))
            .collect::<Result<_>>()?;
        Ok(state.expectation(&qcore::lift3(&f[0], &f[1], &f[2])))
    }

    /// Real part of ⟨ψ|p|ψ⟩; keyed polynomials are evaluated exactly this way.
    pub fn evaluate(&self, p: &Poly, state: &StateVector) -> Result<f64> {
        let mut s = 0.0;
        for (m, c) in p.terms() {
            s += c * self.moment(m, state)?.re;
        }
        Ok(s)
    }
}
