//! Words in party-tagged dichotomic generators.
//!
//! Generators are Hermitian involutions; generators of different parties commute,
//! generators of the same party do not. A canonical word lists Alice's letters, then
//! Bob's, then Charlie's, keeping each party's internal order, with no two equal
//! letters adjacent.

use std::collections::BTreeMap;
use std::fmt;

use crate::qcore::{party_name, PARTIES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen {
    pub party: u8,
    pub op: u8,
}

impl Gen {
    pub const fn new(party: u8, op: u8) -> Self {
        Self { party, op }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", party_name(self.party as usize), self.op)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<Gen>);

/// Stable party sort followed by cancellation of adjacent equal letters.
pub fn canonicalize(word: &[Gen]) -> Monomial {
    let mut sorted = word.to_vec();
    sorted.sort_by_key(|g| g.party);
    let mut out: Vec<Gen> = Vec::with_capacity(sorted.len());
    for g in sorted {
        if out.last() == Some(&g) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    Monomial(out)
}

impl Monomial {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn from_gens(word: &[Gen]) -> Self {
        canonicalize(word)
    }

    pub fn single(party: u8, op: u8) -> Self {
        Self(vec![Gen::new(party, op)])
    }

    pub fn word(&self) -> &[Gen] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        canonicalize(&self.0) == *self
    }

    /// Reverse the word; every generator is self-adjoint.
    pub fn adjoint(&self) -> Self {
        let mut w = self.0.clone();
        w.reverse();
        canonicalize(&w)
    }

    /// Representative shared by a word and its adjoint: the smaller of the two.
    pub fn key(&self) -> Self {
        let a = self.adjoint();
        if a < *self {
            a
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, rhs: &Monomial) -> Self {
        let mut w = self.0.clone();
        w.extend_from_slice(&rhs.0);
        canonicalize(&w)
    }

    /// adjoint(self)·rhs, the Γ entry between basis elements self and rhs.
    pub fn adj_mul(&self, rhs: &Monomial) -> Self {
        let mut w: Vec<Gen> = self.0.iter().rev().copied().collect();
        w.extend_from_slice(&rhs.0);
        canonicalize(&w)
    }

    pub fn party_word(&self, party: usize) -> Vec<Gen> {
        self.0
            .iter()
            .filter(|g| g.party as usize == party)
            .copied()
            .collect()
    }

    pub fn max_party_len(&self) -> usize {
        (0..PARTIES).map(|p| self.party_word(p).len()).max().unwrap_or(0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Real linear combination of canonical words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(BTreeMap<Monomial, f64>);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::term(Monomial::identity(), c)
    }

    pub fn term(m: Monomial, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn gen(party: u8, op: u8) -> Self {
        Self::term(Monomial::single(party, op), 1.0)
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert!(m.is_canonical());
        *self.0.entry(m).or_insert(0.0) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.0.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.0.get(m).copied().unwrap_or(0.0)
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * s)).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }

    pub fn product(factors: &[Poly]) -> Poly {
        factors
            .iter()
            .fold(Poly::constant(1.0), |acc, f| acc.mul(f))
    }

    pub fn adjoint(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            out.add_term(m.adjoint(), c);
        }
        out
    }

    /// (p + p†)/2.
    pub fn hermitian_part(&self) -> Poly {
        self.add(&self.adjoint()).scale(0.5).pruned(0.0)
    }

    /// Drops coefficients with |c| ≤ tol.
    pub fn pruned(&self, tol: f64) -> Poly {
        Poly(
            self.0
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        )
    }

    /// Merges each word with its adjoint under the shared key; this is the real part
    /// of the expectation value.
    pub fn keyed(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            out.add_term(m.key(), c);
        }
        out.pruned(1e-14)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.add(&self.adjoint().scale(-1.0));
        let ok = d.terms().all(|(_, c)| c.abs() <= tol);
        ok
    }
}
