//! Moment bases: q-local level 1 and its greedy augmentation.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::qcore::PARTIES;

use super::monomial::{canonicalize, Gen, Monomial};
use super::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Products with at most one generator per party.
    Q1,
    /// Q1 plus the greedy augmentation that covers every target word.
    Q1Aug,
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q1" => Ok(Level::Q1),
            "q1+aug" | "q1aug" => Ok(Level::Q1Aug),
            _ => Err(Error::InvalidArgument(format!(
                "unknown level {s:?} (expected q1 or q1+aug)"
            ))),
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::Q1 => "q1",
            Level::Q1Aug => "q1+aug",
        })
    }
}

/// {1} ∪ every product of at most one generator per party, Alice varying slowest.
pub fn q1_basis(scenario: &Scenario) -> Vec<Monomial> {
    let opts: Vec<Vec<Option<Gen>>> = (0..PARTIES)
        .map(|p| std::iter::once(None).chain(scenario.gens(p).map(Some)).collect())
        .collect();
    let mut out = Vec::new();
    for a in &opts[0] {
        for b in &opts[1] {
            for c in &opts[2] {
                let w: Vec<Gen> = [a, b, c].into_iter().flatten().copied().collect();
                out.push(canonicalize(&w));
            }
        }
    }
    out
}

/// {1} ∪ single generators.
pub fn level1_basis(scenario: &Scenario) -> Vec<Monomial> {
    std::iter::once(Monomial::identity())
        .chain((0..PARTIES).flat_map(|p| scenario.gens(p).map(|g| Monomial::from_gens(&[g]))))
        .collect()
}

/// Tracks which keyed words are reachable as adjoint(u)·v over a growing basis.
struct Coverage {
    basis: Vec<Monomial>,
    members: HashSet<Monomial>,
    products: HashSet<Monomial>,
}

impl Coverage {
    fn new(basis: Vec<Monomial>) -> Self {
        let mut products = HashSet::new();
        for u in &basis {
            for v in &basis {
                products.insert(u.adj_mul(v).key());
            }
        }
        let members = basis.iter().cloned().collect();
        Self {
            basis,
            members,
            products,
        }
    }

    fn covers(&self, m: &Monomial) -> bool {
        self.products.contains(&m.key())
    }

    fn insert(&mut self, x: Monomial) {
        if !self.members.insert(x.clone()) {
            return;
        }
        self.basis.push(x.clone());
        for y in &self.basis {
            self.products.insert(y.adj_mul(&x).key());
            self.products.insert(x.adj_mul(y).key());
        }
    }
}

/// Builds the basis for `level` and checks that every target word appears in Γ.
///
/// Augmentation visits uncovered targets by (length, word). For each one it tries
/// every per-party cut of the word into prefix·suffix, takes u = adjoint(prefix),
/// v = suffix, and keeps the split that adds the fewest new elements (ties: shorter
/// longest element, then first found). The result is deterministic.
pub fn build_basis(
    scenario: &Scenario,
    level: Level,
    targets: &[Monomial],
) -> Result<Vec<Monomial>> {
    match level {
        Level::Q1 => {
            let basis = q1_basis(scenario);
            let cov = Coverage::new(basis);
            check_covered(scenario, &cov, targets)?;
            Ok(cov.basis)
        }
        Level::Q1Aug => augment(scenario, q1_basis(scenario), targets),
    }
}

fn check_covered(scenario: &Scenario, cov: &Coverage, targets: &[Monomial]) -> Result<()> {
    match targets.iter().find(|m| !cov.covers(m)) {
        Some(m) => Err(Error::Coverage(scenario.format(m))),
        None => Ok(()),
    }
}

/// Greedy augmentation of `start` until every target is covered (see [`build_basis`]).
pub fn augment(scenario: &Scenario, start: Vec<Monomial>, targets: &[Monomial]) -> Result<Vec<Monomial>> {
    let mut cov = Coverage::new(start);
    {
        let mut sorted: Vec<Monomial> = targets.iter().map(|t| t.key()).collect();
        sorted.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        sorted.dedup();
        for m in sorted {
            if cov.covers(&m) {
                continue;
            }
            let pw: Vec<Vec<Gen>> = (0..PARTIES).map(|p| m.party_word(p)).collect();
            let mut best: Option<((usize, usize), Vec<Monomial>)> = None;
            for ca in 0..=pw[0].len() {
                for cb in 0..=pw[1].len() {
                    for cc in 0..=pw[2].len() {
                        let cuts = [ca, cb, cc];
                        let mut pre = Vec::new();
                        let mut suf = Vec::new();
                        for p in 0..PARTIES {
                            pre.extend_from_slice(&pw[p][..cuts[p]]);
                            suf.extend_from_slice(&pw[p][cuts[p]..]);
                        }
                        let u = canonicalize(&pre).adjoint();
                        let v = canonicalize(&suf);
                        let mut new = Vec::new();
                        for x in [u.clone(), v.clone()] {
                            if !cov.members.contains(&x) && !new.contains(&x) {
                                new.push(x);
                            }
                        }
                        let score = (new.len(), u.len().max(v.len()));
                        if best.as_ref().is_none_or(|(s, _)| score < *s) {
                            best = Some((score, new));
                        }
                    }
                }
            }
            for x in best.expect("at least one cut").1 {
                cov.insert(x);
            }
        }
    }
    check_covered(scenario, &cov, targets)?;
    Ok(cov.basis)
}
