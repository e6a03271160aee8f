//! Unfolding and the canonical conjunctive normal form.
//!
//! A [`NormalConcept`] is either `Unsat` or a form split into names,
//! negated names, number restrictions and one universal restriction per
//! role. Two concepts equivalent modulo conjunct order (and the TBox) map to
//! the same value, so `==` on normal forms is equivalence.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concept::{length as concept_length, Concept, TBox};

/// Default cap on the number of syntax-tree nodes produced by unfolding.
pub const DEFAULT_UNFOLD_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unfolding would produce more than {cap} concept nodes")]
pub struct UnfoldingBudgetExceeded {
    pub cap: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Form {
    pub pos: BTreeSet<String>,
    pub neg: BTreeSet<String>,
    pub at_least: BTreeMap<String, u32>,
    pub at_most: BTreeMap<String, u32>,
    pub all: BTreeMap<String, NormalConcept>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NormalConcept {
    Unsat,
    Form(Form),
}

impl NormalConcept {
    pub fn top() -> Self {
        NormalConcept::Form(Form::default())
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, NormalConcept::Unsat)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, NormalConcept::Form(f) if *f == Form::default())
    }

    pub fn form(&self) -> Option<&Form> {
        match self {
            NormalConcept::Form(f) => Some(f),
            NormalConcept::Unsat => None,
        }
    }

    /// Length of the embedded concept.
    pub fn length(&self) -> usize {
        concept_length(&embed(self))
    }

    /// Checks every structural invariant, recursively.
    pub fn is_well_formed(&self) -> bool {
        let NormalConcept::Form(f) = self else {
            return true;
        };
        f.pos.is_disjoint(&f.neg)
            && f.at_least.values().all(|&n| n > 0)
            && f.at_least.iter().all(|(r, &n)| f.at_most.get(r).map_or(true, |&m| n <= m))
            && f.at_most.iter().all(|(r, &m)| (m == 0) == f.all.get(r).is_some_and(NormalConcept::is_unsat))
            && f.all.iter().all(|(r, c)| {
                !c.is_top() && (!c.is_unsat() || f.at_most.get(r) == Some(&0)) && c.is_well_formed()
            })
    }
}

/// Replaces every defined name by its definition, conjoins inclusion bodies
/// to their names and adds the negations implied by disjoint groups.
pub fn unfold(c: &Concept, t: &TBox) -> Result<Concept, UnfoldingBudgetExceeded> {
    unfold_with_budget(c, t, DEFAULT_UNFOLD_BUDGET)
}

pub fn unfold_with_budget(c: &Concept, t: &TBox, cap: usize) -> Result<Concept, UnfoldingBudgetExceeded> {
    if t.is_empty() {
        return Ok(c.clone());
    }
    let mut u = Unfolder {
        t,
        sizes: HashMap::new(),
        cache: HashMap::new(),
    };
    if u.size(c) > cap {
        return Err(UnfoldingBudgetExceeded { cap });
    }
    Ok(u.build(c))
}

struct Unfolder<'t> {
    t: &'t TBox,
    sizes: HashMap<String, usize>,
    cache: HashMap<String, Concept>,
}

impl Unfolder<'_> {
    /// Node count of the unfolded concept, saturating.
    fn size(&mut self, c: &Concept) -> usize {
        match c {
            Concept::Name(n) => self.name_size(n),
            Concept::All(_, f) => self.size(f).saturating_add(1),
            Concept::And(cs) => cs
                .iter()
                .fold(1usize, |acc, c| acc.saturating_add(self.size(c))),
            _ => 1,
        }
    }

    fn name_size(&mut self, n: &str) -> usize {
        if let Some(&s) = self.sizes.get(n) {
            return s;
        }
        let neg = self.t.disjoint_with(n).map_or(0, BTreeSet::len);
        let s = if let Some(body) = self.t.definition(n) {
            let body = body.clone();
            self.size(&body)
        } else if let Some(body) = self.t.inclusion(n) {
            let body = body.clone();
            // And node + the name + body + negated names
            self.size(&body).saturating_add(2 + neg)
        } else if neg > 0 {
            2 + neg
        } else {
            1
        };
        self.sizes.insert(n.to_string(), s);
        s
    }

    fn build(&mut self, c: &Concept) -> Concept {
        match c {
            Concept::Name(n) => self.expand(n),
            Concept::All(r, f) => Concept::All(r.clone(), Box::new(self.build(f))),
            Concept::And(cs) => Concept::and(cs.iter().map(|c| self.build(c))),
            other => other.clone(),
        }
    }

    fn expand(&mut self, n: &str) -> Concept {
        if let Some(c) = self.cache.get(n) {
            return c.clone();
        }
        let out = if let Some(body) = self.t.definition(n) {
            let body = body.clone();
            self.build(&body)
        } else {
            let mut parts = vec![Concept::Name(n.to_string())];
            if let Some(body) = self.t.inclusion(n) {
                let body = body.clone();
                parts.push(self.build(&body));
            }
            if let Some(others) = self.t.disjoint_with(n) {
                parts.extend(others.iter().map(|o| Concept::NegName(o.clone())));
            }
            Concept::and(parts)
        };
        self.cache.insert(n.to_string(), out.clone());
        out
    }
}

/// Unfolds `c` with respect to `t` and normalizes the result.
pub fn cnf(c: &Concept, t: &TBox) -> Result<NormalConcept, UnfoldingBudgetExceeded> {
    Ok(normalize(&unfold(c, t)?))
}

/// Normal form of a concept, ignoring any terminology.
pub fn normalize(c: &Concept) -> NormalConcept {
    normalize_all(std::slice::from_ref(c))
}

/// Normal form of the conjunction of `cs`.
pub fn normalize_all(cs: &[Concept]) -> NormalConcept {
    let mut acc = Accumulator::default();
    for c in cs {
        acc.add(c);
    }
    acc.finish()
}

#[derive(Default)]
struct Accumulator<'a> {
    bottom: bool,
    pos: BTreeSet<String>,
    neg: BTreeSet<String>,
    at_least: BTreeMap<String, u32>,
    at_most: BTreeMap<String, u32>,
    fillers: BTreeMap<String, Vec<&'a Concept>>,
}

impl<'a> Accumulator<'a> {
    fn add(&mut self, c: &'a Concept) {
        match c {
            Concept::Top => {}
            Concept::Bottom => self.bottom = true,
            Concept::Name(n) => {
                self.pos.insert(n.clone());
            }
            Concept::NegName(n) => {
                self.neg.insert(n.clone());
            }
            Concept::AtLeast(n, r) => {
                let e = self.at_least.entry(r.clone()).or_insert(0);
                *e = (*e).max(*n);
            }
            Concept::AtMost(n, r) => {
                let e = self.at_most.entry(r.clone()).or_insert(*n);
                *e = (*e).min(*n);
            }
            Concept::All(r, f) => self.fillers.entry(r.clone()).or_default().push(f),
            Concept::And(cs) => cs.iter().for_each(|c| self.add(c)),
        }
    }

    fn finish(self) -> NormalConcept {
        if self.bottom || !self.pos.is_disjoint(&self.neg) {
            return NormalConcept::Unsat;
        }
        let mut at_least = self.at_least;
        let mut at_most = self.at_most;
        let mut all = BTreeMap::new();
        for (r, fs) in self.fillers {
            let mut sub = Accumulator::default();
            for f in fs {
                sub.add(f);
            }
            let nf = sub.finish();
            if nf.is_unsat() {
                at_most.insert(r.clone(), 0);
            }
            if !nf.is_top() {
                all.insert(r, nf);
            }
        }
        for (r, &m) in &at_most {
            if m == 0 {
                all.insert(r.clone(), NormalConcept::Unsat);
            }
        }
        at_least.retain(|_, n| *n > 0);
        for (r, &n) in &at_least {
            if at_most.get(r).is_some_and(|&m| n > m) {
                return NormalConcept::Unsat;
            }
        }
        NormalConcept::Form(Form {
            pos: self.pos,
            neg: self.neg,
            at_least,
            at_most,
            all,
        })
    }
}

/// Top-level conjuncts of the embedding, in canonical order: names, negated
/// names, number restrictions by role (at-least before at-most), then
/// universal restrictions by role. `∀R.⊥` is represented by its coupled
/// `(≤ 0 R)` alone.
pub fn embed_conjuncts(n: &NormalConcept) -> Vec<Concept> {
    let NormalConcept::Form(f) = n else {
        return vec![Concept::Bottom];
    };
    let mut out: Vec<Concept> = f.pos.iter().map(|a| Concept::Name(a.clone())).collect();
    out.extend(f.neg.iter().map(|a| Concept::NegName(a.clone())));
    let roles: BTreeSet<&String> = f.at_least.keys().chain(f.at_most.keys()).collect();
    for r in roles {
        if let Some(&k) = f.at_least.get(r) {
            out.push(Concept::AtLeast(k, r.clone()));
        }
        if let Some(&k) = f.at_most.get(r) {
            out.push(Concept::AtMost(k, r.clone()));
        }
    }
    for (r, filler) in &f.all {
        if !filler.is_unsat() {
            out.push(Concept::All(r.clone(), Box::new(embed(filler))));
        }
    }
    out
}

/// Converts a normal form back into an ordinary concept.
pub fn embed(n: &NormalConcept) -> Concept {
    Concept::and(embed_conjuncts(n))
}
