//! Concept abduction: what must be added to `C` so that it entails `D`.
//!
//! [`find_irred`] works on normal forms and prunes redundant conjuncts with
//! an empty terminology, which is the convention behind
//! [`penalty_potential`]. [`abduce_with_tbox`] runs the same construction
//! but prunes with the terminology, so implied conjuncts are dropped too.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::concept::{length, Concept, TBox};
use crate::error::{Error, Result};
use crate::normal::{cnf, embed, embed_conjuncts, normalize_all, NormalConcept};
use crate::reasoner::{conjunction_satisfiable, subsumes_normal};

/// Default cap on the size of enumerated candidate pools.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1 << 16;

/// How redundancy is judged during pruning.
#[derive(Debug, Clone, Copy)]
pub enum Pruning<'t> {
    /// With an empty terminology.
    Empty,
    /// With the given terminology.
    With(&'t TBox),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    /// Role path from the root to the conjunct.
    pub path: Vec<String>,
    /// Which step of the construction produced (or removed) the conjunct.
    pub step: u8,
    pub conjunct: Concept,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub added: Vec<TraceEntry>,
    pub deleted: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbductionSolution {
    pub hypothesis: Concept,
    pub penalty: usize,
    pub trace: Trace,
}

/// A hypothesis under construction: a list of conjuncts, where universal
/// restrictions keep their filler as a nested list so that pruning can reach
/// inside them.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Atom(Concept),
    All(String, Vec<Item>),
}

fn items_to_concept(items: &[Item]) -> Concept {
    Concept::and(items.iter().filter_map(|it| match it {
        Item::Atom(c) => Some(c.clone()),
        Item::All(_, inner) if inner.is_empty() => None,
        Item::All(r, inner) => Some(Concept::All(r.clone(), Box::new(items_to_concept(inner)))),
    }))
}

fn items_of(c: &Concept) -> Vec<Item> {
    c.conjuncts()
        .into_iter()
        .filter_map(|c| match c {
            Concept::All(r, f) => {
                let inner = items_of(&f);
                if inner.is_empty() && *f == Concept::Top {
                    None
                } else if inner.is_empty() {
                    // ∀R.⊥ has no conjuncts but is not trivial.
                    Some(Item::Atom(Concept::All(r, f)))
                } else {
                    Some(Item::All(r, inner))
                }
            }
            Concept::Bottom => Some(Item::Atom(Concept::Bottom)),
            other => Some(Item::Atom(other)),
        })
        .collect()
}

enum Irred {
    Bottom,
    Items(Vec<Item>),
}

struct Ctx<'a> {
    pruning: Pruning<'a>,
    trace: Trace,
}

impl Ctx<'_> {
    /// Whether `c ⊓ h` is satisfiable and entails `d`.
    fn is_solution(&self, c: &NormalConcept, d: &NormalConcept, h: &Concept) -> Result<bool> {
        let joined = Concept::and([embed(c), h.clone()]);
        let n = match self.pruning {
            Pruning::Empty => normalize_all(std::slice::from_ref(&joined)),
            Pruning::With(t) => cnf(&joined, t)?,
        };
        Ok(!n.is_unsat() && subsumes_normal(d, &n))
    }

    fn run(&mut self, c: &NormalConcept, d: &NormalConcept, path: &mut Vec<String>) -> Result<Irred> {
        if !conjunction_satisfiable(c, d) {
            return Ok(Irred::Bottom);
        }
        let (NormalConcept::Form(cf), NormalConcept::Form(df)) = (c, d) else {
            unreachable!("both satisfiable");
        };
        let mut h = Vec::new();
        let mut add = |ctx: &mut Self, step: u8, item: Item, path: &[String]| {
            ctx.trace.added.push(TraceEntry {
                path: path.to_vec(),
                step,
                conjunct: items_to_concept(std::slice::from_ref(&item)),
            });
            h.push(item);
        };
        for a in df.pos.difference(&cf.pos) {
            add(self, 1, Item::Atom(Concept::Name(a.clone())), path);
        }
        for a in df.neg.difference(&cf.neg) {
            add(self, 1, Item::Atom(Concept::NegName(a.clone())), path);
        }
        for (r, &n) in &df.at_least {
            if !cf.at_least.get(r).is_some_and(|&m| m >= n) {
                add(self, 2, Item::Atom(Concept::AtLeast(n, r.clone())), path);
            }
        }
        for (r, &n) in &df.at_most {
            if !cf.at_most.get(r).is_some_and(|&m| m <= n) {
                add(self, 3, Item::Atom(Concept::AtMost(n, r.clone())), path);
            }
        }
        for (r, e) in &df.all {
            if e.is_unsat() {
                // Already covered by the coupled (≤ 0 R).
                continue;
            }
            match cf.all.get(r) {
                Some(f) if f.is_unsat() => {}
                Some(f) => {
                    path.push(r.clone());
                    let sub = self.run(f, e, path)?;
                    path.pop();
                    match sub {
                        Irred::Bottom => add(self, 4, Item::Atom(Concept::AtMost(0, r.clone())), path),
                        Irred::Items(inner) if inner.is_empty() => {}
                        Irred::Items(inner) => add(self, 4, Item::All(r.clone(), inner), path),
                    }
                }
                None => add(self, 4, Item::All(r.clone(), items_of(&embed(e))), path),
            }
        }
        self.prune(c, d, &mut h, &mut Vec::new(), path)?;
        Ok(Irred::Items(h))
    }

    /// Greedy single pass: nested fillers first, then the conjuncts at this
    /// level, each in canonical order. Every deletion is kept only if the
    /// whole hypothesis is still a solution.
    fn prune(
        &mut self,
        c: &NormalConcept,
        d: &NormalConcept,
        root: &mut Vec<Item>,
        at: &mut Vec<usize>,
        path: &mut Vec<String>,
    ) -> Result<()> {
        let len = node(root, at).len();
        for i in 0..len {
            if let Item::All(r, _) = &node(root, at)[i] {
                path.push(r.clone());
                at.push(i);
                self.prune(c, d, root, at, path)?;
                at.pop();
                path.pop();
            }
        }
        node_mut(root, at).retain(|it| !matches!(it, Item::All(_, inner) if inner.is_empty()));
        let mut i = 0;
        while i < node(root, at).len() {
            let removed = node_mut(root, at).remove(i);
            if self.is_solution(c, d, &items_to_concept(root))? {
                self.trace.deleted.push(TraceEntry {
                    path: path.clone(),
                    step: 5,
                    conjunct: items_to_concept(std::slice::from_ref(&removed)),
                });
            } else {
                node_mut(root, at).insert(i, removed);
                i += 1;
            }
        }
        Ok(())
    }
}

fn node<'a>(root: &'a [Item], at: &[usize]) -> &'a [Item] {
    let mut cur = root;
    for &i in at {
        match &cur[i] {
            Item::All(_, inner) => cur = inner,
            Item::Atom(_) => unreachable!("paths only descend into universal restrictions"),
        }
    }
    cur
}

fn node_mut<'a>(root: &'a mut Vec<Item>, at: &[usize]) -> &'a mut Vec<Item> {
    let mut cur = root;
    for &i in at {
        match &mut cur[i] {
            Item::All(_, inner) => cur = inner,
            Item::Atom(_) => unreachable!("paths only descend into universal restrictions"),
        }
    }
    cur
}

fn run(c: &NormalConcept, d: &NormalConcept, pruning: Pruning<'_>) -> Result<(Option<Concept>, Trace)> {
    let mut ctx = Ctx {
        pruning,
        trace: Trace::default(),
    };
    let out = ctx.run(c, d, &mut Vec::new())?;
    Ok(match out {
        Irred::Bottom => (None, ctx.trace),
        Irred::Items(items) => (Some(items_to_concept(&items)), ctx.trace),
    })
}

/// An irreducible hypothesis for normal forms `c` and `d`, pruned with an
/// empty terminology. Returns `⊥` when `c ⊓ d` is unsatisfiable and `⊤`
/// exactly when `c ⊑ d`.
pub fn find_irred(c: &NormalConcept, d: &NormalConcept) -> Concept {
    match run(c, d, Pruning::Empty) {
        Ok((Some(h), _)) => h,
        Ok((None, _)) => Concept::Bottom,
        Err(e) => unreachable!("pruning without a terminology cannot fail: {e}"),
    }
}

/// Abduction on raw concepts with the chosen pruning convention.
pub fn abduce(c: &Concept, d: &Concept, t: &TBox, pruning: Pruning<'_>) -> Result<AbductionSolution> {
    let cn = cnf(c, t)?;
    let dn = cnf(d, t)?;
    match run(&cn, &dn, pruning)? {
        (Some(h), trace) => Ok(AbductionSolution {
            penalty: length(&h),
            hypothesis: h,
            trace,
        }),
        (None, _) => Err(Error::PartialMatch),
    }
}

/// Abduction with redundancy judged against `t`.
pub fn abduce_with_tbox(c: &Concept, d: &Concept, t: &TBox) -> Result<AbductionSolution> {
    abduce(c, d, t, Pruning::With(t))
}

/// Penalty of a potential match: the length of the hypothesis computed on
/// the normal forms with an empty terminology.
pub fn penalty_potential(c: &Concept, d: &Concept, t: &TBox) -> Result<usize> {
    Ok(abduce(c, d, t, Pruning::Empty)?.penalty)
}

/// `c ⊓ h` is satisfiable in `t` and entails `d`.
pub fn is_cap_solution(h: &Concept, c: &Concept, d: &Concept, t: &TBox) -> Result<bool> {
    let ch = cnf(&Concept::and([c.clone(), h.clone()]), t)?;
    Ok(!ch.is_unsat() && subsumes_normal(&cnf(d, t)?, &ch))
}

/// Every concept obtained from `h` by deleting exactly one conjunct, at any
/// level of nesting.
pub fn single_deletions(h: &Concept) -> Vec<Concept> {
    let items = items_of(h);
    let mut out = Vec::new();
    deletions_into(&items, &mut Vec::new(), &items, &mut out);
    out
}

fn deletions_into(root: &[Item], at: &mut Vec<usize>, here: &[Item], out: &mut Vec<Concept>) {
    for i in 0..here.len() {
        let mut copy = root.to_vec();
        node_mut(&mut copy, at).remove(i);
        out.push(items_to_concept(&copy));
        if let Item::All(_, inner) = &here[i] {
            at.push(i);
            deletions_into(root, at, inner, out);
            at.pop();
        }
    }
}

/// `h` is a solution and no sub-conjunction of it is.
///
/// Deleting conjuncts only generalizes the hypothesis, so satisfiability is
/// preserved and entailment can only be lost. A proper sub-conjunction that
/// is a solution therefore implies a single-conjunct deletion that is one,
/// and checking single deletions decides irreducibility exactly.
pub fn is_irreducible(h: &Concept, c: &Concept, d: &Concept, t: &TBox) -> Result<bool> {
    if !is_cap_solution(h, c, d, t)? {
        return Ok(false);
    }
    for smaller in single_deletions(h) {
        if is_cap_solution(&smaller, c, d, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Conjunctions of every subset of the atoms: concept names of `t`, `c`
/// and `d`, plus the top-level conjuncts of the normal form of `d`.
pub fn candidate_pool(c: &Concept, d: &Concept, t: &TBox, budget: usize) -> Result<Vec<Concept>> {
    let mut atoms: BTreeSet<Concept> = t
        .signature()
        .into_iter()
        .chain(c.concept_names())
        .chain(d.concept_names())
        .map(Concept::Name)
        .collect();
    atoms.extend(embed_conjuncts(&cnf(d, t)?).into_iter().filter(|c| *c != Concept::Bottom));
    let atoms: Vec<Concept> = atoms.into_iter().collect();
    if atoms.len() >= usize::BITS as usize || (1usize << atoms.len()) > budget {
        return Err(Error::EnumerationBudgetExceeded(budget));
    }
    Ok((0..1usize << atoms.len())
        .map(|mask| {
            Concept::and(
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, a)| a.clone()),
            )
        })
        .collect())
}

/// `h` is a solution and no solution in `pool` is strictly more general.
pub fn is_subsumption_maximal_witness(
    h: &Concept,
    c: &Concept,
    d: &Concept,
    t: &TBox,
    pool: &[Concept],
) -> Result<bool> {
    if !is_cap_solution(h, c, d, t)? {
        return Ok(false);
    }
    let hn = cnf(h, t)?;
    for p in pool {
        if is_cap_solution(p, c, d, t)? {
            let pn = cnf(p, t)?;
            if subsumes_normal(&pn, &hn) && !subsumes_normal(&hn, &pn) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `h` is a solution and no solution in `pool` is strictly shorter.
pub fn is_length_minimal_witness(
    h: &Concept,
    c: &Concept,
    d: &Concept,
    t: &TBox,
    pool: &[Concept],
) -> Result<bool> {
    if !is_cap_solution(h, c, d, t)? {
        return Ok(false);
    }
    let n = length(h);
    for p in pool {
        if length(p) < n && is_cap_solution(p, c, d, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}
