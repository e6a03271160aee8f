//! Bounded tree-model search, used to cross-check the normalizer and the
//! structural reasoner. It never calls into `normal` or `reasoner`.
//!
//! The search builds an explicit finite interpretation and every model it
//! returns is re-checked against the set-theoretic semantics by
//! [`Model::satisfies`].

use std::collections::{BTreeMap, BTreeSet};

use crate::concept::{length, quantification_nesting, Concept};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_length: usize,
    pub max_nesting: usize,
    pub max_number: u32,
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_length: 24,
            max_nesting: 3,
            max_number: 4,
            max_steps: 200_000,
        }
    }
}

/// A finite interpretation. Element 0 is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub labels: Vec<BTreeSet<String>>,
    pub edges: Vec<BTreeMap<String, Vec<usize>>>,
}

impl Model {
    fn add(&mut self) -> usize {
        self.labels.push(BTreeSet::new());
        self.edges.push(BTreeMap::new());
        self.labels.len() - 1
    }

    fn successors(&self, x: usize, r: &str) -> &[usize] {
        self.edges[x].get(r).map_or(&[], Vec::as_slice)
    }

    /// Whether element `x` belongs to the extension of `c`.
    pub fn satisfies(&self, x: usize, c: &Concept) -> bool {
        match c {
            Concept::Top => true,
            Concept::Bottom => false,
            Concept::Name(a) => self.labels[x].contains(a),
            Concept::NegName(a) => !self.labels[x].contains(a),
            Concept::AtLeast(n, r) => self.successors(x, r).len() >= *n as usize,
            Concept::AtMost(n, r) => self.successors(x, r).len() <= *n as usize,
            Concept::All(r, f) => self.successors(x, r).iter().all(|&y| self.satisfies(y, f)),
            Concept::And(cs) => cs.iter().all(|c| self.satisfies(x, c)),
        }
    }
}

fn check_bounds(c: &Concept, cfg: &OracleConfig) -> Result<()> {
    let len = length(c);
    let qn = quantification_nesting(c);
    let num = c.max_bound();
    if len > cfg.max_length || qn > cfg.max_nesting || num > cfg.max_number {
        return Err(Error::OracleBudgetExceeded(format!(
            "length {len}, nesting {qn}, largest bound {num}"
        )));
    }
    Ok(())
}

struct Search<'c> {
    cfg: &'c OracleConfig,
    steps: usize,
}

/// Obligations for one element: satisfy every concept in `pos`, and fail
/// `neg` if present.
struct Goal<'a> {
    pos: Vec<&'a Concept>,
    neg: Option<&'a Concept>,
}

fn flatten<'a>(cs: &[&'a Concept], out: &mut Vec<&'a Concept>) {
    for c in cs {
        match c {
            Concept::And(inner) => {
                let refs: Vec<&Concept> = inner.iter().collect();
                flatten(&refs, out);
            }
            Concept::Top => {}
            other => out.push(other),
        }
    }
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return Err(Error::OracleBudgetExceeded(format!(
                "more than {} search steps",
                self.cfg.max_steps
            )));
        }
        Ok(())
    }

    /// Tries to build an element meeting `goal` inside `model`.
    fn build(&mut self, goal: &Goal<'_>, model: &mut Model) -> Result<Option<usize>> {
        self.tick()?;
        let mut pos = Vec::new();
        flatten(&goal.pos, &mut pos);
        match goal.neg {
            None => self.build_flat(&pos, None, model),
            Some(Concept::And(parts)) => {
                // Failing a conjunction means failing one conjunct.
                for part in parts {
                    let snapshot = model.clone();
                    let sub = Goal {
                        pos: goal.pos.clone(),
                        neg: Some(part),
                    };
                    if let Some(x) = self.build(&sub, model)? {
                        return Ok(Some(x));
                    }
                    *model = snapshot;
                }
                Ok(None)
            }
            Some(Concept::Top) => Ok(None),
            Some(n) => self.build_flat(&pos, Some(n), model),
        }
    }

    fn build_flat(
        &mut self,
        pos: &[&Concept],
        neg: Option<&Concept>,
        model: &mut Model,
    ) -> Result<Option<usize>> {
        let mut yes = BTreeSet::new();
        let mut no = BTreeSet::new();
        let mut lo: BTreeMap<&str, u32> = BTreeMap::new();
        let mut hi: BTreeMap<&str, u32> = BTreeMap::new();
        let mut fillers: BTreeMap<&str, Vec<&Concept>> = BTreeMap::new();
        for c in pos {
            match c {
                Concept::Bottom => return Ok(None),
                Concept::Name(a) => {
                    yes.insert(a.as_str());
                }
                Concept::NegName(a) => {
                    no.insert(a.as_str());
                }
                Concept::AtLeast(n, r) => {
                    let e = lo.entry(r).or_insert(0);
                    *e = (*e).max(*n);
                }
                Concept::AtMost(n, r) => {
                    let e = hi.entry(r).or_insert(*n);
                    *e = (*e).min(*n);
                }
                Concept::All(r, f) => fillers.entry(r).or_default().push(f),
                Concept::Top | Concept::And(_) => unreachable!("flattened"),
            }
        }
        let mut witness: Option<(&str, &Concept)> = None;
        match neg {
            None => {}
            Some(Concept::Bottom) => {}
            Some(Concept::Name(a)) => {
                no.insert(a);
            }
            Some(Concept::NegName(a)) => {
                yes.insert(a);
            }
            Some(Concept::AtLeast(n, r)) => {
                if *n == 0 {
                    return Ok(None);
                }
                let e = hi.entry(r).or_insert(n - 1);
                *e = (*e).min(n - 1);
            }
            Some(Concept::AtMost(n, r)) => {
                let e = lo.entry(r).or_insert(0);
                *e = (*e).max(n + 1);
            }
            Some(Concept::All(r, f)) => witness = Some((r, f)),
            Some(Concept::Top | Concept::And(_)) => unreachable!("handled by caller"),
        }
        if !yes.is_disjoint(&no) {
            return Ok(None);
        }

        let x = model.add();
        model.labels[x] = yes.iter().map(|s| s.to_string()).collect();

        let mut roles: BTreeSet<&str> = lo.keys().copied().collect();
        roles.extend(hi.keys().copied());
        roles.extend(fillers.keys().copied());
        if let Some((r, _)) = witness {
            roles.insert(r);
        }
        for r in roles {
            let need = lo.get(r).copied().unwrap_or(0);
            let cap = hi.get(r).copied().unwrap_or(u32::MAX);
            let wants_witness = witness.filter(|(wr, _)| *wr == r).map(|(_, f)| f);
            let min_k = if wants_witness.is_some() { need.max(1) } else { need };
            if min_k > cap {
                return Ok(None);
            }
            // The smallest feasible count is always the easiest one, but the
            // window up to max(need, 1) + 1 is scanned for robustness.
            let top = cap.min(need.max(1) + 1);
            let role_fillers = fillers.get(r).cloned().unwrap_or_default();
            let mut placed = false;
            for k in min_k..=top {
                let snapshot = model.clone();
                if self.place(model, x, r, k, &role_fillers, wants_witness)? {
                    placed = true;
                    break;
                }
                *model = snapshot;
            }
            if !placed {
                return Ok(None);
            }
        }
        Ok(Some(x))
    }

    fn place(
        &mut self,
        model: &mut Model,
        x: usize,
        r: &str,
        k: u32,
        fillers: &[&Concept],
        witness: Option<&Concept>,
    ) -> Result<bool> {
        let mut succ = Vec::new();
        for i in 0..k {
            let goal = Goal {
                pos: fillers.to_vec(),
                neg: if i == 0 { witness } else { None },
            };
            match self.build(&goal, model)? {
                Some(y) => succ.push(y),
                None => return Ok(false),
            }
        }
        if !succ.is_empty() {
            model.edges[x].insert(r.to_string(), succ);
        }
        Ok(true)
    }
}

/// Searches for a model whose root is in `c` and, if `not` is given, outside
/// `not`.
pub fn find_model(c: &Concept, not: Option<&Concept>, cfg: &OracleConfig) -> Result<Option<Model>> {
    check_bounds(c, cfg)?;
    if let Some(d) = not {
        check_bounds(d, cfg)?;
    }
    let mut search = Search { cfg, steps: 0 };
    let mut model = Model::default();
    let goal = Goal {
        pos: vec![c],
        neg: not,
    };
    let found = search.build(&goal, &mut model)?;
    match found {
        Some(root) => {
            debug_assert_eq!(root, 0);
            let ok = model.satisfies(0, c) && not.map_or(true, |d| !model.satisfies(0, d));
            assert!(ok, "oracle produced a model that fails the semantic check");
            Ok(Some(model))
        }
        None => Ok(None),
    }
}

/// Satisfiability of an unfolded concept, decided by model search.
pub fn oracle_satisfiable(c: &Concept) -> Result<bool> {
    oracle_satisfiable_with(c, &OracleConfig::default())
}

pub fn oracle_satisfiable_with(c: &Concept, cfg: &OracleConfig) -> Result<bool> {
    Ok(find_model(c, None, cfg)?.is_some())
}

/// `c ⊑ d` for unfolded concepts: true iff no model of `c` falls outside `d`.
pub fn oracle_subsumes(d: &Concept, c: &Concept) -> Result<bool> {
    oracle_subsumes_with(d, c, &OracleConfig::default())
}

pub fn oracle_subsumes_with(d: &Concept, c: &Concept, cfg: &OracleConfig) -> Result<bool> {
    Ok(find_model(c, Some(d), cfg)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_concept;

    fn p(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    #[test]
    fn frozen_satisfiability() {
        let cases = [
            ("A", true),
            ("(and (at-least 1 R) (all R (and A (not A))))", false),
            ("(and (at-most 1 R) (all R (not A)) (at-least 2 R) (all R A))", false),
            ("(and (at-most 0 R) (all R BOTTOM))", true),
            ("(and (at-least 1 R) (all R BOTTOM))", false),
            ("(and (at-least 3 R) (at-most 2 R))", false),
            ("(and (all R (at-least 1 S)) (all R (all S BOTTOM)))", true),
            ("(and (at-least 1 R) (all R (at-least 1 S)) (all R (all S BOTTOM)))", false),
            ("(and A B (not C) (all R (and A (not B))))", true),
        ];
        for (src, expected) in cases {
            assert_eq!(oracle_satisfiable(&p(src)).unwrap(), expected, "{src}");
        }
    }

    #[test]
    fn frozen_subsumption() {
        let cases = [
            ("TOP", "A", true),
            ("A", "TOP", false),
            ("(all R A)", "(at-most 0 R)", true),
            ("(all R A)", "(at-most 1 R)", false),
            ("(at-least 1 R)", "(at-least 2 R)", true),
            ("(at-most 1 R)", "(at-most 2 R)", false),
            ("(all R (all S A))", "(all R (and (all S (and A B)) C))", true),
            ("(not A)", "(and (not A) B)", true),
            ("(all R (not A))", "(all R (at-most 0 S))", false),
            ("(and A (all R B))", "(and A (all R B) (at-least 2 R))", true),
            ("BOTTOM", "(and A (not A))", true),
            ("(all R A)", "(and (at-least 1 S) (all R (and A B)))", true),
        ];
        for (d, c, expected) in cases {
            assert_eq!(oracle_subsumes(&p(d), &p(c)).unwrap(), expected, "{c} ⊑ {d}");
        }
    }

    #[test]
    fn out_of_bounds() {
        assert!(matches!(
            oracle_satisfiable(&p("(at-least 9 R)")),
            Err(Error::OracleBudgetExceeded(_))
        ));
        assert!(matches!(
            oracle_satisfiable(&p("(all R (all R (all R (all R A))))")),
            Err(Error::OracleBudgetExceeded(_))
        ));
    }

    #[test]
    fn countermodel_is_explicit() {
        let m = find_model(&p("(at-most 1 R)"), Some(&p("(all R A)")), &OracleConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.successors(0, "R").len(), 1);
        assert!(!m.satisfies(0, &p("(all R A)")));
    }
}
