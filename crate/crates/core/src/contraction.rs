//! Concept contraction: what `C` must give up to become compatible with `D`.
//!
//! Both entry points take normal forms and ignore the terminology beyond
//! that, so a terminology only enters through [`cnf`].
//!
//! A form with `(≤ 0 R)` carries the implied `∀R.⊥`. When such a pair meets
//! `(≥ y R)` and a universal restriction `∀R.E` on the other side, it is
//! given up as a single `∀R.⊥`, charged `|E|`, plus one more when `y ≥ 2`.
//! Without `∀R.E` it is given up as `(≤ 0 R)` and charged one.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::abduction::single_deletions;
use crate::concept::{length, Concept, TBox};
use crate::error::Result;
use crate::normal::{cnf, embed, Form, NormalConcept};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionPair {
    pub give_up: Concept,
    pub keep: Concept,
    pub penalty: usize,
}

/// How a coupled `(≤ 0 R)` conflicts with the other side.
enum ZeroConflict<'a> {
    None,
    /// Other side forces fillers and restricts them with `∀R.E`.
    WithFiller { e: &'a NormalConcept, at_least: u32 },
    /// Other side forces fillers without restricting them.
    Bare,
}

fn zero_conflict<'a>(cf: &Form, df: &'a Form, r: &str) -> ZeroConflict<'a> {
    if cf.at_most.get(r) != Some(&0) {
        return ZeroConflict::None;
    }
    match df.at_least.get(r) {
        Some(&y) if y > 0 => match df.all.get(r) {
            Some(e) => ZeroConflict::WithFiller { e, at_least: y },
            None => ZeroConflict::Bare,
        },
        _ => ZeroConflict::None,
    }
}

/// Splits `c` into a part to give up and a part to keep so that the kept
/// part is compatible with `d`. Returns `⟨⊤, C⟩` when `c ⊓ d` is
/// satisfiable.
pub fn find_contract(c: &NormalConcept, d: &NormalConcept) -> ContractionPair {
    let (g, k) = contract(c, d);
    ContractionPair {
        give_up: Concept::and(g),
        keep: Concept::and(k),
        penalty: penalty_partial_raw(c, d),
    }
}

fn contract(c: &NormalConcept, d: &NormalConcept) -> (Vec<Concept>, Vec<Concept>) {
    let NormalConcept::Form(cf) = c else {
        return (vec![Concept::Bottom], Vec::new());
    };
    let NormalConcept::Form(df) = d else {
        return (crate::normal::embed_conjuncts(c), Vec::new());
    };
    let mut g = Vec::new();
    let mut k = cf.clone();
    let mut kept_all: BTreeMap<String, Concept> = BTreeMap::new();

    for a in &cf.pos {
        if df.neg.contains(a) {
            g.push(Concept::Name(a.clone()));
            k.pos.remove(a);
        }
    }
    for a in &cf.neg {
        if df.pos.contains(a) {
            g.push(Concept::NegName(a.clone()));
            k.neg.remove(a);
        }
    }
    for (r, &x) in &cf.at_least {
        if df.at_most.get(r).is_some_and(|&y| y < x) {
            g.push(Concept::AtLeast(x, r.clone()));
            k.at_least.remove(r);
        }
    }
    for (r, &x) in &cf.at_most {
        if !df.at_least.get(r).is_some_and(|&y| y > x) {
            continue;
        }
        match zero_conflict(cf, df, r) {
            ZeroConflict::WithFiller { .. } => {
                g.push(Concept::all(r.clone(), Concept::Bottom));
                k.at_most.remove(r);
                k.all.remove(r);
            }
            ZeroConflict::Bare => {
                g.push(Concept::AtMost(0, r.clone()));
                k.at_most.remove(r);
                k.all.remove(r);
            }
            ZeroConflict::None => {
                g.push(Concept::AtMost(x, r.clone()));
                k.at_most.remove(r);
            }
        }
    }
    for (r, f) in &cf.all {
        if f.is_unsat() {
            continue;
        }
        let forced = k.at_least.get(r).is_some_and(|&x| x >= 1)
            || df.at_least.get(r).is_some_and(|&x| x >= 1);
        match df.all.get(r) {
            Some(e) if forced => {
                let (g2, k2) = contract(f, e);
                if !g2.is_empty() {
                    g.push(Concept::all(r.clone(), Concept::and(g2)));
                }
                if !k2.is_empty() {
                    kept_all.insert(r.clone(), Concept::and(k2));
                }
            }
            _ => {
                kept_all.insert(r.clone(), embed(f));
            }
        }
        k.all.remove(r);
    }

    let mut keep = crate::normal::embed_conjuncts(&NormalConcept::Form(k));
    keep.extend(
        kept_all
            .into_iter()
            .map(|(r, f)| Concept::All(r, Box::new(f))),
    );
    (g, keep)
}

/// Counts what [`find_contract`] gives up; zero iff `c ⊓ d` is satisfiable.
/// When `c` is unsatisfiable the whole length of `d` is charged.
pub fn penalty_partial_raw(c: &NormalConcept, d: &NormalConcept) -> usize {
    let NormalConcept::Form(cf) = c else {
        return d.length();
    };
    let NormalConcept::Form(df) = d else {
        return c.length();
    };
    let mut n = 0;
    n += cf.pos.iter().filter(|a| df.neg.contains(*a)).count();
    n += cf.neg.iter().filter(|a| df.pos.contains(*a)).count();
    n += cf
        .at_least
        .iter()
        .filter(|(r, &x)| df.at_most.get(*r).is_some_and(|&y| y < x))
        .count();
    for (r, &x) in &cf.at_most {
        if !df.at_least.get(r).is_some_and(|&y| y > x) {
            continue;
        }
        n += match zero_conflict(cf, df, r) {
            ZeroConflict::WithFiller { e, at_least } => e.length() + usize::from(at_least >= 2),
            ZeroConflict::Bare | ZeroConflict::None => 1,
        };
    }
    for (r, f) in &cf.all {
        if f.is_unsat() {
            continue;
        }
        let Some(e) = df.all.get(r) else { continue };
        let own = cf
            .at_least
            .get(r)
            .is_some_and(|&x| x >= 1 && !df.at_most.get(r).is_some_and(|&y| y < x));
        let theirs = df.at_least.get(r).is_some_and(|&x| x >= 1);
        if own || theirs {
            n += penalty_partial_raw(f, e);
        }
    }
    n
}

/// Penalty of a partial match, computed on the normal forms.
pub fn penalty_partial(c: &Concept, d: &Concept, t: &TBox) -> Result<usize> {
    Ok(penalty_partial_raw(&cnf(c, t)?, &cnf(d, t)?))
}

/// Contraction on raw concepts.
pub fn contract_concepts(c: &Concept, d: &Concept, t: &TBox) -> Result<ContractionPair> {
    Ok(find_contract(&cnf(c, t)?, &cnf(d, t)?))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RolePath(pub Vec<String>);

impl std::fmt::Display for RolePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else {
            f.write_str(&self.0.join("∘"))
        }
    }
}

/// One occurrence of an atomic subconcept, numbered in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Occurrence {
    pub index: usize,
    pub concept: Concept,
}

/// Role path of every atomic occurrence in `c`.
pub fn role_paths(c: &Concept) -> Vec<(Occurrence, RolePath)> {
    fn walk(c: &Concept, path: &mut Vec<String>, out: &mut Vec<(Occurrence, RolePath)>) {
        match c {
            Concept::All(r, f) => {
                path.push(r.clone());
                walk(f, path, out);
                path.pop();
            }
            Concept::And(cs) => cs.iter().for_each(|c| walk(c, path, out)),
            atom if atom.is_atomic() => out.push((
                Occurrence {
                    index: out.len(),
                    concept: atom.clone(),
                },
                RolePath(path.clone()),
            )),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(c, &mut Vec::new(), &mut out);
    out
}

/// `⟨g, k⟩` splits `c` with `k` compatible with `d`, all in `t`.
pub fn is_contraction(g: &Concept, k: &Concept, c: &Concept, d: &Concept, t: &TBox) -> Result<bool> {
    let joined = cnf(&Concept::and([g.clone(), k.clone()]), t)?;
    if joined != cnf(c, t)? {
        return Ok(false);
    }
    Ok(!cnf(&Concept::and([k.clone(), d.clone()]), t)?.is_unsat())
}

/// No sub-conjunction of `g` still yields a contraction with the same `k`.
///
/// Generalizing `g` keeps `g ⊓ k` above `c`, so any proper sub-conjunction
/// that works implies a single-conjunct deletion that works. Checking single
/// deletions is therefore exact.
pub fn is_irreducible_contraction(
    g: &Concept,
    k: &Concept,
    c: &Concept,
    d: &Concept,
    t: &TBox,
) -> Result<bool> {
    if !is_contraction(g, k, c, d, t)? {
        return Ok(false);
    }
    for smaller in single_deletions(g) {
        if is_contraction(&smaller, k, c, d, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Irreducible, and every at-least restriction given up faces a stricter
/// at-most restriction of `d` at the same role path.
pub fn is_nmin_contraction(g: &Concept, k: &Concept, c: &Concept, d: &Concept, t: &TBox) -> Result<bool> {
    if !is_irreducible_contraction(g, k, c, d, t)? {
        return Ok(false);
    }
    let d_paths = role_paths(&embed(&cnf(d, t)?));
    for (occ, path) in role_paths(&embed(&cnf(g, t)?)) {
        let Concept::AtLeast(n, r) = &occ.concept else {
            continue;
        };
        let justified = d_paths.iter().any(|(o, p)| {
            matches!(&o.concept, Concept::AtMost(m, r2) if r2 == r && m < n) && *p == path
        });
        if !justified {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Length of the give-up part; equals the penalty whenever `g` has no `⊥`.
pub fn give_up_length(pair: &ContractionPair) -> usize {
    length(&pair.give_up)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::normal::normalize;
    use crate::syntax::parse_concept;

    fn p(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn n(s: &str) -> NormalConcept {
        normalize(&p(s))
    }

    #[test]
    fn monitor_demands_contract() {
        let kb = fixtures::reference();
        let t = &kb.tbox;
        let sup = cnf(&p("(and HomePC (all hasMonitor LCDmonitor))"), t).unwrap();
        let dem1 = cnf(&p("(and PC (all hasMonitor CRTmonitor))"), t).unwrap();
        let dem2 = cnf(&p("(and PC (all hasMonitor BOTTOM))"), t).unwrap();

        let r1 = find_contract(&dem1, &sup);
        assert_eq!(r1.give_up, p("(all hasMonitor CRTmonitor)"));
        assert_eq!(r1.keep, p("(and PC (all hasMonitor Monitor))"));
        assert_eq!(r1.penalty, 1);

        let r2 = find_contract(&dem2, &sup);
        assert_eq!(r2.give_up, p("(all hasMonitor BOTTOM)"));
        assert_eq!(r2.keep, p("PC"));
        assert_eq!(r2.penalty, 3);
    }

    #[test]
    fn asymmetric_pair() {
        let c = n("(and (at-most 1 R) (all R (not A)))");
        let d = n("(and (at-least 2 R) (all R A))");
        assert_eq!(penalty_partial_raw(&c, &d), 2);
        assert_eq!(penalty_partial_raw(&d, &c), 1);
        let r = find_contract(&c, &d);
        assert_eq!(r.give_up, p("(and (at-most 1 R) (all R (not A)))"));
        assert_eq!(r.keep, Concept::Top);
        let r = find_contract(&d, &c);
        assert_eq!(r.give_up, p("(at-least 2 R)"));
        assert_eq!(r.keep, p("(all R A)"));
    }

    #[test]
    fn compatible_pair_keeps_everything() {
        let c = n("(and A (all R B))");
        let d = n("(and C (at-least 1 R))");
        let r = find_contract(&c, &d);
        assert_eq!(r.give_up, Concept::Top);
        assert_eq!(r.keep, embed(&c));
        assert_eq!(r.penalty, 0);
    }

    #[test]
    fn unsatisfiable_filler_costs_its_counterpart() {
        assert_eq!(penalty_partial_raw(&NormalConcept::Unsat, &n("(and A B)")), 2);
        let r = find_contract(&NormalConcept::Unsat, &n("A"));
        assert_eq!((r.give_up, r.keep), (Concept::Bottom, Concept::Top));
    }

    #[test]
    fn zero_fillers_against_bare_at_least() {
        let c = n("(and A (at-most 0 R))");
        let d = n("(at-least 1 R)");
        let r = find_contract(&c, &d);
        assert_eq!(r.give_up, p("(at-most 0 R)"));
        assert_eq!(r.keep, p("A"));
        assert_eq!(r.penalty, 1);
    }

    #[test]
    fn zero_fillers_against_two_fillers() {
        let c = n("(at-most 0 R)");
        let d = n("(and (at-least 2 R) (all R A))");
        let r = find_contract(&c, &d);
        assert_eq!(r.give_up, p("(all R BOTTOM)"));
        assert_eq!(r.penalty, 2);
        let weaker = n("(and (at-most 1 R) (all R (not A)))");
        assert!(penalty_partial_raw(&c, &d) >= penalty_partial_raw(&weaker, &d));
    }

    #[test]
    fn negated_names_are_given_up_too() {
        let c = n("(and (not A) B)");
        let d = n("A");
        let r = find_contract(&c, &d);
        assert_eq!(r.give_up, p("(not A)"));
        assert_eq!(r.keep, p("B"));
        assert_eq!(r.penalty, 1);
    }

    #[test]
    fn paths() {
        let c = p("(all R (and B (all S A)))");
        let paths = role_paths(&c);
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[1].0.concept, p("A"));
        assert_eq!(paths[1].1, RolePath(vec!["R".into(), "S".into()]));
        assert_eq!(paths[1].1.to_string(), "R∘S");
        assert_eq!(paths[0].1.to_string(), "R");
        let swapped = role_paths(&p("(all R (and (all S A) B))"));
        assert_eq!(swapped[0].1, paths[1].1);
    }

    #[test]
    fn n_minimality_of_give_ups() {
        let kb = fixtures::reference();
        let t = &kb.tbox;
        let dem = p("(and HomePC (all hasMonitor LCDmonitor))");
        let sup = p("(and Server (all hasMonitor CRTmonitor))");
        let g_all = p("(all hasMonitor LCDmonitor)");
        let k_all = p("HomePC");
        let g_ge = p("HomePC");
        let k_ge = p("(and PC (at-least 1 hasSoftware) (exactly 1 hasOS) (all hasMonitor LCDmonitor))");
        assert!(is_contraction(&g_all, &k_all, &dem, &sup, t).unwrap());
        assert!(is_contraction(&g_ge, &k_ge, &dem, &sup, t).unwrap());
        assert!(is_irreducible_contraction(&g_ge, &k_ge, &dem, &sup, t).unwrap());
        assert!(is_nmin_contraction(&g_all, &k_all, &dem, &sup, t).unwrap());
        assert!(!is_nmin_contraction(&g_ge, &k_ge, &dem, &sup, t).unwrap());
    }
}
