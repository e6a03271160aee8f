//! Satisfiability, structural subsumption and match classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concept::{Concept, TBox};
use crate::error::{Error, Result};
use crate::normal::{cnf, normalize_all, NormalConcept};
use crate::syntax::Side;

pub fn is_satisfiable(c: &Concept, t: &TBox) -> Result<bool> {
    Ok(!cnf(c, t)?.is_unsat())
}

/// `c ⊑ d` with respect to `t`.
pub fn subsumes(d: &Concept, c: &Concept, t: &TBox) -> Result<bool> {
    Ok(subsumes_normal(&cnf(d, t)?, &cnf(c, t)?))
}

pub fn equivalent(a: &Concept, b: &Concept, t: &TBox) -> Result<bool> {
    Ok(cnf(a, t)? == cnf(b, t)?)
}

/// Structural subsumption on normal forms: true iff `c ⊑ d`.
pub fn subsumes_normal(d: &NormalConcept, c: &NormalConcept) -> bool {
    let NormalConcept::Form(cf) = c else {
        return true;
    };
    let NormalConcept::Form(df) = d else {
        return false;
    };
    df.pos.is_subset(&cf.pos)
        && df.neg.is_subset(&cf.neg)
        && df
            .at_least
            .iter()
            .all(|(r, &n)| cf.at_least.get(r).is_some_and(|&m| m >= n))
        && df
            .at_most
            .iter()
            .all(|(r, &n)| cf.at_most.get(r).is_some_and(|&m| m <= n))
        && df.all.iter().all(|(r, e)| match cf.all.get(r) {
            Some(f) => subsumes_normal(e, f),
            None => false,
        })
}

/// Satisfiability of the conjunction of two normal forms.
pub fn conjunction_satisfiable(a: &NormalConcept, b: &NormalConcept) -> bool {
    if a.is_unsat() || b.is_unsat() {
        return false;
    }
    !normalize_all(&[crate::normal::embed(a), crate::normal::embed(b)]).is_unsat()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchType {
    Exact,
    Full,
    PlugIn,
    Potential,
    Partial,
}

impl MatchType {
    pub const ALL: [MatchType; 5] = [
        MatchType::Exact,
        MatchType::Full,
        MatchType::PlugIn,
        MatchType::Potential,
        MatchType::Partial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchType::Exact => "exact",
            MatchType::Full => "full",
            MatchType::PlugIn => "plugin",
            MatchType::Potential => "potential",
            MatchType::Partial => "partial",
        }
    }

    /// Position in the precedence order, 0 for `Exact`.
    pub fn rank(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for MatchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MatchType::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown match type `{s}`"))
    }
}

/// Classifies a supply against a demand.
pub fn classify_match(sup: &Concept, dem: &Concept, t: &TBox) -> Result<MatchType> {
    classify_normal(&cnf(sup, t)?, &cnf(dem, t)?)
}

pub fn classify_normal(sup: &NormalConcept, dem: &NormalConcept) -> Result<MatchType> {
    if sup.is_unsat() {
        return Err(Error::UnsatisfiableAdvertisement(Side::Supply));
    }
    if dem.is_unsat() {
        return Err(Error::UnsatisfiableAdvertisement(Side::Demand));
    }
    let full = subsumes_normal(dem, sup);
    let plug = subsumes_normal(sup, dem);
    Ok(match (full, plug) {
        (true, true) => MatchType::Exact,
        (true, false) => MatchType::Full,
        (false, true) => MatchType::PlugIn,
        (false, false) if conjunction_satisfiable(sup, dem) => MatchType::Potential,
        (false, false) => MatchType::Partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{validate_tbox, Axiom};
    use crate::fixtures;
    use crate::syntax::parse_concept;

    fn p(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    #[test]
    fn satisfiability() {
        assert!(!is_satisfiable(&p("(and A (not A))"), &TBox::empty()).unwrap());
        assert!(is_satisfiable(&Concept::Top, &fixtures::reference().tbox).unwrap());
        let kb = fixtures::reference();
        assert!(!is_satisfiable(
            &p("(and HomePC (all hasMonitor LCDmonitor) Server (all hasMonitor CRTmonitor))"),
            &kb.tbox
        )
        .unwrap());
    }

    #[test]
    fn subsumption_examples() {
        let e = TBox::empty();
        assert!(subsumes(&Concept::Top, &p("A"), &e).unwrap());
        let t = validate_tbox(vec![
            Axiom::inclusion("A1", p("A2")),
            Axiom::inclusion("A3", p("A4")),
        ])
        .unwrap();
        assert!(!subsumes(&p("(and A1 A4)"), &p("A3"), &t).unwrap());
        let t = validate_tbox(vec![Axiom::inclusion("B", p("(and A2 A3)"))]).unwrap();
        assert!(subsumes(&p("(and A2 A3 A1)"), &p("(and A1 B)"), &t).unwrap());
    }

    #[test]
    fn zero_fillers_subsumed_by_any_universal() {
        let e = TBox::empty();
        assert!(subsumes(&p("(all R A)"), &p("(at-most 0 R)"), &e).unwrap());
        assert!(subsumes(&p("(at-most 0 R)"), &p("(all R BOTTOM)"), &e).unwrap());
        assert!(!subsumes(&p("(all R A)"), &p("(at-most 1 R)"), &e).unwrap());
    }

    #[test]
    fn classification() {
        let kb = fixtures::reference();
        let t = &kb.tbox;
        assert_eq!(classify_match(&p("Computer"), &p("Computer"), t).unwrap(), MatchType::Exact);
        assert_eq!(
            classify_match(
                &p("(and HomePC (all hasMonitor CRTmonitor))"),
                &p("(and HomePC (all hasMonitor LCDmonitor))"),
                t
            )
            .unwrap(),
            MatchType::Partial
        );
        let e = TBox::empty();
        assert_eq!(
            classify_match(&p("(and Computer (at-least 2 hasCPU))"), &p("Computer"), &e).unwrap(),
            MatchType::Full
        );
        assert_eq!(classify_match(&p("A"), &p("(and A B)"), &e).unwrap(), MatchType::PlugIn);
        assert_eq!(classify_match(&p("A"), &p("B"), &e).unwrap(), MatchType::Potential);
        assert_eq!(
            classify_match(&p("BOTTOM"), &p("B"), &e),
            Err(Error::UnsatisfiableAdvertisement(Side::Supply))
        );
        assert_eq!(
            classify_match(&p("A"), &p("(and B (not B))"), &e),
            Err(Error::UnsatisfiableAdvertisement(Side::Demand))
        );
    }

    #[test]
    fn match_type_strings() {
        for m in MatchType::ALL {
            assert_eq!(m.as_str().parse::<MatchType>().unwrap(), m);
        }
    }
}
