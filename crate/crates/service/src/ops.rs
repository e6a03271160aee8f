//! Reasoning entry points shared by the CLI and the service. The first
//! argument is the counteroffer `C` (supply side), the second the request
//! `D` (demand side). Unsatisfiable inputs are rejected up front.

use alnmatch::{
    abduce, classify_match, cnf, contract_concepts, is_satisfiable, penalty_partial, penalty_potential,
    AbductionSolution, Concept, ContractionPair, Error, MatchType, Pruning, Result, Side, TBox,
};

fn require_satisfiable(c: &Concept, side: Side, t: &TBox) -> Result<()> {
    if cnf(c, t)?.is_unsat() {
        Err(Error::UnsatisfiableAdvertisement(side))
    } else {
        Ok(())
    }
}

fn require_both(c: &Concept, d: &Concept, t: &TBox) -> Result<()> {
    require_satisfiable(c, Side::Supply, t)?;
    require_satisfiable(d, Side::Demand, t)
}

pub fn classify(c: &Concept, d: &Concept, t: &TBox) -> Result<MatchType> {
    classify_match(c, d, t)
}

/// `tbox_step5` selects redundancy pruning against `t` instead of the empty
/// terminology.
pub fn hypothesis(c: &Concept, d: &Concept, t: &TBox, tbox_step5: bool) -> Result<AbductionSolution> {
    require_both(c, d, t)?;
    abduce(c, d, t, if tbox_step5 { Pruning::With(t) } else { Pruning::Empty })
}

pub fn contraction(c: &Concept, d: &Concept, t: &TBox) -> Result<ContractionPair> {
    require_both(c, d, t)?;
    contract_concepts(c, d, t)
}

pub fn potential_penalty(c: &Concept, d: &Concept, t: &TBox) -> Result<usize> {
    require_both(c, d, t)?;
    penalty_potential(c, d, t)
}

pub fn partial_penalty(c: &Concept, d: &Concept, t: &TBox) -> Result<usize> {
    require_both(c, d, t)?;
    penalty_partial(c, d, t)
}

pub fn satisfiable(c: &Concept, t: &TBox) -> Result<bool> {
    is_satisfiable(c, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alnmatch::parse_concept;

    #[test]
    fn unsatisfiable_inputs_are_named_by_side() {
        let t = TBox::empty();
        let bad = Concept::Bottom;
        let a = parse_concept("A").unwrap();
        assert_eq!(
            potential_penalty(&bad, &a, &t),
            Err(Error::UnsatisfiableAdvertisement(Side::Supply))
        );
        assert_eq!(
            contraction(&a, &bad, &t).map(|p| p.penalty),
            Err(Error::UnsatisfiableAdvertisement(Side::Demand))
        );
    }

    #[test]
    fn potential_penalty_refuses_partial_pairs() {
        let a = parse_concept("A").unwrap();
        let not_a = parse_concept("(not A)").unwrap();
        assert_eq!(potential_penalty(&a, &not_a, &TBox::empty()), Err(Error::PartialMatch));
        assert_eq!(partial_penalty(&a, &not_a, &TBox::empty()), Ok(1));
    }
}
