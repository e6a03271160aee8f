//! Matchmaking over ALN descriptions: normalization, structural
//! subsumption, match classification, concept abduction and contraction,
//! and penalty-based ranking of offers.
//!
//! ```
//! use alnmatch::{parse_concept, rank_offers, MatchType, TBox};
//!
//! let request = parse_concept("A").unwrap();
//! let offers = vec![
//!     ("o1".to_string(), parse_concept("(and A B)").unwrap()),
//!     ("o2".to_string(), parse_concept("TOP").unwrap()),
//! ];
//! let ranked = rank_offers(&request, &offers, &TBox::empty()).unwrap();
//! assert_eq!(ranked.ids(), ["o1", "o2"]);
//! assert_eq!(ranked.reports[0].match_type, MatchType::Full);
//! ```

pub mod abduction;
pub mod concept;
pub mod contraction;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod generate;
pub mod matchmaker;
pub mod normal;
pub mod oracle;
pub mod reasoner;
pub mod syntax;

pub use abduction::{
    abduce, abduce_with_tbox, find_irred, is_cap_solution, is_irreducible, penalty_potential,
    AbductionSolution, Pruning,
};
pub use concept::{length, quantification_nesting, validate_tbox, Axiom, Concept, TBox, TBoxError, TBoxErrors};
pub use contraction::{
    contract_concepts, find_contract, is_nmin_contraction, penalty_partial, penalty_partial_raw, role_paths,
    ContractionPair, RolePath,
};
pub use error::{Error, Result};
pub use eval::{rnorm, vsm_rank};
pub use matchmaker::{rank_offers, Explanation, MatchReport, RankedList};
pub use normal::{cnf, embed, normalize, unfold, NormalConcept};
pub use reasoner::{classify_match, is_satisfiable, subsumes, MatchType};
pub use syntax::{
    parse_concept, parse_kb, render_concept, Advertisement, KbError, KnowledgeBase, Side, SourceSpan, SyntaxError,
};
