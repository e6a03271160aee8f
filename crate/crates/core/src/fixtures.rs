//! Knowledge bases shipped with the crate.

use crate::syntax::{parse_kb, KnowledgeBase};

pub const REFERENCE_KB: &str = include_str!("../../../data/reference.kb");
pub const APARTMENTS_KB: &str = include_str!("../../../data/apartments.kb");
pub const DATING_KB: &str = include_str!("../../../data/dating.kb");
pub const SKILLS_KB: &str = include_str!("../../../data/skills.kb");

/// The computer-shop ontology used by the worked examples.
pub fn reference() -> KnowledgeBase {
    parse_kb(REFERENCE_KB).expect("bundled reference KB is valid")
}

/// All bundled knowledge bases by file stem.
pub fn all() -> Vec<(&'static str, KnowledgeBase)> {
    [
        ("reference", REFERENCE_KB),
        ("apartments", APARTMENTS_KB),
        ("dating", DATING_KB),
        ("skills", SKILLS_KB),
    ]
    .into_iter()
    .map(|(name, src)| (name, parse_kb(src).expect("bundled KB is valid")))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::cnf;
    use crate::reasoner::is_satisfiable;

    #[test]
    fn bundled_kbs_parse_and_ads_are_satisfiable() {
        for (name, kb) in all() {
            for ad in &kb.advertisements {
                assert!(
                    is_satisfiable(&ad.concept, &kb.tbox).unwrap(),
                    "{name}/{}",
                    ad.id
                );
            }
        }
    }

    #[test]
    fn reference_depth_and_lcd_length() {
        let kb = reference();
        assert_eq!(kb.tbox.depth(), 2);
        let lcd = cnf(&crate::concept::Concept::name("LCDmonitor"), &kb.tbox).unwrap();
        assert_eq!(lcd.length(), 3);
    }
}
