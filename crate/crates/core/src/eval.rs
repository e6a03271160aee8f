//! Ranking evaluation and a bag-of-words baseline.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;

use crate::concept::{Concept, TBox};
use crate::error::{Error, Result};
use crate::normal::{cnf, NormalConcept};

/// Normalized pairwise agreement between a system ranking and a reference
/// preference given as ranked groups (ids in the same group are tied).
///
/// `½ · (1 + (S⁺ − S⁻) / S⁺max)`, where `S⁺` counts strictly preferred pairs
/// the system orders correctly, `S⁻` those it inverts and `S⁺max` all
/// strictly preferred pairs.
pub fn rnorm(sys: &[String], usr: &[Vec<String>]) -> Result<Ratio<u64>> {
    let position: HashMap<&str, usize> = sys.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let sys_ids: BTreeSet<&str> = position.keys().copied().collect();
    let usr_ids: BTreeSet<&str> = usr.iter().flatten().map(String::as_str).collect();
    if sys_ids != usr_ids || sys_ids.len() != sys.len() {
        return Err(Error::MismatchedIds);
    }
    let (mut plus, mut minus, mut max) = (0u64, 0u64, 0u64);
    for (gi, better) in usr.iter().enumerate() {
        for worse in usr.iter().skip(gi + 1) {
            for b in better {
                for w in worse {
                    max += 1;
                    if position[b.as_str()] < position[w.as_str()] {
                        plus += 1;
                    } else {
                        minus += 1;
                    }
                }
            }
        }
    }
    if max == 0 {
        return Err(Error::EmptyPreference);
    }
    Ok(Ratio::new(max + plus - minus, 2 * max))
}

/// Ids in order, whitespace separated; `#` starts a comment.
pub fn parse_ranking(text: &str) -> Vec<String> {
    parse_preference(text).into_iter().flatten().collect()
}

/// One group of tied ids per non-empty line, best group first.
pub fn parse_preference(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|g| !g.is_empty())
        .collect()
}

/// Bag of terms of a normal form: one term per occurrence of a name, a
/// negated name (by its base name) or a role in a restriction.
pub fn terms(n: &NormalConcept) -> Vec<String> {
    fn walk(n: &NormalConcept, out: &mut Vec<String>) {
        let NormalConcept::Form(f) = n else { return };
        out.extend(f.pos.iter().cloned());
        out.extend(f.neg.iter().cloned());
        out.extend(f.at_least.keys().cloned());
        out.extend(f.at_most.keys().cloned());
        for (r, filler) in &f.all {
            if !filler.is_unsat() {
                out.push(r.clone());
                walk(filler, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(n, &mut out);
    out
}

/// Cosine similarity of TF·IDF vectors, with raw counts and `ln(N / df)`
/// over the offers plus the request. Sorted by descending score, then id.
pub fn vsm_rank(request: &Concept, offers: &[(String, Concept)], t: &TBox) -> Result<Vec<(String, f64)>> {
    let mut docs: Vec<BTreeMap<String, f64>> = Vec::with_capacity(offers.len() + 1);
    for c in std::iter::once(request).chain(offers.iter().map(|(_, c)| c)) {
        let mut tf = BTreeMap::new();
        for term in terms(&cnf(c, t)?) {
            *tf.entry(term).or_insert(0.0) += 1.0;
        }
        docs.push(tf);
    }
    let n = docs.len() as f64;
    let mut df: BTreeMap<&str, f64> = BTreeMap::new();
    for d in &docs {
        for term in d.keys() {
            *df.entry(term.as_str()).or_insert(0.0) += 1.0;
        }
    }
    let weigh = |d: &BTreeMap<String, f64>| -> BTreeMap<String, f64> {
        d.iter()
            .map(|(term, tf)| (term.clone(), tf * (n / df[term.as_str()]).ln()))
            .collect()
    };
    let query = weigh(&docs[0]);
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let qn = norm(&query);
    let mut scored: Vec<(String, f64)> = offers
        .iter()
        .zip(&docs[1..])
        .map(|((id, _), d)| {
            let v = weigh(d);
            let dot: f64 = v.iter().filter_map(|(k, x)| query.get(k).map(|y| x * y)).sum();
            let denom = qn * norm(&v);
            (id.clone(), if denom > 0.0 { dot / denom } else { 0.0 })
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_concept;

    fn ids(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn groups(s: &str) -> Vec<Vec<String>> {
        s.split('>').map(ids).collect()
    }

    #[test]
    fn identity_reversal_and_hand_case() {
        let usr = groups("a > b > c");
        assert_eq!(rnorm(&ids("a b c"), &usr).unwrap(), Ratio::from_integer(1));
        assert_eq!(rnorm(&ids("c b a"), &usr).unwrap(), Ratio::from_integer(0));
        assert_eq!(rnorm(&ids("a c b"), &usr).unwrap(), Ratio::new(2, 3));
    }

    #[test]
    fn ties_count_for_nothing() {
        let usr = groups("a b > c");
        assert_eq!(rnorm(&ids("b a c"), &usr).unwrap(), Ratio::from_integer(1));
        assert_eq!(rnorm(&ids("a c b"), &usr).unwrap(), Ratio::new(1, 2));
        assert_eq!(rnorm(&ids("a b"), &groups("a b")), Err(Error::EmptyPreference));
        assert_eq!(rnorm(&ids("a b"), &groups("a > c")), Err(Error::MismatchedIds));
    }

    #[test]
    fn reversal_complements() {
        let usr = groups("a > b > c > d > e");
        let sys = ids("b a e c d");
        let mut rev = sys.clone();
        rev.reverse();
        assert_eq!(rnorm(&sys, &usr).unwrap() + rnorm(&rev, &usr).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn preference_files() {
        assert_eq!(parse_preference("a b  # tied\n\nc\n"), groups("a b > c"));
        assert_eq!(parse_ranking("a\nb c\n"), ids("a b c"));
    }

    #[test]
    fn vsm_extremes() {
        let p = |s: &str| parse_concept(s).unwrap();
        let offers = vec![
            ("same".to_string(), p("(and A (all R B))")),
            ("other".to_string(), p("(and C D)")),
            ("some".to_string(), p("(and A D)")),
        ];
        let scores = vsm_rank(&p("(and A (all R B))"), &offers, &TBox::empty()).unwrap();
        assert_eq!(scores[0].0, "same");
        assert!((scores[0].1 - 1.0).abs() < 1e-12);
        let other = scores.iter().find(|(id, _)| id == "other").unwrap();
        assert_eq!(other.1, 0.0);
    }

    #[test]
    fn vsm_on_monitor_pool() {
        let kb = fixtures::reference();
        let p = |s: &str| parse_concept(s).unwrap();
        let offers = vec![
            ("dem1".to_string(), p("(and PC (all hasMonitor CRTmonitor))")),
            ("dem2".to_string(), p("(and PC (all hasMonitor BOTTOM))")),
        ];
        let scores = vsm_rank(&p("(and HomePC (all hasMonitor LCDmonitor))"), &offers, &kb.tbox).unwrap();
        assert_eq!(scores[0].0, "dem1");
        assert!(scores[0].1 > scores[1].1);
    }
}
