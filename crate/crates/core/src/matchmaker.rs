//! Ranking a pool of offers against a request, with explanations.
//!
//! Each offer is matched as the supply and the request as the demand.
//! Compatible offers are scored by the abduction penalty and come first,
//! ordered by penalty, then match class, then id. Incompatible offers follow,
//! ordered by the contraction penalty, then id.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::abduction::{abduce, Pruning};
use crate::concept::{Concept, TBox};
use crate::contraction::find_contract;
use crate::error::{Error, Result};
use crate::normal::cnf;
use crate::reasoner::{classify_normal, MatchType};
use crate::syntax::{render_concept, Side};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Explanation {
    /// What the offer lacks.
    Hypothesis { hypothesis: Concept },
    /// What the offer must give up, and what it keeps.
    Contraction { give_up: Concept, keep: Concept },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub id: String,
    pub match_type: MatchType,
    pub penalty: usize,
    pub explanation: Explanation,
}

impl MatchReport {
    fn sort_key(&self) -> (bool, usize, u8) {
        let partial = self.match_type == MatchType::Partial;
        let class = if partial { 0 } else { self.match_type.rank() };
        (partial, self.penalty, class)
    }
}

fn report_order(a: &MatchReport, b: &MatchReport) -> Ordering {
    a.sort_key()
        .cmp(&b.sort_key())
        .then_with(|| a.id.cmp(&b.id))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub id: String,
    pub error: Error,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankedList {
    pub reports: Vec<MatchReport>,
    pub rejected: Vec<Rejection>,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.reports.iter().map(|r| r.id.as_str()).collect()
    }

    /// Maximal runs of reports with equal class and penalty.
    pub fn tie_groups(&self) -> Vec<&[MatchReport]> {
        self.reports
            .chunk_by(|a, b| a.match_type == b.match_type && a.penalty == b.penalty)
            .collect()
    }

    /// Fixed-width text table, one line per report.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![[
            "rank".into(),
            "id".into(),
            "class".into(),
            "penalty".into(),
            "explanation".into(),
        ]];
        for (i, r) in self.reports.iter().enumerate() {
            let expl = match &r.explanation {
                Explanation::Hypothesis { hypothesis } => format!("H = {}", render_concept(hypothesis)),
                Explanation::Contraction { give_up, keep } => format!(
                    "G = {}; K = {}",
                    render_concept(give_up),
                    render_concept(keep)
                ),
            };
            rows.push([
                (i + 1).to_string(),
                r.id.clone(),
                r.match_type.to_string(),
                r.penalty.to_string(),
                expl,
            ]);
        }
        let widths: Vec<usize> = (0..4)
            .map(|c| rows.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            for (c, w) in widths.iter().enumerate() {
                let _ = write!(out, "{:<w$}  ", row[c], w = w);
            }
            out.push_str(&row[4]);
            out.push('\n');
        }
        for rej in &self.rejected {
            let _ = writeln!(out, "rejected {}: {}", rej.id, rej.error);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let results: Vec<serde_json::Value> = self
            .reports
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = serde_json::json!({
                    "rank": i + 1,
                    "id": r.id,
                    "class": r.match_type.as_str(),
                    "penalty": r.penalty,
                });
                match &r.explanation {
                    Explanation::Hypothesis { hypothesis } => {
                        v["hypothesis"] = render_concept(hypothesis).into();
                    }
                    Explanation::Contraction { give_up, keep } => {
                        v["give_up"] = render_concept(give_up).into();
                        v["keep"] = render_concept(keep).into();
                    }
                }
                v
            })
            .collect();
        let rejected: Vec<serde_json::Value> = self
            .rejected
            .iter()
            .map(|r| serde_json::json!({"id": r.id, "error": r.error.code(), "message": r.error.to_string()}))
            .collect();
        serde_json::json!({ "results": results, "rejected": rejected })
    }
}

/// Matches one offer against a request.
pub fn match_offer(request: &Concept, id: &str, offer: &Concept, t: &TBox) -> Result<MatchReport> {
    let req = cnf(request, t)?;
    let off = cnf(offer, t)?;
    let match_type = classify_normal(&off, &req)?;
    if match_type == MatchType::Partial {
        let pair = find_contract(&off, &req);
        Ok(MatchReport {
            id: id.to_string(),
            match_type,
            penalty: pair.penalty,
            explanation: Explanation::Contraction {
                give_up: pair.give_up,
                keep: pair.keep,
            },
        })
    } else {
        let sol = abduce(offer, request, t, Pruning::Empty)?;
        Ok(MatchReport {
            id: id.to_string(),
            match_type,
            penalty: sol.penalty,
            explanation: Explanation::Hypothesis {
                hypothesis: sol.hypothesis,
            },
        })
    }
}

/// Ranks `offers` against `request`. Unsatisfiable offers are reported in
/// `rejected`; an unsatisfiable request is an error.
pub fn rank_offers(request: &Concept, offers: &[(String, Concept)], t: &TBox) -> Result<RankedList> {
    if cnf(request, t)?.is_unsat() {
        return Err(Error::UnsatisfiableAdvertisement(Side::Demand));
    }
    let results: Vec<(String, Result<MatchReport>)> = offers
        .par_iter()
        .map(|(id, c)| (id.clone(), match_offer(request, id, c, t)))
        .collect();
    let mut list = RankedList::default();
    for (id, r) in results {
        match r {
            Ok(rep) => list.reports.push(rep),
            Err(error) => list.rejected.push(Rejection { id, error }),
        }
    }
    list.reports.sort_by(report_order);
    list.rejected.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_concept;

    fn p(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn offers(list: &[(&str, &str)]) -> Vec<(String, Concept)> {
        list.iter().map(|(i, c)| (i.to_string(), p(c))).collect()
    }

    #[test]
    fn small_pool() {
        let ranked = rank_offers(
            &p("A"),
            &offers(&[("o1", "(and A B)"), ("o2", "A"), ("o3", "TOP")]),
            &TBox::empty(),
        )
        .unwrap();
        let summary: Vec<(&str, MatchType, usize)> = ranked
            .reports
            .iter()
            .map(|r| (r.id.as_str(), r.match_type, r.penalty))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("o2", MatchType::Exact, 0),
                ("o1", MatchType::Full, 0),
                ("o3", MatchType::PlugIn, 1)
            ]
        );
        assert_eq!(ranked.tie_groups().len(), 3);
    }

    #[test]
    fn partial_pool() {
        let kb = fixtures::reference();
        let ranked = rank_offers(
            &p("(and HomePC (all hasMonitor LCDmonitor))"),
            &offers(&[
                ("dem2", "(and PC (all hasMonitor BOTTOM))"),
                ("dem1", "(and PC (all hasMonitor CRTmonitor))"),
            ]),
            &kb.tbox,
        )
        .unwrap();
        assert_eq!(ranked.ids(), vec!["dem1", "dem2"]);
        assert!(ranked.reports.iter().all(|r| r.match_type == MatchType::Partial));
        assert_eq!(ranked.reports[0].penalty, 1);
        assert_eq!(ranked.reports[1].penalty, 3);
    }

    #[test]
    fn rejections_are_collected() {
        let ranked = rank_offers(
            &p("A"),
            &offers(&[("bad", "(and B (not B))"), ("ok", "A")]),
            &TBox::empty(),
        )
        .unwrap();
        assert_eq!(ranked.ids(), vec!["ok"]);
        assert_eq!(ranked.rejected.len(), 1);
        assert_eq!(
            ranked.rejected[0].error,
            Error::UnsatisfiableAdvertisement(Side::Supply)
        );
        assert!(rank_offers(&Concept::Bottom, &[], &TBox::empty()).is_err());
    }

    #[test]
    fn order_is_input_independent() {
        let pool = offers(&[
            ("x", "(and A (not B))"),
            ("y", "B"),
            ("z", "(and A C)"),
            ("w", "C"),
            ("v", "(and B C)"),
        ]);
        let req = p("(and A C)");
        let a = rank_offers(&req, &pool, &TBox::empty()).unwrap();
        let mut rev = pool.clone();
        rev.reverse();
        let b = rank_offers(&req, &rev, &TBox::empty()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_and_json() {
        let ranked = rank_offers(&p("A"), &offers(&[("o1", "TOP")]), &TBox::empty()).unwrap();
        assert_eq!(
            ranked.to_table(),
            "rank  id  class   penalty  explanation\n1     o1  plugin  1        H = A\n"
        );
        assert_eq!(
            ranked.to_json(),
            serde_json::json!({
                "results": [{"rank": 1, "id": "o1", "class": "plugin", "penalty": 1, "hypothesis": "A"}],
                "rejected": []
            })
        );
    }
}
