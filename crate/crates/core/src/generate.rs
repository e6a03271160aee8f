//! Seeded random concepts, terminologies and matchmaking instances for
//! property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::concept::{validate_tbox, Axiom, Concept, TBox};
use crate::normal::cnf;
use crate::reasoner::subsumes;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

/// A name that no generated concept or terminology uses.
pub const FRESH_NAME: &str = "Fresh";

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub names: Vec<String>,
    pub roles: Vec<String>,
    pub max_depth: usize,
    pub max_number: u32,
    pub max_width: usize,
    pub max_axioms: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            names: ["A", "B", "C", "D", "E", "F"].map(String::from).to_vec(),
            roles: ["R", "S", "T"].map(String::from).to_vec(),
            max_depth: 2,
            max_number: 3,
            max_width: 4,
            max_axioms: 5,
        }
    }
}

pub fn rng(seed: u64) -> Rng8 {
    Rng8::seed_from_u64(seed)
}

fn atom(cfg: &GenConfig, names: &[String], rng: &mut impl Rng) -> Concept {
    match rng.gen_range(0..10) {
        0..=3 => Concept::Name(names.choose(rng).unwrap().clone()),
        4..=5 => Concept::NegName(names.choose(rng).unwrap().clone()),
        6..=7 => Concept::AtLeast(rng.gen_range(0..=cfg.max_number), cfg.roles.choose(rng).unwrap().clone()),
        _ => Concept::AtMost(rng.gen_range(0..=cfg.max_number), cfg.roles.choose(rng).unwrap().clone()),
    }
}

fn concept_over(cfg: &GenConfig, names: &[String], depth: usize, rng: &mut impl Rng) -> Concept {
    let width = rng.gen_range(1..=cfg.max_width);
    let parts: Vec<Concept> = (0..width)
        .map(|_| {
            let roll = rng.gen_range(0..100);
            if depth > 0 && roll < 25 {
                Concept::All(
                    cfg.roles.choose(rng).unwrap().clone(),
                    Box::new(concept_over(cfg, names, depth - 1, rng)),
                )
            } else if roll < 27 {
                Concept::Top
            } else if roll < 28 {
                Concept::Bottom
            } else {
                atom(cfg, names, rng)
            }
        })
        .collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        Concept::And(parts)
    }
}

/// A random concept over the configured vocabulary.
pub fn random_concept(cfg: &GenConfig, rng: &mut impl Rng) -> Concept {
    concept_over(cfg, &cfg.names, cfg.max_depth, rng)
}

/// A random acyclic terminology: the body of an axiom for the `i`-th name
/// only mentions later names, and one disjoint group joins undefined names.
pub fn random_tbox(cfg: &GenConfig, rng: &mut impl Rng) -> TBox {
    loop {
        let count = rng.gen_range(0..=cfg.max_axioms);
        let mut lhs: Vec<usize> = (0..cfg.names.len()).collect();
        lhs.shuffle(rng);
        lhs.truncate(count.min(cfg.names.len()));
        let mut axioms = Vec::new();
        let mut defined = Vec::new();
        for &i in &lhs {
            let later = &cfg.names[i + 1..];
            if later.is_empty() {
                continue;
            }
            let shallow = GenConfig {
                max_depth: 1,
                max_width: 2,
                ..cfg.clone()
            };
            let body = concept_over(&shallow, later, 1, rng);
            if rng.gen_bool(0.3) {
                defined.push(cfg.names[i].clone());
                axioms.push(Axiom::definition(cfg.names[i].clone(), body));
            } else {
                axioms.push(Axiom::inclusion(cfg.names[i].clone(), body));
            }
        }
        let free: Vec<&String> = cfg.names.iter().filter(|n| !defined.contains(n)).collect();
        if free.len() >= 2 && rng.gen_bool(0.7) {
            let k = rng.gen_range(2..=free.len().min(3));
            let group: Vec<String> = free.choose_multiple(rng, k).map(|s| (*s).clone()).collect();
            axioms.push(Axiom::disjoint("g", group));
        }
        if let Ok(t) = validate_tbox(axioms) {
            return t;
        }
    }
}

/// Shuffles every conjunction, at every depth.
pub fn shuffle_conjuncts(c: &Concept, rng: &mut impl Rng) -> Concept {
    match c {
        Concept::And(cs) => {
            let mut cs: Vec<Concept> = cs.iter().map(|c| shuffle_conjuncts(c, rng)).collect();
            cs.shuffle(rng);
            Concept::And(cs)
        }
        Concept::All(r, f) => Concept::All(r.clone(), Box::new(shuffle_conjuncts(f, rng))),
        other => other.clone(),
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub c: Concept,
    pub d: Concept,
    pub t: TBox,
}

fn satisfiable(c: &Concept, t: &TBox) -> bool {
    cnf(c, t).is_ok_and(|n| !n.is_unsat())
}

fn both(c: &Concept, d: &Concept) -> Concept {
    Concept::and([c.clone(), d.clone()])
}

/// Rejection-samples a pair of satisfiable concepts whose conjunction is
/// satisfiable (`compatible`) or not.
pub fn random_pair(cfg: &GenConfig, compatible: bool, with_tbox: bool, rng: &mut impl Rng) -> Instance {
    loop {
        let t = if with_tbox { random_tbox(cfg, rng) } else { TBox::empty() };
        for _ in 0..50 {
            let c = random_concept(cfg, rng);
            let d = random_concept(cfg, rng);
            if satisfiable(&c, &t) && satisfiable(&d, &t) && satisfiable(&both(&c, &d), &t) == compatible {
                return Instance { c, d, t };
            }
        }
    }
}

/// Conjoins extra random conjuncts to `c` so that the result stays
/// satisfiable and, if `compatible_with` is given, compatible with it.
/// Returns `None` if no such extension was found quickly.
pub fn specialize(
    cfg: &GenConfig,
    c: &Concept,
    compatible_with: Option<&Concept>,
    t: &TBox,
    rng: &mut impl Rng,
) -> Option<Concept> {
    for _ in 0..50 {
        let extra = concept_over(cfg, &cfg.names, cfg.max_depth.saturating_sub(1), rng);
        let special = Concept::and([c.clone(), extra]);
        if !satisfiable(&special, t) {
            continue;
        }
        if let Some(d) = compatible_with {
            if !satisfiable(&both(&special, d), t) {
                continue;
            }
        }
        debug_assert!(subsumes(c, &special, t).unwrap_or(true));
        return Some(special);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::quantification_nesting;

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = GenConfig::default();
        let sample = |seed| {
            let mut r = rng(seed);
            (0..5).map(|_| random_concept(&cfg, &mut r)).collect::<Vec<_>>()
        };
        assert_eq!(sample(7), sample(7));
        assert_ne!(sample(7), sample(8));
    }

    #[test]
    fn respects_bounds() {
        let cfg = GenConfig::default();
        let mut r = rng(1);
        for _ in 0..200 {
            let c = random_concept(&cfg, &mut r);
            assert!(quantification_nesting(&c) <= cfg.max_depth);
            assert!(c.max_bound() <= cfg.max_number);
            assert!(!c.concept_names().contains(FRESH_NAME));
            let t = random_tbox(&cfg, &mut r);
            assert!(t.axioms().len() <= cfg.max_axioms + 1);
        }
    }

    #[test]
    fn pairs_have_the_requested_kind() {
        let cfg = GenConfig::default();
        let mut r = rng(3);
        for compatible in [true, false] {
            let inst = random_pair(&cfg, compatible, true, &mut r);
            let joined = Concept::and([inst.c.clone(), inst.d.clone()]);
            assert_eq!(satisfiable(&joined, &inst.t), compatible);
        }
    }
}
