//! ALN concept expressions and simple terminologies.
//!
//! A [`Concept`] is the raw syntax tree exactly as written by the user (up to
//! flattening of nested conjunctions). A [`TBox`] is a validated, acyclic set
//! of definitions, inclusions and disjointness groups over concept names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest bound accepted in a number restriction.
pub const MAX_BOUND: u32 = i32::MAX as u32;

/// An ALN concept description.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Concept {
    Top,
    Bottom,
    Name(String),
    /// Atomic negation. Only concept names can be negated.
    NegName(String),
    AtLeast(u32, String),
    AtMost(u32, String),
    All(String, Box<Concept>),
    /// Flat conjunction of at least two conjuncts, kept in input order.
    And(Vec<Concept>),
}

impl Concept {
    pub fn name(n: impl Into<String>) -> Self {
        Concept::Name(n.into())
    }

    pub fn neg(n: impl Into<String>) -> Self {
        Concept::NegName(n.into())
    }

    pub fn at_least(n: u32, role: impl Into<String>) -> Self {
        Concept::AtLeast(n, role.into())
    }

    pub fn at_most(n: u32, role: impl Into<String>) -> Self {
        Concept::AtMost(n, role.into())
    }

    /// `(= n R)`, which is sugar for `(≥ n R) ⊓ (≤ n R)`.
    pub fn exactly(n: u32, role: impl Into<String>) -> Self {
        let role = role.into();
        Concept::And(vec![
            Concept::AtLeast(n, role.clone()),
            Concept::AtMost(n, role),
        ])
    }

    pub fn all(role: impl Into<String>, filler: Concept) -> Self {
        Concept::All(role.into(), Box::new(filler))
    }

    /// Builds a conjunction, splicing nested conjunctions in place.
    ///
    /// Zero conjuncts give `Top` and a single conjunct is returned unchanged.
    pub fn and<I: IntoIterator<Item = Concept>>(conjuncts: I) -> Self {
        let mut flat = Vec::new();
        for c in conjuncts {
            match c {
                Concept::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Concept::Top,
            1 => flat.pop().unwrap(),
            _ => Concept::And(flat),
        }
    }

    /// The top-level conjuncts of this concept. `Top` has none.
    pub fn conjuncts(&self) -> Vec<Concept> {
        match self {
            Concept::Top => Vec::new(),
            Concept::And(cs) => cs.clone(),
            other => vec![other.clone()],
        }
    }

    /// True for names, negated names and number restrictions.
    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Concept::Name(_) | Concept::NegName(_) | Concept::AtLeast(..) | Concept::AtMost(..)
        )
    }

    pub fn contains_bottom(&self) -> bool {
        match self {
            Concept::Bottom => true,
            Concept::All(_, f) => f.contains_bottom(),
            Concept::And(cs) => cs.iter().any(Concept::contains_bottom),
            _ => false,
        }
    }

    /// Number of syntax-tree nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Concept::All(_, f) => 1 + f.node_count(),
            Concept::And(cs) => 1 + cs.iter().map(Concept::node_count).sum::<usize>(),
            _ => 1,
        }
    }

    /// Concept names occurring anywhere, negated or not.
    pub fn concept_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::Name(n) | Concept::NegName(n) => {
                out.insert(n.clone());
            }
            Concept::All(_, f) => f.collect_names(out),
            Concept::And(cs) => cs.iter().for_each(|c| c.collect_names(out)),
            _ => {}
        }
    }

    /// Concept names occurring positively (the ones unfolding can expand).
    pub fn positive_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_positive(&mut out);
        out
    }

    fn collect_positive(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::Name(n) => {
                out.insert(n.clone());
            }
            Concept::All(_, f) => f.collect_positive(out),
            Concept::And(cs) => cs.iter().for_each(|c| c.collect_positive(out)),
            _ => {}
        }
    }

    pub fn max_bound(&self) -> u32 {
        match self {
            Concept::AtLeast(n, _) | Concept::AtMost(n, _) => *n,
            Concept::All(_, f) => f.max_bound(),
            Concept::And(cs) => cs.iter().map(Concept::max_bound).max().unwrap_or(0),
            _ => 0,
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render_concept(self))
    }
}

/// Number of atomic concepts (names, negated names, number restrictions).
/// `⊤` and `⊥` have length zero.
pub fn length(c: &Concept) -> usize {
    match c {
        Concept::Top | Concept::Bottom => 0,
        Concept::Name(_) | Concept::NegName(_) | Concept::AtLeast(..) | Concept::AtMost(..) => 1,
        Concept::All(_, f) => length(f),
        Concept::And(cs) => cs.iter().map(length).sum(),
    }
}

/// Depth of nested universal quantifications.
pub fn quantification_nesting(c: &Concept) -> usize {
    match c {
        Concept::All(_, f) => 1 + quantification_nesting(f),
        Concept::And(cs) => cs.iter().map(quantification_nesting).max().unwrap_or(0),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// `A ≡ C`
    Definition { name: String, body: Concept },
    /// `A ⊑ C`
    Inclusion { name: String, body: Concept },
    /// `disj(A₁, …, Aₖ)`. The label has no semantics.
    DisjointGroup { label: String, names: Vec<String> },
}

impl Axiom {
    pub fn definition(name: impl Into<String>, body: Concept) -> Self {
        Axiom::Definition { name: name.into(), body }
    }

    pub fn inclusion(name: impl Into<String>, body: Concept) -> Self {
        Axiom::Inclusion { name: name.into(), body }
    }

    pub fn disjoint<S: Into<String>>(label: impl Into<String>, names: impl IntoIterator<Item = S>) -> Self {
        Axiom::DisjointGroup {
            label: label.into(),
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    fn lhs(&self) -> Option<&str> {
        match self {
            Axiom::Definition { name, .. } | Axiom::Inclusion { name, .. } => Some(name),
            Axiom::DisjointGroup { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TBoxError {
    #[error("cyclic terminology: {}", .0.join(" -> "))]
    CyclicTBox(Vec<String>),
    #[error("concept name `{0}` appears on the left-hand side of more than one axiom")]
    DuplicateDefinition(String),
    #[error("defined concept `{0}` cannot appear in a disjoint group")]
    DefinedNameInDisjointGroup(String),
    #[error("disjoint group `{0}` needs at least two distinct names")]
    DegenerateDisjointGroup(String),
}

/// Every violation found while validating a set of axioms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid terminology: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct TBoxErrors(pub Vec<TBoxError>);

/// A validated simple (acyclic) terminology.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TBox {
    axioms: Vec<Axiom>,
    definitions: BTreeMap<String, Concept>,
    inclusions: BTreeMap<String, Concept>,
    disjoint_with: BTreeMap<String, BTreeSet<String>>,
    dependencies: BTreeMap<String, BTreeSet<String>>,
    depth: usize,
}

impl TBox {
    pub fn empty() -> Self {
        TBox::default()
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Arcs `A → B` of the dependency graph: `A` is a left-hand side and `B`
    /// occurs somewhere in its right-hand side.
    pub fn dependency_graph(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.dependencies
    }

    pub fn definition(&self, name: &str) -> Option<&Concept> {
        self.definitions.get(name)
    }

    pub fn inclusion(&self, name: &str) -> Option<&Concept> {
        self.inclusions.get(name)
    }

    /// Names declared disjoint from `name`, in sorted order.
    pub fn disjoint_with(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.disjoint_with.get(name)
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.definitions.contains_key(name)
    }

    /// All concept names mentioned by any axiom.
    pub fn signature(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for ax in &self.axioms {
            match ax {
                Axiom::Definition { name, body } | Axiom::Inclusion { name, body } => {
                    out.insert(name.clone());
                    out.extend(body.concept_names());
                }
                Axiom::DisjointGroup { names, .. } => out.extend(names.iter().cloned()),
            }
        }
        out
    }

    /// Returns a new validated terminology with `extra` appended.
    pub fn extended(&self, extra: impl IntoIterator<Item = Axiom>) -> Result<TBox, TBoxErrors> {
        let mut axioms = self.axioms.clone();
        axioms.extend(extra);
        validate_tbox(axioms)
    }
}

/// Checks the simple-TBox restrictions and builds the dependency graph.
pub fn validate_tbox(axioms: Vec<Axiom>) -> Result<TBox, TBoxErrors> {
    let mut errors = Vec::new();
    let mut definitions = BTreeMap::new();
    let mut inclusions = BTreeMap::new();
    let mut seen_lhs = BTreeSet::new();

    for ax in &axioms {
        if let Some(lhs) = ax.lhs() {
            if !seen_lhs.insert(lhs.to_string()) {
                errors.push(TBoxError::DuplicateDefinition(lhs.to_string()));
                continue;
            }
        }
        match ax {
            Axiom::Definition { name, body } => {
                definitions.insert(name.clone(), body.clone());
            }
            Axiom::Inclusion { name, body } => {
                inclusions.insert(name.clone(), body.clone());
            }
            Axiom::DisjointGroup { .. } => {}
        }
    }

    let mut disjoint_with: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for ax in &axioms {
        if let Axiom::DisjointGroup { label, names } = ax {
            let distinct: BTreeSet<&String> = names.iter().collect();
            if distinct.len() < 2 {
                errors.push(TBoxError::DegenerateDisjointGroup(label.clone()));
            }
            for n in &distinct {
                if definitions.contains_key(n.as_str()) {
                    errors.push(TBoxError::DefinedNameInDisjointGroup((*n).clone()));
                }
            }
            for a in &distinct {
                for b in &distinct {
                    if a != b {
                        disjoint_with
                            .entry((*a).clone())
                            .or_default()
                            .insert((*b).clone());
                    }
                }
            }
        }
    }

    let mut dependencies: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (name, body) in definitions.iter().chain(inclusions.iter()) {
        dependencies.insert(name.clone(), body.concept_names());
    }

    let depth = match longest_path(&dependencies) {
        Ok(d) => d,
        Err(cycle) => {
            errors.push(TBoxError::CyclicTBox(cycle));
            0
        }
    };

    if !errors.is_empty() {
        return Err(TBoxErrors(errors));
    }
    Ok(TBox {
        axioms,
        definitions,
        inclusions,
        disjoint_with,
        dependencies,
        depth,
    })
}

/// Longest path (in arcs) of an acyclic graph, or a witness cycle.
fn longest_path(graph: &BTreeMap<String, BTreeSet<String>>) -> Result<usize, Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done(usize),
    }

    fn visit(
        node: &str,
        graph: &BTreeMap<String, BTreeSet<String>>,
        marks: &mut BTreeMap<String, Mark>,
        stack: &mut Vec<String>,
    ) -> Result<usize, Vec<String>> {
        match marks.get(node) {
            Some(Mark::Done(d)) => return Ok(*d),
            Some(Mark::Active) => {
                let start = stack.iter().position(|n| n == node).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(node.to_string());
                return Err(cycle);
            }
            None => {}
        }
        marks.insert(node.to_string(), Mark::Active);
        stack.push(node.to_string());
        let mut best = 0;
        if let Some(succs) = graph.get(node) {
            for s in succs {
                best = best.max(1 + visit(s, graph, marks, stack)?);
            }
        }
        stack.pop();
        marks.insert(node.to_string(), Mark::Done(best));
        Ok(best)
    }

    let mut marks = BTreeMap::new();
    let mut depth = 0;
    for node in graph.keys() {
        let mut stack = Vec::new();
        depth = depth.max(visit(node, graph, &mut marks, &mut stack)?);
    }
    Ok(depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Concept {
        Concept::name(s)
    }

    #[test]
    fn computer_tbox_is_valid_with_depth_one() {
        let t = validate_tbox(vec![
            Axiom::definition("Server", Concept::and([n("Computer"), Concept::at_least(2, "hasCPU")])),
            Axiom::inclusion("Computer", Concept::at_least(1, "hasStorageDevice")),
            Axiom::disjoint("cpus", ["AMD", "Intel"]),
        ])
        .unwrap();
        assert_eq!(t.depth(), 1);
        assert!(t.is_defined("Server"));
        assert_eq!(t.disjoint_with("Intel").unwrap().iter().collect::<Vec<_>>(), vec!["AMD"]);
    }

    #[test]
    fn empty_tbox() {
        let t = validate_tbox(vec![]).unwrap();
        assert_eq!(t.depth(), 0);
        assert!(t.is_empty());
    }

    #[test]
    fn cycle_is_reported_with_witness() {
        let err = validate_tbox(vec![
            Axiom::definition("A", n("B")),
            Axiom::definition("B", n("A")),
        ])
        .unwrap_err();
        assert_eq!(
            err.0,
            vec![TBoxError::CyclicTBox(vec!["A".into(), "B".into(), "A".into()])]
        );
    }

    #[test]
    fn self_reference_through_filler_is_a_cycle() {
        let err = validate_tbox(vec![Axiom::inclusion("A", Concept::all("R", n("A")))]).unwrap_err();
        assert!(matches!(err.0[0], TBoxError::CyclicTBox(_)));
    }

    #[test]
    fn duplicate_lhs_and_defined_name_in_group() {
        let err = validate_tbox(vec![
            Axiom::definition("A", n("B")),
            Axiom::inclusion("A", n("C")),
            Axiom::disjoint("g", ["A", "D"]),
        ])
        .unwrap_err();
        assert!(err.0.contains(&TBoxError::DuplicateDefinition("A".into())));
        assert!(err.0.contains(&TBoxError::DefinedNameInDisjointGroup("A".into())));
    }

    #[test]
    fn degenerate_group() {
        let err = validate_tbox(vec![Axiom::disjoint("g", ["A", "A"])]).unwrap_err();
        assert_eq!(err.0, vec![TBoxError::DegenerateDisjointGroup("g".into())]);
    }

    #[test]
    fn depth_is_longest_chain() {
        let t = validate_tbox(vec![
            Axiom::inclusion("A", n("B")),
            Axiom::inclusion("B", Concept::all("R", n("C"))),
            Axiom::definition("C", n("D")),
            Axiom::inclusion("X", n("D")),
        ])
        .unwrap();
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn lengths() {
        assert_eq!(length(&Concept::Top), 0);
        assert_eq!(length(&Concept::and([n("A1"), n("A2"), n("A")])), 3);
        assert_eq!(length(&Concept::all("R", Concept::Bottom)), 0);
        assert_eq!(length(&Concept::exactly(1, "hasOS")), 2);
    }

    #[test]
    fn nesting() {
        assert_eq!(quantification_nesting(&Concept::at_least(2, "R")), 0);
        assert_eq!(
            quantification_nesting(&Concept::all("R", Concept::all("S", n("A")))),
            2
        );
        assert_eq!(
            quantification_nesting(&Concept::and([n("A"), Concept::all("R", n("A"))])),
            1
        );
    }

    #[test]
    fn and_flattens_and_preserves_order() {
        let c = Concept::and([
            n("B"),
            Concept::and([n("A"), n("C")]),
            Concept::Top,
        ]);
        assert_eq!(c, Concept::And(vec![n("B"), n("A"), n("C"), Concept::Top]));
        assert_eq!(Concept::and([n("A")]), n("A"));
        assert_eq!(Concept::and(Vec::new()), Concept::Top);
    }
}
