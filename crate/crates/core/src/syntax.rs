//! S-expression syntax for concepts and `.kb` files.
//!
//! ```text
//! concept := TOP | BOTTOM | name | (not name) | (and concept concept+)
//!          | (all role concept) | (at-least n role) | (at-most n role)
//!          | (exactly n role)
//! form    := (define Name concept) | (primitive Name concept)
//!          | (disjoint label Name+) | (instance id demand|supply concept)
//! ```
//!
//! `;` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concept::{validate_tbox, Axiom, Concept, TBox, TBoxErrors, MAX_BOUND};

/// Location of a token in the source text. Offsets are byte offsets, lines
/// and columns are 1-based (columns count characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    UnexpectedEof,
    UnexpectedToken,
    UnexpectedChar,
    InvalidIdentifier,
    NegationOfNonName,
    NegativeNumber,
    NumberTooLarge,
    UnknownForm,
    WrongArity,
    DuplicateInstance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl SyntaxError {
    fn new(kind: SyntaxErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        SyntaxError {
            kind,
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self, ch: char) {
        self.pos += ch.len_utf8();
        if ch == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    fn here(&self) -> SourceSpan {
        SourceSpan {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn skip_trivia(&mut self) {
        let mut in_comment = false;
        while let Some(ch) = self.src[self.pos..].chars().next() {
            if in_comment {
                if ch == '\n' {
                    in_comment = false;
                }
                self.bump(ch);
            } else if ch == ';' {
                in_comment = true;
                self.bump(ch);
            } else if ch.is_whitespace() {
                self.bump(ch);
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<(Tok<'a>, SourceSpan)>, SyntaxError> {
        self.skip_trivia();
        let mut span = self.here();
        let Some(ch) = self.src[self.pos..].chars().next() else {
            return Ok(None);
        };
        let tok = match ch {
            '(' => {
                self.bump(ch);
                Tok::Open
            }
            ')' => {
                self.bump(ch);
                Tok::Close
            }
            c if c.is_ascii_alphanumeric() || c == '-' || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                        self.bump(c);
                    } else {
                        break;
                    }
                }
                Tok::Atom(&self.src[start..self.pos])
            }
            other => {
                let mut end = span;
                end.end = self.pos + other.len_utf8();
                return Err(SyntaxError::new(
                    SyntaxErrorKind::UnexpectedChar,
                    end,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        span.end = self.pos;
        Ok(Some((tok, span)))
    }
}

/// A parsed s-expression with spans.
#[derive(Debug, Clone)]
enum Sexp<'a> {
    Atom(&'a str, SourceSpan),
    List(Vec<Sexp<'a>>, SourceSpan),
}

impl<'a> Sexp<'a> {
    fn span(&self) -> SourceSpan {
        match self {
            Sexp::Atom(_, s) | Sexp::List(_, s) => *s,
        }
    }
}

fn read_sexp<'a>(
    lx: &mut Lexer<'a>,
    first: (Tok<'a>, SourceSpan),
) -> Result<Sexp<'a>, SyntaxError> {
    match first {
        (Tok::Atom(a), span) => Ok(Sexp::Atom(a, span)),
        (Tok::Close, span) => Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            span,
            "unexpected `)`",
        )),
        (Tok::Open, open) => {
            let mut items = Vec::new();
            loop {
                match lx.next()? {
                    None => {
                        return Err(SyntaxError::new(
                            SyntaxErrorKind::UnexpectedEof,
                            lx.here(),
                            "unclosed `(`",
                        ))
                    }
                    Some((Tok::Close, close)) => {
                        let span = SourceSpan {
                            end: close.end,
                            ..open
                        };
                        return Ok(Sexp::List(items, span));
                    }
                    Some(tok) => items.push(read_sexp(lx, tok)?),
                }
            }
        }
    }
}

fn read_all(src: &str) -> Result<Vec<Sexp<'_>>, SyntaxError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    while let Some(tok) = lx.next()? {
        out.push(read_sexp(&mut lx, tok)?);
    }
    Ok(out)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

const RESERVED: [&str; 2] = ["TOP", "BOTTOM"];

fn identifier(s: &Sexp<'_>, what: &str) -> Result<String, SyntaxError> {
    match s {
        Sexp::Atom(a, _) if is_identifier(a) && !RESERVED.contains(a) => Ok((*a).to_string()),
        Sexp::Atom(a, span) => Err(SyntaxError::new(
            SyntaxErrorKind::InvalidIdentifier,
            *span,
            format!("`{a}` is not a valid {what}"),
        )),
        Sexp::List(_, span) => Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            *span,
            format!("expected {what}, found a list"),
        )),
    }
}

fn number(s: &Sexp<'_>) -> Result<u32, SyntaxError> {
    match s {
        Sexp::Atom(a, span) => {
            if let Some(rest) = a.strip_prefix('-') {
                if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(SyntaxError::new(
                        SyntaxErrorKind::NegativeNumber,
                        *span,
                        format!("number restrictions need a non-negative bound, found `{a}`"),
                    ));
                }
            }
            if a.is_empty() || !a.bytes().all(|b| b.is_ascii_digit()) {
                return Err(SyntaxError::new(
                    SyntaxErrorKind::UnexpectedToken,
                    *span,
                    format!("expected a number, found `{a}`"),
                ));
            }
            match a.parse::<u64>() {
                Ok(n) if n <= MAX_BOUND as u64 => Ok(n as u32),
                _ => Err(SyntaxError::new(
                    SyntaxErrorKind::NumberTooLarge,
                    *span,
                    format!("bound `{a}` exceeds {MAX_BOUND}"),
                )),
            }
        }
        Sexp::List(_, span) => Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            *span,
            "expected a number, found a list",
        )),
    }
}

fn arity(items: &[Sexp<'_>], span: SourceSpan, head: &str, expected: usize) -> Result<(), SyntaxError> {
    if items.len() != expected + 1 {
        return Err(SyntaxError::new(
            SyntaxErrorKind::WrongArity,
            span,
            format!("`{head}` takes {expected} argument(s), found {}", items.len() - 1),
        ));
    }
    Ok(())
}

fn head<'a>(items: &'a [Sexp<'_>], span: SourceSpan) -> Result<&'a str, SyntaxError> {
    match items.first() {
        Some(Sexp::Atom(a, _)) => Ok(a),
        Some(other) => Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            other.span(),
            "expected a keyword",
        )),
        None => Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            span,
            "empty list",
        )),
    }
}

fn concept_of(s: &Sexp<'_>) -> Result<Concept, SyntaxError> {
    match s {
        Sexp::Atom("TOP", _) => Ok(Concept::Top),
        Sexp::Atom("BOTTOM", _) => Ok(Concept::Bottom),
        Sexp::Atom(..) => Ok(Concept::Name(identifier(s, "concept name")?)),
        Sexp::List(items, span) => {
            let span = *span;
            let kw = head(items, span)?;
            match kw {
                "not" => {
                    arity(items, span, kw, 1)?;
                    match &items[1] {
                        Sexp::Atom(a, _) if !RESERVED.contains(a) => {
                            Ok(Concept::NegName(identifier(&items[1], "concept name")?))
                        }
                        other => Err(SyntaxError::new(
                            SyntaxErrorKind::NegationOfNonName,
                            other.span(),
                            "only concept names can be negated",
                        )),
                    }
                }
                "and" => {
                    if items.len() < 3 {
                        return Err(SyntaxError::new(
                            SyntaxErrorKind::WrongArity,
                            span,
                            "`and` needs at least two conjuncts",
                        ));
                    }
                    Ok(Concept::And(
                        items[1..].iter().map(concept_of).collect::<Result<_, _>>()?,
                    ))
                }
                "all" => {
                    arity(items, span, kw, 2)?;
                    let role = identifier(&items[1], "role name")?;
                    Ok(Concept::All(role, Box::new(concept_of(&items[2])?)))
                }
                "at-least" | "at-most" | "exactly" => {
                    arity(items, span, kw, 2)?;
                    let n = number(&items[1])?;
                    let role = identifier(&items[2], "role name")?;
                    Ok(match kw {
                        "at-least" => Concept::AtLeast(n, role),
                        "at-most" => Concept::AtMost(n, role),
                        _ => Concept::exactly(n, role),
                    })
                }
                other => Err(SyntaxError::new(
                    SyntaxErrorKind::UnknownForm,
                    items[0].span(),
                    format!("unknown concept constructor `{other}`"),
                )),
            }
        }
    }
}

/// Parses exactly one concept.
pub fn parse_concept(text: &str) -> Result<Concept, SyntaxError> {
    let mut lx = Lexer::new(text);
    let Some(first) = lx.next()? else {
        return Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedEof,
            lx.here(),
            "expected a concept",
        ));
    };
    let sexp = read_sexp(&mut lx, first)?;
    if let Some((_, span)) = lx.next()? {
        return Err(SyntaxError::new(
            SyntaxErrorKind::UnexpectedToken,
            span,
            "trailing input after concept",
        ));
    }
    concept_of(&sexp)
}

/// Which side of the marketplace an advertisement belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Demand,
    Supply,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Demand => "demand",
            Side::Supply => "supply",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advertisement {
    pub id: String,
    pub side: Side,
    pub concept: Concept,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub tbox: TBox,
    pub advertisements: Vec<Advertisement>,
}

impl KnowledgeBase {
    pub fn advertisement(&self, id: &str) -> Option<&Advertisement> {
        self.advertisements.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    InvalidTBox(#[from] TBoxErrors),
}

/// Parses a `.kb` file and validates its terminology.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, KbError> {
    let mut axioms = Vec::new();
    let mut advertisements: Vec<Advertisement> = Vec::new();
    let mut ids = BTreeSet::new();
    for form in read_all(text)? {
        let Sexp::List(items, span) = &form else {
            return Err(SyntaxError::new(
                SyntaxErrorKind::UnexpectedToken,
                form.span(),
                "expected a top-level form",
            )
            .into());
        };
        let span = *span;
        let kw = head(items, span)?;
        match kw {
            "define" | "primitive" => {
                arity(items, span, kw, 2)?;
                let name = identifier(&items[1], "concept name")?;
                let body = concept_of(&items[2])?;
                axioms.push(if kw == "define" {
                    Axiom::Definition { name, body }
                } else {
                    Axiom::Inclusion { name, body }
                });
            }
            "disjoint" => {
                if items.len() < 3 {
                    return Err(SyntaxError::new(
                        SyntaxErrorKind::WrongArity,
                        span,
                        "`disjoint` needs a label and at least one name",
                    )
                    .into());
                }
                let label = identifier(&items[1], "label")?;
                let names = items[2..]
                    .iter()
                    .map(|s| identifier(s, "concept name"))
                    .collect::<Result<Vec<_>, _>>()?;
                axioms.push(Axiom::DisjointGroup { label, names });
            }
            "instance" => {
                arity(items, span, kw, 3)?;
                let id = identifier(&items[1], "instance id")?;
                let side = match &items[2] {
                    Sexp::Atom("demand", _) => Side::Demand,
                    Sexp::Atom("supply", _) => Side::Supply,
                    other => {
                        return Err(SyntaxError::new(
                            SyntaxErrorKind::UnexpectedToken,
                            other.span(),
                            "expected `demand` or `supply`",
                        )
                        .into())
                    }
                };
                if !ids.insert(id.clone()) {
                    return Err(SyntaxError::new(
                        SyntaxErrorKind::DuplicateInstance,
                        items[1].span(),
                        format!("instance `{id}` is bound twice"),
                    )
                    .into());
                }
                let concept = concept_of(&items[3])?;
                advertisements.push(Advertisement { id, side, concept });
            }
            other => {
                return Err(SyntaxError::new(
                    SyntaxErrorKind::UnknownForm,
                    items[0].span(),
                    format!("unknown form `{other}`"),
                )
                .into())
            }
        }
    }
    let tbox = validate_tbox(axioms)?;
    Ok(KnowledgeBase {
        tbox,
        advertisements,
    })
}

/// Renders a concept in the syntax accepted by [`parse_concept`].
pub fn render_concept(c: &Concept) -> String {
    let mut out = String::new();
    render_into(c, &mut out);
    out
}

fn render_into(c: &Concept, out: &mut String) {
    use std::fmt::Write;
    match c {
        Concept::Top => out.push_str("TOP"),
        Concept::Bottom => out.push_str("BOTTOM"),
        Concept::Name(n) => out.push_str(n),
        Concept::NegName(n) => {
            let _ = write!(out, "(not {n})");
        }
        Concept::AtLeast(n, r) => {
            let _ = write!(out, "(at-least {n} {r})");
        }
        Concept::AtMost(n, r) => {
            let _ = write!(out, "(at-most {n} {r})");
        }
        Concept::All(r, f) => {
            let _ = write!(out, "(all {r} ");
            render_into(f, out);
            out.push(')');
        }
        Concept::And(cs) => {
            out.push_str("(and");
            for c in cs {
                out.push(' ');
                render_into(c, out);
            }
            out.push(')');
        }
    }
}

/// Renders an axiom as a `.kb` form.
pub fn render_axiom(ax: &Axiom) -> String {
    match ax {
        Axiom::Definition { name, body } => format!("(define {name} {})", render_concept(body)),
        Axiom::Inclusion { name, body } => format!("(primitive {name} {})", render_concept(body)),
        Axiom::DisjointGroup { label, names } => format!("(disjoint {label} {})", names.join(" ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_examples() {
        assert_eq!(
            parse_concept("(and Computer (at-least 2 hasCPU))").unwrap(),
            Concept::And(vec![Concept::name("Computer"), Concept::at_least(2, "hasCPU")])
        );
        assert_eq!(parse_concept("TOP").unwrap(), Concept::Top);
        assert_eq!(
            parse_concept("(and (at-most 1 R) (all R (not A)))").unwrap(),
            Concept::And(vec![
                Concept::at_most(1, "R"),
                Concept::all("R", Concept::neg("A"))
            ])
        );
    }

    #[test]
    fn exactly_expands() {
        assert_eq!(
            parse_concept("(exactly 1 hasOS)").unwrap(),
            Concept::exactly(1, "hasOS")
        );
    }

    #[test]
    fn render_forms() {
        assert_eq!(render_concept(&Concept::Top), "TOP");
        assert_eq!(render_concept(&Concept::at_least(2, "hasCPU")), "(at-least 2 hasCPU)");
        assert_eq!(
            render_concept(&Concept::And(vec![
                Concept::name("A"),
                Concept::all("R", Concept::Bottom)
            ])),
            "(and A (all R BOTTOM))"
        );
    }

    #[test]
    fn errors_carry_spans() {
        let e = parse_concept("(not (and A B))").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::NegationOfNonName);
        assert_eq!((e.span.line, e.span.column, e.span.start), (1, 6, 5));

        let e = parse_concept("(at-least -1 R)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::NegativeNumber);

        let e = parse_concept("(and A\n  (all R B)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnexpectedEof);
        assert_eq!(e.span.line, 2);

        let e = parse_concept("(and A)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::WrongArity);

        let e = parse_concept("A B").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnexpectedToken);
        assert_eq!(e.span.column, 3);

        let e = parse_concept("(or A B)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnknownForm);

        let e = parse_concept("A#").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnexpectedChar);

        let e = parse_concept("(at-least 99999999999 R)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::NumberTooLarge);

        let e = parse_concept("(not TOP)").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::NegationOfNonName);
    }

    #[test]
    fn kb_forms() {
        let kb = parse_kb(
            "; computers\n(define Server (and Computer (at-least 2 hasCPU)))\n\
             (primitive Computer (at-least 1 hasStorageDevice))\n\
             (disjoint cpus AMD Intel)\n\
             (instance o1 supply Server)\n",
        )
        .unwrap();
        assert_eq!(kb.tbox.axioms().len(), 3);
        assert_eq!(
            kb.tbox.axioms()[2],
            Axiom::disjoint("cpus", ["AMD", "Intel"])
        );
        assert_eq!(kb.advertisements[0].side, Side::Supply);
        assert_eq!(kb.advertisement("o1").unwrap().concept, Concept::name("Server"));
    }

    #[test]
    fn empty_kb() {
        let kb = parse_kb("  ; nothing\n").unwrap();
        assert!(kb.tbox.is_empty());
        assert!(kb.advertisements.is_empty());
    }

    #[test]
    fn kb_errors() {
        assert!(matches!(
            parse_kb("(define A B) (define B A)"),
            Err(KbError::InvalidTBox(_))
        ));
        let e = parse_kb("(instance x demand A)\n(instance x supply B)").unwrap_err();
        match e {
            KbError::Syntax(s) => {
                assert_eq!(s.kind, SyntaxErrorKind::DuplicateInstance);
                assert_eq!(s.span.line, 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_kb("(frobnicate A)"), Err(KbError::Syntax(_))));
    }

    #[test]
    fn axioms_render_and_reparse() {
        let src = "(define Server (and Computer (at-least 2 hasCPU)))\n(disjoint cpus AMD Intel)";
        let kb = parse_kb(src).unwrap();
        let rendered: Vec<String> = kb.tbox.axioms().iter().map(render_axiom).collect();
        assert_eq!(rendered.join("\n"), src);
    }

    pub(crate) fn arb_concept() -> impl Strategy<Value = Concept> {
        let name = prop::sample::select(vec!["A", "B", "C", "Long_name-1"]);
        let role = prop::sample::select(vec!["R", "S", "hasCPU"]);
        let leaf = prop_oneof![
            Just(Concept::Top),
            Just(Concept::Bottom),
            name.clone().prop_map(Concept::name),
            name.prop_map(Concept::neg),
            (0u32..5, role.clone()).prop_map(|(n, r)| Concept::at_least(n, r)),
            (0u32..5, role.clone()).prop_map(|(n, r)| Concept::at_most(n, r)),
        ];
        leaf.prop_recursive(3, 24, 4, move |inner| {
            prop_oneof![
                (role.clone(), inner.clone()).prop_map(|(r, c)| Concept::all(r, c)),
                prop::collection::vec(inner, 2..4).prop_map(Concept::And),
            ]
        })
    }

    proptest! {
        #[test]
        fn round_trip(c in arb_concept()) {
            prop_assert_eq!(parse_concept(&render_concept(&c)).unwrap(), c);
        }

        #[test]
        fn error_spans_inside_input(s in "[()a-zA-Z0-9 ;#-]{0,30}") {
            if let Err(e) = parse_concept(&s) {
                prop_assert!(e.span.start <= e.span.end);
                prop_assert!(e.span.end <= s.len());
            }
        }
    }
}
