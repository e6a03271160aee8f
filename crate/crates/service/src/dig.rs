//! DIG-style XML: concept expressions, tell and ask bodies, and response
//! rendering. Element names are matched by local name, so documents may use
//! the DIG namespace or none.

use std::fmt::Write as _;

use alnmatch::{Axiom, Concept, Side};
use roxmltree::{Document, Node};

/// A request the document root asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    GetIdentifier,
    NewKb { shared: bool, permanent: bool },
    ReleaseKb { uri: String },
    Tells { uri: String, tells: Vec<Tell> },
    Asks { uri: String, asks: Vec<Ask> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tell {
    Axiom(Axiom),
    Instance { id: String, side: Side, concept: Expr },
}

/// A concept, possibly referring to an advertisement stored in the KB.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Concept(Concept),
    Individual(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    Potential,
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AskKind {
    Satisfiable(Expr),
    /// True iff the first expression subsumes the second.
    Subsumes(Expr, Expr),
    MatchType(Expr, Expr),
    Abduce { c: Expr, d: Expr, tbox_step5: bool },
    Contract(Expr, Expr),
    Rank { kind: PenaltyKind, c: Expr, d: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ask {
    pub id: String,
    pub kind: AskKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed(pub String);

fn malformed<T>(msg: impl Into<String>) -> Result<T, Malformed> {
    Err(Malformed(msg.into()))
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(Node::is_element)
}

fn tag<'a>(node: Node<'a, '_>) -> &'a str {
    node.tag_name().name()
}

fn attr<'a>(node: Node<'a, '_>, name: &str) -> Result<&'a str, Malformed> {
    match node.attribute(name) {
        Some(v) => Ok(v),
        None => malformed(format!("<{}> needs a `{name}` attribute", tag(node))),
    }
}

fn name_attr(node: Node<'_, '_>) -> Result<String, Malformed> {
    let v = attr(node, "name")?;
    // Same identifiers as the `.kb` syntax, so every name renders back.
    let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && v != "TOP"
        && v != "BOTTOM";
    if ok {
        Ok(v.to_string())
    } else {
        malformed(format!("`{v}` is not a valid identifier"))
    }
}

fn flag(node: Node<'_, '_>, name: &str, default: bool) -> Result<bool, Malformed> {
    match node.attribute(name) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(v) => malformed(format!("`{name}` must be true or false, got `{v}`")),
    }
}

fn role_of(node: Node<'_, '_>) -> Result<String, Malformed> {
    match elements(node).next() {
        Some(r) if tag(r) == "ratom" => name_attr(r),
        _ => malformed(format!("<{}> must start with a <ratom>", tag(node))),
    }
}

/// Parses one concept element.
pub fn concept(node: Node<'_, '_>) -> Result<Concept, Malformed> {
    let kids: Vec<Node> = elements(node).collect();
    let leaf = |c: Concept| {
        if kids.is_empty() {
            Ok(c)
        } else {
            malformed(format!("<{}> takes no children", tag(node)))
        }
    };
    match tag(node) {
        "top" => leaf(Concept::Top),
        "bottom" => leaf(Concept::Bottom),
        "catom" => leaf(Concept::Name(name_attr(node)?)),
        "not" => match kids.as_slice() {
            [a] if tag(*a) == "catom" => Ok(Concept::NegName(name_attr(*a)?)),
            _ => malformed("<not> applies to a single <catom> only"),
        },
        "and" => {
            let parts = kids.iter().map(|k| concept(*k)).collect::<Result<Vec<_>, _>>()?;
            Ok(match parts.len() {
                0 => Concept::Top,
                1 => parts.into_iter().next().unwrap(),
                _ => Concept::And(parts),
            })
        }
        "all" => {
            let role = role_of(node)?;
            match kids.as_slice() {
                [_, filler] => Ok(Concept::All(role, Box::new(concept(*filler)?))),
                _ => malformed("<all> takes a <ratom> and one concept"),
            }
        }
        t @ ("atleast" | "atmost") => {
            let n: u32 = match attr(node, "num")?.parse() {
                Ok(n) if n <= alnmatch::concept::MAX_BOUND => n,
                _ => return malformed(format!("<{t}> needs a small non-negative `num`")),
            };
            let role = role_of(node)?;
            match kids.as_slice() {
                [_] => {}
                [_, q] if tag(*q) == "top" => {}
                _ => return malformed(format!("<{t}> is unqualified: only <top/> may follow the role")),
            }
            Ok(if t == "atleast" {
                Concept::AtLeast(n, role)
            } else {
                Concept::AtMost(n, role)
            })
        }
        other => malformed(format!("unknown concept element <{other}>")),
    }
}

fn expr(node: Node<'_, '_>) -> Result<Expr, Malformed> {
    if tag(node) == "individual" {
        Ok(Expr::Individual(name_attr(node)?))
    } else {
        concept(node).map(Expr::Concept)
    }
}

fn exprs<const N: usize>(node: Node<'_, '_>) -> Result<[Expr; N], Malformed> {
    let parts = elements(node).map(expr).collect::<Result<Vec<_>, _>>()?;
    let count = parts.len();
    parts
        .try_into()
        .or_else(|_| malformed(format!("<{}> takes {N} concept(s), got {count}", tag(node))))
}

fn tell(node: Node<'_, '_>, anonymous: &mut usize) -> Result<Option<Tell>, Malformed> {
    let kids: Vec<Node> = elements(node).collect();
    let named_body = |kids: &[Node]| -> Result<(String, Concept), Malformed> {
        match kids {
            [lhs, body] if tag(*lhs) == "catom" => Ok((name_attr(*lhs)?, concept(*body)?)),
            _ => malformed(format!("<{}> takes a <catom> and one concept", tag(node))),
        }
    };
    Ok(Some(match tag(node) {
        "defconcept" | "defrole" => {
            name_attr(node)?;
            return Ok(None);
        }
        "equalc" => {
            let (name, body) = named_body(&kids)?;
            Tell::Axiom(Axiom::Definition { name, body })
        }
        "impliesc" => {
            let (name, body) = named_body(&kids)?;
            Tell::Axiom(Axiom::Inclusion { name, body })
        }
        "disjoint" => {
            let names = kids
                .iter()
                .map(|k| {
                    if tag(*k) == "catom" {
                        name_attr(*k)
                    } else {
                        malformed("<disjoint> takes <catom> children only")
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label = match node.attribute("label") {
                Some(l) => l.to_string(),
                None => {
                    *anonymous += 1;
                    format!("disjoint-{anonymous}")
                }
            };
            Tell::Axiom(Axiom::DisjointGroup { label, names })
        }
        "instanceof" => {
            let side = match node.attribute("side").unwrap_or("supply") {
                "supply" => Side::Supply,
                "demand" => Side::Demand,
                v => return malformed(format!("`side` must be supply or demand, got `{v}`")),
            };
            match kids.as_slice() {
                [ind, body] if tag(*ind) == "individual" => Tell::Instance {
                    id: name_attr(*ind)?,
                    side,
                    concept: expr(*body)?,
                },
                _ => return malformed("<instanceof> takes an <individual> and one concept"),
            }
        }
        other => return malformed(format!("unknown tell <{other}>")),
    }))
}

fn ask(node: Node<'_, '_>) -> Result<Ask, Malformed> {
    let id = attr(node, "id")?.to_string();
    let kind = match tag(node) {
        "satisfiable" => {
            let [c] = exprs::<1>(node)?;
            AskKind::Satisfiable(c)
        }
        "subsumes" => {
            let [a, b] = exprs::<2>(node)?;
            AskKind::Subsumes(a, b)
        }
        "matchType" => {
            let [a, b] = exprs::<2>(node)?;
            AskKind::MatchType(a, b)
        }
        "abduce" => {
            let [c, d] = exprs::<2>(node)?;
            AskKind::Abduce {
                c,
                d,
                tbox_step5: flag(node, "tboxStep5", false)?,
            }
        }
        "contract" => {
            let [c, d] = exprs::<2>(node)?;
            AskKind::Contract(c, d)
        }
        "rank" => {
            let kind = match attr(node, "type")? {
                "potential" => PenaltyKind::Potential,
                "partial" => PenaltyKind::Partial,
                v => return malformed(format!("rank type must be potential or partial, got `{v}`")),
            };
            let [c, d] = exprs::<2>(node)?;
            AskKind::Rank { kind, c, d }
        }
        other => return malformed(format!("unknown ask <{other}>")),
    };
    Ok(Ask { id, kind })
}

/// Parses a request document.
pub fn parse_request(text: &str) -> Result<Request, Malformed> {
    let doc = Document::parse(text).map_err(|e| Malformed(format!("not well-formed XML: {e}")))?;
    let root = doc.root_element();
    let uri = || attr(root, "uri").map(str::to_string);
    match tag(root) {
        "getIdentifier" => Ok(Request::GetIdentifier),
        "newKB" => Ok(Request::NewKb {
            shared: flag(root, "shared", true)?,
            permanent: flag(root, "permanent", false)?,
        }),
        "releaseKB" => Ok(Request::ReleaseKb { uri: uri()? }),
        "tells" => {
            let mut anonymous = 0;
            let mut tells = Vec::new();
            for node in elements(root) {
                tells.extend(tell(node, &mut anonymous)?);
            }
            Ok(Request::Tells { uri: uri()?, tells })
        }
        "asks" => Ok(Request::Asks {
            uri: uri()?,
            asks: elements(root).map(ask).collect::<Result<_, _>>()?,
        }),
        other => malformed(format!("unknown request <{other}>")),
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Concept XML in the form [`concept`] reads back.
pub fn render(c: &Concept) -> String {
    let mut out = String::new();
    write_concept(c, &mut out);
    out
}

/// One tell element for an axiom.
pub fn render_axiom(ax: &Axiom) -> String {
    match ax {
        Axiom::Definition { name, body } => {
            format!("<equalc><catom name=\"{}\"/>{}</equalc>", escape(name), render(body))
        }
        Axiom::Inclusion { name, body } => {
            format!("<impliesc><catom name=\"{}\"/>{}</impliesc>", escape(name), render(body))
        }
        Axiom::DisjointGroup { label, names } => {
            let mut out = format!("<disjoint label=\"{}\">", escape(label));
            for n in names {
                let _ = write!(out, "<catom name=\"{}\"/>", escape(n));
            }
            out.push_str("</disjoint>");
            out
        }
    }
}

fn write_concept(c: &Concept, out: &mut String) {
    match c {
        Concept::Top => out.push_str("<top/>"),
        Concept::Bottom => out.push_str("<bottom/>"),
        Concept::Name(a) => {
            let _ = write!(out, "<catom name=\"{}\"/>", escape(a));
        }
        Concept::NegName(a) => {
            let _ = write!(out, "<not><catom name=\"{}\"/></not>", escape(a));
        }
        Concept::AtLeast(n, r) => {
            let _ = write!(out, "<atleast num=\"{n}\"><ratom name=\"{}\"/></atleast>", escape(r));
        }
        Concept::AtMost(n, r) => {
            let _ = write!(out, "<atmost num=\"{n}\"><ratom name=\"{}\"/></atmost>", escape(r));
        }
        Concept::All(r, f) => {
            let _ = write!(out, "<all><ratom name=\"{}\"/>", escape(r));
            write_concept(f, out);
            out.push_str("</all>");
        }
        Concept::And(cs) => {
            out.push_str("<and>");
            for c in cs {
                write_concept(c, out);
            }
            out.push_str("</and>");
        }
    }
}
