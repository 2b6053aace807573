//! Rule-side syntax: templates extend processes with process contexts and
//! quantified sub-templates.

use std::collections::BTreeMap;

use crate::process::{Atom, ElemId, LinkName, Process};

/// Upper bound of a cardinality range. The infinite bound absorbs
/// decrements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    Finite(i64),
    Infinite,
}

impl Bound {
    /// Subtracts `k`; infinity is unchanged.
    pub fn minus(self, k: i64) -> Bound {
        match self {
            Bound::Finite(n) => Bound::Finite(n - k),
            Bound::Infinite => Bound::Infinite,
        }
    }

    pub fn at_least(self, k: i64) -> bool {
        match self {
            Bound::Finite(n) => n >= k,
            Bound::Infinite => true,
        }
    }
}

/// Quantifier label. The empty label is a value of its own so that
/// unlabeled quantifiers group separately from every named label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Empty,
    Named(String),
}

impl Label {
    pub fn as_str(&self) -> &str {
        match self {
            Label::Empty => "",
            Label::Named(s) => s,
        }
    }
}

/// Kind and range of a quantifier. `Star` and `Plus` are surface shorthands
/// that exist only between parsing and desugaring; the rewriting engine
/// never sees them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QuantKind {
    /// `l<lo,hi>`. `lo` may become negative while a rule is being unrolled;
    /// the cardinality condition then decides applicability.
    Card { lo: i64, hi: Bound },
    /// `l<^>`: no embedding of the template may remain.
    NonExist,
    /// `l<*>`: all occurrences, possibly none.
    Star,
    /// `l<+>`: all occurrences, at least one.
    Plus,
}

/// One quantifier occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub label: Label,
    pub kind: QuantKind,
}

impl std::fmt::Display for Quantifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label.as_str())?;
        match self.kind {
            QuantKind::Card { lo, hi: Bound::Finite(hi) } if lo == hi => write!(f, "<{lo}>"),
            QuantKind::Card { lo, hi: Bound::Finite(hi) } => write!(f, "<{lo},{hi}>"),
            QuantKind::Card { lo, hi: Bound::Infinite } => write!(f, "<{lo},>"),
            QuantKind::NonExist => write!(f, "<^>"),
            QuantKind::Star => write!(f, "<*>"),
            QuantKind::Plus => write!(f, "<+>"),
        }
    }
}

/// A quantified sub-template `Q T`.
#[derive(Debug, Clone)]
pub struct QuantifiedPart {
    pub quant: Quantifier,
    pub body: Template,
    /// Set once an application has fixed this part's replica count. Settled
    /// parts are residuals: the cardinality condition still reads their
    /// bounds, but they are never unrolled or matched again.
    pub settled: bool,
}

/// Membrane inside a template.
#[derive(Debug, Clone)]
pub struct TMembrane {
    pub id: ElemId,
    pub content: Template,
}

impl TMembrane {
    pub fn new(content: Template) -> Self {
        TMembrane {
            id: ElemId::fresh(),
            content,
        }
    }
}

/// Process context occurrence `$name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRef {
    pub name: String,
}

/// One template level: atoms, membranes, contexts, and quantified parts.
#[derive(Debug, Clone, Default)]
pub struct Template {
    pub atoms: Vec<Atom>,
    pub membranes: Vec<TMembrane>,
    pub contexts: Vec<ContextRef>,
    pub quantified: Vec<QuantifiedPart>,
}

impl Template {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
            && self.membranes.is_empty()
            && self.contexts.is_empty()
            && self.quantified.is_empty()
    }

    /// Lifts a ground process into a template.
    pub fn from_process(p: &Process) -> Template {
        Template {
            atoms: p.atoms.clone(),
            membranes: p
                .membranes
                .iter()
                .map(|m| TMembrane {
                    id: m.id,
                    content: Template::from_process(&m.content),
                })
                .collect(),
            contexts: Vec::new(),
            quantified: Vec::new(),
        }
    }

    /// Converts back to a ground process. Fails if any context or
    /// quantified part remains.
    pub fn into_process(&self) -> Option<Process> {
        if !self.contexts.is_empty() || !self.quantified.is_empty() {
            return None;
        }
        let mut membranes = Vec::new();
        for m in &self.membranes {
            membranes.push(crate::process::Membrane {
                id: m.id,
                content: m.content.into_process()?,
            });
        }
        Some(Process {
            atoms: self.atoms.clone(),
            membranes,
        })
    }

    /// True if the template holds an atom or membrane at any depth,
    /// including under nested quantifiers. Cardinality quantifiers over
    /// templates without one admit unbounded vacuous unrolling and are
    /// rejected at load time.
    pub fn has_concrete_element(&self) -> bool {
        !self.atoms.is_empty()
            || !self.membranes.is_empty()
            || self.quantified.iter().any(|q| q.body.has_concrete_element())
    }

    /// Appends all of `other` at this level.
    pub fn extend(&mut self, other: Template) {
        self.atoms.extend(other.atoms);
        self.membranes.extend(other.membranes);
        self.contexts.extend(other.contexts);
        self.quantified.extend(other.quantified);
    }

    /// Atoms and membranes at every depth, quantified bodies included.
    pub fn element_count(&self) -> usize {
        self.atoms.len()
            + self.membranes.len()
            + self
                .membranes
                .iter()
                .map(|m| m.content.element_count())
                .sum::<usize>()
            + self
                .quantified
                .iter()
                .map(|q| q.body.element_count())
                .sum::<usize>()
    }

    /// Copy with fresh atom and membrane ids at every depth; names stay.
    pub fn refresh_ids(&self) -> Template {
        Template {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    id: ElemId::fresh(),
                    name: a.name.clone(),
                    ports: a.ports.clone(),
                })
                .collect(),
            membranes: self
                .membranes
                .iter()
                .map(|m| TMembrane {
                    id: ElemId::fresh(),
                    content: m.content.refresh_ids(),
                })
                .collect(),
            contexts: self.contexts.clone(),
            quantified: self
                .quantified
                .iter()
                .map(|q| QuantifiedPart {
                    quant: q.quant.clone(),
                    body: q.body.refresh_ids(),
                    settled: q.settled,
                })
                .collect(),
        }
    }

    /// Maximum nesting depth of non-existence quantifiers.
    pub fn nonexist_depth(&self) -> usize {
        let mem = self
            .membranes
            .iter()
            .map(|m| m.content.nonexist_depth())
            .max()
            .unwrap_or(0);
        let quant = self
            .quantified
            .iter()
            .map(|q| {
                let inner = q.body.nonexist_depth();
                if q.quant.kind == QuantKind::NonExist {
                    inner + 1
                } else {
                    inner
                }
            })
            .max()
            .unwrap_or(0);
        mem.max(quant)
    }
}

/// A rewrite rule `head :- body` with its source text.
#[derive(Debug, Clone)]
pub struct Rule {
    pub head: Template,
    pub body: Template,
    /// Original statement text, kept for diagnostics and traces.
    pub text: String,
}

/// Generator of names guaranteed fresh against accepted source text: every
/// emitted name embeds `#`, which the lexer rejects. A per-base counter
/// keeps related names readable (`X#1`, `X#2`, ...).
#[derive(Debug, Clone, Default)]
pub struct FreshNamer {
    counters: BTreeMap<String, u64>,
}

impl FreshNamer {
    pub fn new() -> Self {
        FreshNamer::default()
    }

    /// Returns `base#n` for the next unused `n`. Any `#suffix` already on
    /// `base` is stripped first so renames of renames stay short.
    pub fn fresh(&mut self, base: &str) -> String {
        let stem = match base.find('#') {
            Some(i) if i > 0 => &base[..i],
            _ => base,
        };
        let stem = if stem.is_empty() { "g" } else { stem };
        let n = self.counters.entry(stem.to_string()).or_insert(0);
        *n += 1;
        format!("{stem}#{n}")
    }
}

/// Consistent renaming of links, contexts, and labels, extended lazily.
/// Sharing one map across several templates renames them consistently, so
/// links and contexts spanning those templates stay connected.
#[derive(Debug, Clone, Default)]
pub struct RenameMap {
    pub links: BTreeMap<LinkName, LinkName>,
    pub contexts: BTreeMap<String, String>,
    pub labels: BTreeMap<Label, Label>,
}

impl RenameMap {
    pub fn new() -> Self {
        RenameMap::default()
    }

    fn link(&mut self, name: &str, ns: &mut FreshNamer) -> LinkName {
        self.links
            .entry(name.to_string())
            .or_insert_with(|| ns.fresh(name))
            .clone()
    }

    fn context(&mut self, name: &str, ns: &mut FreshNamer) -> String {
        self.contexts
            .entry(name.to_string())
            .or_insert_with(|| ns.fresh(name))
            .clone()
    }

    fn label(&mut self, label: &Label, ns: &mut FreshNamer) -> Label {
        self.labels
            .entry(label.clone())
            .or_insert_with(|| match label {
                // An unlabeled quantifier renames to a fresh named label so
                // that replicas never rejoin the unlabeled group.
                Label::Empty => Label::Named(ns.fresh("L")),
                Label::Named(s) => Label::Named(ns.fresh(s)),
            })
            .clone()
    }
}

/// Copies a template with every link, context, and label renamed through
/// `map`, minting fresh names on first sight. Atoms and membranes get fresh
/// ids: the copy is a new occurrence, not the original.
pub fn fresh_rename(t: &Template, map: &mut RenameMap, ns: &mut FreshNamer) -> Template {
    Template {
        atoms: t
            .atoms
            .iter()
            .map(|a| Atom {
                id: ElemId::fresh(),
                name: a.name.clone(),
                ports: a.ports.iter().map(|p| map.link(p, ns)).collect(),
            })
            .collect(),
        membranes: t
            .membranes
            .iter()
            .map(|m| TMembrane {
                id: ElemId::fresh(),
                content: fresh_rename(&m.content, map, ns),
            })
            .collect(),
        contexts: t
            .contexts
            .iter()
            .map(|c| ContextRef {
                name: map.context(&c.name, ns),
            })
            .collect(),
        quantified: t
            .quantified
            .iter()
            .map(|q| QuantifiedPart {
                quant: Quantifier {
                    label: map.label(&q.quant.label, ns),
                    kind: q.quant.kind,
                },
                body: fresh_rename(&q.body, map, ns),
                settled: q.settled,
            })
            .collect(),
    }
}
