//! Expansion of the universal shorthands `<*>` and `<+>` into core
//! cardinality-plus-non-existence form.
//!
//! `l<*>T` becomes `l'<0,>T, l'<^>T'` and `l<+>T` becomes `l'<1,>T,
//! l'<^>T'`, where `l'` is one fresh label shared by every occurrence of
//! `l` with that shorthand anywhere in the rule (head and body stay jointly
//! labeled, so they unroll together), and `T'` is a copy of `T` renamed
//! consistently across all of one side's occurrences.

use std::collections::{BTreeMap, BTreeSet};

use crate::template::{
    fresh_rename, Bound, ContextRef, FreshNamer, Label, QuantKind, Quantifier, QuantifiedPart,
    RenameMap, Rule, TMembrane, Template,
};
use crate::process::Atom;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Head,
    Body,
}

struct Group {
    primed: Label,
    head_copy: RenameMap,
    body_copy: RenameMap,
}

/// Rewrites a rule into core form: no `<*>` or `<+>` remains, and every
/// machine-minted name is replaced by a short parseable one, so the result
/// prints as accepted source text. Core-form rules pass through unchanged.
pub fn desugar_rule(r: &Rule, ns: &mut FreshNamer) -> Rule {
    let mut groups: BTreeMap<(Label, bool), Group> = BTreeMap::new();
    let head = expand(&r.head, Side::Head, &mut groups, ns);
    let body = expand(&r.body, Side::Body, &mut groups, ns);
    sanitize(Rule {
        head,
        body,
        text: r.text.clone(),
    })
}

fn expand(
    t: &Template,
    side: Side,
    groups: &mut BTreeMap<(Label, bool), Group>,
    ns: &mut FreshNamer,
) -> Template {
    let mut out = Template {
        atoms: t.atoms.clone(),
        membranes: Vec::new(),
        contexts: t.contexts.clone(),
        quantified: Vec::new(),
    };
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: m.id,
            content: expand(&m.content, side, groups, ns),
        });
    }
    for q in &t.quantified {
        let body = expand(&q.body, side, groups, ns);
        match q.quant.kind {
            QuantKind::Card { .. } | QuantKind::NonExist => out.quantified.push(QuantifiedPart {
                quant: q.quant.clone(),
                body,
                settled: q.settled,
            }),
            QuantKind::Star | QuantKind::Plus => {
                let lo = if q.quant.kind == QuantKind::Plus { 1 } else { 0 };
                let key = (q.quant.label.clone(), q.quant.kind == QuantKind::Plus);
                let group = groups.entry(key).or_insert_with(|| Group {
                    primed: Label::Named(ns.fresh(prime_stem(&q.quant.label))),
                    head_copy: RenameMap::new(),
                    body_copy: RenameMap::new(),
                });
                out.quantified.push(QuantifiedPart {
                    quant: Quantifier {
                        label: group.primed.clone(),
                        kind: QuantKind::Card {
                            lo,
                            hi: Bound::Infinite,
                        },
                    },
                    body: body.clone(),
                    settled: false,
                });
                let map = match side {
                    Side::Head => &mut group.head_copy,
                    Side::Body => &mut group.body_copy,
                };
                out.quantified.push(QuantifiedPart {
                    quant: Quantifier {
                        label: group.primed.clone(),
                        kind: QuantKind::NonExist,
                    },
                    body: fresh_rename(&body, map, ns),
                    settled: false,
                });
            }
        }
    }
    out
}

fn prime_stem(label: &Label) -> &str {
    match label {
        Label::Empty => "L",
        Label::Named(s) => s,
    }
}

/// Replaces every `#`-bearing name with a short name absent from the rule,
/// so the desugared rule reads and reparses as ordinary source.
fn sanitize(rule: Rule) -> Rule {
    let mut upper: BTreeSet<String> = BTreeSet::new();
    let mut lower: BTreeSet<String> = BTreeSet::new();
    collect_names(&rule.head, &mut upper, &mut lower);
    collect_names(&rule.body, &mut upper, &mut lower);
    let mut renames = Renames {
        links: BTreeMap::new(),
        labels: BTreeMap::new(),
        contexts: BTreeMap::new(),
        upper,
        lower,
    };
    let head = rename(&rule.head, &mut renames);
    let body = rename(&rule.body, &mut renames);
    Rule {
        head,
        body,
        text: rule.text,
    }
}

fn collect_names(t: &Template, upper: &mut BTreeSet<String>, lower: &mut BTreeSet<String>) {
    for a in &t.atoms {
        lower.insert(a.name.clone());
        for p in &a.ports {
            upper.insert(p.clone());
        }
    }
    for c in &t.contexts {
        lower.insert(c.name.clone());
    }
    for m in &t.membranes {
        collect_names(&m.content, upper, lower);
    }
    for q in &t.quantified {
        if let Label::Named(l) = &q.quant.label {
            upper.insert(l.clone());
        }
        collect_names(&q.body, upper, lower);
    }
}

struct Renames {
    links: BTreeMap<String, String>,
    labels: BTreeMap<String, String>,
    contexts: BTreeMap<String, String>,
    /// Links and labels share the uppercase namespace.
    upper: BTreeSet<String>,
    /// Contexts and atom names share the lowercase namespace.
    lower: BTreeSet<String>,
}

impl Renames {
    fn pick(stem: &str, pool: &mut BTreeSet<String>) -> String {
        for n in 1u64.. {
            let candidate = format!("{stem}{n}");
            if !pool.contains(&candidate) {
                pool.insert(candidate.clone());
                return candidate;
            }
        }
        unreachable!()
    }

    fn link(&mut self, name: &str) -> String {
        if !name.contains('#') {
            return name.to_string();
        }
        if let Some(r) = self.links.get(name) {
            return r.clone();
        }
        let stem = name.split('#').next().unwrap_or("X");
        let chosen = Self::pick(stem, &mut self.upper);
        self.links.insert(name.to_string(), chosen.clone());
        chosen
    }

    fn label(&mut self, label: &Label) -> Label {
        match label {
            Label::Empty => Label::Empty,
            Label::Named(name) if !name.contains('#') => label.clone(),
            Label::Named(name) => {
                if let Some(r) = self.labels.get(name) {
                    return Label::Named(r.clone());
                }
                let stem = name.split('#').next().unwrap_or("L");
                let chosen = Self::pick(stem, &mut self.upper);
                self.labels.insert(name.clone(), chosen.clone());
                Label::Named(chosen)
            }
        }
    }

    fn context(&mut self, name: &str) -> String {
        if !name.contains('#') {
            return name.to_string();
        }
        if let Some(r) = self.contexts.get(name) {
            return r.clone();
        }
        let stem = name.split('#').next().unwrap_or("p");
        let chosen = Self::pick(stem, &mut self.lower);
        self.contexts.insert(name.to_string(), chosen.clone());
        chosen
    }
}

fn rename(t: &Template, r: &mut Renames) -> Template {
    Template {
        atoms: t
            .atoms
            .iter()
            .map(|a| Atom {
                id: a.id,
                name: a.name.clone(),
                ports: a.ports.iter().map(|p| r.link(p)).collect(),
            })
            .collect(),
        membranes: t
            .membranes
            .iter()
            .map(|m| TMembrane {
                id: m.id,
                content: rename(&m.content, r),
            })
            .collect(),
        contexts: t
            .contexts
            .iter()
            .map(|c| ContextRef {
                name: r.context(&c.name),
            })
            .collect(),
        quantified: t
            .quantified
            .iter()
            .map(|q| QuantifiedPart {
                quant: Quantifier {
                    label: r.label(&q.quant.label),
                    kind: q.quant.kind,
                },
                body: rename(&q.body, r),
                settled: q.settled,
            })
            .collect(),
    }
}
