//! Source syntax: lexing, parsing, printing, shorthand expansion, and
//! static validation of rules.

mod lexer;
pub mod desugar;
pub mod parser;
pub mod printer;

pub use desugar::desugar_rule;
pub use parser::{parse_process, parse_program, SourceProgram};
pub use printer::{print_process, print_rule, print_template};

use std::collections::BTreeMap;

use crate::diagnostics::{Diagnostic, Warning};
use crate::template::{Bound, Label, QuantKind, Rule, Template};

/// Quantifier chain from the rule's top level down to an occurrence.
/// Membranes do not extend the chain; nested quantifiers do.
type Chain = Vec<(Label, QuantKind)>;

struct Occurrence {
    in_body: bool,
    chain: Chain,
}

impl Occurrence {
    fn exempt(&self) -> bool {
        self.chain.iter().any(|(_, k)| *k == QuantKind::NonExist)
    }
}

fn describe_chain(chain: &Chain) -> String {
    if chain.is_empty() {
        return "outside quantifiers".to_string();
    }
    let parts: Vec<String> = chain
        .iter()
        .map(|(label, kind)| {
            crate::template::Quantifier {
                label: label.clone(),
                kind: *kind,
            }
            .to_string()
        })
        .collect();
    format!("under {}", parts.join(" then "))
}

fn collect_occurrences(
    t: &Template,
    in_body: bool,
    chain: &Chain,
    links: &mut BTreeMap<String, Vec<Occurrence>>,
    contexts: &mut BTreeMap<String, Vec<Occurrence>>,
) {
    for a in &t.atoms {
        for p in &a.ports {
            links.entry(p.clone()).or_default().push(Occurrence {
                in_body,
                chain: chain.clone(),
            });
        }
    }
    for c in &t.contexts {
        contexts.entry(c.name.clone()).or_default().push(Occurrence {
            in_body,
            chain: chain.clone(),
        });
    }
    for m in &t.membranes {
        collect_occurrences(&m.content, in_body, chain, links, contexts);
    }
    for q in &t.quantified {
        let mut inner = chain.clone();
        inner.push((q.quant.label.clone(), q.quant.kind));
        collect_occurrences(&q.body, in_body, &inner, links, contexts);
    }
}

fn scope_violation(
    name: &str,
    occs: &[Occurrence],
    place: &str,
) -> Result<(), Diagnostic> {
    let first = &occs[0].chain;
    for occ in &occs[1..] {
        if &occ.chain != first {
            return Err(Diagnostic::QuantifierScope {
                name: name.to_string(),
                place: place.to_string(),
                first: describe_chain(first),
                second: describe_chain(&occ.chain),
            });
        }
    }
    Ok(())
}

fn top_context_count(t: &Template) -> usize {
    t.contexts.len()
        + t.quantified
            .iter()
            .map(|q| top_context_count(&q.body))
            .sum::<usize>()
}

fn check_context_levels(
    t: &Template,
    limit: usize,
    level: &str,
    place: &str,
) -> Result<(), Diagnostic> {
    let count = top_context_count(t);
    if count > limit {
        return Err(Diagnostic::ContextPlacement {
            place: place.to_string(),
            message: format!("{level} holds {count} process contexts; at most {limit} allowed"),
        });
    }
    check_membrane_levels(t, place)
}

fn check_membrane_levels(t: &Template, place: &str) -> Result<(), Diagnostic> {
    for m in &t.membranes {
        check_context_levels(&m.content, 1, "a membrane", place)?;
    }
    for q in &t.quantified {
        check_membrane_levels(&q.body, place)?;
    }
    Ok(())
}

fn check_vacuous(t: &Template, place: &str) -> Result<(), Diagnostic> {
    for q in &t.quantified {
        if matches!(q.quant.kind, QuantKind::Card { .. }) && !q.body.has_concrete_element() {
            return Err(Diagnostic::VacuousQuantifier {
                quantifier: q.quant.to_string(),
                place: place.to_string(),
            });
        }
        check_vacuous(&q.body, place)?;
    }
    for m in &t.membranes {
        check_vacuous(&m.content, place)?;
    }
    Ok(())
}

fn has_shorthand(t: &Template) -> bool {
    t.quantified.iter().any(|q| {
        matches!(q.quant.kind, QuantKind::Star | QuantKind::Plus) || has_shorthand(&q.body)
    }) || t.membranes.iter().any(|m| has_shorthand(&m.content))
}

fn card_ranges(t: &Template, out: &mut BTreeMap<Label, Vec<(i64, Bound)>>) {
    for q in &t.quantified {
        if let QuantKind::Card { lo, hi } = q.quant.kind {
            let ranges = out.entry(q.quant.label.clone()).or_default();
            if !ranges.contains(&(lo, hi)) {
                ranges.push((lo, hi));
            }
        }
        card_ranges(&q.body, out);
    }
    for m in &t.membranes {
        card_ranges(&m.content, out);
    }
}

/// Validates one rule already in core form (no `<*>` or `<+>`).
///
/// Checks, in order: every link or context name keeps a single quantifier
/// chain across all its occurrences; link occurrence counts fit the rule
/// link discipline (once in head and once in body, twice on one side, or
/// twice on both, with names under a non-existence quantifier capped at two
/// occurrences total); process contexts are head-bound, unduplicated, and
/// placed at most one per membrane level and none at the head's top level;
/// and no cardinality quantifier ranges over a template with nothing
/// concrete to match. Returns lint warnings for label groups mixing
/// distinct ranges.
pub fn validate_rule(index: usize, rule: &Rule) -> Result<Vec<Warning>, Diagnostic> {
    let place = format!("in rule {}", index + 1);
    if has_shorthand(&rule.head) || has_shorthand(&rule.body) {
        return Err(Diagnostic::Internal(format!(
            "rule {} was not desugared before validation",
            index + 1
        )));
    }

    let mut links: BTreeMap<String, Vec<Occurrence>> = BTreeMap::new();
    let mut contexts: BTreeMap<String, Vec<Occurrence>> = BTreeMap::new();
    collect_occurrences(&rule.head, false, &Vec::new(), &mut links, &mut contexts);
    collect_occurrences(&rule.body, true, &Vec::new(), &mut links, &mut contexts);

    for (name, occs) in &links {
        scope_violation(name, occs, &place)?;
    }
    for (name, occs) in &contexts {
        scope_violation(name, occs, &place)?;
    }

    for (name, occs) in &links {
        // Chains agree, so exemption is uniform across the occurrences.
        if occs[0].exempt() {
            if occs.len() > 2 {
                return Err(Diagnostic::LinkCondition {
                    link: name.clone(),
                    count: occs.len(),
                    place: place.clone(),
                    detail: "a link under a non-existence quantifier may occur at most twice"
                        .to_string(),
                });
            }
            continue;
        }
        let head = occs.iter().filter(|o| !o.in_body).count();
        let body = occs.len() - head;
        let ok = matches!((head, body), (1, 1) | (2, 0) | (0, 2) | (2, 2));
        if !ok {
            return Err(Diagnostic::LinkCondition {
                link: name.clone(),
                count: occs.len(),
                place: place.clone(),
                detail: format!(
                    "a rule link must occur once on each side, twice on one side, \
                     or twice on both; found {head} head and {body} body occurrences"
                ),
            });
        }
    }

    for (name, occs) in &contexts {
        let head = occs.iter().filter(|o| !o.in_body).count();
        let body_plain = occs.iter().filter(|o| o.in_body && !o.exempt()).count();
        if head > 1 {
            return Err(Diagnostic::ContextPlacement {
                place: place.clone(),
                message: format!("process context ${name} occurs {head} times in the head"),
            });
        }
        if body_plain > 1 {
            return Err(Diagnostic::ContextPlacement {
                place: place.clone(),
                message: format!(
                    "process context ${name} occurs {body_plain} times in the body; \
                     contexts cannot be copied"
                ),
            });
        }
        if head == 0 && body_plain > 0 {
            return Err(Diagnostic::ContextPlacement {
                place: place.clone(),
                message: format!("process context ${name} in the body is not bound by the head"),
            });
        }
    }

    check_context_levels(&rule.head, 0, "the head's top level", &place)?;
    check_context_levels(&rule.body, 1, "the body's top level", &place)?;
    check_vacuous(&rule.head, &place)?;
    check_vacuous(&rule.body, &place)?;

    let mut ranges: BTreeMap<Label, Vec<(i64, Bound)>> = BTreeMap::new();
    card_ranges(&rule.head, &mut ranges);
    card_ranges(&rule.body, &mut ranges);
    let mut warnings = Vec::new();
    for (label, list) in ranges {
        if let Label::Named(name) = &label {
            if list.len() > 1 {
                warnings.push(Warning::MixedLabelGroups {
                    label: name.clone(),
                    place: place.clone(),
                });
            }
        }
    }
    Ok(warnings)
}
