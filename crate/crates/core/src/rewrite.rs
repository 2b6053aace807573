//! Quantified rewriting: joint unrolling of cardinality groups, the
//! simplification and context-skeleton maps, the cardinality and
//! non-existence side conditions, and rule application.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use crate::congruence::{canonical, CanonicalKey};
use crate::matcher::{enumerate_matches, instantiate, Substitution, GLOBAL_CONTEXT};
use crate::process::{Atom, Process};
use crate::template::{
    fresh_rename, Bound, ContextRef, FreshNamer, Label, QuantKind, Quantifier, QuantifiedPart,
    RenameMap, Rule, TMembrane, Template,
};

/// Identity of one jointly unrolled quantifier group: label and range.
/// Parts with the same key, wherever they sit in the rule, replicate in
/// lockstep.
pub type GroupKey = (Label, i64, Bound);

/// Replica count chosen for each pending group of one unroll step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnrollVector {
    pub counts: Vec<(GroupKey, usize)>,
}

impl UnrollVector {
    fn total(&self) -> usize {
        self.counts.iter().map(|(_, k)| k).sum()
    }
}

/// Groups still awaiting a replica choice: outermost unsettled cardinality
/// quantifiers of head and body, in first-occurrence order. Quantifiers
/// nested under others surface only after the level above them unrolls.
pub fn pending_card_groups(r: &Rule) -> Vec<GroupKey> {
    pending_groups(r).into_iter().map(|g| g.key).collect()
}

struct PendingGroup {
    key: GroupKey,
    /// Atom shapes one replica is guaranteed to consume: the census of the
    /// group's head-side templates outside nested quantifiers.
    head_census: BTreeMap<(String, usize), usize>,
    /// Membranes one replica is guaranteed to consume.
    head_membranes: usize,
    /// Whether the group has a head-side part at all.
    in_head: bool,
}

fn pending_groups(r: &Rule) -> Vec<PendingGroup> {
    let mut out: Vec<PendingGroup> = Vec::new();
    collect_groups(&r.head, true, &mut out);
    collect_groups(&r.body, false, &mut out);
    out
}

fn collect_groups(t: &Template, in_head: bool, out: &mut Vec<PendingGroup>) {
    for m in &t.membranes {
        collect_groups(&m.content, in_head, out);
    }
    for q in &t.quantified {
        if q.settled {
            continue;
        }
        if let QuantKind::Card { lo, hi } = q.quant.kind {
            let key = (q.quant.label.clone(), lo, hi);
            let group = match out.iter_mut().find(|g| g.key == key) {
                Some(g) => g,
                None => {
                    out.push(PendingGroup {
                        key,
                        head_census: BTreeMap::new(),
                        head_membranes: 0,
                        in_head: false,
                    });
                    out.last_mut().unwrap()
                }
            };
            if in_head {
                group.in_head = true;
                template_census(&q.body, &mut group.head_census, &mut group.head_membranes);
            }
        }
        // Non-existence bodies unroll inside their own checks, not here.
    }
}

/// Largest replica count the target's census can support for one group, or
/// `None` when the group guarantees nothing concrete per replica.
fn census_cap(group: &PendingGroup, target: &Process) -> Option<i64> {
    if group.head_census.is_empty() && group.head_membranes == 0 {
        return None;
    }
    let available = target.atom_census();
    let mut cap = i64::MAX;
    for (shape, need) in &group.head_census {
        let have = available.get(shape).copied().unwrap_or(0);
        cap = cap.min((have / need) as i64);
    }
    if let Some(per) = target.membrane_count().checked_div(group.head_membranes) {
        cap = cap.min(per as i64);
    }
    Some(cap)
}

/// Unrolls every group named in `counts` one level. Each matching part is
/// replaced by `k` renamed replicas spliced in at its own level plus one
/// settled residual whose bounds drop by `k`. Replica `i` of every part in
/// a group shares one rename map, so links, contexts, and labels spanning
/// the group's head and body parts stay paired replica by replica.
pub fn unroll(r: &Rule, counts: &UnrollVector, ns: &mut FreshNamer) -> Rule {
    let mut maps: BTreeMap<GroupKey, Vec<RenameMap>> = counts
        .counts
        .iter()
        .map(|(key, k)| (key.clone(), vec![RenameMap::new(); *k]))
        .collect();
    let head = unroll_template(&r.head, &mut maps, ns);
    let body = unroll_template(&r.body, &mut maps, ns);
    Rule {
        head,
        body,
        text: r.text.clone(),
    }
}

fn unroll_template(
    t: &Template,
    maps: &mut BTreeMap<GroupKey, Vec<RenameMap>>,
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
            content: unroll_template(&m.content, maps, ns),
        });
    }
    for q in &t.quantified {
        if !q.settled {
            if let QuantKind::Card { lo, hi } = q.quant.kind {
                let key = (q.quant.label.clone(), lo, hi);
                if let Some(group_maps) = maps.get_mut(&key) {
                    let k = group_maps.len() as i64;
                    out.quantified.push(QuantifiedPart {
                        quant: Quantifier {
                            label: q.quant.label.clone(),
                            kind: QuantKind::Card {
                                lo: lo - k,
                                hi: hi.minus(k),
                            },
                        },
                        body: q.body.clone(),
                        settled: true,
                    });
                    for map in group_maps.iter_mut() {
                        out.extend(fresh_rename(&q.body, map, ns));
                    }
                    continue;
                }
            }
        }
        out.quantified.push(q.clone());
    }
    out
}

/// Keeps atoms, membranes, and contexts; drops every quantified part.
pub fn simp(t: &Template) -> Template {
    Template {
        atoms: t.atoms.clone(),
        membranes: t
            .membranes
            .iter()
            .map(|m| TMembrane {
                id: m.id,
                content: simp(&m.content),
            })
            .collect(),
        contexts: t.contexts.clone(),
        quantified: Vec::new(),
    }
}

/// Id atoms shared between one check's context skeleton and non-existence
/// pattern: each context name gets a single fresh nullary atom name.
#[derive(Default)]
pub struct IdAtoms {
    map: BTreeMap<String, String>,
}

impl IdAtoms {
    fn for_context(&mut self, context: &str, ns: &mut FreshNamer) -> String {
        self.map
            .entry(context.to_string())
            .or_insert_with(|| {
                let stem: String = context.chars().filter(|c| *c != '#').collect();
                ns.fresh(&format!("id_{stem}"))
            })
            .clone()
    }
}

/// Context skeleton: atoms and quantified parts vanish, membranes stay, and
/// every context keeps its place next to a nullary id atom naming it. The
/// id atoms pin each context's captured content to its level, so the
/// non-existence pattern can only place its renamed contexts where the
/// originals sat.
pub fn cxt(t: &Template, ids: &mut IdAtoms, ns: &mut FreshNamer) -> Template {
    let mut out = Template::default();
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: m.id,
            content: cxt(&m.content, ids, ns),
        });
    }
    for c in &t.contexts {
        out.atoms.push(Atom::new(ids.for_context(&c.name, ns), vec![]));
        out.contexts.push(c.clone());
    }
    out
}

/// Non-existence pattern for label `l`: atoms vanish, membranes stay,
/// every template under an outermost `l<^>` splices in verbatim (links,
/// inner quantifiers, and contexts untouched, so occurrences shared across
/// the label's parts stay linked), other quantified parts vanish, and each
/// remaining context reappears renamed beside the id atom the skeleton
/// planted for it.
pub fn neg(l: &Label, t: &Template, ids: &mut IdAtoms, ns: &mut FreshNamer) -> Template {
    let mut out = Template::default();
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: crate::process::ElemId::fresh(),
            content: neg(l, &m.content, ids, ns),
        });
    }
    for c in &t.contexts {
        out.atoms.push(Atom::new(ids.for_context(&c.name, ns), vec![]));
        let stem: String = c.name.chars().filter(|ch| *ch != '#').collect();
        out.contexts.push(ContextRef {
            name: ns.fresh(&format!("{stem}_ct")),
        });
    }
    for q in &t.quantified {
        if q.quant.kind == QuantKind::NonExist && &q.quant.label == l {
            out.extend(q.body.refresh_ids());
        }
    }
    out
}

/// Cardinality condition: every outermost cardinality quantifier left in
/// the rule, settled residuals included, admits zero further replicas.
pub fn card_cond(r: &Rule) -> bool {
    template_card_ok(&r.head) && template_card_ok(&r.body)
}

fn template_card_ok(t: &Template) -> bool {
    t.membranes.iter().all(|m| template_card_ok(&m.content))
        && t.quantified.iter().all(|q| match q.quant.kind {
            QuantKind::Card { lo, hi } => lo <= 0 && hi.at_least(0),
            _ => true,
        })
}

fn outermost_nonexist_labels(t: &Template, out: &mut Vec<Label>) {
    for m in &t.membranes {
        outermost_nonexist_labels(&m.content, out);
    }
    for q in &t.quantified {
        if q.settled {
            continue;
        }
        if q.quant.kind == QuantKind::NonExist && !out.contains(&q.quant.label) {
            out.push(q.quant.label.clone());
        }
    }
}

/// Non-existence condition: for each label of an outermost `<^>` part in
/// the matched head, the match's context skeleton must admit no match of
/// the pattern that splices that label's forbidden templates back in. Each
/// check wraps the head in one enclosing membrane with the implicit
/// top-level context, instantiates its skeleton under the substitution,
/// and asks whether the erasure rule built from the pattern could fire.
pub fn neg_cond(head: &Template, theta: &Substitution, ns: &mut FreshNamer) -> bool {
    let mut labels = Vec::new();
    outermost_nonexist_labels(head, &mut labels);
    for l in &labels {
        let mut wrapped = head.clone();
        wrapped.contexts.push(ContextRef {
            name: GLOBAL_CONTEXT.to_string(),
        });
        let mut wrap = Template::default();
        wrap.membranes.push(TMembrane::new(wrapped));

        let mut ids = IdAtoms::default();
        let skeleton = cxt(&wrap, &mut ids, ns);
        let target = match instantiate(&skeleton, theta, ns) {
            Ok(p) => p,
            Err(_) => {
                debug_assert!(false, "context skeleton must instantiate");
                return false;
            }
        };
        let pattern = neg(l, &wrap, &mut ids, ns);
        debug_assert!(
            pattern.nonexist_depth() < wrap.nonexist_depth(),
            "non-existence depth must strictly decrease"
        );
        let probe = Rule {
            head: pattern,
            body: Template::default(),
            text: String::new(),
        };
        if reducible(&probe, &target, ns) {
            return false;
        }
    }
    true
}

/// Whether the rule can fire on the target at all.
pub fn reducible(rule: &Rule, target: &Process, ns: &mut FreshNamer) -> bool {
    let cap = target.element_count();
    for_each_application(rule, target, cap, ns, &mut |_| ControlFlow::Break(())).is_break()
}

fn for_each_application(
    rule: &Rule,
    target: &Process,
    cap: usize,
    ns: &mut FreshNamer,
    f: &mut dyn FnMut(Process) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let pattern = simp(&rule.head);
    if !census_fits(&pattern, target) {
        // What the head already guarantees cannot grow by further
        // unrolling, so this prunes whole vector subtrees too.
        return ControlFlow::Continue(());
    }
    let groups = pending_groups(rule);
    if groups.is_empty() {
        if !card_cond(rule) {
            return ControlFlow::Continue(());
        }
        for theta in enumerate_matches(&pattern, target) {
            if !neg_cond(&rule.head, &theta, ns) {
                continue;
            }
            let instantiated = match instantiate(&simp(&rule.body), &theta, ns) {
                Ok(p) => p,
                Err(_) => {
                    debug_assert!(false, "rule bodies instantiate under any head match");
                    continue;
                }
            };
            let rest = theta.contexts[GLOBAL_CONTEXT].clone();
            match instantiated.glue(rest) {
                Ok(result) => f(result)?,
                Err(_) => debug_assert!(false, "gluing a result respects the link condition"),
            }
        }
        return ControlFlow::Continue(());
    }
    for vector in enumerate_vectors(&groups, target, cap) {
        let unrolled = unroll(rule, &vector, ns);
        for_each_application(&unrolled, target, cap, ns, f)?;
    }
    ControlFlow::Continue(())
}

/// Replica-count choices for one unroll level, combined over all pending
/// groups, smallest totals first. A group with head-side parts ranges from
/// its clamped lower bound up to what the target's census supports; a group
/// living only in the body ranges up to the target's element count (or its
/// lower bound if larger), which truncates the infinitely branching case of
/// an unbounded producer.
fn enumerate_vectors(groups: &[PendingGroup], target: &Process, cap: usize) -> Vec<UnrollVector> {
    let mut vectors = vec![UnrollVector::default()];
    for group in groups {
        let (_, lo, hi) = &group.key;
        let from = (*lo).max(0);
        let by_target = if group.in_head {
            census_cap(group, target).unwrap_or(cap as i64)
        } else {
            (cap as i64).max(from)
        };
        let to = match hi {
            Bound::Finite(n) => (*n).min(by_target),
            Bound::Infinite => by_target,
        };
        let mut next = Vec::new();
        for v in &vectors {
            let mut k = from;
            while k <= to {
                let mut grown = v.clone();
                grown.counts.push((group.key.clone(), k as usize));
                next.push(grown);
                k += 1;
            }
        }
        vectors = next;
    }
    vectors.sort_by_key(|v| {
        (
            v.total(),
            v.counts.iter().map(|(_, k)| *k).collect::<Vec<_>>(),
        )
    });
    vectors
}

/// Quick rejection: the target must hold at least the pattern's count of
/// each atom shape and at least its count of membranes.
fn census_fits(pattern: &Template, target: &Process) -> bool {
    let mut census: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut membranes = 0usize;
    template_census(pattern, &mut census, &mut membranes);
    let tc = target.atom_census();
    census
        .iter()
        .all(|(key, n)| tc.get(key).copied().unwrap_or(0) >= *n)
        && membranes <= target.membrane_count()
}

fn template_census(
    t: &Template,
    census: &mut BTreeMap<(String, usize), usize>,
    membranes: &mut usize,
) {
    for a in &t.atoms {
        *census.entry((a.name.clone(), a.arity())).or_default() += 1;
    }
    for m in &t.membranes {
        *membranes += 1;
        template_census(&m.content, census, membranes);
    }
}

/// All results of applying one rule to a process, one representative per
/// congruence class, ordered by canonical key.
pub fn apply_rule(rule: &Rule, target: &Process, ns: &mut FreshNamer) -> Vec<Process> {
    distinct_applications(rule, target, ns)
        .into_values()
        .collect()
}

fn distinct_applications(
    rule: &Rule,
    target: &Process,
    ns: &mut FreshNamer,
) -> BTreeMap<CanonicalKey, Process> {
    let mut seen: BTreeMap<CanonicalKey, Process> = BTreeMap::new();
    let cap = target.element_count();
    let _ = for_each_application(rule, target, cap, ns, &mut |result| {
        let (key, canon) = canonical(&result);
        seen.entry(key).or_insert(canon);
        ControlFlow::Continue(())
    });
    seen
}

/// Every one-step successor of `target` under `rules`, deduplicated up to
/// congruence per rule and ordered by rule index then canonical key.
pub fn successors(
    target: &Process,
    rules: &[Rule],
    ns: &mut FreshNamer,
) -> Vec<(usize, CanonicalKey, Process)> {
    let mut out = Vec::new();
    for (index, rule) in rules.iter().enumerate() {
        out.extend(
            distinct_applications(rule, target, ns)
                .into_iter()
                .map(|(key, p)| (index, key, p)),
        );
    }
    out
}
