//! Matching of quantifier-free templates against processes, and
//! instantiation of templates under a substitution.
//!
//! A match embeds the pattern's atoms and membranes injectively into the
//! target, level by level: a pattern membrane matches one whole target
//! membrane. Whatever a level's embedding leaves over goes to a process
//! context of that level; a level without a context must be covered
//! exactly. The target's top level always has the implicit context
//! [`GLOBAL_CONTEXT`] that absorbs the untouched rest of the process.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use crate::diagnostics::Diagnostic;
use crate::process::{Atom, ElemId, LinkName, Membrane, Process};
use crate::template::{FreshNamer, Template};

/// Name of the implicit top-level process context. The `#` prefix keeps it
/// out of the source namespace.
pub const GLOBAL_CONTEXT: &str = "#gamma";

/// One way a quantifier-free template embeds into a process.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    /// What each process context captured, keyed by context name.
    pub contexts: BTreeMap<String, Process>,
    /// Pattern atom to target atom.
    pub atom_embedding: BTreeMap<ElemId, ElemId>,
    /// Pattern membrane to target membrane.
    pub membrane_embedding: BTreeMap<ElemId, ElemId>,
    /// Pattern link name to target link name. Not injective: two pattern
    /// links may bind one target link.
    pub link_binding: BTreeMap<LinkName, LinkName>,
}

/// All matches of `pattern` in `target`, in a deterministic order.
pub fn enumerate_matches(pattern: &Template, target: &Process) -> Vec<Substitution> {
    let mut out = Vec::new();
    let _ = match_root(pattern, target, &mut |subst| {
        out.push(subst);
        ControlFlow::Continue(())
    });
    out
}

/// Whether `pattern` matches `target` at all; stops at the first match.
pub fn has_match(pattern: &Template, target: &Process) -> bool {
    match_root(pattern, target, &mut |_| ControlFlow::Break(())).is_break()
}

fn quantifier_free(t: &Template) -> bool {
    t.quantified.is_empty() && t.membranes.iter().all(|m| quantifier_free(&m.content))
}

fn match_root(
    pattern: &Template,
    target: &Process,
    sink: &mut dyn FnMut(Substitution) -> ControlFlow<()>,
) -> ControlFlow<()> {
    debug_assert!(quantifier_free(pattern), "patterns must be quantifier-free");
    let mut ctx = MatchCtx::default();
    match_level(&mut ctx, pattern, target, true, &mut |ctx| {
        sink(ctx.substitution())
    })
}

#[derive(Default)]
struct MatchCtx {
    link: BTreeMap<LinkName, LinkName>,
    atom_emb: BTreeMap<ElemId, ElemId>,
    mem_emb: BTreeMap<ElemId, ElemId>,
    contexts: BTreeMap<String, Process>,
    /// Target elements claimed so far, across all levels.
    used: BTreeSet<ElemId>,
}

impl MatchCtx {
    fn substitution(&self) -> Substitution {
        Substitution {
            contexts: self.contexts.clone(),
            atom_embedding: self.atom_emb.clone(),
            membrane_embedding: self.mem_emb.clone(),
            link_binding: self.link.clone(),
        }
    }
}

type Cont<'a> = &'a mut dyn FnMut(&mut MatchCtx) -> ControlFlow<()>;

fn match_level(
    ctx: &mut MatchCtx,
    pattern: &Template,
    target: &Process,
    root: bool,
    cont: Cont,
) -> ControlFlow<()> {
    // Most-constrained pattern atom first: fewest candidates by name and
    // arity, ties by position.
    let mut order: Vec<usize> = (0..pattern.atoms.len()).collect();
    let candidates = |pa: &Atom| {
        target
            .atoms
            .iter()
            .filter(|ta| ta.name == pa.name && ta.arity() == pa.arity())
            .count()
    };
    order.sort_by_key(|&i| (candidates(&pattern.atoms[i]), i));
    match_atoms(ctx, pattern, target, &order, 0, root, cont)
}

fn match_atoms(
    ctx: &mut MatchCtx,
    pattern: &Template,
    target: &Process,
    order: &[usize],
    at: usize,
    root: bool,
    cont: Cont,
) -> ControlFlow<()> {
    if at == order.len() {
        return match_membranes(ctx, pattern, target, 0, root, cont);
    }
    let pa = &pattern.atoms[order[at]];
    for ta in &target.atoms {
        if ctx.used.contains(&ta.id) || ta.name != pa.name || ta.arity() != pa.arity() {
            continue;
        }
        let mut added: Vec<&LinkName> = Vec::new();
        let mut ok = true;
        for (pp, tp) in pa.ports.iter().zip(&ta.ports) {
            match ctx.link.get(pp) {
                Some(bound) if bound != tp => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    ctx.link.insert(pp.clone(), tp.clone());
                    added.push(pp);
                }
            }
        }
        if ok {
            ctx.used.insert(ta.id);
            ctx.atom_emb.insert(pa.id, ta.id);
            let flow = match_atoms(ctx, pattern, target, order, at + 1, root, cont);
            ctx.atom_emb.remove(&pa.id);
            ctx.used.remove(&ta.id);
            for pp in &added {
                ctx.link.remove(*pp);
            }
            flow?;
        } else {
            for pp in &added {
                ctx.link.remove(*pp);
            }
        }
    }
    ControlFlow::Continue(())
}

fn match_membranes(
    ctx: &mut MatchCtx,
    pattern: &Template,
    target: &Process,
    at: usize,
    root: bool,
    cont: Cont,
) -> ControlFlow<()> {
    if at == pattern.membranes.len() {
        return finish_level(ctx, pattern, target, root, cont);
    }
    let pm = &pattern.membranes[at];
    for tm in &target.membranes {
        if ctx.used.contains(&tm.id) {
            continue;
        }
        ctx.used.insert(tm.id);
        ctx.mem_emb.insert(pm.id, tm.id);
        let flow = match_level(ctx, &pm.content, &tm.content, false, &mut |ctx| {
            match_membranes(ctx, pattern, target, at + 1, root, cont)
        });
        ctx.mem_emb.remove(&pm.id);
        ctx.used.remove(&tm.id);
        flow?;
    }
    ControlFlow::Continue(())
}

fn finish_level(
    ctx: &mut MatchCtx,
    pattern: &Template,
    target: &Process,
    root: bool,
    cont: Cont,
) -> ControlFlow<()> {
    let remainder = Process {
        atoms: target
            .atoms
            .iter()
            .filter(|a| !ctx.used.contains(&a.id))
            .cloned()
            .collect(),
        membranes: target
            .membranes
            .iter()
            .filter(|m| !ctx.used.contains(&m.id))
            .cloned()
            .collect(),
    };
    let mut names: Vec<String> = pattern.contexts.iter().map(|c| c.name.clone()).collect();
    if root {
        names.push(GLOBAL_CONTEXT.to_string());
    }
    if names.is_empty() {
        if remainder.is_empty() {
            return cont(ctx);
        }
        return ControlFlow::Continue(());
    }
    // The first context by name takes the remainder, the rest stay empty;
    // splitting further never changes what exists at this level.
    names.sort();
    debug_assert!(names.windows(2).all(|w| w[0] != w[1]));
    for (i, name) in names.iter().enumerate() {
        let captured = if i == 0 {
            remainder.clone()
        } else {
            Process::empty()
        };
        ctx.contexts.insert(name.clone(), captured);
    }
    let flow = cont(ctx);
    for name in &names {
        ctx.contexts.remove(name);
    }
    flow
}

/// Builds a process from a quantifier-free template under a substitution:
/// bound links take their targets, unbound links get fresh shared names,
/// atoms and membranes are minted with fresh identities, and contexts
/// splice in what they captured.
pub fn instantiate(
    t: &Template,
    subst: &Substitution,
    ns: &mut FreshNamer,
) -> Result<Process, Diagnostic> {
    let mut local: BTreeMap<LinkName, LinkName> = BTreeMap::new();
    let out = build(t, subst, ns, &mut local)?;
    out.validate_link_condition()?;
    Ok(out)
}

fn build(
    t: &Template,
    subst: &Substitution,
    ns: &mut FreshNamer,
    local: &mut BTreeMap<LinkName, LinkName>,
) -> Result<Process, Diagnostic> {
    debug_assert!(t.quantified.is_empty(), "instantiation needs a simplified template");
    let mut out = Process::empty();
    for a in &t.atoms {
        let ports = a
            .ports
            .iter()
            .map(|p| match subst.link_binding.get(p) {
                Some(bound) => bound.clone(),
                None => local
                    .entry(p.clone())
                    .or_insert_with(|| ns.fresh(p))
                    .clone(),
            })
            .collect();
        out.atoms.push(Atom {
            id: ElemId::fresh(),
            name: a.name.clone(),
            ports,
        });
    }
    for m in &t.membranes {
        out.membranes.push(Membrane {
            id: ElemId::fresh(),
            content: build(&m.content, subst, ns, local)?,
        });
    }
    for c in &t.contexts {
        let captured = subst.contexts.get(&c.name).ok_or_else(|| {
            Diagnostic::Internal(format!("process context ${} is unbound", c.name))
        })?;
        out.atoms.extend(captured.atoms.iter().cloned());
        out.membranes.extend(captured.membranes.iter().cloned());
    }
    Ok(out)
}
