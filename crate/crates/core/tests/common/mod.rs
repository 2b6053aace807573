//! Shared test oracles and generators. The oracles are deliberately naive
//! reimplementations, independent of the engine's algorithms: congruence by
//! explicit correspondence search, match counting by generate-then-check,
//! and the template maps by direct structural recursion.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qlmntal_core::process::{Atom, ElemId, Membrane, Process};
use qlmntal_core::template::{
    Bound, ContextRef, Label, QuantKind, Quantifier, QuantifiedPart, Rule, TMembrane, Template,
};

pub fn parse(src: &str) -> Process {
    let text = if src.trim_end().ends_with('.') {
        src.to_string()
    } else {
        format!("{src}.")
    };
    qlmntal_core::syntax::parse_process(&text).expect("test process parses")
}

pub fn rule(src: &str) -> Rule {
    let program = qlmntal_core::syntax::parse_program(src).expect("test rule parses");
    assert_eq!(program.rules.len(), 1, "expected exactly one rule");
    program.rules.into_iter().next().unwrap()
}

pub fn key(p: &Process) -> qlmntal_core::congruence::CanonicalKey {
    qlmntal_core::congruence::canonical_key(p)
}

// ---------------------------------------------------------------------
// Congruence oracle: brute-force correspondence search.

#[derive(Clone)]
struct IsoState {
    map: BTreeMap<String, String>,
    rev: BTreeMap<String, String>,
    q_free: BTreeSet<String>,
}

impl IsoState {
    /// Binds left link `a` to right link `b`: the binding must be
    /// functional, injective, keep free names fixed, and never send a local
    /// link to a free name.
    fn bind(&mut self, a: &str, b: &str) -> bool {
        if let Some(current) = self.map.get(a) {
            return current == b;
        }
        if self.rev.contains_key(b) || self.q_free.contains(b) {
            return false;
        }
        self.map.insert(a.to_string(), b.to_string());
        self.rev.insert(b.to_string(), a.to_string());
        true
    }
}

/// Whether `p` and `q` are the same process up to reordering and renaming
/// of local links, established by searching for an explicit atom bijection,
/// membrane bijection, and link bijection.
pub fn iso_equiv(p: &Process, q: &Process) -> bool {
    let free = p.free_links();
    if free != q.free_links() {
        return false;
    }
    if p.atom_census() != q.atom_census() || p.membrane_count() != q.membrane_count() {
        return false;
    }
    let mut state = IsoState {
        map: BTreeMap::new(),
        rev: BTreeMap::new(),
        q_free: free.clone(),
    };
    for name in &free {
        state.map.insert(name.clone(), name.clone());
        state.rev.insert(name.clone(), name.clone());
    }
    level_iso(p, q, &mut state)
}

fn level_iso(p: &Process, q: &Process, state: &mut IsoState) -> bool {
    if p.atoms.len() != q.atoms.len() || p.membranes.len() != q.membranes.len() {
        return false;
    }
    iso_atoms(p, q, 0, &mut vec![false; q.atoms.len()], state)
}

fn iso_atoms(p: &Process, q: &Process, i: usize, used: &mut Vec<bool>, state: &mut IsoState) -> bool {
    if i == p.atoms.len() {
        return iso_membranes(p, q, 0, &mut vec![false; q.membranes.len()], state);
    }
    let pa = &p.atoms[i];
    for (j, qa) in q.atoms.iter().enumerate() {
        if used[j] || qa.name != pa.name || qa.arity() != pa.arity() {
            continue;
        }
        let snapshot = state.clone();
        let ports_ok = pa
            .ports
            .iter()
            .zip(&qa.ports)
            .all(|(x, y)| state.bind(x, y));
        if ports_ok {
            used[j] = true;
            if iso_atoms(p, q, i + 1, used, state) {
                return true;
            }
            used[j] = false;
        }
        *state = snapshot;
    }
    false
}

fn iso_membranes(
    p: &Process,
    q: &Process,
    i: usize,
    used: &mut Vec<bool>,
    state: &mut IsoState,
) -> bool {
    if i == p.membranes.len() {
        return true;
    }
    let pm = &p.membranes[i];
    for (j, qm) in q.membranes.iter().enumerate() {
        if used[j] {
            continue;
        }
        let snapshot = state.clone();
        if level_iso(&pm.content, &qm.content, state) {
            used[j] = true;
            if iso_membranes(p, q, i + 1, used, state) {
                return true;
            }
            used[j] = false;
        }
        *state = snapshot;
    }
    false
}

// ---------------------------------------------------------------------
// Match-count oracle: generate every assignment, then filter.

/// Pairing of one pattern level with one target level under a fixed
/// membrane assignment, remembering which target membranes were taken.
struct LevelPair<'a> {
    pattern: &'a Template,
    target: &'a Process,
    root: bool,
    membranes_used: Vec<bool>,
}

/// Number of embeddings of `pattern` in `target`: injective on atoms and
/// membranes per level, link binding functional (not injective), and exact
/// coverage of every context-free non-root level. Counts by enumerating
/// complete candidate tuples first and checking each afterwards.
pub fn match_count_oracle(pattern: &Template, target: &Process) -> usize {
    let mut total = 0;
    for levels in membrane_maps(pattern, target) {
        let mut slots: Vec<(usize, &Atom, Vec<usize>)> = Vec::new();
        for (level_index, pair) in levels.iter().enumerate() {
            for pa in &pair.pattern.atoms {
                let candidates: Vec<usize> = pair
                    .target
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, ta)| ta.name == pa.name && ta.arity() == pa.arity())
                    .map(|(k, _)| k)
                    .collect();
                slots.push((level_index, pa, candidates));
            }
        }
        let mut chosen = vec![0usize; slots.len()];
        total += tuples(&levels, &slots, 0, &mut chosen);
    }
    total
}

fn tuples(
    levels: &[LevelPair<'_>],
    slots: &[(usize, &Atom, Vec<usize>)],
    at: usize,
    chosen: &mut Vec<usize>,
) -> usize {
    if at == slots.len() {
        return usize::from(check_tuple(levels, slots, chosen));
    }
    let mut count = 0;
    for &candidate in &slots[at].2 {
        chosen[at] = candidate;
        count += tuples(levels, slots, at + 1, chosen);
    }
    count
}

fn check_tuple(
    levels: &[LevelPair<'_>],
    slots: &[(usize, &Atom, Vec<usize>)],
    chosen: &[usize],
) -> bool {
    // Per-level injectivity on target atoms.
    let mut used: Vec<BTreeSet<usize>> = levels.iter().map(|_| BTreeSet::new()).collect();
    for (slot, &pick) in slots.iter().zip(chosen) {
        if !used[slot.0].insert(pick) {
            return false;
        }
    }
    // Functional link binding across the whole match.
    let mut binding: BTreeMap<&str, &str> = BTreeMap::new();
    for (slot, &pick) in slots.iter().zip(chosen) {
        let ta = &levels[slot.0].target.atoms[pick];
        for (pp, tp) in slot.1.ports.iter().zip(&ta.ports) {
            match binding.get(pp.as_str()) {
                Some(bound) if *bound != tp.as_str() => return false,
                Some(_) => {}
                None => {
                    binding.insert(pp, tp);
                }
            }
        }
    }
    // Exact coverage wherever no context absorbs a remainder.
    for (level_index, pair) in levels.iter().enumerate() {
        if pair.root || !pair.pattern.contexts.is_empty() {
            continue;
        }
        if used[level_index].len() != pair.target.atoms.len() {
            return false;
        }
        if pair.membranes_used.iter().any(|taken| !taken) {
            return false;
        }
    }
    true
}

/// All ways to assign pattern membranes to target membranes, level by
/// level, injectively and hierarchy-preserving. Each result lists every
/// (pattern level, target level) pair of the assignment.
fn membrane_maps<'a>(pattern: &'a Template, target: &'a Process) -> Vec<Vec<LevelPair<'a>>> {
    let mut out = Vec::new();
    let mut assignment = vec![usize::MAX; pattern.membranes.len()];
    assign_membranes(pattern, target, 0, &mut assignment, &mut out, true);
    out
}

fn assign_membranes<'a>(
    pattern: &'a Template,
    target: &'a Process,
    at: usize,
    assignment: &mut Vec<usize>,
    out: &mut Vec<Vec<LevelPair<'a>>>,
    root: bool,
) {
    if at == pattern.membranes.len() {
        // One complete assignment at this level: combine the sub-level maps
        // of every assigned pair by cartesian product.
        let mut combined: Vec<Vec<LevelPair<'a>>> = vec![vec![LevelPair {
            pattern,
            target,
            root,
            membranes_used: (0..target.membranes.len())
                .map(|j| assignment.contains(&j))
                .collect(),
        }]];
        for (pi, &ti) in assignment.iter().enumerate() {
            let sub = membrane_maps_inner(&pattern.membranes[pi].content, &target.membranes[ti].content);
            let mut next = Vec::new();
            for prefix in &combined {
                for suffix in &sub {
                    let mut row: Vec<LevelPair<'a>> = Vec::new();
                    for item in prefix {
                        row.push(LevelPair {
                            pattern: item.pattern,
                            target: item.target,
                            root: item.root,
                            membranes_used: item.membranes_used.clone(),
                        });
                    }
                    for item in suffix {
                        row.push(LevelPair {
                            pattern: item.pattern,
                            target: item.target,
                            root: item.root,
                            membranes_used: item.membranes_used.clone(),
                        });
                    }
                    next.push(row);
                }
            }
            combined = next;
        }
        out.extend(combined);
        return;
    }
    for j in 0..target.membranes.len() {
        if assignment[..at].contains(&j) {
            continue;
        }
        assignment[at] = j;
        assign_membranes(pattern, target, at + 1, assignment, out, root);
    }
    assignment[at] = usize::MAX;
}

fn membrane_maps_inner<'a>(pattern: &'a Template, target: &'a Process) -> Vec<Vec<LevelPair<'a>>> {
    let mut out = Vec::new();
    let mut assignment = vec![usize::MAX; pattern.membranes.len()];
    assign_membranes(pattern, target, 0, &mut assignment, &mut out, false);
    out
}

// ---------------------------------------------------------------------
// Template map oracles: direct structural recursion, unsuffixed names.

pub fn simp_oracle(t: &Template) -> Template {
    let mut out = Template::default();
    for a in &t.atoms {
        out.atoms.push(a.clone());
    }
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: m.id,
            content: simp_oracle(&m.content),
        });
    }
    for c in &t.contexts {
        out.contexts.push(c.clone());
    }
    out
}

pub fn cxt_oracle(t: &Template) -> Template {
    let mut out = Template::default();
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: m.id,
            content: cxt_oracle(&m.content),
        });
    }
    for c in &t.contexts {
        out.atoms.push(Atom::new(format!("id_{}", c.name), vec![]));
        out.contexts.push(c.clone());
    }
    out
}

pub fn neg_oracle(label: &Label, t: &Template) -> Template {
    let mut out = Template::default();
    for m in &t.membranes {
        out.membranes.push(TMembrane {
            id: m.id,
            content: neg_oracle(label, &m.content),
        });
    }
    for c in &t.contexts {
        out.atoms.push(Atom::new(format!("id_{}", c.name), vec![]));
        out.contexts.push(ContextRef {
            name: format!("{}_ct", c.name),
        });
    }
    for q in &t.quantified {
        if q.quant.kind == QuantKind::NonExist && &q.quant.label == label {
            let mut spliced = q.body.clone();
            strip_hashes_in_place(&mut spliced);
            out.extend(spliced);
        }
    }
    out
}

/// Truncates every machine suffix: `name#n` becomes `name`. Names starting
/// with `#` are left alone.
pub fn strip_hashes(t: &Template) -> Template {
    let mut out = t.clone();
    strip_hashes_in_place(&mut out);
    out
}

fn strip_name(name: &str) -> String {
    match name.find('#') {
        Some(i) if i > 0 => name[..i].to_string(),
        _ => name.to_string(),
    }
}

fn strip_hashes_in_place(t: &mut Template) {
    for a in &mut t.atoms {
        a.name = strip_name(&a.name);
        for p in &mut a.ports {
            *p = strip_name(p);
        }
    }
    for m in &mut t.membranes {
        strip_hashes_in_place(&mut m.content);
    }
    for c in &mut t.contexts {
        c.name = strip_name(&c.name);
    }
    for q in &mut t.quantified {
        if let Label::Named(name) = &q.quant.label {
            q.quant.label = Label::Named(strip_name(name));
        }
        strip_hashes_in_place(&mut q.body);
    }
}

// ---------------------------------------------------------------------
// Random generators, all seeded.

struct Shape {
    name: String,
    arity: usize,
    path: Vec<usize>,
}

/// Random process: atoms over a small alphabet with arity up to 2, nested
/// membranes up to `max_depth`, every port either paired into a local link
/// or given a shared free name.
pub fn random_process(rng: &mut ChaCha8Rng, max_atoms: usize, max_depth: usize) -> Process {
    let mut shapes: Vec<Shape> = Vec::new();
    let mut membrane_paths: Vec<Vec<usize>> = Vec::new();
    grow_structure(rng, max_atoms, max_depth, &Vec::new(), &mut shapes, &mut membrane_paths);

    // Wire ports: shuffle all port slots, pair a prefix, free the rest.
    let mut slots: Vec<(usize, usize)> = Vec::new();
    for (s, shape) in shapes.iter().enumerate() {
        for port in 0..shape.arity {
            slots.push((s, port));
        }
    }
    slots.shuffle(rng);
    let mut names: BTreeMap<(usize, usize), String> = BTreeMap::new();
    let mut local = 0usize;
    let mut free = 0usize;
    let mut i = 0;
    while i < slots.len() {
        if i + 1 < slots.len() && rng.gen_bool(0.6) {
            let name = format!("L{local}");
            local += 1;
            names.insert(slots[i], name.clone());
            names.insert(slots[i + 1], name);
            i += 2;
        } else {
            names.insert(slots[i], format!("F{free}"));
            free += 1;
            i += 1;
        }
    }

    let mut root = Process::empty();
    for path in &membrane_paths {
        place_membrane(&mut root, path);
    }
    for (s, shape) in shapes.iter().enumerate() {
        let ports = (0..shape.arity).map(|p| names[&(s, p)].clone()).collect();
        let level = level_at(&mut root, &shape.path);
        level.atoms.push(Atom::new(shape.name.clone(), ports));
    }
    root
}

fn grow_structure(
    rng: &mut ChaCha8Rng,
    budget: usize,
    depth: usize,
    path: &[usize],
    shapes: &mut Vec<Shape>,
    membranes: &mut Vec<Vec<usize>>,
) {
    let names = ["a", "b", "c", "d"];
    let n_atoms = rng.gen_range(0..=budget.min(3));
    for _ in 0..n_atoms {
        shapes.push(Shape {
            name: names[rng.gen_range(0..names.len())].to_string(),
            arity: rng.gen_range(0..=2),
            path: path.to_vec(),
        });
    }
    if depth == 0 || budget <= n_atoms {
        return;
    }
    let n_membranes = rng.gen_range(0..=2);
    for child_index in 0..n_membranes {
        let mut child_path = path.to_vec();
        child_path.push(child_index);
        membranes.push(child_path.clone());
        grow_structure(
            rng,
            (budget - n_atoms) / n_membranes.max(1),
            depth - 1,
            &child_path,
            shapes,
            membranes,
        );
    }
}

fn place_membrane(root: &mut Process, path: &[usize]) {
    let level = level_at(root, &path[..path.len() - 1]);
    while level.membranes.len() <= path[path.len() - 1] {
        level.membranes.push(Membrane {
            id: ElemId::fresh(),
            content: Process::empty(),
        });
    }
}

fn level_at<'a>(root: &'a mut Process, path: &[usize]) -> &'a mut Process {
    let mut level = root;
    for &i in path {
        level = &mut level.membranes[i].content;
    }
    level
}

/// Random template: atoms, membranes, contexts, and nested quantified parts
/// in core form (no shorthands). Link and name pools are small so that
/// sharing happens often.
pub fn random_template(rng: &mut ChaCha8Rng, depth: usize) -> Template {
    let mut t = Template::default();
    let atom_names = ["a", "b", "c"];
    let links = ["X0", "X1", "X2", "X3", "X4", "X5"];
    for _ in 0..rng.gen_range(0..=2) {
        let arity = rng.gen_range(0..=2);
        let ports = (0..arity)
            .map(|_| links[rng.gen_range(0..links.len())].to_string())
            .collect();
        t.atoms.push(Atom::new(
            atom_names[rng.gen_range(0..atom_names.len())].to_string(),
            ports,
        ));
    }
    if depth > 0 {
        for _ in 0..rng.gen_range(0..=1) {
            t.membranes
                .push(TMembrane::new(random_template(rng, depth - 1)));
        }
        for _ in 0..rng.gen_range(0..=1) {
            t.quantified.push(QuantifiedPart {
                quant: random_quantifier(rng),
                body: random_template(rng, depth - 1),
                settled: false,
            });
        }
    }
    if rng.gen_bool(0.4) {
        let names = ["p", "q"];
        t.contexts.push(ContextRef {
            name: names[rng.gen_range(0..names.len())].to_string(),
        });
    }
    t
}

fn random_quantifier(rng: &mut ChaCha8Rng) -> Quantifier {
    let label = match rng.gen_range(0..3) {
        0 => Label::Empty,
        1 => Label::Named("M".to_string()),
        _ => Label::Named("N".to_string()),
    };
    let kind = if rng.gen_bool(0.4) {
        QuantKind::NonExist
    } else {
        let lo = rng.gen_range(0..=2);
        let hi = if rng.gen_bool(0.3) {
            Bound::Infinite
        } else {
            Bound::Finite(rng.gen_range(lo..=3))
        };
        QuantKind::Card { lo, hi }
    };
    Quantifier { label, kind }
}

// ---------------------------------------------------------------------
// Petri nets: construction, encoding, and firing oracle.

/// A place/transition net with at most one arc per place, transition, and
/// direction, and no place both consumed and produced by one transition.
#[derive(Debug, Clone)]
pub struct Net {
    pub tokens: Vec<u32>,
    /// Per transition: input place indices, output place indices.
    pub transitions: Vec<(Vec<usize>, Vec<usize>)>,
}

/// The firing rule over the membrane encoding: one membrane per place
/// holding `s`/`t` arc atoms and its tokens, one membrane per transition
/// holding the matching arc atoms.
pub const PETRI_RULE: &str = "M<+>{s(A1), token, $1}, {M<+>t(A1), N<+>s(A2)}, N<+>{t(A2), $2} \
     :- M<+>{s(A1), $1}, {M<+>t(A1), N<+>s(A2)}, N<+>{t(A2), token, $2}.";

impl Net {
    pub fn enabled(&self, transition: usize) -> bool {
        self.transitions[transition]
            .0
            .iter()
            .all(|&place| self.tokens[place] >= 1)
    }

    pub fn fired(&self, transition: usize) -> Net {
        let mut next = self.clone();
        for &place in &self.transitions[transition].0 {
            next.tokens[place] -= 1;
        }
        for &place in &self.transitions[transition].1 {
            next.tokens[place] += 1;
        }
        next
    }

    /// Membrane encoding: an input arc of transition `j` from place `i` is
    /// a link from `s` in the place to `t` in the transition; an output arc
    /// links `s` in the transition to `t` in the place.
    pub fn process(&self) -> Process {
        let mut places: Vec<Process> = self
            .tokens
            .iter()
            .map(|&n| {
                let mut level = Process::empty();
                for _ in 0..n {
                    level.atoms.push(Atom::new("token".to_string(), vec![]));
                }
                level
            })
            .collect();
        let mut transitions: Vec<Process> = Vec::new();
        for (j, (ins, outs)) in self.transitions.iter().enumerate() {
            let mut level = Process::empty();
            for &i in ins {
                let link = format!("IN{j}P{i}");
                places[i].atoms.push(Atom::new("s".to_string(), vec![link.clone()]));
                level.atoms.push(Atom::new("t".to_string(), vec![link]));
            }
            for &i in outs {
                let link = format!("OUT{j}P{i}");
                places[i].atoms.push(Atom::new("t".to_string(), vec![link.clone()]));
                level.atoms.push(Atom::new("s".to_string(), vec![link]));
            }
            transitions.push(level);
        }
        let mut root = Process::empty();
        for level in places.into_iter().chain(transitions) {
            root.membranes.push(Membrane {
                id: ElemId::fresh(),
                content: level,
            });
        }
        root
    }
}

pub fn random_net(rng: &mut ChaCha8Rng) -> Net {
    let n_places = rng.gen_range(2..=5);
    let n_transitions = rng.gen_range(1..=3);
    let mut transitions = Vec::new();
    for _ in 0..n_transitions {
        let mut places: Vec<usize> = (0..n_places).collect();
        places.shuffle(rng);
        let max_in = (n_places - 1).min(2);
        let n_in = rng.gen_range(1..=max_in);
        let n_out = rng.gen_range(1..=(n_places - n_in).min(2));
        let ins: Vec<usize> = places[..n_in].to_vec();
        let outs: Vec<usize> = places[n_in..n_in + n_out].to_vec();
        transitions.push((ins, outs));
    }
    let mut tokens: Vec<u32> = (0..n_places).map(|_| rng.gen_range(0..=2)).collect();
    // A tokenless place whose whole content is one input arc would itself
    // satisfy the firing rule's non-existence probe; every such place gets
    // a token.
    for (place, count) in tokens.iter_mut().enumerate() {
        let ins = transitions.iter().filter(|t| t.0.contains(&place)).count();
        let outs = transitions.iter().filter(|t| t.1.contains(&place)).count();
        if *count == 0 && ins == 1 && outs == 0 {
            *count = 1;
        }
    }
    Net {
        tokens,
        transitions,
    }
}
