//! Structural congruence: connector normal forms, canonical keys, and
//! congruence tests.
//!
//! Two processes are congruent when one can be turned into the other by
//! reordering multisets, renaming local links, and absorbing or emitting
//! connector atoms. `normalize` settles the connector part; `canonical_key`
//! settles the rest by computing a string invariant that is equal exactly
//! for isomorphic normal forms.

use std::collections::BTreeMap;

use crate::process::{Atom, ElemId, LinkName, Membrane, Process};

/// Canonical identity of a congruence class. Keys compare like strings;
/// equal keys mean congruent processes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(pub String);

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Eliminates connector atoms wherever a port can be fused instead.
///
/// `X = X` disappears; a connector with a partner occurrence renames that
/// occurrence and disappears; a connector both of whose links are otherwise
/// unused stays, with its ports ordered lexicographically. Empty membranes
/// are kept: a membrane is an element of its own.
pub fn normalize(p: &Process) -> Process {
    let mut out = p.clone();
    let mut settled: Vec<ElemId> = Vec::new();
    loop {
        let table = out.link_table();
        let Some((id, x, y)) = find_connector(&out, &settled) else {
            break;
        };
        if x == y {
            remove_atom(&mut out, id);
            continue;
        }
        let other_x = other_occurrence(&table, &x, id);
        let other_y = other_occurrence(&table, &y, id);
        match (other_x, other_y) {
            (Some((aid, port)), _) => {
                set_port(&mut out, aid, port, y.clone());
                remove_atom(&mut out, id);
            }
            (None, Some((aid, port))) => {
                set_port(&mut out, aid, port, x.clone());
                remove_atom(&mut out, id);
            }
            (None, None) => {
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                set_port(&mut out, id, 0, lo);
                set_port(&mut out, id, 1, hi);
                settled.push(id);
            }
        }
    }
    out
}

fn find_connector(p: &Process, settled: &[ElemId]) -> Option<(ElemId, LinkName, LinkName)> {
    for atom in &p.atoms {
        if atom.is_connector() && !settled.contains(&atom.id) {
            return Some((atom.id, atom.ports[0].clone(), atom.ports[1].clone()));
        }
    }
    for mem in &p.membranes {
        if let Some(found) = find_connector(&mem.content, settled) {
            return Some(found);
        }
    }
    None
}

fn other_occurrence(
    table: &BTreeMap<LinkName, Vec<(ElemId, usize)>>,
    link: &str,
    skip: ElemId,
) -> Option<(ElemId, usize)> {
    table
        .get(link)?
        .iter()
        .find(|(id, _)| *id != skip)
        .copied()
}

fn remove_atom(p: &mut Process, id: ElemId) -> bool {
    if let Some(i) = p.atoms.iter().position(|a| a.id == id) {
        p.atoms.remove(i);
        return true;
    }
    p.membranes.iter_mut().any(|m| remove_atom(&mut m.content, id))
}

fn set_port(p: &mut Process, id: ElemId, port: usize, name: LinkName) -> bool {
    if let Some(a) = p.atoms.iter_mut().find(|a| a.id == id) {
        a.ports[port] = name;
        return true;
    }
    p.membranes
        .iter_mut()
        .any(|m| set_port(&mut m.content, id, port, name.clone()))
}

/// True when the two processes denote the same state.
pub fn congruent(p: &Process, q: &Process) -> bool {
    canonical_key(p) == canonical_key(q)
}

/// Canonical key of the process's congruence class.
pub fn canonical_key(p: &Process) -> CanonicalKey {
    canonical(p).0
}

/// Canonical key plus a copy of the normalized process whose multiset
/// orders follow the canonical order. Printing that copy yields the same
/// text for every member of the congruence class.
pub fn canonical(p: &Process) -> (CanonicalKey, Process) {
    let norm = normalize(p);
    let arena = Arena::build(&norm);
    if arena.nodes.len() == 1 {
        return (CanonicalKey("".into()), norm);
    }
    let colors = arena.initial_colors();
    let (key, final_colors) = arena.solve(colors);
    let rebuilt = arena.rebuild(0, &final_colors);
    (CanonicalKey(key), rebuilt)
}

/// Human-readable account of why two processes differ, or `None` when they
/// are congruent. Used by the congruence checker to explain its verdict.
pub fn explain_difference(p: &Process, q: &Process) -> Option<String> {
    let (kp, np) = canonical(p);
    let (kq, nq) = canonical(q);
    if kp == kq {
        return None;
    }
    let cp = class_census(&np);
    let cq = class_census(&nq);
    for (class, n) in &cp {
        let m = cq.get(class).copied().unwrap_or(0);
        if *n != m {
            return Some(format!(
                "left has {n} element(s) of class [{class}], right has {m}"
            ));
        }
    }
    for (class, m) in &cq {
        if !cp.contains_key(class) {
            return Some(format!(
                "left has no element of class [{class}], right has {m}"
            ));
        }
    }
    Some("element classes agree; link topology or symmetry differs".into())
}

fn class_census(p: &Process) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    fn walk(p: &Process, depth: usize, out: &mut BTreeMap<String, usize>) {
        for a in &p.atoms {
            *out.entry(format!("depth {depth}: atom {}/{}", a.name, a.arity()))
                .or_insert(0) += 1;
        }
        for m in &p.membranes {
            *out.entry(format!("depth {depth}: membrane")).or_insert(0) += 1;
            walk(&m.content, depth + 1, out);
        }
    }
    walk(p, 0, &mut out);
    out
}

const KIND_ROOT: u8 = 0;
const KIND_MEM: u8 = 1;
const KIND_ATOM: u8 = 2;

#[derive(Debug, Clone)]
enum Port {
    Free(String),
    // Index into Arena::links.
    Bound(usize, usize),
}

#[derive(Debug)]
struct Node {
    parent: Option<usize>,
    children: Vec<usize>,
    kind: u8,
    name: String,
    depth: usize,
    ports: Vec<Port>,
    orig_atom: Option<Atom>,
}

/// Flat view of a process tree: one node per membrane and atom, plus a
/// virtual root, with local links resolved to endpoint pairs.
struct Arena {
    nodes: Vec<Node>,
    links: Vec<[(usize, usize); 2]>,
}

/// One refinement signature: a node's color plus its sorted adjacency rows
/// `(relation, other color, own port, other port)`.
type Signature = (u64, Vec<(u8, u64, u16, u16)>);

impl Arena {
    fn build(p: &Process) -> Arena {
        let mut arena = Arena {
            nodes: Vec::new(),
            links: Vec::new(),
        };
        arena.nodes.push(Node {
            parent: None,
            children: Vec::new(),
            kind: KIND_ROOT,
            name: String::new(),
            depth: 0,
            ports: Vec::new(),
            orig_atom: None,
        });
        let mut occurrences: BTreeMap<LinkName, Vec<(usize, usize)>> = BTreeMap::new();
        arena.add_level(p, 0, 1, &mut occurrences);
        // Resolve link names to endpoint pairs; single occurrences stay free.
        for (name, occ) in occurrences {
            match occ.len() {
                1 => {
                    let (n, i) = occ[0];
                    arena.nodes[n].ports[i] = Port::Free(name.clone());
                }
                2 => {
                    let id = arena.links.len();
                    arena.links.push([occ[0], occ[1]]);
                    let [a, b] = arena.links[id];
                    arena.nodes[a.0].ports[a.1] = Port::Bound(id, 0);
                    arena.nodes[b.0].ports[b.1] = Port::Bound(id, 1);
                }
                n => unreachable!("link {name} with {n} occurrences survived validation"),
            }
        }
        arena
    }

    fn add_level(
        &mut self,
        p: &Process,
        parent: usize,
        depth: usize,
        occurrences: &mut BTreeMap<LinkName, Vec<(usize, usize)>>,
    ) {
        for atom in &p.atoms {
            let idx = self.nodes.len();
            self.nodes.push(Node {
                parent: Some(parent),
                children: Vec::new(),
                kind: KIND_ATOM,
                name: atom.name.clone(),
                depth,
                ports: vec![Port::Free(String::new()); atom.arity()],
                orig_atom: Some(atom.clone()),
            });
            self.nodes[parent].children.push(idx);
            for (i, port) in atom.ports.iter().enumerate() {
                occurrences.entry(port.clone()).or_default().push((idx, i));
            }
        }
        for mem in &p.membranes {
            let idx = self.nodes.len();
            self.nodes.push(Node {
                parent: Some(parent),
                children: Vec::new(),
                kind: KIND_MEM,
                name: String::new(),
                depth,
                ports: Vec::new(),
                orig_atom: None,
            });
            self.nodes[parent].children.push(idx);
            self.add_level(&mem.content, idx, depth + 1, occurrences);
        }
    }

    fn other_end(&self, link: usize, side: usize) -> (usize, usize) {
        self.links[link][1 - side]
    }

    fn initial_colors(&self) -> Vec<u64> {
        let mut keys: Vec<String> = self
            .nodes
            .iter()
            .map(|n| {
                let frees: Vec<String> = n
                    .ports
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| match p {
                        Port::Free(name) => Some(format!("{i}:{name}")),
                        Port::Bound(..) => None,
                    })
                    .collect();
                format!(
                    "{}|{}|{}|{}|{}",
                    n.kind,
                    n.depth,
                    n.name,
                    n.ports.len(),
                    frees.join(",")
                )
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        let rank: BTreeMap<&String, u64> = sorted
            .iter()
            .enumerate()
            .map(|(i, k)| (k, i as u64))
            .collect();
        keys.drain(..).map(|k| rank[&k]).collect()
    }

    /// Refines colors until stable: each node's new color folds in the
    /// colors of its link partners (with port positions), parent, and
    /// children. Refinement only ever splits classes.
    fn refine(&self, colors: &mut Vec<u64>) {
        loop {
            let mut sigs: Vec<Signature> = Vec::with_capacity(colors.len());
            for (idx, node) in self.nodes.iter().enumerate() {
                let mut adj: Vec<(u8, u64, u16, u16)> = Vec::new();
                for (i, port) in node.ports.iter().enumerate() {
                    if let Port::Bound(link, side) = port {
                        let (other, oport) = self.other_end(*link, *side);
                        adj.push((0, colors[other], i as u16, oport as u16));
                    }
                }
                if let Some(parent) = node.parent {
                    adj.push((1, colors[parent], 0, 0));
                }
                for &child in &node.children {
                    adj.push((2, colors[child], 0, 0));
                }
                adj.sort();
                sigs.push((colors[idx], adj));
            }
            let mut sorted = sigs.clone();
            sorted.sort();
            sorted.dedup();
            let rank: BTreeMap<&Signature, u64> = sorted
                .iter()
                .enumerate()
                .map(|(i, s)| (s, i as u64))
                .collect();
            let new: Vec<u64> = sigs.iter().map(|s| rank[s]).collect();
            let old_classes = count_classes(colors);
            let new_classes = count_classes(&new);
            *colors = new;
            if new_classes == old_classes {
                return;
            }
        }
    }

    /// Refinement plus backtracking over residual symmetry. Branches on the
    /// smallest non-singleton class and keeps the lexicographically least
    /// serialization, which makes the result independent of input order.
    fn solve(&self, mut colors: Vec<u64>) -> (String, Vec<u64>) {
        self.refine(&mut colors);
        let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (idx, &c) in colors.iter().enumerate() {
            classes.entry(c).or_default().push(idx);
        }
        let target = classes
            .iter()
            .filter(|(_, members)| members.len() > 1)
            .min_by_key(|(color, members)| (members.len(), **color));
        let Some((_, members)) = target else {
            return (self.serialize(&colors), colors);
        };
        let fresh = colors.iter().max().unwrap() + 1;
        let mut best: Option<(String, Vec<u64>)> = None;
        for &m in members {
            let mut branch = colors.clone();
            branch[m] = fresh;
            let candidate = self.solve(branch);
            if best.as_ref().is_none_or(|b| candidate.0 < b.0) {
                best = Some(candidate);
            }
        }
        best.unwrap()
    }

    /// Writes the tree in color order. Local links are numbered by first
    /// appearance, free links keep their names, so the string is invariant
    /// under renaming of local links.
    fn serialize(&self, colors: &[u64]) -> String {
        let mut out = String::new();
        let mut link_numbers: BTreeMap<usize, usize> = BTreeMap::new();
        self.serialize_children(0, colors, &mut link_numbers, &mut out);
        out
    }

    fn serialize_children(
        &self,
        node: usize,
        colors: &[u64],
        link_numbers: &mut BTreeMap<usize, usize>,
        out: &mut String,
    ) {
        let mut children = self.nodes[node].children.clone();
        children.sort_by_key(|&c| colors[c]);
        for child in children {
            let n = &self.nodes[child];
            if n.kind == KIND_ATOM {
                out.push('a');
                out.push_str(&n.name);
                out.push('(');
                for port in &n.ports {
                    match port {
                        Port::Free(name) => {
                            out.push('~');
                            out.push_str(name);
                        }
                        Port::Bound(link, _) => {
                            let next = link_numbers.len();
                            let id = *link_numbers.entry(*link).or_insert(next);
                            out.push_str(&format!("%{id}"));
                        }
                    }
                    out.push(',');
                }
                out.push(')');
            } else {
                out.push('{');
                self.serialize_children(child, colors, link_numbers, out);
                out.push('}');
            }
        }
    }

    /// Rebuilds a process whose multiset orders follow the colors.
    fn rebuild(&self, node: usize, colors: &[u64]) -> Process {
        let mut children = self.nodes[node].children.clone();
        children.sort_by_key(|&c| colors[c]);
        let mut p = Process::empty();
        for child in children {
            let n = &self.nodes[child];
            if n.kind == KIND_ATOM {
                p.atoms.push(n.orig_atom.clone().expect("atom node"));
            } else {
                p.membranes.push(Membrane {
                    id: ElemId::fresh(),
                    content: self.rebuild(child, colors),
                });
            }
        }
        p
    }
}

fn count_classes(colors: &[u64]) -> usize {
    let mut seen = colors.to_vec();
    seen.sort();
    seen.dedup();
    seen.len()
}
