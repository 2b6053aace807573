//! Deterministic printing of processes, templates, and rules.
//!
//! Processes print in canonical order: congruent processes yield the same
//! text, and reparsing the text yields a congruent process. Local links are
//! renamed `L0, L1, ...` in order of appearance (free links keep their
//! names), so machine-generated names never reach the output.

use std::collections::{BTreeMap, BTreeSet};

use crate::congruence;
use crate::process::{Atom, LinkName, Process};
use crate::template::{Rule, Template};

pub fn print_process(p: &Process) -> String {
    let (_, canon) = congruence::canonical(p);
    let table = canon.link_table();
    let free: BTreeSet<LinkName> = table
        .iter()
        .filter(|(_, occ)| occ.len() == 1)
        .map(|(name, _)| name.clone())
        .collect();
    let mut map: BTreeMap<LinkName, LinkName> = BTreeMap::new();
    let mut counter = 0usize;
    assign_local_names(&canon, &free, &mut map, &mut counter);
    let renamed = canon.rename_links(&map);
    let parts = process_parts(&renamed);
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(",")
    }
}

fn assign_local_names(
    p: &Process,
    free: &BTreeSet<LinkName>,
    map: &mut BTreeMap<LinkName, LinkName>,
    counter: &mut usize,
) {
    for atom in &p.atoms {
        for port in &atom.ports {
            if !free.contains(port) && !map.contains_key(port) {
                let mut candidate = format!("L{counter}");
                while free.contains(&candidate) {
                    *counter += 1;
                    candidate = format!("L{counter}");
                }
                *counter += 1;
                map.insert(port.clone(), candidate);
            }
        }
    }
    for mem in &p.membranes {
        assign_local_names(&mem.content, free, map, counter);
    }
}

fn process_parts(p: &Process) -> Vec<String> {
    // Sorting each level's parts is display-only; canonical order already
    // fixed link names.
    let mut atoms: Vec<String> = p.atoms.iter().map(atom_str).collect();
    atoms.sort();
    let mut membranes: Vec<String> = p
        .membranes
        .iter()
        .map(|mem| format!("{{{}}}", process_parts(&mem.content).join(",")))
        .collect();
    membranes.sort();
    atoms.extend(membranes);
    atoms
}

fn atom_str(a: &Atom) -> String {
    if a.is_connector() {
        return format!("{}={}", a.ports[0], a.ports[1]);
    }
    if a.ports.is_empty() {
        a.name.clone()
    } else {
        format!("{}({})", a.name, a.ports.join(","))
    }
}

/// Prints a template in storage order with names kept verbatim. Intended
/// for rule output, where names are already readable.
pub fn print_template(t: &Template) -> String {
    let parts = template_parts(t);
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(",")
    }
}

fn template_parts(t: &Template) -> Vec<String> {
    let mut parts: Vec<String> = t.atoms.iter().map(atom_str).collect();
    for mem in &t.membranes {
        let inner = template_parts(&mem.content);
        parts.push(format!("{{{}}}", inner.join(",")));
    }
    for ctx in &t.contexts {
        parts.push(format!("${}", ctx.name));
    }
    for q in &t.quantified {
        parts.push(format!("{}{}", q.quant, quant_target(&q.body)));
    }
    parts
}

/// A quantifier binds one element; anything else gets grouping parentheses.
fn quant_target(body: &Template) -> String {
    let parts = template_parts(body);
    match parts.len() {
        0 => "0".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("({})", parts.join(",")),
    }
}

/// Prints a rule as a `.`-terminated statement.
pub fn print_rule(r: &Rule) -> String {
    format!("{} :- {}.", print_template(&r.head), print_template(&r.body))
}
