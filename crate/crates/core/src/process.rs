//! Ground processes: hierarchical port graphs made of atoms, links, and
//! membranes.
//!
//! Links are represented by name on the ports of atoms. A name occurring
//! twice forms a local link, a name occurring once is a free link, and more
//! than two occurrences violate the Link Condition.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::diagnostics::Diagnostic;

/// Name of one link. User names start with an uppercase letter; machine
/// names contain `#`, which never appears in accepted source text.
pub type LinkName = String;

/// Reserved name of the connector atom written `X = Y`.
pub const CONNECTOR: &str = "=";

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Internal identity of an atom or membrane occurrence.
///
/// Names carry no identity: equal atoms are still distinct occurrences, and
/// matching bookkeeping refers to them by id. Cloning a process keeps ids,
/// so a clone denotes the same occurrences; freshly built elements get ids
/// never used before in the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemId(u64);

impl ElemId {
    /// Allocates an id distinct from every id handed out so far.
    pub fn fresh() -> Self {
        ElemId(NEXT_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// Port-graph node: a name plus totally ordered ports.
#[derive(Debug, Clone)]
pub struct Atom {
    pub id: ElemId,
    pub name: String,
    pub ports: Vec<LinkName>,
}

impl Atom {
    pub fn new(name: impl Into<String>, ports: Vec<LinkName>) -> Self {
        Atom {
            id: ElemId::fresh(),
            name: name.into(),
            ports,
        }
    }

    pub fn arity(&self) -> usize {
        self.ports.len()
    }

    pub fn is_connector(&self) -> bool {
        self.name == CONNECTOR && self.ports.len() == 2
    }
}

/// Cell grouping a child process. Membranes carry no name.
#[derive(Debug, Clone)]
pub struct Membrane {
    pub id: ElemId,
    pub content: Process,
}

impl Membrane {
    pub fn new(content: Process) -> Self {
        Membrane {
            id: ElemId::fresh(),
            content,
        }
    }
}

/// One membrane level: a multiset of atoms and child membranes. The root
/// process is the content of the implicit outermost membrane. Vector order
/// is incidental and never semantically significant.
#[derive(Debug, Clone, Default)]
pub struct Process {
    pub atoms: Vec<Atom>,
    pub membranes: Vec<Membrane>,
}

impl Process {
    pub fn empty() -> Self {
        Process::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.membranes.is_empty()
    }

    /// Number of atoms and membranes at every depth.
    pub fn element_count(&self) -> usize {
        self.atoms.len()
            + self.membranes.len()
            + self
                .membranes
                .iter()
                .map(|m| m.content.element_count())
                .sum::<usize>()
    }

    /// Multiset union of two processes at the same level.
    ///
    /// Fails if a link name would end up with more than two occurrences.
    pub fn glue(mut self, other: Process) -> Result<Process, Diagnostic> {
        self.atoms.extend(other.atoms);
        self.membranes.extend(other.membranes);
        self.validate_link_condition()?;
        Ok(self)
    }

    /// All link occurrences, as `name -> [(atom id, port index)]`.
    pub fn link_table(&self) -> BTreeMap<LinkName, Vec<(ElemId, usize)>> {
        let mut table = BTreeMap::new();
        self.collect_links(&mut table);
        table
    }

    fn collect_links(&self, table: &mut BTreeMap<LinkName, Vec<(ElemId, usize)>>) {
        for atom in &self.atoms {
            for (i, port) in atom.ports.iter().enumerate() {
                table
                    .entry(port.clone())
                    .or_default()
                    .push((atom.id, i));
            }
        }
        for mem in &self.membranes {
            mem.content.collect_links(table);
        }
    }

    /// Links occurring exactly once.
    pub fn free_links(&self) -> BTreeSet<LinkName> {
        self.link_table()
            .into_iter()
            .filter(|(_, occ)| occ.len() == 1)
            .map(|(name, _)| name)
            .collect()
    }

    /// Checks that no link name occurs more than twice.
    pub fn validate_link_condition(&self) -> Result<(), Diagnostic> {
        for (name, occ) in self.link_table() {
            if occ.len() > 2 {
                return Err(Diagnostic::LinkCondition {
                    link: name,
                    count: occ.len(),
                    place: "in a process".into(),
                    detail: format!("{} atom ports share the name", occ.len()),
                });
            }
        }
        Ok(())
    }

    /// Rebuilds the process with link names replaced per `map`. Names
    /// absent from the map are kept. Atom and membrane ids are kept.
    pub fn rename_links(&self, map: &BTreeMap<LinkName, LinkName>) -> Process {
        Process {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    id: a.id,
                    name: a.name.clone(),
                    ports: a
                        .ports
                        .iter()
                        .map(|p| map.get(p).cloned().unwrap_or_else(|| p.clone()))
                        .collect(),
                })
                .collect(),
            membranes: self
                .membranes
                .iter()
                .map(|m| Membrane {
                    id: m.id,
                    content: m.content.rename_links(map),
                })
                .collect(),
        }
    }

    /// Rebuilds the process with fresh ids on every atom and membrane.
    /// Used when one template instantiation must yield occurrences
    /// distinct from another.
    pub fn refresh_ids(&self) -> Process {
        Process {
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
                .map(|m| Membrane {
                    id: ElemId::fresh(),
                    content: m.content.refresh_ids(),
                })
                .collect(),
        }
    }

    /// Multiset of `(name, arity)` pairs over all depths, for quick
    /// applicability pruning.
    pub fn atom_census(&self) -> BTreeMap<(String, usize), usize> {
        let mut census = BTreeMap::new();
        self.add_census(&mut census);
        census
    }

    fn add_census(&self, census: &mut BTreeMap<(String, usize), usize>) {
        for atom in &self.atoms {
            *census.entry((atom.name.clone(), atom.arity())).or_insert(0) += 1;
        }
        for mem in &self.membranes {
            mem.content.add_census(census);
        }
    }

    /// Number of membranes over all depths.
    pub fn membrane_count(&self) -> usize {
        self.membranes.len()
            + self
                .membranes
                .iter()
                .map(|m| m.content.membrane_count())
                .sum::<usize>()
    }
}
