//! Trees that display separations: the tree of tangles, per-tangle trees of
//! separations, and the grafted tree combining them, plus serialization and
//! DOT export.

mod graft;
mod sep_tree;
mod tangle_tree;

pub use graft::{graft, verify_main, MainTheoremReport};
pub use sep_tree::tree_of_separations;
pub use tangle_tree::{bag_partition_from_tree, tree_of_tangles, TangleTree};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ground::Subset;
use crate::quotient::{QuotientError, QuotientMap};
use crate::separations::{flower_displayed, SeparationError};
use crate::system::{ConnectivitySystem, Separation};
use crate::tangle::TangleError;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("search exhausted while {0}; this contradicts the displayed-tree guarantees and signals a bug")]
    SearchExhausted(String),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
    #[error("no vertex of the component tree has a bag containing {0}")]
    ContainmentVertexNotFound(String),
    #[error("constructed tree failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Tangle(#[from] TangleError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

/// Node budget for the backtracking constructions.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { node_budget: 5_000_000 }
    }
}

pub(crate) struct Budget {
    remaining: u64,
    total: u64,
}

impl Budget {
    pub(crate) fn new(limits: SearchLimits) -> Self {
        Budget { remaining: limits.node_budget, total: limits.node_budget }
    }

    pub(crate) fn spend(&mut self) -> Result<(), TreeError> {
        if self.remaining == 0 {
            return Err(TreeError::BudgetExhausted(self.total));
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Cyclic edge order attached to an unlabelled flower vertex, with the order
/// the flower was built at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowerInfo {
    pub order: i32,
    /// Incident edge indices in cyclic order.
    pub cyclic_edges: Vec<usize>,
}

/// A tree whose vertices optionally carry bags partitioning the ground set;
/// designated unlabelled vertices carry a cyclic order on their incident
/// edges and display flowers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiLabelledTree {
    bags: Vec<Option<Subset>>,
    edges: Vec<(usize, usize)>,
    flowers: BTreeMap<usize, FlowerInfo>,
}

impl PiLabelledTree {
    pub fn new(
        bags: Vec<Option<Subset>>,
        edges: Vec<(usize, usize)>,
        flowers: BTreeMap<usize, FlowerInfo>,
    ) -> Self {
        PiLabelledTree { bags, edges, flowers }
    }

    pub fn single_bag(full: Subset) -> Self {
        PiLabelledTree { bags: vec![Some(full)], edges: Vec::new(), flowers: BTreeMap::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.bags.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn bag(&self, v: usize) -> Option<Subset> {
        self.bags[v]
    }

    pub fn flowers(&self) -> &BTreeMap<usize, FlowerInfo> {
        &self.flowers
    }

    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| *a == v || *b == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// Vertices of the component containing `start` after removing
    /// `removed_edge` (and optionally a removed vertex).
    fn component(&self, start: usize, removed_edge: Option<usize>, removed_vertex: Option<usize>) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for (i, (a, b)) in self.edges.iter().enumerate() {
                if Some(i) == removed_edge {
                    continue;
                }
                let next = if *a == v {
                    *b
                } else if *b == v {
                    *a
                } else {
                    continue;
                };
                if Some(next) == removed_vertex || seen[next] {
                    continue;
                }
                seen[next] = true;
                stack.push(next);
            }
        }
        (0..self.vertex_count()).filter(|&v| seen[v]).collect()
    }

    fn bag_union(&self, vertices: &[usize]) -> Subset {
        vertices
            .iter()
            .filter_map(|&v| self.bags[v])
            .fold(Subset::EMPTY, |acc, b| acc.union(b))
    }

    /// The separation displayed by an edge, oriented (u side, v side).
    pub fn displayed_by_edge(&self, edge: usize) -> (Subset, Subset) {
        let (u, v) = self.edges[edge];
        let u_side = self.bag_union(&self.component(u, Some(edge), None));
        let v_side = self.bag_union(&self.component(v, Some(edge), None));
        (u_side, v_side)
    }

    /// Petals of a flower vertex in its stored cyclic order: the bag unions
    /// of the components of the tree minus the vertex.
    pub fn flower_petals(&self, v: usize) -> Vec<Subset> {
        let info = &self.flowers[&v];
        info.cyclic_edges
            .iter()
            .map(|&e| {
                let (a, b) = self.edges[e];
                let other = if a == v { b } else { a };
                self.bag_union(&self.component(other, None, Some(v)))
            })
            .collect()
    }

    /// Separations displayed by edges and flower vertices, canonicalized,
    /// deduplicated, and sorted.
    pub fn displayed_separations(&self, system: &ConnectivitySystem) -> Vec<Separation> {
        let mut out: Vec<Separation> = Vec::new();
        for e in 0..self.edges.len() {
            let (u_side, _) = self.displayed_by_edge(e);
            out.push(system.separation(u_side).canonical(system));
        }
        for (&v, info) in &self.flowers {
            let petals = self.flower_petals(v);
            out.extend(flower_displayed(system, &petals, info.order));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Structural invariants: a tree, bags disjoint and covering the ground
    /// set, flower vertices unlabelled with complete cyclic orders.
    pub fn validate(&self, system: &ConnectivitySystem) -> Result<(), TreeError> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(TreeError::Verification("tree has no vertices".into()));
        }
        if self.edges.len() != n - 1 {
            return Err(TreeError::Verification(format!(
                "{} edges on {} vertices is not a tree",
                self.edges.len(),
                n
            )));
        }
        if self.component(0, None, None).len() != n {
            return Err(TreeError::Verification("tree is disconnected".into()));
        }
        let mut union = Subset::EMPTY;
        for b in self.bags.iter().flatten() {
            if b.intersects(union) {
                return Err(TreeError::Verification("bags are not disjoint".into()));
            }
            union = union.union(*b);
        }
        if union != system.full() {
            return Err(TreeError::Verification(format!(
                "bags cover {} instead of the ground set",
                system.display(union)
            )));
        }
        for (&v, info) in &self.flowers {
            if self.bags[v].is_some() {
                return Err(TreeError::Verification(format!("flower vertex {v} carries a bag")));
            }
            let mut incident = self.incident_edges(v);
            incident.sort_unstable();
            let mut cyclic = info.cyclic_edges.clone();
            cyclic.sort_unstable();
            if incident != cyclic {
                return Err(TreeError::Verification(format!(
                    "flower vertex {v} cyclic order does not match its incident edges"
                )));
            }
        }
        Ok(())
    }

    /// Lifts every bag through a quotient map, producing the tree over the
    /// source system. Structure and flower orders are unchanged.
    pub fn lifted(&self, qm: &QuotientMap) -> PiLabelledTree {
        PiLabelledTree {
            bags: self.bags.iter().map(|b| b.map(|m| qm.lift_mask(m))).collect(),
            edges: self.edges.clone(),
            flowers: self.flowers.clone(),
        }
    }

    /// Contracts an edge, merging the second endpoint into the first (bags
    /// union; an unlabelled endpoint contributes nothing). Flower marks on
    /// the merged endpoints are dropped. Intended for mutation testing.
    pub fn contract_edge(&self, edge: usize) -> PiLabelledTree {
        let (keep, gone) = self.edges[edge];
        let merged_bag = match (self.bags[keep], self.bags[gone]) {
            (Some(a), Some(b)) => Some(a.union(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        let remap = |v: usize| {
            let v = if v == gone { keep } else { v };
            if v > gone { v - 1 } else { v }
        };
        let mut bags = self.bags.clone();
        bags[keep] = merged_bag;
        bags.remove(gone);
        let mut edges = Vec::new();
        let mut edge_remap: Vec<Option<usize>> = Vec::new();
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if i == edge {
                edge_remap.push(None);
                continue;
            }
            edge_remap.push(Some(edges.len()));
            edges.push((remap(*a), remap(*b)));
        }
        let flowers = self
            .flowers
            .iter()
            .filter(|&(&v, _)| v != keep && v != gone)
            .map(|(&v, info)| {
                (
                    remap(v),
                    FlowerInfo {
                        order: info.order,
                        cyclic_edges: info
                            .cyclic_edges
                            .iter()
                            .filter_map(|&e| edge_remap[e])
                            .collect(),
                    },
                )
            })
            .collect();
        PiLabelledTree { bags, edges, flowers }
    }

    /// Drops the flower designation of a vertex; for mutation testing.
    pub fn without_flower(&self, v: usize) -> PiLabelledTree {
        let mut out = self.clone();
        out.flowers.remove(&v);
        out
    }

    /// Versioned text serialization.
    ///
    /// ```text
    /// pi-tree 1
    /// vertices <n>
    /// v <id> bag=<{labels}|-> flower=<k>|- cyclic=<e,e,...>|-
    /// edges <m>
    /// e <id> <u> <v>
    /// ```
    pub fn serialize(&self, system: &ConnectivitySystem) -> String {
        let mut out = String::from("pi-tree 1\n");
        out.push_str(&format!("vertices {}\n", self.vertex_count()));
        for v in 0..self.vertex_count() {
            let bag = match self.bags[v] {
                Some(b) => system.display(b),
                None => "-".into(),
            };
            let (flower, cyclic) = match self.flowers.get(&v) {
                Some(info) => {
                    let order = info.order.to_string();
                    let edges: Vec<String> =
                        info.cyclic_edges.iter().map(|e| e.to_string()).collect();
                    (order, edges.join(","))
                }
                None => ("-".into(), "-".into()),
            };
            out.push_str(&format!("v {v} bag={bag} flower={flower} cyclic={cyclic}\n"));
        }
        out.push_str(&format!("edges {}\n", self.edges.len()));
        for (i, (u, v)) in self.edges.iter().enumerate() {
            out.push_str(&format!("e {i} {u} {v}\n"));
        }
        out
    }

    /// DOT export: bags label vertices, flower vertices are annotated, and
    /// each edge carries the order of its displayed separation.
    pub fn to_dot(&self, system: &ConnectivitySystem) -> String {
        let mut out = String::from("graph pi_tree {\n");
        for v in 0..self.vertex_count() {
            let label = match (self.bags[v], self.flowers.get(&v)) {
                (Some(b), _) => format!("{}", system.display(b)),
                (None, Some(info)) => format!("flower k={}", info.order),
                (None, None) => String::from("-"),
            };
            let shape = if self.flowers.contains_key(&v) { "doublecircle" } else { "box" };
            out.push_str(&format!("  n{v} [label=\"{label}\", shape={shape}];\n"));
        }
        for e in 0..self.edges.len() {
            let (u, v) = self.edges[e];
            let (u_side, _) = self.displayed_by_edge(e);
            out.push_str(&format!(
                "  n{u} -- n{v} [label=\"{}\"];\n",
                system.lambda(u_side)
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds a π-labelled tree from a laminar family of oriented sides.
///
/// Sides must all avoid element 0, be non-empty and proper, and be pairwise
/// nested or disjoint. The tree has one vertex per side plus a root holding
/// whatever no side claims; the edge above a side's vertex displays exactly
/// that side against its complement.
pub(crate) struct LaminarTree {
    pub tree: PiLabelledTree,
    /// Side mask -> vertex index.
    pub side_vertex: BTreeMap<u32, usize>,
    /// Vertex -> edge index to its parent (absent for the root).
    pub parent_edge: BTreeMap<usize, usize>,
    /// Vertex -> its children's side masks.
    pub children: BTreeMap<usize, BTreeSet<u32>>,
}

pub(crate) fn build_laminar_tree(
    system: &ConnectivitySystem,
    sides: &BTreeSet<u32>,
) -> Result<LaminarTree, TreeError> {
    let full = system.full();
    for &s in sides {
        let s = Subset::from_bits(s);
        if s.is_empty() || s == full || s.contains(0) {
            return Err(TreeError::Verification(format!(
                "side {} is not a proper subset avoiding element 0",
                system.display(s)
            )));
        }
    }
    let mut ordered: Vec<Subset> = sides.iter().map(|&s| Subset::from_bits(s)).collect();
    ordered.sort_by_key(|s| (s.len(), s.bits()));
    for (i, a) in ordered.iter().enumerate() {
        for b in ordered.iter().skip(i + 1) {
            let nested = a.is_subset_of(*b) || b.is_subset_of(*a);
            if !nested && a.intersects(*b) {
                return Err(TreeError::Verification(format!(
                    "sides {} and {} are neither nested nor disjoint",
                    system.display(*a),
                    system.display(*b)
                )));
            }
        }
    }
    // Root is vertex 0; side i (in size order) is vertex i + 1.
    let mut side_vertex = BTreeMap::new();
    for (i, s) in ordered.iter().enumerate() {
        side_vertex.insert(s.bits(), i + 1);
    }
    let mut bags: Vec<Option<Subset>> = vec![None; ordered.len() + 1];
    let mut edges = Vec::new();
    let mut parent_edge = BTreeMap::new();
    let mut children: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
    let mut claimed: Vec<Subset> = vec![Subset::EMPTY; ordered.len() + 1];
    for (i, s) in ordered.iter().enumerate() {
        let vertex = i + 1;
        // Parent: smallest strict superset, unique in a laminar family.
        let parent = ordered
            .iter()
            .enumerate()
            .skip(i + 1)
            .find(|(_, t)| s.is_subset_of(**t) && *s != **t)
            .map(|(j, _)| j + 1)
            .unwrap_or(0);
        let edge_index = edges.len();
        edges.push((vertex, parent));
        parent_edge.insert(vertex, edge_index);
        children.entry(parent).or_default().insert(s.bits());
        claimed[parent] = claimed[parent].union(*s);
        bags[vertex] = Some(*s); // children subtracted below
    }
    for (i, s) in ordered.iter().enumerate() {
        bags[i + 1] = Some(s.difference(claimed[i + 1]));
    }
    bags[0] = Some(full.difference(claimed[0]));
    let tree = PiLabelledTree { bags, edges, flowers: BTreeMap::new() };
    Ok(LaminarTree { tree, side_vertex, parent_edge, children })
}
