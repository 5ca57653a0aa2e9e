//! The tree of tangles: one vertex per tangle, bags partitioning the ground
//! set, every pair of tangles distinguished at minimum order by a displayed
//! separation.

use std::collections::BTreeSet;

use crate::ground::Subset;
use crate::quotient::{verify_bag_partition, BagPartition};
use crate::system::{crosses_sets, ConnectivitySystem, Separation};
use crate::tangle::{distinguishing_separations, Tangle};
use crate::trees::{build_laminar_tree, Budget, SearchLimits, TreeError};

/// A tree on exactly the input tangles: vertex i carries tangle i, bags may
/// be empty, and both display properties are verified before the value is
/// handed out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangleTree {
    edges: Vec<(usize, usize)>,
    bags: Vec<Subset>,
}

impl TangleTree {
    pub fn vertex_count(&self) -> usize {
        self.bags.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn bags(&self) -> &[Subset] {
        &self.bags
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|(a, b)| {
                if *a == v {
                    Some(*b)
                } else if *b == v {
                    Some(*a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn component(&self, start: usize, removed_edge: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for (i, (a, b)) in self.edges.iter().enumerate() {
                if i == removed_edge {
                    continue;
                }
                let next = if *a == v {
                    *b
                } else if *b == v {
                    *a
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        (0..self.vertex_count()).filter(|&v| seen[v]).collect()
    }

    /// Bag union of the component of `v` after removing edge `edge`.
    pub fn side_of(&self, v: usize, edge: usize) -> Subset {
        self.component(v, edge)
            .into_iter()
            .fold(Subset::EMPTY, |acc, u| acc.union(self.bags[u]))
    }

    pub fn displayed_separations(&self, system: &ConnectivitySystem) -> Vec<Separation> {
        let mut out: Vec<Separation> = (0..self.edges.len())
            .map(|e| system.separation(self.side_of(self.edges[e].0, e)).canonical(system))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Constructs and verifies a tree of tangles for pairwise non-truncation
/// tangles.
///
/// For every pair the full list of minimum-order distinguishing separations
/// is computed; a backtracking search picks one per pair so that the choices
/// are pairwise non-crossing and number exactly n - 1 once deduplicated. The
/// laminar family then builds the tree, each tangle is routed to the unique
/// vertex all its oriented edges point at, and both display properties are
/// re-verified.
pub fn tree_of_tangles(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    limits: SearchLimits,
) -> Result<TangleTree, TreeError> {
    let n = tangles.len();
    if n == 0 {
        return Ok(TangleTree { edges: Vec::new(), bags: vec![system.full()] });
    }
    if n == 1 {
        return Ok(TangleTree { edges: Vec::new(), bags: vec![system.full()] });
    }
    let mut pair_options: Vec<Vec<Subset>> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (_, seps) = distinguishing_separations(system, &tangles[i], &tangles[j])?;
            let mut options: Vec<Subset> =
                seps.iter().map(|s| s.canonical(system).side()).collect();
            options.sort();
            options.dedup();
            pairs.push((i, j));
            pair_options.push(options);
        }
    }
    let mut budget = Budget::new(limits);
    let mut chosen: Vec<Subset> = Vec::new();
    let found = search(system, n, &pair_options, &mut chosen, 0, &mut budget)?;
    let family = found.ok_or_else(|| {
        TreeError::SearchExhausted("selecting a laminar family of distinguishing separations".into())
    })?;
    assemble(system, tangles, &family)
}

/// Depth-first choice of one canonical side per pair; sides are kept
/// non-crossing and the deduplicated count may never exceed n - 1.
fn search(
    system: &ConnectivitySystem,
    n: usize,
    pair_options: &[Vec<Subset>],
    chosen: &mut Vec<Subset>,
    depth: usize,
    budget: &mut Budget,
) -> Result<Option<BTreeSet<u32>>, TreeError> {
    budget.spend()?;
    if depth == pair_options.len() {
        let distinct: BTreeSet<u32> = chosen.iter().map(|s| s.bits()).collect();
        if distinct.len() == n - 1 {
            return Ok(Some(distinct));
        }
        return Ok(None);
    }
    for &option in &pair_options[depth] {
        let compatible = chosen
            .iter()
            .all(|&prev| !crosses_sets(system.full(), prev, option));
        if !compatible {
            continue;
        }
        chosen.push(option);
        let distinct = chosen.iter().map(|s| s.bits()).collect::<BTreeSet<u32>>().len();
        if distinct <= n - 1 {
            if let Some(found) = search(system, n, pair_options, chosen, depth + 1, budget)? {
                chosen.pop();
                return Ok(Some(found));
            }
        }
        chosen.pop();
    }
    Ok(None)
}

fn assemble(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    family: &BTreeSet<u32>,
) -> Result<TangleTree, TreeError> {
    let n = tangles.len();
    // Normalize each separation to the side avoiding element 0.
    let mut sides = BTreeSet::new();
    for &s in family {
        let s = Subset::from_bits(s);
        let oriented = if s.contains(0) { system.complement(s) } else { s };
        sides.insert(oriented.bits());
    }
    let built = build_laminar_tree(system, &sides)?;
    let tree = &built.tree;
    if tree.vertex_count() != n {
        return Err(TreeError::Verification(format!(
            "laminar family gave {} vertices for {} tangles",
            tree.vertex_count(),
            n
        )));
    }
    // Route each tangle to the vertex every oriented edge points toward.
    let weak: Vec<Vec<bool>> = tangles.iter().map(|t| t.weakness_table(system)).collect();
    let mut vertex_of = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (i, tangle) in tangles.iter().enumerate() {
        let mut valid: Vec<bool> = vec![true; n];
        for e in 0..tree.edges().len() {
            let (u, _) = tree.edges()[e];
            let u_side = tree.displayed_by_edge(e).0;
            let u_component = tree_component(tree, u, e);
            let member_u = system.lambda(u_side) < tangle.order()
                && weak[i][u_side.bits() as usize];
            let v_side = system.complement(u_side);
            let member_v = system.lambda(v_side) < tangle.order()
                && weak[i][v_side.bits() as usize];
            if member_u {
                for &w in &u_component {
                    valid[w] = false;
                }
            }
            if member_v {
                for w in 0..n {
                    if !u_component.contains(&w) {
                        valid[w] = false;
                    }
                }
            }
        }
        let candidates: Vec<usize> = (0..n).filter(|&v| valid[v]).collect();
        match candidates.as_slice() {
            [v] if !taken[*v] => {
                vertex_of[i] = *v;
                taken[*v] = true;
            }
            _ => {
                return Err(TreeError::Verification(format!(
                    "tangle {i} does not route to a unique free vertex (candidates {candidates:?})"
                )));
            }
        }
    }
    // Reindex so vertex i is tangle i.
    let mut bags = vec![Subset::EMPTY; n];
    for (i, &v) in vertex_of.iter().enumerate() {
        bags[i] = tree.bag(v).expect("laminar tree vertices all carry bags");
    }
    let mut tangle_of = vec![usize::MAX; n];
    for (i, &v) in vertex_of.iter().enumerate() {
        tangle_of[v] = i;
    }
    let edges: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .map(|(u, v)| (tangle_of[*u], tangle_of[*v]))
        .collect();
    let result = TangleTree { edges, bags };
    verify_tangle_tree(system, tangles, &result)?;
    Ok(result)
}

fn tree_component(tree: &super::PiLabelledTree, start: usize, removed_edge: usize) -> Vec<usize> {
    let mut seen = vec![false; tree.vertex_count()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for (i, (a, b)) in tree.edges().iter().enumerate() {
            if i == removed_edge {
                continue;
            }
            let next = if *a == v {
                *b
            } else if *b == v {
                *a
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                stack.push(next);
            }
        }
    }
    (0..tree.vertex_count()).filter(|&v| seen[v]).collect()
}

/// Both display properties, checked from scratch: no tangle's own component
/// union is one of its members, and every pair is distinguished at minimum
/// order by some displayed separation.
pub(crate) fn verify_tangle_tree(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    tree: &TangleTree,
) -> Result<(), TreeError> {
    let n = tangles.len();
    for i in 0..n {
        for e in 0..tree.edges().len() {
            let own_side = tree.side_of(i, e);
            if tangles[i].is_member(system, own_side) {
                return Err(TreeError::Verification(format!(
                    "component union {} of tangle {i} at edge {e} is one of its members",
                    system.display(own_side)
                )));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (order, seps) = distinguishing_separations(system, &tangles[i], &tangles[j])?;
            let displayed = tree.displayed_separations(system);
            let hit = displayed.iter().any(|d| {
                d.order() == order
                    && seps.iter().any(|s| s.same_partition(d, system))
            });
            if !hit {
                return Err(TreeError::Verification(format!(
                    "no displayed separation distinguishes tangles {i} and {j} at order {order}"
                )));
            }
        }
    }
    Ok(())
}

/// The parts displayed by the components hanging off vertex `i`, verified as
/// a bag partition for tangle i. A leaf gets a single part; an isolated
/// vertex gets the empty partition.
pub fn bag_partition_from_tree(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    tree: &TangleTree,
    i: usize,
) -> Result<BagPartition, TreeError> {
    let mut parts = Vec::new();
    for j in tree.neighbors(i) {
        let edge = tree
            .edges()
            .iter()
            .position(|(a, b)| (*a == i && *b == j) || (*a == j && *b == i))
            .expect("neighbor implies an edge");
        parts.push(tree.side_of(j, edge));
    }
    Ok(verify_bag_partition(system, &tangles[i], &parts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tangle::maximal_tangles;
    use crate::trees::SearchLimits;

    #[test]
    fn single_tangle_yields_one_vertex_with_the_full_bag() {
        let sys = fixtures::u24();
        let tangles = maximal_tangles(&sys);
        let tree = tree_of_tangles(&sys, &tangles, SearchLimits::default()).unwrap();
        assert_eq!(tree.vertex_count(), 1);
        assert_eq!(tree.bags(), &[sys.full()]);
        let bp = bag_partition_from_tree(&sys, &tangles, &tree, 0).unwrap();
        assert!(bp.parts.is_empty());
    }

    #[test]
    fn bridged_k4s_tree_splits_at_order_one() {
        let sys = fixtures::bridged_k4s();
        let tangles = maximal_tangles(&sys);
        assert_eq!(tangles.len(), 3);
        let tree = tree_of_tangles(&sys, &tangles, SearchLimits::default()).unwrap();
        assert_eq!(tree.vertex_count(), 3);
        assert_eq!(tree.edges().len(), 2);
        let k4a = sys.ground().subset_from_labels(&["12", "13", "14", "23", "24", "34"]).unwrap();
        for e in 0..tree.edges().len() {
            let side = tree.side_of(tree.edges()[e].0, e);
            assert_eq!(sys.lambda(side), 1);
            // Each K4's edges end up whole on one side of every split.
            assert!(k4a.is_subset_of(side) || k4a.is_subset_of(sys.complement(side)));
        }
        // The bridge tangle's vertex holds the bridge edge.
        let bridge = sys.ground().subset_from_labels(&["45"]).unwrap();
        assert_eq!(tree.bags()[0], bridge);
    }

    #[test]
    fn triangle_chain_tree_distinguishes_all_pairs_at_order_one() {
        let sys = fixtures::three_triangle_chain();
        let tangles = maximal_tangles(&sys);
        assert_eq!(tangles.len(), 5);
        let tree = tree_of_tangles(&sys, &tangles, SearchLimits::default()).unwrap();
        assert_eq!(tree.vertex_count(), 5);
        for e in 0..tree.edges().len() {
            let (u, _) = tree.edges()[e];
            assert_eq!(sys.lambda(tree.side_of(u, e)), 1);
        }
    }

    #[test]
    fn bag_partition_for_bridged_k4s() {
        let sys = fixtures::bridged_k4s();
        let tangles = maximal_tangles(&sys);
        let tree = tree_of_tangles(&sys, &tangles, SearchLimits::default()).unwrap();
        for i in 0..tangles.len() {
            let bp = bag_partition_from_tree(&sys, &tangles, &tree, i).unwrap();
            assert_eq!(bp.parts.len(), tree.neighbors(i).len());
            for part in &bp.parts {
                assert!(tangles[i].is_member(&sys, *part));
            }
        }
    }

    #[test]
    fn adjacent_pairs_have_a_unique_displayed_distinguisher() {
        // The edge between adjacent tangles displays the only displayed
        // separation distinguishing them.
        let sys = fixtures::three_triangle_chain();
        let tangles = maximal_tangles(&sys);
        let tree = tree_of_tangles(&sys, &tangles, SearchLimits::default()).unwrap();
        for (e, (u, v)) in tree.edges().iter().enumerate() {
            let displayed = tree.displayed_separations(&sys);
            let mut count = 0;
            for d in &displayed {
                let x = d.side();
                let y = sys.complement(x);
                let distinguishes = (tangles[*u].is_member(&sys, x) && tangles[*v].is_member(&sys, y))
                    || (tangles[*u].is_member(&sys, y) && tangles[*v].is_member(&sys, x));
                if distinguishes {
                    count += 1;
                }
            }
            assert_eq!(count, 1, "edge {e} pair ({u},{v})");
        }
    }
}
