//! Grafting the per-tangle trees of separations onto the tree of tangles,
//! and the independent verifier for the combined tree's two display
//! properties.

use std::collections::BTreeMap;

use crate::ground::Subset;
use crate::quotient::{induce_tangle, quotient};
use crate::separations::SeparationContext;
use crate::system::{ConnectivitySystem, Separation};
use crate::tangle::{distinguishing_separations, is_robust, Tangle};
use crate::trees::tangle_tree::{bag_partition_from_tree, tree_of_tangles};
use crate::trees::{tree_of_separations, PiLabelledTree, SearchLimits, TreeError};

/// Builds the single tree displaying a minimum-order distinguishing
/// separation for every tangle pair and, for each robust tangle, a
/// representative of every non-sequential class.
///
/// The pipeline: build the tree of tangles; for each robust tangle, turn its
/// neighbor components into a bag partition, quotient them away, build the
/// tree of separations of the induced tangle in the quotient and lift its
/// bags back; a non-robust tangle contributes a single full bag. Finally,
/// for each tangle-tree edge, the two component trees are joined at vertices
/// whose bags contain the opposite side, and those sides are subtracted from
/// the joined bags.
pub fn graft(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    limits: SearchLimits,
) -> Result<PiLabelledTree, TreeError> {
    if tangles.is_empty() {
        return Ok(PiLabelledTree::single_bag(system.full()));
    }
    let tt = tree_of_tangles(system, tangles, limits)?;
    let mut component_trees: Vec<PiLabelledTree> = Vec::new();
    for (i, tangle) in tangles.iter().enumerate() {
        if !is_robust(system, tangle) {
            component_trees.push(PiLabelledTree::single_bag(system.full()));
            continue;
        }
        let bags = bag_partition_from_tree(system, tangles, &tt, i)?;
        let qm = quotient(system, &bags.parts)?;
        let induced = induce_tangle(tangle, &qm)?;
        let quotient_tree =
            tree_of_separations(qm.target(), &induced, tangle.order(), limits)?;
        component_trees.push(quotient_tree.lifted(&qm));
    }
    // Merge the forest into one vertex space.
    let mut offsets = Vec::with_capacity(component_trees.len());
    let mut bags: Vec<Option<Subset>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut flowers = BTreeMap::new();
    for tree in &component_trees {
        let vertex_offset = bags.len();
        let edge_offset = edges.len();
        offsets.push(vertex_offset);
        bags.extend((0..tree.vertex_count()).map(|v| tree.bag(v)));
        edges.extend(tree.edges().iter().map(|(u, v)| (u + vertex_offset, v + vertex_offset)));
        for (&v, info) in tree.flowers() {
            let mut shifted = info.clone();
            shifted.cyclic_edges = shifted.cyclic_edges.iter().map(|e| e + edge_offset).collect();
            flowers.insert(v + vertex_offset, shifted);
        }
    }
    for (e, (i, j)) in tt.edges().iter().enumerate() {
        let side_i = tt.side_of(*i, e);
        let side_j = tt.side_of(*j, e);
        let v = find_containing_vertex(&bags, &component_trees, &offsets, *i, side_j)?;
        let w = find_containing_vertex(&bags, &component_trees, &offsets, *j, side_i)?;
        edges.push((v, w));
        bags[v] = bags[v].map(|b| b.difference(side_j));
        bags[w] = bags[w].map(|b| b.difference(side_i));
    }
    let tree = PiLabelledTree::new(bags, edges, flowers);
    tree.validate(system)?;
    Ok(tree)
}

/// Lowest-indexed vertex of component tree `i` whose current bag contains
/// `target`.
fn find_containing_vertex(
    bags: &[Option<Subset>],
    component_trees: &[PiLabelledTree],
    offsets: &[usize],
    i: usize,
    target: Subset,
) -> Result<usize, TreeError> {
    let start = offsets[i];
    let end = start + component_trees[i].vertex_count();
    for v in start..end {
        if let Some(b) = bags[v] {
            if target.is_subset_of(b) {
                return Ok(v);
            }
        }
    }
    Err(TreeError::ContainmentVertexNotFound(format!("component {i}, set {target}")))
}

/// One tangle pair's verdict for the first display property.
#[derive(Debug, Clone)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub minimum_order: i32,
    /// An edge-displayed minimum-order distinguishing separation, if found.
    pub displayed: Option<Separation>,
}

/// One class's verdict for the second display property.
#[derive(Debug, Clone)]
pub struct ClassCheck {
    pub representative: Separation,
    /// A displayed class member, if found.
    pub displayed: Option<Separation>,
}

#[derive(Debug, Clone)]
pub struct TangleCheck {
    pub tangle: usize,
    pub robust: bool,
    pub classes: Vec<ClassCheck>,
}

/// Per-clause verdicts with witnesses; failures name the offending pair or
/// class.
#[derive(Debug, Clone)]
pub struct MainTheoremReport {
    pub pairs: Vec<PairCheck>,
    pub tangles: Vec<TangleCheck>,
}

impl MainTheoremReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.displayed.is_some())
            && self
                .tangles
                .iter()
                .all(|t| t.classes.iter().all(|c| c.displayed.is_some()))
    }

    pub fn render(&self, system: &ConnectivitySystem) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            match &p.displayed {
                Some(sep) => out.push_str(&format!(
                    "pair {} {} order {} displayed {} pass\n",
                    p.i,
                    p.j,
                    p.minimum_order,
                    sep.describe(system)
                )),
                None => out.push_str(&format!(
                    "pair {} {} order {} FAIL no displayed minimum-order distinguishing separation\n",
                    p.i, p.j, p.minimum_order
                )),
            }
        }
        for t in &self.tangles {
            if !t.robust {
                out.push_str(&format!("tangle {} not robust, classes skipped\n", t.tangle));
                continue;
            }
            out.push_str(&format!(
                "tangle {} robust, {} non-sequential classes\n",
                t.tangle,
                t.classes.len()
            ));
            for c in &t.classes {
                match &c.displayed {
                    Some(sep) => out.push_str(&format!(
                        "  class {} displayed {} pass\n",
                        c.representative.describe(system),
                        sep.describe(system)
                    )),
                    None => out.push_str(&format!(
                        "  class {} FAIL not displayed\n",
                        c.representative.describe(system)
                    )),
                }
            }
        }
        out.push_str(if self.passed() { "verdict pass\n" } else { "verdict FAIL\n" });
        out
    }
}

/// Checks both display properties of a candidate tree against the tangles,
/// independently of how the tree was built: every pair must have a
/// minimum-order distinguishing separation on some edge, and every
/// non-sequential class of every robust tangle must contain a separation
/// displayed by an edge or flower vertex.
pub fn verify_main(
    system: &ConnectivitySystem,
    tangles: &[Tangle],
    tree: &PiLabelledTree,
) -> Result<MainTheoremReport, TreeError> {
    let edge_displayed: Vec<Separation> = (0..tree.edges().len())
        .map(|e| system.separation(tree.displayed_by_edge(e).0).canonical(system))
        .collect();
    let all_displayed = tree.displayed_separations(system);
    let mut pairs = Vec::new();
    for i in 0..tangles.len() {
        for j in (i + 1)..tangles.len() {
            let (order, candidates) = distinguishing_separations(system, &tangles[i], &tangles[j])?;
            let displayed = edge_displayed
                .iter()
                .find(|d| candidates.iter().any(|c| c.same_partition(d, system)))
                .copied();
            pairs.push(PairCheck { i, j, minimum_order: order, displayed });
        }
    }
    let mut tangle_checks = Vec::new();
    for (idx, tangle) in tangles.iter().enumerate() {
        let robust = is_robust(system, tangle);
        let mut classes = Vec::new();
        if robust {
            let ctx = SeparationContext::new(system, tangle, tangle.order());
            for class in ctx.nonsequential_classes() {
                let displayed = all_displayed
                    .iter()
                    .find(|d| class.contains(system, d))
                    .copied();
                classes.push(ClassCheck { representative: class.representative, displayed });
            }
        }
        tangle_checks.push(TangleCheck { tangle: idx, robust, classes });
    }
    Ok(MainTheoremReport { pairs, tangles: tangle_checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tangle::maximal_tangles;

    fn graft_and_verify(system: &ConnectivitySystem) -> (PiLabelledTree, MainTheoremReport) {
        let tangles = maximal_tangles(system);
        let tree = graft(system, &tangles, SearchLimits::default()).unwrap();
        let report = verify_main(system, &tangles, &tree).unwrap();
        assert!(report.passed(), "{}", report.render(system));
        (tree, report)
    }

    #[test]
    fn single_non_robust_tangle_grafts_to_one_bag() {
        let sys = fixtures::u24();
        let (tree, _) = graft_and_verify(&sys);
        assert_eq!(tree.vertex_count(), 1);
        assert_eq!(tree.bag(0), Some(sys.full()));
    }

    #[test]
    fn single_robust_tangle_grafts_to_its_separation_tree() {
        let sys = fixtures::cycle_system();
        let tangles = maximal_tangles(&sys);
        let direct =
            tree_of_separations(&sys, &tangles[0], tangles[0].order(), SearchLimits::default())
                .unwrap();
        let grafted = graft(&sys, &tangles, SearchLimits::default()).unwrap();
        assert_eq!(direct, grafted);
    }

    #[test]
    fn bridged_k4s_graft_displays_the_order_one_splits() {
        let sys = fixtures::bridged_k4s();
        let (tree, report) = graft_and_verify(&sys);
        assert!(tree.edges().len() >= 2);
        assert_eq!(report.pairs.len(), 3);
        for p in &report.pairs {
            assert_eq!(p.minimum_order, 1);
        }
    }

    #[test]
    fn triangle_chain_graft_passes_both_clauses() {
        let sys = fixtures::three_triangle_chain();
        let (_, report) = graft_and_verify(&sys);
        assert_eq!(report.pairs.len(), 10);
        for t in &report.tangles {
            assert!(t.robust);
        }
    }

    #[test]
    fn contracting_a_grafted_edge_breaks_clause_one() {
        let sys = fixtures::bridged_k4s();
        let tangles = maximal_tangles(&sys);
        let tree = graft(&sys, &tangles, SearchLimits::default()).unwrap();
        let mutated = tree.contract_edge(0);
        let report = verify_main(&sys, &tangles, &mutated).unwrap();
        assert!(!report.passed());
        assert!(report.pairs.iter().any(|p| p.displayed.is_none()));
    }

    #[test]
    fn dropping_the_flower_breaks_clause_two() {
        let sys = fixtures::free(4);
        let tangles = maximal_tangles(&sys);
        let tree = graft(&sys, &tangles, SearchLimits::default()).unwrap();
        let (&hub, _) = tree.flowers().iter().next().expect("free(4) needs a flower");
        let mutated = tree.without_flower(hub);
        let report = verify_main(&sys, &tangles, &mutated).unwrap();
        assert!(!report.passed());
        let failing: Vec<&ClassCheck> = report.tangles[0]
            .classes
            .iter()
            .filter(|c| c.displayed.is_none())
            .collect();
        assert!(!failing.is_empty());
        // The undisplayed classes are exactly the crossing pair splits.
        for c in failing {
            assert_eq!(c.representative.side().len(), 2);
        }
    }
}
