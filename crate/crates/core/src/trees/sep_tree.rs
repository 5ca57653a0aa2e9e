//! Per-tangle tree of separations: a π-labelled tree displaying, up to
//! equivalence, every separation that is non-sequential relative to a robust
//! tangle.
//!
//! The construction is a verified search. One representative is chosen per
//! equivalence class; pairwise-crossing choices are merged into flower
//! groups whose petals are the atoms of the group members, everything else
//! stays laminar. A successful arrangement is assembled into a tree and the
//! display postcondition is re-checked from scratch before returning.

use std::collections::{BTreeMap, BTreeSet};

use crate::ground::Subset;
use crate::separations::{is_flower, EquivalenceClass, SeparationContext};
use crate::system::{crosses_sets, ConnectivitySystem, Separation};
use crate::tangle::Tangle;
use crate::trees::{build_laminar_tree, Budget, FlowerInfo, PiLabelledTree, SearchLimits, TreeError};

/// Flower groups with more atoms than this are rejected outright; the cyclic
/// arrangement search is factorial in the atom count.
const MAX_PETALS: usize = 9;

pub fn tree_of_separations(
    system: &ConnectivitySystem,
    tangle: &Tangle,
    k: i32,
    limits: SearchLimits,
) -> Result<PiLabelledTree, TreeError> {
    let ctx = SeparationContext::new(system, tangle, k);
    let classes = ctx.nonsequential_classes();
    if classes.is_empty() {
        let tree = PiLabelledTree::single_bag(system.full());
        tree.validate(system)?;
        return Ok(tree);
    }
    let mut budget = Budget::new(limits);
    let mut choices: Vec<Separation> = Vec::new();
    let found = choose(&ctx, &classes, &mut choices, 0, &mut budget)?;
    match found {
        Some(tree) => Ok(tree),
        None => Err(TreeError::SearchExhausted(format!(
            "arranging representatives of {} non-sequential classes",
            classes.len()
        ))),
    }
}

/// Depth-first choice of one member per class; a full choice vector is
/// arranged into a plan, built, and verified. Prefix arrangements prune
/// dead branches early.
fn choose(
    ctx: &SeparationContext<'_>,
    classes: &[EquivalenceClass],
    choices: &mut Vec<Separation>,
    depth: usize,
    budget: &mut Budget,
) -> Result<Option<PiLabelledTree>, TreeError> {
    budget.spend()?;
    if depth == classes.len() {
        if let Some(plan) = arrange(ctx, choices, budget)? {
            match assemble(ctx, classes, &plan) {
                Ok(tree) => return Ok(Some(tree)),
                Err(_) => return Ok(None),
            }
        }
        return Ok(None);
    }
    for member in &classes[depth].members {
        choices.push(*member);
        if arrange(ctx, choices, budget)?.is_some() {
            if let Some(tree) = choose(ctx, classes, choices, depth + 1, budget)? {
                choices.pop();
                return Ok(Some(tree));
            }
        }
        choices.pop();
    }
    Ok(None)
}

struct FlowerGroup {
    /// Atoms in a cyclic order with all consecutive unions k-separating.
    petals: Vec<Subset>,
}

struct Plan {
    /// Separations displayed by their own tree edge.
    laminar: Vec<Separation>,
    groups: Vec<FlowerGroup>,
}

/// Splits the chosen separations into laminar singles and flower groups
/// (connected components of the crossing graph), concretizes each group into
/// petals, and checks all cross-structure compatibility. `None` means the
/// current choices cannot coexist in one tree.
fn arrange(
    ctx: &SeparationContext<'_>,
    choices: &[Separation],
    budget: &mut Budget,
) -> Result<Option<Plan>, TreeError> {
    let system = ctx.system();
    let full = system.full();
    let m = choices.len();
    // Connected components of the crossing graph.
    let mut component: Vec<usize> = (0..m).collect();
    fn root(component: &mut Vec<usize>, i: usize) -> usize {
        if component[i] != i {
            let r = root(component, component[i]);
            component[i] = r;
        }
        component[i]
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if crosses_sets(full, choices[i].side(), choices[j].side()) {
                let (a, b) = (root(&mut component, i), root(&mut component, j));
                if a != b {
                    component[a] = b;
                }
            }
        }
    }
    let mut by_component: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let r = root(&mut component, i);
        by_component.entry(r).or_default().push(i);
    }
    let mut laminar: Vec<Separation> = Vec::new();
    let mut groups: Vec<FlowerGroup> = Vec::new();
    for indices in by_component.values() {
        if indices.len() == 1 {
            laminar.push(choices[indices[0]]);
            continue;
        }
        let member_sides: Vec<Subset> =
            indices.iter().map(|&i| choices[i].canonical(system).side()).collect();
        let atoms = atoms_of(system, &member_sides);
        if atoms.len() > MAX_PETALS {
            return Ok(None);
        }
        for a in &atoms {
            if ctx.is_weak(*a) || system.lambda(*a) > ctx.order() {
                return Ok(None);
            }
        }
        match arrange_cycle(system, &atoms, ctx.order(), budget)? {
            Some(petals) => groups.push(FlowerGroup { petals }),
            None => return Ok(None),
        }
    }
    // A laminar side must sit inside one petal of every group, or be exactly
    // a union of petals, in which case the flower displays it and the side
    // needs no edge of its own.
    let mut kept: Vec<Separation> = Vec::new();
    'laminar: for sep in &laminar {
        for group in &groups {
            let side = sep.side();
            let inside_one = group
                .petals
                .iter()
                .any(|p| side.is_subset_of(*p) || system.complement(side).is_subset_of(*p));
            if inside_one {
                continue;
            }
            let union_of_petals = group
                .petals
                .iter()
                .all(|p| p.is_subset_of(side) || !p.intersects(side));
            if union_of_petals {
                continue 'laminar; // absorbed: displayed by the flower
            }
            return Ok(None);
        }
        kept.push(*sep);
    }
    // Distinct groups must have pairwise non-crossing petals.
    for (gi, g1) in groups.iter().enumerate() {
        for g2 in groups.iter().skip(gi + 1) {
            for p in &g1.petals {
                for q in &g2.petals {
                    let nested_or_disjoint =
                        p.is_subset_of(*q) || q.is_subset_of(*p) || !p.intersects(*q);
                    if !nested_or_disjoint && crosses_sets(full, *p, *q) {
                        return Ok(None);
                    }
                }
            }
        }
    }
    Ok(Some(Plan { laminar: kept, groups }))
}

/// Cells of the partition generated by the sides: elements grouped by which
/// sides contain them.
fn atoms_of(system: &ConnectivitySystem, sides: &[Subset]) -> Vec<Subset> {
    let mut by_signature: BTreeMap<u64, Subset> = BTreeMap::new();
    for e in 0..system.size() {
        let mut signature = 0u64;
        for (i, s) in sides.iter().enumerate() {
            if s.contains(e) {
                signature |= 1 << i;
            }
        }
        let entry = by_signature.entry(signature).or_insert(Subset::EMPTY);
        *entry = entry.with(e);
    }
    let mut atoms: Vec<Subset> = by_signature.into_values().collect();
    atoms.sort();
    atoms
}

/// Finds a cyclic order of the atoms in which every consecutive pair union
/// is k-separating; the first atom is fixed to kill rotations.
fn arrange_cycle(
    system: &ConnectivitySystem,
    atoms: &[Subset],
    k: i32,
    budget: &mut Budget,
) -> Result<Option<Vec<Subset>>, TreeError> {
    let m = atoms.len();
    let mut order: Vec<usize> = vec![0];
    let mut used = vec![false; m];
    used[0] = true;
    fn extend(
        system: &ConnectivitySystem,
        atoms: &[Subset],
        k: i32,
        order: &mut Vec<usize>,
        used: &mut Vec<bool>,
        budget: &mut Budget,
    ) -> Result<bool, TreeError> {
        budget.spend()?;
        let m = atoms.len();
        if order.len() == m {
            let wrap = atoms[order[m - 1]].union(atoms[order[0]]);
            return Ok(m < 2 || system.lambda(wrap) <= k);
        }
        for next in 0..m {
            if used[next] {
                continue;
            }
            let last = *order.last().expect("order starts non-empty");
            if system.lambda(atoms[last].union(atoms[next])) > k {
                continue;
            }
            order.push(next);
            used[next] = true;
            if extend(system, atoms, k, order, used, budget)? {
                return Ok(true);
            }
            order.pop();
            used[next] = false;
        }
        Ok(false)
    }
    if extend(system, atoms, k, &mut order, &mut used, budget)? {
        Ok(Some(order.into_iter().map(|i| atoms[i]).collect()))
    } else {
        Ok(None)
    }
}

/// Builds the tree for a plan and re-verifies the display postcondition: the
/// tree's displayed separations must hit every class.
fn assemble(
    ctx: &SeparationContext<'_>,
    classes: &[EquivalenceClass],
    plan: &Plan,
) -> Result<PiLabelledTree, TreeError> {
    let system = ctx.system();
    let full = system.full();
    let orient = |s: Subset| if s.contains(0) { full.difference(s) } else { s };
    let mut sides: BTreeSet<u32> = BTreeSet::new();
    for sep in &plan.laminar {
        sides.insert(orient(sep.side()).bits());
    }
    for group in &plan.groups {
        for petal in &group.petals {
            sides.insert(orient(*petal).bits());
        }
    }
    let built = build_laminar_tree(system, &sides)?;
    let mut tree = built.tree.clone();
    let mut flowers = BTreeMap::new();
    for group in &plan.groups {
        let rest_position = group
            .petals
            .iter()
            .position(|p| p.contains(0))
            .expect("petals partition the ground set");
        let rest = group.petals[rest_position];
        let hub_side = full.difference(rest);
        let hub = *built
            .side_vertex
            .get(&hub_side.bits())
            .ok_or_else(|| TreeError::Verification("flower hub side missing".into()))?;
        let expected: BTreeSet<u32> = group
            .petals
            .iter()
            .filter(|p| !p.contains(0))
            .map(|p| p.bits())
            .collect();
        let actual = built.children.get(&hub).cloned().unwrap_or_default();
        if actual != expected {
            return Err(TreeError::Verification(
                "flower hub children do not match its petals".into(),
            ));
        }
        if tree.bag(hub) != Some(Subset::EMPTY) {
            return Err(TreeError::Verification("flower hub would drop bag elements".into()));
        }
        // Cyclic edge order following the petal cycle.
        let mut cyclic = Vec::new();
        for i in 0..group.petals.len() {
            let petal = group.petals[(rest_position + i) % group.petals.len()];
            if petal == rest {
                cyclic.push(built.parent_edge[&hub]);
            } else {
                let child = built.side_vertex[&petal.bits()];
                cyclic.push(built.parent_edge[&child]);
            }
        }
        flowers.insert(hub, FlowerInfo { order: ctx.order(), cyclic_edges: cyclic });
    }
    let mut bags: Vec<Option<Subset>> = (0..tree.vertex_count()).map(|v| tree.bag(v)).collect();
    for &hub in flowers.keys() {
        bags[hub] = None;
    }
    tree = PiLabelledTree::new(bags, tree.edges().to_vec(), flowers);
    tree.validate(system)?;
    for (&hub, _) in tree.flowers() {
        let petals = tree.flower_petals(hub);
        if !is_flower(ctx, &petals) {
            return Err(TreeError::Verification(format!(
                "vertex {hub} does not display a valid flower"
            )));
        }
    }
    // Display postcondition, from scratch.
    let displayed = tree.displayed_separations(system);
    let displayed_sides: BTreeSet<u32> = displayed.iter().map(|s| s.side().bits()).collect();
    for class in classes {
        let hit = class
            .members
            .iter()
            .any(|member| displayed_sides.contains(&member.side().bits()));
        if !hit {
            return Err(TreeError::Verification(format!(
                "class with representative {} is not displayed",
                class.representative.describe(system)
            )));
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tangle::{enumerate_tangles, maximal_tangles};
    use crate::trees::SearchLimits;

    fn display_covers_all_classes(system: &ConnectivitySystem, tangle: &Tangle, k: i32) {
        let tree = tree_of_separations(system, tangle, k, SearchLimits::default()).unwrap();
        tree.validate(system).unwrap();
        let ctx = SeparationContext::new(system, tangle, k);
        let displayed = tree.displayed_separations(system);
        for class in ctx.nonsequential_classes() {
            assert!(
                displayed.iter().any(|d| class.contains(system, d)),
                "class {} undisplayed",
                class.representative.describe(system)
            );
        }
    }

    #[test]
    fn no_classes_yields_the_single_bag_tree() {
        let sys = fixtures::u24();
        // The order-2 truncation is robust; at k = 3 nothing is
        // non-sequential, so the tree is one bag.
        let t = enumerate_tangles(&sys, 3).remove(0);
        let tree = tree_of_separations(&sys, &t, 3, SearchLimits::default()).unwrap();
        assert_eq!(tree.vertex_count(), 1);
        assert_eq!(tree.bag(0), Some(sys.full()));
    }

    #[test]
    fn u24_order_two_tangle_gets_a_laminar_tree() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 2).remove(0);
        display_covers_all_classes(&sys, &t, 2);
        let tree = tree_of_separations(&sys, &t, 2, SearchLimits::default()).unwrap();
        // Four singleton classes, pairwise disjoint: no flower needed.
        assert!(tree.flowers().is_empty());
        assert_eq!(tree.displayed_separations(&sys).len(), 4);
    }

    #[test]
    fn cycle_tangle_gets_a_five_petal_flower() {
        let sys = fixtures::cycle_system();
        let t = maximal_tangles(&sys).remove(0);
        let tree = tree_of_separations(&sys, &t, 2, SearchLimits::default()).unwrap();
        assert_eq!(tree.flowers().len(), 1);
        let (&hub, _) = tree.flowers().iter().next().unwrap();
        assert_eq!(tree.flower_petals(hub).len(), 5);
        display_covers_all_classes(&sys, &t, 2);
    }

    #[test]
    fn free_matroids_display_every_class() {
        for n in 2..=6 {
            let sys = fixtures::free(n);
            let t = maximal_tangles(&sys).remove(0);
            display_covers_all_classes(&sys, &t, t.order());
        }
    }

    #[test]
    fn free4_uses_a_flower_for_the_crossing_pair_classes() {
        let sys = fixtures::free(4);
        let t = maximal_tangles(&sys).remove(0);
        let tree = tree_of_separations(&sys, &t, 1, SearchLimits::default()).unwrap();
        assert_eq!(tree.flowers().len(), 1);
    }

    #[test]
    fn triangle_chain_tangles_display_their_classes() {
        let sys = fixtures::three_triangle_chain();
        for t in maximal_tangles(&sys) {
            display_covers_all_classes(&sys, &t, t.order());
        }
    }
}
