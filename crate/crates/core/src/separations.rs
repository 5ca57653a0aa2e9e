//! Separation machinery relative to a tangle: strong and weak sets, full
//! closures and the greedy sequences that compute them, sequentiality,
//! equivalence of separations, and flowers.
//!
//! Everything here takes the working order k as an explicit parameter; in the
//! grafting pipeline it always equals the tangle's own order, but the API
//! never infers it.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ground::Subset;
use crate::system::{ConnectivitySystem, Separation};
use crate::tangle::Tangle;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeparationError {
    #[error("set {0} is weak: it lies inside a member of the tangle")]
    WeakInput(String),
    #[error("set {0} has order {1}, above the working order {2}")]
    NotKSeparating(String, i32, i32),
    #[error("separation {0} is not a strong k-separation")]
    NotStrongSeparation(String),
}

/// A base set with a sequence of disjoint weak extension steps; every prefix
/// union stays k-separating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSequence {
    pub base: Subset,
    pub steps: Vec<Subset>,
}

impl KSequence {
    pub fn union(&self) -> Subset {
        self.steps.iter().fold(self.base, |acc, s| acc.union(*s))
    }

    /// Prefix unions including the bare base and the full union.
    pub fn prefix_unions(&self) -> Vec<Subset> {
        let mut acc = self.base;
        let mut out = vec![acc];
        for s in &self.steps {
            acc = acc.union(*s);
            out.push(acc);
        }
        out
    }
}

/// One equivalence class of strong non-sequential k-separations, keyed by the
/// unordered pair of side closures.
#[derive(Debug, Clone)]
pub struct EquivalenceClass {
    /// Member with the smallest canonical side mask.
    pub representative: Separation,
    /// All members in canonical orientation, ascending by side mask.
    pub members: Vec<Separation>,
    /// Unordered closure pair (smaller mask first).
    pub closure_pair: (Subset, Subset),
}

impl EquivalenceClass {
    pub fn contains(&self, system: &ConnectivitySystem, sep: &Separation) -> bool {
        let canonical = sep.canonical(system);
        self.members.iter().any(|m| m.side() == canonical.side())
    }
}

/// Cached weakness bitmap for one (system, tangle, order) triple; the entry
/// point for all closure and equivalence computations.
pub struct SeparationContext<'a> {
    system: &'a ConnectivitySystem,
    tangle: &'a Tangle,
    k: i32,
    weak: Vec<bool>,
}

impl<'a> SeparationContext<'a> {
    pub fn new(system: &'a ConnectivitySystem, tangle: &'a Tangle, k: i32) -> Self {
        let weak = tangle.weakness_table(system);
        SeparationContext { system, tangle, k, weak }
    }

    pub fn system(&self) -> &ConnectivitySystem {
        self.system
    }

    pub fn tangle(&self) -> &Tangle {
        self.tangle
    }

    pub fn order(&self) -> i32 {
        self.k
    }

    pub fn is_weak(&self, x: Subset) -> bool {
        self.weak[x.bits() as usize]
    }

    /// Not contained in any member of the tangle.
    pub fn is_strong(&self, x: Subset) -> bool {
        !self.is_weak(x)
    }

    pub fn is_member(&self, x: Subset) -> bool {
        self.system.lambda(x) < self.tangle.order() && self.is_weak(x)
    }

    fn require_strong_k_separating(&self, x: Subset) -> Result<(), SeparationError> {
        if self.is_weak(x) {
            return Err(SeparationError::WeakInput(self.system.display(x)));
        }
        let order = self.system.lambda(x);
        if order > self.k {
            return Err(SeparationError::NotKSeparating(self.system.display(x), order, self.k));
        }
        Ok(())
    }

    fn require_strong_separation(&self, sep: &Separation) -> Result<(), SeparationError> {
        let other = sep.other_side(self.system);
        if sep.order() > self.k || self.is_weak(sep.side()) || self.is_weak(other) {
            return Err(SeparationError::NotStrongSeparation(sep.describe(self.system)));
        }
        Ok(())
    }

    /// Non-empty weak extension steps available from `current`: subsets of a
    /// maximal member restricted to the complement, keeping the union
    /// k-separating. Sorted by (size, mask) so the head is inclusion-minimal.
    fn step_candidates(&self, current: Subset) -> Vec<Subset> {
        let complement = self.system.complement(current);
        let mut candidates: Vec<Subset> = Vec::new();
        for m in self.tangle.maximal_members() {
            for y in m.intersection(complement).submasks() {
                if !y.is_empty() && self.system.lambda(current.union(y)) <= self.k {
                    candidates.push(y);
                }
            }
        }
        candidates.sort_by_key(|y| (y.len(), y.bits()));
        candidates.dedup();
        candidates
    }

    /// The smallest k-separating superset of `x` with no weak k-separating
    /// extension, computed as the union of a greedy maximal sequence of
    /// inclusion-minimal steps. Any maximal sequence yields the same set;
    /// [`Self::full_closure_seeded`] exists to check exactly that.
    pub fn full_closure(&self, x: Subset) -> Result<Subset, SeparationError> {
        Ok(self.full_closure_with_sequence(x)?.0)
    }

    pub fn full_closure_with_sequence(
        &self,
        x: Subset,
    ) -> Result<(Subset, KSequence), SeparationError> {
        self.require_strong_k_separating(x)?;
        let mut current = x;
        let mut steps = Vec::new();
        loop {
            let candidates = self.step_candidates(current);
            match candidates.first() {
                Some(&y) => {
                    steps.push(y);
                    current = current.union(y);
                }
                None => break,
            }
        }
        Ok((current, KSequence { base: x, steps }))
    }

    /// Greedy closure picking a seeded-random candidate at each step instead
    /// of the minimal one.
    pub fn full_closure_seeded(&self, x: Subset, seed: u64) -> Result<Subset, SeparationError> {
        self.require_strong_k_separating(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut current = x;
        loop {
            let candidates = self.step_candidates(current);
            if candidates.is_empty() {
                return Ok(current);
            }
            current = current.union(candidates[rng.random_range(0..candidates.len())]);
        }
    }

    /// Definitional test: no non-empty weak extension keeps the set
    /// k-separating.
    pub fn is_fully_closed(&self, x: Subset) -> bool {
        self.step_candidates(x).is_empty()
    }

    /// Whether either side's full closure is the whole ground set.
    pub fn is_sequential(&self, sep: &Separation) -> Result<bool, SeparationError> {
        self.require_strong_separation(sep)?;
        let full = self.system.full();
        Ok(self.full_closure(sep.side())? == full
            || self.full_closure(sep.other_side(self.system))? == full)
    }

    /// Whether the unordered closure pairs of the two separations coincide.
    pub fn are_equivalent(
        &self,
        s1: &Separation,
        s2: &Separation,
    ) -> Result<bool, SeparationError> {
        Ok(self.closure_pair(s1)? == self.closure_pair(s2)?)
    }

    pub fn closure_pair(&self, sep: &Separation) -> Result<(Subset, Subset), SeparationError> {
        self.require_strong_separation(sep)?;
        let a = self.full_closure(sep.side())?;
        let b = self.full_closure(sep.other_side(self.system))?;
        Ok(if a.bits() <= b.bits() { (a, b) } else { (b, a) })
    }

    /// Partitions all strong non-sequential k-separations into equivalence
    /// classes. Classes are sorted by representative side mask.
    pub fn nonsequential_classes(&self) -> Vec<EquivalenceClass> {
        let full = self.system.full();
        let mut closure_cache: HashMap<u32, Subset> = HashMap::new();
        let mut cached_closure = |ctx: &Self, x: Subset| -> Subset {
            if let Some(c) = closure_cache.get(&x.bits()) {
                return *c;
            }
            let c = ctx.full_closure(x).expect("input checked strong and k-separating");
            closure_cache.insert(x.bits(), c);
            c
        };
        let mut by_pair: HashMap<(u32, u32), Vec<Separation>> = HashMap::new();
        for x in self.system.ground().subsets() {
            let co = self.system.complement(x);
            if x.bits() > co.bits() {
                continue;
            }
            if self.system.lambda(x) > self.k || self.is_weak(x) || self.is_weak(co) {
                continue;
            }
            let cx = cached_closure(self, x);
            if cx == full {
                continue;
            }
            let cco = cached_closure(self, co);
            if cco == full {
                continue;
            }
            let key = if cx.bits() <= cco.bits() {
                (cx.bits(), cco.bits())
            } else {
                (cco.bits(), cx.bits())
            };
            by_pair.entry(key).or_default().push(self.system.separation(x));
        }
        let mut classes: Vec<EquivalenceClass> = by_pair
            .into_iter()
            .map(|((a, b), mut members)| {
                members.sort();
                EquivalenceClass {
                    representative: members[0],
                    members,
                    closure_pair: (Subset::from_bits(a), Subset::from_bits(b)),
                }
            })
            .collect();
        classes.sort_by_key(|c| c.representative.side());
        classes
    }

    /// Every strong set of order exactly k that is one side of some
    /// non-sequential separation... kept simple: all strong k-separating
    /// sets, for property checks.
    pub fn strong_k_separating_sets(&self) -> Vec<Subset> {
        self.system
            .ground()
            .subsets()
            .filter(|x| self.system.lambda(*x) <= self.k && self.is_strong(*x))
            .collect()
    }
}

/// Cyclically ordered partition of the ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flower {
    pub petals: Vec<Subset>,
}

/// Whether the cyclic partition is a k-flower for the tangle: petals are
/// strong, partition the ground set, and every petal and consecutive petal
/// pair is k-separating.
pub fn is_flower(ctx: &SeparationContext<'_>, petals: &[Subset]) -> bool {
    let system = ctx.system();
    let n = petals.len();
    if n == 0 {
        return false;
    }
    let mut union = Subset::EMPTY;
    for (i, p) in petals.iter().enumerate() {
        if petals.iter().skip(i + 1).any(|q| p.intersects(*q)) {
            return false;
        }
        union = union.union(*p);
        if ctx.is_weak(*p) || system.lambda(*p) > ctx.order() {
            return false;
        }
    }
    if union != system.full() {
        return false;
    }
    if n >= 2 {
        for i in 0..n {
            let pair = petals[i].union(petals[(i + 1) % n]);
            if system.lambda(pair) > ctx.order() {
                return false;
            }
        }
    }
    true
}

/// All k-separating unions of petals, as canonical separations. The empty and
/// full unions are excluded; a two-petal flower displays exactly (P1, P2).
pub fn flower_displayed(
    system: &ConnectivitySystem,
    petals: &[Subset],
    k: i32,
) -> Vec<Separation> {
    let m = petals.len();
    let mut out: Vec<Separation> = Vec::new();
    for pick in 1..((1u32 << m) - 1) {
        let mut union = Subset::EMPTY;
        for (i, p) in petals.iter().enumerate() {
            if pick & (1 << i) != 0 {
                union = union.union(*p);
            }
        }
        if system.lambda(union) <= k {
            out.push(system.separation(union).canonical(system));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Whether `x` is a union of cyclically consecutive petals.
pub fn is_consecutive_union(petals: &[Subset], x: Subset) -> bool {
    let m = petals.len();
    let chosen: Vec<bool> = petals.iter().map(|p| p.is_subset_of(x) && !p.is_empty()).collect();
    let union = petals
        .iter()
        .zip(&chosen)
        .filter(|(_, c)| **c)
        .fold(Subset::EMPTY, |acc, (p, _)| acc.union(*p));
    if union != x {
        return false;
    }
    // Count cyclic blocks of chosen petals; consecutive means at most one.
    let mut blocks = 0;
    for i in 0..m {
        if chosen[i] && !chosen[(i + m - 1) % m] {
            blocks += 1;
        }
    }
    blocks <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tangle::{enumerate_tangles, maximal_tangles};

    fn labels(system: &ConnectivitySystem, names: &[&str]) -> Subset {
        system.ground().subset_from_labels(names).unwrap()
    }

    #[test]
    fn strength_in_the_u24_tangle() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        assert!(!ctx.is_strong(labels(&sys, &["a"])));
        assert!(ctx.is_strong(labels(&sys, &["a", "b"])));
        assert!(ctx.is_strong(sys.full()));
    }

    #[test]
    fn full_closure_of_a_pair_in_u24_is_everything() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        let ab = labels(&sys, &["a", "b"]);
        assert_eq!(ctx.full_closure(ab).unwrap(), sys.full());
        // Weak input is refused.
        assert!(matches!(
            ctx.full_closure(labels(&sys, &["a"])),
            Err(SeparationError::WeakInput(_))
        ));
    }

    #[test]
    fn full_closure_is_idempotent_and_extensive() {
        let sys = fixtures::bridged_k4s();
        for t in maximal_tangles(&sys) {
            let ctx = SeparationContext::new(&sys, &t, t.order());
            for x in ctx.strong_k_separating_sets() {
                let c = ctx.full_closure(x).unwrap();
                assert!(x.is_subset_of(c));
                assert_eq!(ctx.full_closure(c).unwrap(), c);
                assert!(ctx.is_fully_closed(c));
            }
        }
    }

    #[test]
    fn closure_of_full_set_is_full() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        assert_eq!(ctx.full_closure(sys.full()).unwrap(), sys.full());
    }

    #[test]
    fn u24_pair_separations_are_sequential() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        let sep = sys.separation(labels(&sys, &["a", "b"]));
        assert!(ctx.is_sequential(&sep).unwrap());
        assert!(ctx.is_sequential(&sep.flipped(&sys)).unwrap());
        assert!(ctx.nonsequential_classes().is_empty());
    }

    #[test]
    fn equivalence_is_reflexive_and_side_symmetric() {
        let sys = fixtures::cycle_system();
        let t = maximal_tangles(&sys).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 2);
        let arc = sys.separation(labels(&sys, &["e1", "e2"]));
        assert!(ctx.are_equivalent(&arc, &arc).unwrap());
        assert!(ctx.are_equivalent(&arc, &arc.flipped(&sys)).unwrap());
    }

    #[test]
    fn cycle_classes_are_all_arc_separations() {
        let sys = fixtures::cycle_system();
        let t = maximal_tangles(&sys).remove(0);
        assert_eq!(t.order(), 2);
        let ctx = SeparationContext::new(&sys, &t, 2);
        let classes = ctx.nonsequential_classes();
        // C5: arcs of length 1..4 in 10 complement pairs, each its own class.
        assert_eq!(classes.len(), 10);
        for c in &classes {
            assert_eq!(c.members.len(), 1);
        }
    }

    #[test]
    fn weak_extension_step_preserves_equivalence() {
        // On the bridged K4s: extending a strong side by a weak set that
        // keeps it k-separating lands in the same class.
        let sys = fixtures::bridged_k4s();
        for t in maximal_tangles(&sys) {
            let ctx = SeparationContext::new(&sys, &t, t.order());
            for class in ctx.nonsequential_classes() {
                for sep in &class.members {
                    let g = sep.other_side(&sys);
                    for m in t.maximal_members() {
                        for a in m.intersection(g).submasks() {
                            if a.is_empty() {
                                continue;
                            }
                            let grown = sep.side().union(a);
                            if sys.lambda(grown) <= t.order()
                                && ctx.is_strong(g.difference(a))
                            {
                                let moved = sys.separation(grown);
                                assert!(ctx.are_equivalent(sep, &moved).unwrap());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn strong_separations_are_exact() {
        for (_, sys) in fixtures::pipeline_fixtures() {
            for t in maximal_tangles(&sys) {
                let ctx = SeparationContext::new(&sys, &t, t.order());
                for x in sys.ground().subsets() {
                    if ctx.is_strong(x) && ctx.is_strong(sys.complement(x)) {
                        assert!(sys.lambda(x) >= t.order());
                    }
                }
            }
        }
    }

    #[test]
    fn two_petal_flower_from_any_strong_separation() {
        let sys = fixtures::cycle_system();
        let t = maximal_tangles(&sys).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 2);
        let arc = labels(&sys, &["e1", "e2"]);
        let petals = vec![arc, sys.complement(arc)];
        assert!(is_flower(&ctx, &petals));
        let displayed = flower_displayed(&sys, &petals, 2);
        assert_eq!(displayed.len(), 1);
    }

    #[test]
    fn weak_petals_are_rejected() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        let petals: Vec<Subset> = (0..4).map(Subset::singleton).collect();
        assert!(!is_flower(&ctx, &petals)); // singletons are members, hence weak
    }

    #[test]
    fn flower_verdict_survives_rotation_and_reflection() {
        let sys = fixtures::cycle_system();
        let t = maximal_tangles(&sys).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 2);
        let petals: Vec<Subset> = (0..5).map(Subset::singleton).collect();
        assert!(is_flower(&ctx, &petals));
        let rotated: Vec<Subset> = (0..5).map(|i| petals[(i + 2) % 5]).collect();
        let reflected: Vec<Subset> = (0..5).rev().map(|i| petals[i]).collect();
        assert!(is_flower(&ctx, &rotated));
        assert!(is_flower(&ctx, &reflected));
    }

    #[test]
    fn cycle_flower_displays_exactly_the_arcs() {
        let sys = fixtures::cycle_system();
        let petals: Vec<Subset> = (0..5).map(Subset::singleton).collect();
        let displayed = flower_displayed(&sys, &petals, 2);
        assert_eq!(displayed.len(), 10);
        for sep in &displayed {
            assert!(is_consecutive_union(&petals, sep.side()));
        }
    }

    #[test]
    fn closure_agrees_across_orderings_on_u24() {
        let sys = fixtures::u24();
        let t = enumerate_tangles(&sys, 3).remove(0);
        let ctx = SeparationContext::new(&sys, &t, 3);
        for x in ctx.strong_k_separating_sets() {
            let reference = ctx.full_closure(x).unwrap();
            for seed in 0..5 {
                assert_eq!(ctx.full_closure_seeded(x, seed).unwrap(), reference);
            }
        }
    }
}
