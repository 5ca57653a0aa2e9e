//! Tangles of a connectivity system.
//!
//! A tangle of order k orients every separation of order below k by choosing
//! a "small" side, subject to: every chosen side has order below k (T1);
//! every such separation is oriented (T2); no three chosen sides cover the
//! ground set (T3); and no chosen side is the complement of a single element
//! (T4). The member family is closed downward among sets of order below k,
//! so a tangle is stored as its antichain of inclusion-maximal members and
//! membership is recovered by containment.

use thiserror::Error;

use crate::ground::{maximal_subsets, Subset};
use crate::system::{ConnectivitySystem, Separation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TangleError {
    #[error("tangles live on the same system; orders {0} and {1} given against different tables")]
    SystemMismatch(i32, i32),
    #[error("one tangle is a truncation of the other; no distinguishing separation exists")]
    TruncationPair,
}

/// Verdict of checking the four tangle axioms on a candidate member family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TangleVerdict {
    Pass,
    /// A listed member has order >= k.
    T1 { member: Subset, order: i32 },
    /// A separation of order below k with neither side a member.
    T2 { side: Subset },
    /// Three members covering the ground set.
    T3 { a: Subset, b: Subset, c: Subset },
    /// The complement of this single element is a member.
    T4 { element: usize },
}

impl TangleVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, TangleVerdict::Pass)
    }

    pub fn describe(&self, system: &ConnectivitySystem) -> String {
        match self {
            TangleVerdict::Pass => "pass".into(),
            TangleVerdict::T1 { member, order } => {
                format!("T1 violated: member {} has order {}", system.display(*member), order)
            }
            TangleVerdict::T2 { side } => format!(
                "T2 violated: neither {} nor {} is a member",
                system.display(*side),
                system.display(system.complement(*side))
            ),
            TangleVerdict::T3 { a, b, c } => format!(
                "T3 violated: {}, {}, {} cover the ground set",
                system.display(*a),
                system.display(*b),
                system.display(*c)
            ),
            TangleVerdict::T4 { element } => format!(
                "T4 violated: complement of {{{}}} is a member",
                system.ground().label(*element)
            ),
        }
    }
}

/// A tangle, stored by order and inclusion-maximal members.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tangle {
    order: i32,
    maximal: Vec<Subset>,
}

impl Tangle {
    /// Wraps an already-canonical antichain; callers outside this module
    /// should obtain tangles from [`enumerate_tangles`] or [`truncate`].
    pub fn from_maximal_members(order: i32, mut maximal: Vec<Subset>) -> Self {
        maximal.sort();
        maximal.dedup();
        Tangle { order, maximal }
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn maximal_members(&self) -> &[Subset] {
        &self.maximal
    }

    /// Whether `x` is contained in some member.
    pub fn is_weak(&self, x: Subset) -> bool {
        self.maximal.iter().any(|m| x.is_subset_of(*m))
    }

    pub fn is_strong(&self, x: Subset) -> bool {
        !self.is_weak(x)
    }

    /// Membership by down-closure: order below k and inside a maximal member.
    pub fn is_member(&self, system: &ConnectivitySystem, x: Subset) -> bool {
        system.lambda(x) < self.order && self.is_weak(x)
    }

    /// Per-mask weakness bitmap for enumeration-heavy callers.
    pub fn weakness_table(&self, system: &ConnectivitySystem) -> Vec<bool> {
        let mut weak = vec![false; system.ground().subset_count()];
        for m in &self.maximal {
            for sub in m.submasks() {
                weak[sub.bits() as usize] = true;
            }
        }
        weak
    }

    pub fn describe(&self, system: &ConnectivitySystem) -> String {
        let members: Vec<String> = self.maximal.iter().map(|m| system.display(*m)).collect();
        format!("order {} maximal members [{}]", self.order, members.join(" "))
    }
}

/// Checks T1-T4 for the family induced by down-closure of the given sets.
///
/// The input need not be an antichain; the induced member family is every
/// subset of a listed set whose order is below k.
pub fn is_tangle(system: &ConnectivitySystem, k: i32, members: &[Subset]) -> TangleVerdict {
    let full = system.full();
    let is_member = |x: Subset| -> bool {
        system.lambda(x) < k && members.iter().any(|m| x.is_subset_of(*m))
    };
    for m in members {
        if system.lambda(*m) >= k {
            return TangleVerdict::T1 { member: *m, order: system.lambda(*m) };
        }
    }
    for e in 0..system.size() {
        let co_singleton = full.difference(Subset::singleton(e));
        if is_member(co_singleton) {
            return TangleVerdict::T4 { element: e };
        }
    }
    for (i, &a) in members.iter().enumerate() {
        for (j, &b) in members.iter().enumerate().skip(i) {
            if !a.union(b).is_subset_of(full) {
                continue;
            }
            for &c in members.iter().skip(j) {
                if a.union(b).union(c) == full {
                    return TangleVerdict::T3 { a, b, c };
                }
            }
        }
    }
    for x in system.ground().subsets() {
        let co = system.complement(x);
        if x.bits() > co.bits() {
            continue;
        }
        if system.lambda(x) <= k - 1 && !is_member(x) && !is_member(co) {
            return TangleVerdict::T2 { side: x };
        }
    }
    TangleVerdict::Pass
}

/// Complement pairs of sets of order at most k-1, each pair represented by
/// its smaller mask, in the search order used by the enumerator: decreasing
/// order value, then increasing mask.
fn orientation_pairs(system: &ConnectivitySystem, k: i32) -> Vec<Subset> {
    let mut pairs: Vec<Subset> = system
        .ground()
        .subsets()
        .filter(|x| x.bits() < system.complement(*x).bits() || *x == system.complement(*x))
        .filter(|x| system.lambda(*x) <= k - 1)
        .collect();
    pairs.sort_by_key(|x| (std::cmp::Reverse(system.lambda(*x)), x.bits()));
    pairs
}

/// Whether adding `candidate` to the chosen member set creates a T3 or T4
/// violation. Every violating triple contains a latest-added member, so
/// checking each addition against all earlier pairs is complete.
fn admissible(full: Subset, forbidden: &[Subset], chosen: &[Subset], candidate: Subset) -> bool {
    if candidate == full || forbidden.contains(&candidate) {
        return false;
    }
    for (i, &b) in chosen.iter().enumerate() {
        let two = candidate.union(b);
        if two == full {
            return false;
        }
        for &c in chosen.iter().skip(i) {
            if two.union(c) == full {
                return false;
            }
        }
    }
    true
}

/// Exactly the tangles of order k, in canonical maximal-member form.
///
/// Backtracking over the orientation of each complement pair of sets of
/// order below k, pruning additions that complete a T3 cover or hit a T4
/// forbidden side. A completed orientation is a tangle and the chosen sides
/// are its member family.
pub fn enumerate_tangles(system: &ConnectivitySystem, k: i32) -> Vec<Tangle> {
    if k < 1 {
        return Vec::new();
    }
    let full = system.full();
    let pairs = orientation_pairs(system, k);
    let forbidden: Vec<Subset> =
        (0..system.size()).map(|e| full.difference(Subset::singleton(e))).collect();
    let mut found: Vec<Vec<Subset>> = Vec::new();
    let mut chosen: Vec<Subset> = Vec::new();

    fn dfs(
        full: Subset,
        pairs: &[Subset],
        forbidden: &[Subset],
        chosen: &mut Vec<Subset>,
        depth: usize,
        found: &mut Vec<Vec<Subset>>,
    ) {
        if depth == pairs.len() {
            found.push(antichain(chosen));
            return;
        }
        let side = pairs[depth];
        for option in [side, full.difference(side)] {
            if admissible(full, forbidden, chosen, option) {
                chosen.push(option);
                dfs(full, pairs, forbidden, chosen, depth + 1, found);
                chosen.pop();
            }
            if option == full.difference(option) {
                break; // self-complementary pair, single option
            }
        }
    }

    dfs(full, &pairs, &forbidden, &mut chosen, 0, &mut found);
    let mut tangles: Vec<Tangle> = found
        .into_iter()
        .map(|maximal| Tangle::from_maximal_members(k, maximal))
        .collect();
    tangles.sort();
    tangles.dedup();
    tangles
}

/// Inclusion-maximal elements of a small set list.
fn antichain(sets: &[Subset]) -> Vec<Subset> {
    let mut out: Vec<Subset> = Vec::new();
    for (i, &s) in sets.iter().enumerate() {
        let dominated = sets
            .iter()
            .enumerate()
            .any(|(j, &t)| j != i && s.is_subset_of(t) && (t != s || j < i));
        if !dominated {
            out.push(s);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The truncation of a tangle to order j: members of order below j.
pub fn truncate(system: &ConnectivitySystem, tangle: &Tangle, j: i32) -> Tangle {
    assert!(j >= 1 && j <= tangle.order(), "truncation order must be in 1..=k");
    if j == tangle.order() {
        return tangle.clone();
    }
    let n = system.size();
    let mut in_family = vec![false; system.ground().subset_count()];
    let weak = tangle.weakness_table(system);
    for x in system.ground().subsets() {
        if system.lambda(x) < j && weak[x.bits() as usize] {
            in_family[x.bits() as usize] = true;
        }
    }
    Tangle::from_maximal_members(j, maximal_subsets(n, &in_family))
}

/// Whether one tangle is a truncation of the other (including equality).
pub fn is_truncation(system: &ConnectivitySystem, a: &Tangle, b: &Tangle) -> bool {
    if a.order() == b.order() {
        return a == b;
    }
    if a.order() < b.order() {
        truncate(system, b, a.order()) == *a
    } else {
        truncate(system, a, b.order()) == *b
    }
}

/// The tangles that are not truncations of any other tangle of the system.
///
/// Orders are scanned upward from 1. Tangle orders are downward closed (a
/// tangle of order k truncates to every order below), so the scan stops at
/// the first empty order; 1 + max lambda bounds the scan because beyond it
/// the axioms are unsatisfiable.
pub fn maximal_tangles(system: &ConnectivitySystem) -> Vec<Tangle> {
    let cap = 1 + system.max_lambda();
    let mut per_order: Vec<Vec<Tangle>> = Vec::new();
    let mut k = 1;
    while k <= cap {
        let tangles = enumerate_tangles(system, k);
        if tangles.is_empty() {
            break;
        }
        per_order.push(tangles);
        k += 1;
    }
    let mut out = Vec::new();
    for (idx, tangles) in per_order.iter().enumerate() {
        for t in tangles {
            let extended = per_order
                .get(idx + 1)
                .map(|next| next.iter().any(|t2| truncate(system, t2, t.order()) == *t))
                .unwrap_or(false);
            if !extended {
                out.push(t.clone());
            }
        }
    }
    out.sort();
    out
}

/// The minimum order over separations with one side in each tangle, and all
/// separations attaining it; sides are oriented with the first tangle's
/// member first.
pub fn distinguishing_separations(
    system: &ConnectivitySystem,
    t1: &Tangle,
    t2: &Tangle,
) -> Result<(i32, Vec<Separation>), TangleError> {
    if is_truncation(system, t1, t2) {
        return Err(TangleError::TruncationPair);
    }
    let weak1 = t1.weakness_table(system);
    let weak2 = t2.weakness_table(system);
    let mut best: Option<i32> = None;
    let mut seps: Vec<Separation> = Vec::new();
    for x in system.ground().subsets() {
        let co = system.complement(x);
        let order = system.lambda(x);
        let member1 = order < t1.order() && weak1[x.bits() as usize];
        let member2 = order < t2.order() && weak2[co.bits() as usize];
        if !(member1 && member2) {
            continue;
        }
        match best {
            Some(b) if order > b => {}
            Some(b) if order == b => seps.push(system.separation(x)),
            _ => {
                best = Some(order);
                seps = vec![system.separation(x)];
            }
        }
    }
    let order = best.expect("non-truncation tangles always have a distinguishing separation");
    seps.sort();
    Ok((order, seps))
}

/// Robustness: no eight members cover the ground set. Maximal members
/// suffice since replacing a member by a maximal superset only grows the
/// union. Depth-first search over the lowest uncovered element.
pub fn is_robust(system: &ConnectivitySystem, tangle: &Tangle) -> bool {
    let full = system.full();
    !cover_exists(tangle.maximal_members(), full, Subset::EMPTY, 8)
}

fn cover_exists(members: &[Subset], full: Subset, covered: Subset, depth: usize) -> bool {
    if covered == full {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let uncovered = full.difference(covered);
    let e = uncovered.elements().next().expect("uncovered is non-empty");
    members
        .iter()
        .filter(|m| m.contains(e))
        .any(|m| cover_exists(members, full, covered.union(*m), depth - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn labels(system: &ConnectivitySystem, names: &[&str]) -> Subset {
        system.ground().subset_from_labels(names).unwrap()
    }

    #[test]
    fn u24_order_three_tangle_is_the_four_singletons() {
        let sys = fixtures::u24();
        let tangles = enumerate_tangles(&sys, 3);
        assert_eq!(tangles.len(), 1);
        let expected: Vec<Subset> = (0..4).map(Subset::singleton).collect();
        assert_eq!(tangles[0].maximal_members(), expected.as_slice());
        assert!(is_tangle(&sys, 3, tangles[0].maximal_members()).passed());
    }

    #[test]
    fn u24_orders_two_and_beyond() {
        let sys = fixtures::u24();
        let k2 = enumerate_tangles(&sys, 2);
        assert_eq!(k2.len(), 1);
        assert_eq!(k2[0].maximal_members(), &[Subset::EMPTY]);
        assert!(enumerate_tangles(&sys, 4).is_empty());
        assert!(enumerate_tangles(&sys, 5).is_empty());
    }

    #[test]
    fn u24_candidate_with_triple_fails_t4() {
        let sys = fixtures::u24();
        let mut members: Vec<Subset> = (0..4).map(Subset::singleton).collect();
        members.push(labels(&sys, &["a", "b", "c"]));
        match is_tangle(&sys, 3, &members) {
            TangleVerdict::T4 { element } => assert_eq!(sys.ground().label(element), "d"),
            other => panic!("expected T4, got {other:?}"),
        }
    }

    #[test]
    fn everything_but_full_fails_loudly() {
        let sys = fixtures::free(3);
        // All proper subsets as members at a huge order.
        let members: Vec<Subset> = sys.ground().subsets().filter(|s| *s != sys.full()).collect();
        let verdict = is_tangle(&sys, 10, &members);
        assert!(matches!(verdict, TangleVerdict::T3 { .. } | TangleVerdict::T4 { .. }));
    }

    #[test]
    fn truncation_of_u24_tangle_is_the_empty_set_tangle() {
        let sys = fixtures::u24();
        let t3 = enumerate_tangles(&sys, 3).remove(0);
        let t2 = truncate(&sys, &t3, 2);
        assert_eq!(t2.maximal_members(), &[Subset::EMPTY]);
        assert!(is_tangle(&sys, 2, t2.maximal_members()).passed());
        assert_eq!(truncate(&sys, &t3, 3), t3);
    }

    #[test]
    fn truncation_composes() {
        let sys = fixtures::bridged_k4s();
        for t in maximal_tangles(&sys) {
            for j in 1..=t.order() {
                for i in 1..=j {
                    let via = truncate(&sys, &truncate(&sys, &t, j), i);
                    assert_eq!(via, truncate(&sys, &t, i));
                }
            }
        }
    }

    #[test]
    fn is_truncation_examples() {
        let sys = fixtures::u24();
        let t3 = enumerate_tangles(&sys, 3).remove(0);
        let t2 = enumerate_tangles(&sys, 2).remove(0);
        assert!(is_truncation(&sys, &t3, &t3));
        assert!(is_truncation(&sys, &t2, &t3));
        let bk = fixtures::bridged_k4s();
        let maximal = maximal_tangles(&bk);
        for i in 0..maximal.len() {
            for j in (i + 1)..maximal.len() {
                assert!(!is_truncation(&bk, &maximal[i], &maximal[j]));
            }
        }
    }

    #[test]
    fn u24_has_one_maximal_tangle() {
        let sys = fixtures::u24();
        let maximal = maximal_tangles(&sys);
        assert_eq!(maximal.len(), 1);
        assert_eq!(maximal[0].order(), 3);
    }

    #[test]
    fn bridged_k4s_has_three_maximal_tangles() {
        // The two order-3 tangles, one per K4, plus the order-2 tangle at
        // the bridge whose maximal members are the two K4 edge sets.
        let sys = fixtures::bridged_k4s();
        let maximal = maximal_tangles(&sys);
        assert_eq!(maximal.len(), 3);
        let orders: Vec<i32> = maximal.iter().map(|t| t.order()).collect();
        assert_eq!(orders, vec![2, 3, 3]);
        for t in &maximal {
            assert!(is_tangle(&sys, t.order(), t.maximal_members()).passed());
        }
        let k4a = labels(&sys, &["12", "13", "14", "23", "24", "34"]);
        let k4b = labels(&sys, &["56", "57", "58", "67", "68", "78"]);
        assert_eq!(maximal[0].maximal_members(), &[k4a, k4b]);
    }

    #[test]
    fn bridged_k4s_distinguishing_separations_have_order_one() {
        let sys = fixtures::bridged_k4s();
        let maximal = maximal_tangles(&sys);
        // The two order-3 tangles, one per K4.
        let (order, seps) = distinguishing_separations(&sys, &maximal[1], &maximal[2]).unwrap();
        assert_eq!(order, 1);
        // Both bridge placements appear.
        let k4a = labels(&sys, &["12", "13", "14", "23", "24", "34"]);
        let k4b = labels(&sys, &["56", "57", "58", "67", "68", "78"]);
        let bridge = labels(&sys, &["45"]);
        let partitions: Vec<Subset> = seps.iter().map(|s| s.canonical(&sys).side()).collect();
        assert!(partitions.contains(&sys.separation(k4a).canonical(&sys).side()));
        assert!(partitions.contains(&sys.separation(k4b.union(bridge)).canonical(&sys).side()));
        assert!(partitions.contains(&sys.separation(k4b).canonical(&sys).side()));
        // Swapping arguments flips every side.
        let (order2, seps2) = distinguishing_separations(&sys, &maximal[2], &maximal[1]).unwrap();
        assert_eq!(order, order2);
        let sides: Vec<Subset> = seps.iter().map(|s| s.side()).collect();
        let flipped: Vec<Subset> = seps2.iter().map(|s| sys.complement(s.side())).collect();
        for s in &sides {
            assert!(flipped.contains(s));
        }
    }

    #[test]
    fn distinguishing_rejects_truncation_pairs() {
        let sys = fixtures::u24();
        let t3 = enumerate_tangles(&sys, 3).remove(0);
        assert_eq!(
            distinguishing_separations(&sys, &t3, &t3).unwrap_err(),
            TangleError::TruncationPair
        );
    }

    #[test]
    fn u24_tangle_is_not_robust() {
        let sys = fixtures::u24();
        let t3 = enumerate_tangles(&sys, 3).remove(0);
        assert!(!is_robust(&sys, &t3)); // four singletons cover the ground set
    }

    #[test]
    fn tangle_avoiding_an_element_is_robust() {
        let sys = fixtures::cycle_system();
        for t in maximal_tangles(&sys) {
            // The cycle's maximal tangle has the empty set as its only member.
            assert_eq!(t.maximal_members(), &[Subset::EMPTY]);
            assert!(is_robust(&sys, &t));
        }
    }

    #[test]
    fn down_closure_holds_for_enumerated_tangles() {
        let sys = fixtures::u24();
        for k in 1..=3 {
            for t in enumerate_tangles(&sys, k) {
                let weak = t.weakness_table(&sys);
                for x in sys.ground().subsets() {
                    if sys.lambda(x) < k {
                        let member = weak[x.bits() as usize];
                        let co_member = weak[sys.complement(x).bits() as usize];
                        assert!(member ^ co_member, "exactly one side is a member");
                    }
                }
            }
        }
    }

    #[test]
    fn free_matroids_have_the_vacuous_order_one_tangle() {
        for n in 1..=6 {
            let sys = fixtures::free(n);
            let maximal = maximal_tangles(&sys);
            assert_eq!(maximal.len(), 1, "n={n}");
            assert_eq!(maximal[0].order(), 1);
            assert!(maximal[0].maximal_members().is_empty());
            assert!(is_robust(&sys, &maximal[0]));
        }
    }

    #[test]
    fn path_has_two_maximal_tangles() {
        let sys = fixtures::path_system();
        let maximal = maximal_tangles(&sys);
        assert_eq!(maximal.len(), 2);
        for t in &maximal {
            assert_eq!(t.order(), 2);
            assert!(is_robust(&sys, &t));
        }
    }
}
