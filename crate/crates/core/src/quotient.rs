//! Quotient systems: collapse each part of a partition to a single fresh
//! element, preserving the order of every subset under lifting. Carries the
//! induced tangle, induced and lifted separations, bag partitions, and the
//! uncrossing loop that moves a separation off the bags of a partition.

use thiserror::Error;

use crate::ground::{maximal_subsets, GroundSet, Subset};
use crate::separations::{SeparationContext, SeparationError};
use crate::system::{ConnectivitySystem, Separation, SystemError};
use crate::tangle::{is_robust, is_tangle, Tangle};

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("part {0} is not a member of the tangle")]
    PartNotInTangle(String),
    #[error("tangle is not robust")]
    NotRobust,
    #[error("induced family fails the tangle axioms: {0}")]
    InducedNotTangle(String),
    #[error("separation {0} crosses part {1}")]
    CrossesPart(String, String),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("bag partition condition violated: {0}")]
    BadBagPartition(String),
    #[error("neither side meets the bag inequality for {0}; bag partition corrupted")]
    NoAbsorbingSide(String),
    #[error("uncrossing produced an inequivalent separation {0}")]
    UncrossInequivalent(String),
    #[error("lemma check failed: {0}")]
    LemmaViolation(String),
}

/// A source system, a partition of some subset of it, and the verified
/// quotient system in which each part is a single fresh element.
///
/// Kept source elements keep their labels; the part collapsed from
/// `X_i = {c, d}` becomes `i#c+d`. The map retains everything needed to lift
/// target subsets back to the source without external context.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: ConnectivitySystem,
    parts: Vec<Subset>,
    /// Source indices of elements kept as themselves, ascending; target
    /// element i is kept[i] for i < kept.len(), otherwise part i - kept.len().
    kept: Vec<usize>,
    target: ConnectivitySystem,
}

impl QuotientMap {
    pub fn source(&self) -> &ConnectivitySystem {
        &self.source
    }

    pub fn target(&self) -> &ConnectivitySystem {
        &self.target
    }

    pub fn parts(&self) -> &[Subset] {
        &self.parts
    }

    /// Source subset collapsed by the partition.
    pub fn collapsed(&self) -> Subset {
        self.parts.iter().fold(Subset::EMPTY, |acc, p| acc.union(*p))
    }

    /// Target element index of the fresh element for part `i`.
    pub fn part_element(&self, i: usize) -> usize {
        self.kept.len() + i
    }

    /// Replaces each fresh element by its part and each kept element by
    /// itself.
    pub fn lift_mask(&self, target_mask: Subset) -> Subset {
        let mut out = Subset::EMPTY;
        for (i, &src) in self.kept.iter().enumerate() {
            if target_mask.contains(i) {
                out = out.union(Subset::singleton(src));
            }
        }
        for (i, part) in self.parts.iter().enumerate() {
            if target_mask.contains(self.kept.len() + i) {
                out = out.union(*part);
            }
        }
        out
    }

    /// The target subset whose lift is `source_mask`; errors if the mask
    /// crosses a part.
    pub fn induce_mask(&self, source_mask: Subset) -> Result<Subset, QuotientError> {
        let mut out = Subset::EMPTY;
        for (i, &src) in self.kept.iter().enumerate() {
            if source_mask.contains(src) {
                out = out.union(Subset::singleton(i));
            }
        }
        for (i, part) in self.parts.iter().enumerate() {
            if part.is_subset_of(source_mask) {
                out = out.union(Subset::singleton(self.kept.len() + i));
            } else if part.intersects(source_mask) {
                return Err(QuotientError::CrossesPart(
                    self.source.display(source_mask),
                    self.source.display(*part),
                ));
            }
        }
        Ok(out)
    }

    pub fn lift_separation(&self, sep: &Separation) -> Separation {
        self.source.separation(self.lift_mask(sep.side()))
    }

    pub fn induce_separation(&self, sep: &Separation) -> Result<Separation, QuotientError> {
        Ok(self.target.separation(self.induce_mask(sep.side())?))
    }
}

/// Builds the quotient by a partition `parts` of some subset of the ground
/// set. The target's order table is defined by lifting, and the resulting
/// system is re-verified against the connectivity axioms.
pub fn quotient(
    system: &ConnectivitySystem,
    parts: &[Subset],
) -> Result<QuotientMap, QuotientError> {
    let mut union = Subset::EMPTY;
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            return Err(QuotientError::MalformedPartition(format!("part {} is empty", i + 1)));
        }
        if p.intersects(union) {
            return Err(QuotientError::MalformedPartition(format!(
                "part {} overlaps an earlier part",
                i + 1
            )));
        }
        union = union.union(*p);
    }
    let kept: Vec<usize> = (0..system.size()).filter(|e| !union.contains(*e)).collect();
    let mut labels: Vec<String> =
        kept.iter().map(|&e| system.ground().label(e).to_string()).collect();
    for (i, p) in parts.iter().enumerate() {
        let joined: Vec<&str> = p.elements().map(|e| system.ground().label(e)).collect();
        labels.push(format!("{}#{}", i + 1, joined.join("+")));
    }
    let ground = GroundSet::new(labels).map_err(SystemError::Ground)?;
    let lift = |mask: u32| -> Subset {
        let mut out = Subset::EMPTY;
        for (i, &src) in kept.iter().enumerate() {
            if mask & (1 << i) != 0 {
                out = out.union(Subset::singleton(src));
            }
        }
        for (i, part) in parts.iter().enumerate() {
            if mask & (1 << (kept.len() + i)) != 0 {
                out = out.union(*part);
            }
        }
        out
    };
    let table: Vec<i32> =
        (0..ground.subset_count() as u32).map(|m| system.lambda(lift(m))).collect();
    let target = ConnectivitySystem::from_table(ground, table)?;
    Ok(QuotientMap { source: system.clone(), parts: parts.to_vec(), kept, target })
}

/// The tangle of the quotient induced by membership of lifts: a target set
/// is a member exactly when its lift is. Requires every part to be a member
/// and the tangle to be robust; the result is re-verified to be a robust
/// tangle of the same order.
pub fn induce_tangle(tangle: &Tangle, qm: &QuotientMap) -> Result<Tangle, QuotientError> {
    for p in qm.parts() {
        if !tangle.is_member(qm.source(), *p) {
            return Err(QuotientError::PartNotInTangle(qm.source().display(*p)));
        }
    }
    if !is_robust(qm.source(), tangle) {
        return Err(QuotientError::NotRobust);
    }
    let target = qm.target();
    let k = tangle.order();
    let mut in_family = vec![false; target.ground().subset_count()];
    let weak = tangle.weakness_table(qm.source());
    for s in target.ground().subsets() {
        let lift = qm.lift_mask(s);
        if target.lambda(s) < k && weak[lift.bits() as usize] {
            in_family[s.bits() as usize] = true;
        }
    }
    let induced = Tangle::from_maximal_members(k, maximal_subsets(target.size(), &in_family));
    let verdict = is_tangle(target, k, induced.maximal_members());
    if !verdict.passed() {
        return Err(QuotientError::InducedNotTangle(verdict.describe(target)));
    }
    if !is_robust(target, &induced) {
        return Err(QuotientError::InducedNotTangle("induced tangle is not robust".into()));
    }
    Ok(induced)
}

/// An ordered partition of a base set into tangle members none of which can
/// be split into two strictly smaller-order pieces.
#[derive(Debug, Clone)]
pub struct BagPartition {
    pub base: Subset,
    pub parts: Vec<Subset>,
}

/// Checks both defining conditions exhaustively: each part is a member, and
/// every two-way split of a part keeps one side at the part's order or
/// above.
pub fn verify_bag_partition(
    system: &ConnectivitySystem,
    tangle: &Tangle,
    parts: &[Subset],
) -> Result<BagPartition, QuotientError> {
    let mut base = Subset::EMPTY;
    for p in parts {
        if p.intersects(base) {
            return Err(QuotientError::MalformedPartition("parts overlap".into()));
        }
        base = base.union(*p);
        if !tangle.is_member(system, *p) {
            return Err(QuotientError::PartNotInTangle(system.display(*p)));
        }
        let order = system.lambda(*p);
        for x in p.submasks() {
            let y = p.difference(x);
            if system.lambda(x) < order && system.lambda(y) < order {
                return Err(QuotientError::BadBagPartition(format!(
                    "part {} splits into {} and {} of smaller order",
                    system.display(*p),
                    system.display(x),
                    system.display(y)
                )));
            }
        }
    }
    Ok(BagPartition { base, parts: parts.to_vec() })
}

/// Moves a non-sequential separation off the bags: while some part is
/// crossed, the side whose intersection with the part has order at least the
/// part's order absorbs it. Each iteration settles one part for good, so the
/// loop runs at most once per part. The result crosses no part and is
/// verified equivalent to the input.
pub fn uncross_to_bags(
    ctx: &SeparationContext<'_>,
    bags: &BagPartition,
    sep: &Separation,
) -> Result<Separation, QuotientError> {
    let system = ctx.system();
    if ctx.is_sequential(sep)? {
        return Err(QuotientError::LemmaViolation(format!(
            "uncrossing requires a non-sequential separation, got {}",
            sep.describe(system)
        )));
    }
    let mut side = sep.side();
    for part in &bags.parts {
        let other = system.complement(side);
        if part.intersects(side) && part.intersects(other) {
            let order = system.lambda(*part);
            if system.lambda(side.intersection(*part)) >= order {
                side = side.union(*part);
            } else if system.lambda(other.intersection(*part)) >= order {
                side = side.difference(*part);
            } else {
                return Err(QuotientError::NoAbsorbingSide(system.display(*part)));
            }
        }
    }
    let result = system.separation(side);
    if !ctx.are_equivalent(sep, &result)? {
        return Err(QuotientError::UncrossInequivalent(result.describe(system)));
    }
    Ok(result)
}

/// Checks that a non-sequential, non-crossing separation induces a
/// non-sequential separation of the quotient.
pub fn induced_nonsequential(
    src: &SeparationContext<'_>,
    qm: &QuotientMap,
    tgt: &SeparationContext<'_>,
    sep: &Separation,
) -> Result<(), QuotientError> {
    if src.is_sequential(sep)? {
        return Err(QuotientError::LemmaViolation(format!(
            "precondition: {} is sequential in the source",
            sep.describe(src.system())
        )));
    }
    let induced = qm.induce_separation(sep)?;
    if tgt.is_sequential(&induced)? {
        return Err(QuotientError::LemmaViolation(format!(
            "induced separation {} is sequential in the quotient",
            induced.describe(tgt.system())
        )));
    }
    Ok(())
}

/// Checks that equivalence transfers back from the quotient: if a target
/// separation is equivalent to the induced image of `sep`, then its lift is
/// equivalent to `sep`.
pub fn equivalence_transfer(
    src: &SeparationContext<'_>,
    qm: &QuotientMap,
    tgt: &SeparationContext<'_>,
    sep: &Separation,
    target_sep: &Separation,
) -> Result<(), QuotientError> {
    let induced = qm.induce_separation(sep)?;
    if !tgt.are_equivalent(&induced, target_sep)? {
        return Err(QuotientError::LemmaViolation(format!(
            "precondition: {} is not equivalent to the induced image",
            target_sep.describe(tgt.system())
        )));
    }
    let lifted = qm.lift_separation(target_sep);
    if !src.are_equivalent(sep, &lifted)? {
        return Err(QuotientError::LemmaViolation(format!(
            "lift {} is not equivalent to {}",
            lifted.describe(src.system()),
            sep.describe(src.system())
        )));
    }
    Ok(())
}
