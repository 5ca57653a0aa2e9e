//! Ground sets and their subsets, represented as bitmasks.

use std::fmt;

use thiserror::Error;

/// Hard cap on ground-set size: the dense table of order values has one entry
/// per subset, so 2^n integers must stay in memory.
pub const MAX_ELEMENTS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundSetError {
    #[error("ground set must have at least one element")]
    Empty,
    #[error("ground set has {0} elements, the supported maximum is {MAX_ELEMENTS}")]
    TooLarge(usize),
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid element label `{0}` (labels are non-empty and free of whitespace and `,;{{}}`)")]
    InvalidLabel(String),
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
}

/// An ordered list of distinct element names.
///
/// Subsets are bitmasks indexed against the label order, so two systems only
/// share subsets when they share a ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    labels: Vec<String>,
}

impl GroundSet {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self, GroundSetError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(GroundSetError::Empty);
        }
        if labels.len() > MAX_ELEMENTS {
            return Err(GroundSetError::TooLarge(labels.len()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.chars().any(|c| c.is_whitespace() || ",;{}".contains(c)) {
                return Err(GroundSetError::InvalidLabel(label.clone()));
            }
            if labels[..i].contains(label) {
                return Err(GroundSetError::DuplicateLabel(label.clone()));
            }
        }
        Ok(GroundSet { labels })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The subset containing every element.
    pub fn full(&self) -> Subset {
        Subset::from_bits(((1u64 << self.size()) - 1) as u32)
    }

    pub fn subset_count(&self) -> usize {
        1usize << self.size()
    }

    pub fn complement(&self, s: Subset) -> Subset {
        Subset::from_bits(self.full().bits() & !s.bits())
    }

    /// All subsets in increasing mask order.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> + use<> {
        (0..self.subset_count() as u32).map(Subset::from_bits)
    }

    pub fn subset_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Subset, GroundSetError> {
        let mut mask = 0u32;
        for label in labels {
            let idx = self
                .index_of(label.as_ref())
                .ok_or_else(|| GroundSetError::UnknownLabel(label.as_ref().to_string()))?;
            mask |= 1 << idx;
        }
        Ok(Subset::from_bits(mask))
    }

    /// Renders a subset as `{a,b}` with elements in ground-set order.
    pub fn display(&self, s: Subset) -> String {
        let names: Vec<&str> = s.elements().map(|i| self.label(i)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A subset of a fixed ground set, stored as an n-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub fn singleton(index: usize) -> Self {
        Subset(1 << index)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn with(self, index: usize) -> Subset {
        Subset(self.0 | (1 << index))
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    /// Indices of the elements in the subset, ascending.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All submasks of `self` in increasing mask order, including the empty
    /// set and `self` itself (carry-rippler enumeration).
    pub fn submasks(self) -> impl Iterator<Item = Subset> {
        let set = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == set { None } else { Some(cur.wrapping_sub(set) & set) };
            Some(Subset(cur))
        })
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}", self.0)
    }
}

/// Inclusion-maximal subsets of a family given as a membership bitmap over
/// all 2^n masks. Runs in O(2^n * n) by propagating "has a strict superset in
/// the family" downward from large sets to small.
pub fn maximal_subsets(n: usize, in_family: &[bool]) -> Vec<Subset> {
    assert_eq!(in_family.len(), 1 << n);
    let full = (1u32 << n) - 1;
    let mut dominated = vec![false; in_family.len()];
    // Visit masks in decreasing popcount order so supersets are done first.
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0..=full {
        by_size[mask.count_ones() as usize].push(mask);
    }
    for size in (0..n).rev() {
        for &mask in &by_size[size] {
            let mut rest = full & !mask;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest &= rest - 1;
                let sup = (mask | bit) as usize;
                if in_family[sup] || dominated[sup] {
                    dominated[mask as usize] = true;
                    break;
                }
            }
        }
    }
    (0..=full)
        .filter(|&m| in_family[m as usize] && !dominated[m as usize])
        .map(Subset::from_bits)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_set_rejects_bad_input() {
        assert_eq!(GroundSet::new(Vec::<String>::new()).unwrap_err(), GroundSetError::Empty);
        let too_many: Vec<String> = (0..21).map(|i| format!("e{i}")).collect();
        assert!(matches!(GroundSet::new(too_many), Err(GroundSetError::TooLarge(21))));
        assert!(matches!(
            GroundSet::new(vec!["a", "a"]),
            Err(GroundSetError::DuplicateLabel(_))
        ));
        assert!(matches!(
            GroundSet::new(vec!["a b"]),
            Err(GroundSetError::InvalidLabel(_))
        ));
    }

    #[test]
    fn complement_is_an_involution() {
        let g = GroundSet::new(vec!["a", "b", "c"]).unwrap();
        for s in g.subsets() {
            assert_eq!(g.complement(g.complement(s)), s);
        }
    }

    #[test]
    fn submask_enumeration_matches_filter() {
        let s = Subset::from_bits(0b10110);
        let listed: Vec<u32> = s.submasks().map(|m| m.bits()).collect();
        let expected: Vec<u32> = (0..32).filter(|m| m & !s.bits() == 0).collect();
        assert_eq!(listed, expected);
    }

    #[test]
    fn maximal_subsets_picks_the_antichain() {
        // Family: all subsets of {a,b} plus {c}.
        let n = 3;
        let mut bitmap = vec![false; 1 << n];
        for m in 0..4 {
            bitmap[m] = true;
        }
        bitmap[0b100] = true;
        let maximal = maximal_subsets(n, &bitmap);
        assert_eq!(maximal, vec![Subset::from_bits(0b011), Subset::from_bits(0b100)]);
    }

    #[test]
    fn display_orders_elements() {
        let g = GroundSet::new(vec!["a", "b", "c"]).unwrap();
        assert_eq!(g.display(Subset::from_bits(0b101)), "{a,c}");
        assert_eq!(g.display(Subset::EMPTY), "{}");
    }
}
