//! Connectivity systems: a ground set together with an integer-valued,
//! symmetric, submodular set function, tabulated densely over all subsets.

use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ground::{GroundSet, GroundSetError, Subset};

/// Exhaustive submodularity checking covers all pairs up to this ground-set
/// size; larger systems fall back to seeded random sampling.
const EXHAUSTIVE_PAIR_LIMIT: usize = 12;
const SAMPLED_PAIRS: u64 = 1_000_000;

/// Outcome of checking the two defining axioms of a connectivity function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomCheck {
    Pass,
    /// lambda(x) != lambda(complement of x).
    SymmetryViolation { x: Subset, value: i32, complement_value: i32 },
    /// lambda(x) + lambda(y) < lambda(x | y) + lambda(x & y).
    SubmodularityViolation { x: Subset, y: Subset, sum: i32, union_intersection_sum: i32 },
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomCheck::Pass)
    }

    pub fn describe(&self, ground: &GroundSet) -> String {
        match self {
            AxiomCheck::Pass => "pass".to_string(),
            AxiomCheck::SymmetryViolation { x, value, complement_value } => format!(
                "symmetry violated at {}: lambda={} but lambda of complement {} is {}",
                ground.display(*x),
                value,
                ground.display(ground.complement(*x)),
                complement_value
            ),
            AxiomCheck::SubmodularityViolation { x, y, sum, union_intersection_sum } => format!(
                "submodularity violated at {} and {}: {} < {}",
                ground.display(*x),
                ground.display(*y),
                sum,
                union_intersection_sum
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Ground(#[from] GroundSetError),
    #[error("order table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("{0}")]
    Axiom(String),
}

/// Checks symmetry exhaustively and submodularity exhaustively up to
/// [`EXHAUSTIVE_PAIR_LIMIT`] elements, by seeded sampling above that.
pub fn verify_lambda_table(n: usize, table: &[i32]) -> AxiomCheck {
    assert_eq!(table.len(), 1 << n);
    let full = ((1u64 << n) - 1) as u32;
    for x in 0..=full {
        let cx = full & !x;
        if table[x as usize] != table[cx as usize] {
            return AxiomCheck::SymmetryViolation {
                x: Subset::from_bits(x),
                value: table[x as usize],
                complement_value: table[cx as usize],
            };
        }
    }
    let check_pair = |x: u32, y: u32| -> Option<AxiomCheck> {
        let sum = table[x as usize] + table[y as usize];
        let other = table[(x | y) as usize] + table[(x & y) as usize];
        if sum < other {
            Some(AxiomCheck::SubmodularityViolation {
                x: Subset::from_bits(x),
                y: Subset::from_bits(y),
                sum,
                union_intersection_sum: other,
            })
        } else {
            None
        }
    };
    if n <= EXHAUSTIVE_PAIR_LIMIT {
        for x in 0..=full {
            for y in x..=full {
                if let Some(v) = check_pair(x, y) {
                    return v;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a6e_6c65);
        for _ in 0..SAMPLED_PAIRS {
            let x = rng.random_range(0..=full);
            let y = rng.random_range(0..=full);
            if let Some(v) = check_pair(x, y) {
                return v;
            }
        }
    }
    AxiomCheck::Pass
}

/// A ground set with a verified connectivity function.
///
/// The order of every subset is precomputed into a dense table of 2^n
/// integers, giving O(1) evaluation for the enumeration-heavy callers.
/// Construction re-verifies the axioms, so a stored system is always valid.
/// Orders are signed; nothing here assumes lambda is non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivitySystem {
    ground: GroundSet,
    table: Vec<i32>,
}

impl ConnectivitySystem {
    pub fn from_table(ground: GroundSet, table: Vec<i32>) -> Result<Self, SystemError> {
        if table.len() != ground.subset_count() {
            return Err(SystemError::TableSize {
                expected: ground.subset_count(),
                got: table.len(),
            });
        }
        let check = verify_lambda_table(ground.size(), &table);
        if !check.passed() {
            return Err(SystemError::Axiom(check.describe(&ground)));
        }
        Ok(ConnectivitySystem { ground, table })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn size(&self) -> usize {
        self.ground.size()
    }

    pub fn full(&self) -> Subset {
        self.ground.full()
    }

    pub fn complement(&self, x: Subset) -> Subset {
        self.ground.complement(x)
    }

    /// The tabulated order of a subset.
    pub fn lambda(&self, x: Subset) -> i32 {
        self.table[x.bits() as usize]
    }

    pub fn table(&self) -> &[i32] {
        &self.table
    }

    pub fn is_k_separating(&self, x: Subset, k: i32) -> bool {
        self.lambda(x) <= k
    }

    pub fn separation(&self, side: Subset) -> Separation {
        Separation { side, order: self.lambda(side) }
    }

    pub fn max_lambda(&self) -> i32 {
        *self.table.iter().max().expect("table is non-empty")
    }

    /// Re-runs the axiom check; passes by construction.
    pub fn verify(&self) -> AxiomCheck {
        verify_lambda_table(self.ground.size(), &self.table)
    }

    pub fn display(&self, x: Subset) -> String {
        self.ground.display(x)
    }
}

/// An ordered partition (side, complement) with the cached order of its side.
///
/// Orientation is meaningful to callers (e.g. which tangle owns which side),
/// so equality is by oriented side; use [`Separation::same_partition`] to
/// compare as unordered partitions. For set-membership purposes a separation
/// is canonicalized by the numerically smaller of its two side masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Separation {
    side: Subset,
    order: i32,
}

impl Separation {
    pub fn side(&self) -> Subset {
        self.side
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn other_side(&self, system: &ConnectivitySystem) -> Subset {
        system.complement(self.side)
    }

    pub fn flipped(&self, system: &ConnectivitySystem) -> Separation {
        Separation { side: system.complement(self.side), order: self.order }
    }

    /// The representative with the smaller side mask.
    pub fn canonical(&self, system: &ConnectivitySystem) -> Separation {
        let other = system.complement(self.side);
        if other.bits() < self.side.bits() {
            Separation { side: other, order: self.order }
        } else {
            *self
        }
    }

    pub fn same_partition(&self, other: &Separation, system: &ConnectivitySystem) -> bool {
        self.side == other.side || self.side == system.complement(other.side)
    }

    pub fn describe(&self, system: &ConnectivitySystem) -> String {
        format!(
            "{}|{} order {}",
            system.display(self.side),
            system.display(self.other_side(system)),
            self.order
        )
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, order {})", self.side, self.order)
    }
}

/// Whether two subsets cross relative to a full set: all four corner
/// intersections of the induced partitions are non-empty.
pub fn crosses_sets(full: Subset, x: Subset, y: Subset) -> bool {
    !x.intersection(y).is_empty()
        && !x.difference(y).is_empty()
        && !y.difference(x).is_empty()
        && !full.difference(x.union(y)).is_empty()
}

/// Whether two separations cross: all four corner intersections non-empty.
pub fn crosses(system: &ConnectivitySystem, a: &Separation, c: &Separation) -> bool {
    crosses_sets(system.full(), a.side(), c.side())
}
